//! Exact path construction for a given interaction sequence.

use crate::scene::{EdgeId, FaceId, Scene};
use crate::Point3;

use super::path::{Interaction, PropagationPath};

/// Containment slack for refined interaction points (meters).
const FACE_TOL: f64 = 1e-9;
/// Minimum distance of an image or endpoint in front of a reflecting face.
const FRONT_EPS: f64 = 1e-9;

/// Specular path `src → faces… → dst` by the image method, or `None` when
/// the geometry is invalid or any segment is occluded.
///
/// `src_ignore` / `dst_ignore` list faces touching the endpoints (used when an
/// endpoint lies on a diffracting edge).
pub fn solve_reflections(
    scene: &Scene,
    src: Point3,
    dst: Point3,
    faces: &[FaceId],
    src_ignore: &[FaceId],
    dst_ignore: &[FaceId],
) -> Option<Vec<Point3>> {
    let k = faces.len();
    let mut images = Vec::with_capacity(k + 1);
    images.push(src);
    for &f in faces {
        let plane = &scene.face(f).plane;
        let cur = images[images.len() - 1];
        if plane.signed_distance(cur) <= FRONT_EPS {
            return None;
        }
        images.push(plane.mirror(cur));
    }
    let mut points = vec![Point3::zero(); k];
    let mut target = dst;
    for i in (0..k).rev() {
        let face = scene.face(faces[i]);
        let sd_t = face.plane.signed_distance(target);
        if sd_t <= FRONT_EPS {
            return None;
        }
        let img = images[i + 1];
        let sd_i = face.plane.signed_distance(img);
        let t = sd_t / (sd_t - sd_i);
        let p = target + (img - target) * t;
        if !face.contains(p, FACE_TOL) {
            return None;
        }
        points[i] = p;
        target = p;
    }
    let mut vertices = Vec::with_capacity(k + 2);
    vertices.push(src);
    vertices.extend(points);
    vertices.push(dst);
    for j in 0..=k {
        let mut ignore: Vec<FaceId> = Vec::with_capacity(4);
        if j == 0 {
            ignore.extend_from_slice(src_ignore);
        } else {
            ignore.push(faces[j - 1]);
        }
        if j == k {
            ignore.extend_from_slice(dst_ignore);
        } else {
            ignore.push(faces[j]);
        }
        let (a, b) = (vertices[j], vertices[j + 1]);
        if a.distance(b) < FRONT_EPS || scene.segment_blocked(a, b, &ignore) {
            return None;
        }
    }
    Some(vertices)
}

/// Reflection-only path for a face sequence.
pub fn solve_sequence(
    scene: &Scene,
    src: Point3,
    dst: Point3,
    faces: &[FaceId],
) -> Option<PropagationPath> {
    let vertices = solve_reflections(scene, src, dst, faces, &[], &[])?;
    let interactions = faces.iter().map(|&f| Interaction::Reflection(f)).collect();
    Some(PropagationPath::new(vertices, interactions))
}

/// Point on `edge` satisfying the Keller cone condition between the
/// (already mirrored) source and destination images.
pub fn keller_point(scene: &Scene, edge: EdgeId, src_img: Point3, dst_img: Point3) -> Option<Point3> {
    let e = scene.edge(edge);
    let dir = e.direction();
    let len = e.length();
    let f = |t: f64| {
        let p = e.start + dir * t;
        let a = p - src_img;
        let b = dst_img - p;
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        dir.dot(a) / na - dir.dot(b) / nb
    };
    let (mut lo, mut hi) = (0.0, len);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo > 0.0 || f_hi < 0.0 {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * len.max(1.0) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    // keep clear of the edge end points where the wedge model breaks down
    if t <= 1e-9 || t >= len - 1e-9 {
        return None;
    }
    Some(e.start + dir * t)
}

/// Path `src → before… → edge → after… → dst` with a single diffraction.
pub fn solve_diffraction(
    scene: &Scene,
    src: Point3,
    dst: Point3,
    before: &[FaceId],
    edge: EdgeId,
    after: &[FaceId],
) -> Option<PropagationPath> {
    let e = scene.edge(edge);
    let wedge = [e.face0, e.face_n];
    if before.last().is_some_and(|f| wedge.contains(f)) || after.first().is_some_and(|f| wedge.contains(f)) {
        return None;
    }
    let mut s_img = src;
    for &f in before {
        let plane = &scene.face(f).plane;
        if plane.signed_distance(s_img) <= FRONT_EPS {
            return None;
        }
        s_img = plane.mirror(s_img);
    }
    let mut d_img = dst;
    for &f in after.iter().rev() {
        let plane = &scene.face(f).plane;
        if plane.signed_distance(d_img) <= FRONT_EPS {
            return None;
        }
        d_img = plane.mirror(d_img);
    }
    let p = keller_point(scene, edge, s_img, d_img)?;
    // both rays must lie outside the wedge
    let n_pi = e.exterior_n * std::f64::consts::PI;
    let inside = |v: Point3| {
        let a = e.angle_of(v);
        a <= 1e-9 || a >= n_pi - 1e-9
    };
    if inside(s_img - p) || inside(d_img - p) {
        return None;
    }
    let first = solve_reflections(scene, src, p, before, &[], &wedge)?;
    let second = solve_reflections(scene, p, dst, after, &wedge, &[])?;
    let mut vertices = first;
    vertices.extend_from_slice(&second[1..]);
    let mut interactions: Vec<Interaction> =
        before.iter().map(|&f| Interaction::Reflection(f)).collect();
    interactions.push(Interaction::Diffraction(edge));
    interactions.extend(after.iter().map(|&f| Interaction::Reflection(f)));
    Some(PropagationPath::new(vertices, interactions))
}
