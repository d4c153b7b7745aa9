//! Static propagation environment: a flat ground plane plus extruded-polygon
//! buildings whose walls and roofs carry ITU materials.
//!
//! Local coordinates are east/north/up meters. Footprints are normalized to
//! counter-clockwise order on load so every wall normal points out of its
//! building. A scene is immutable once built.

mod file;
pub mod geo;
pub mod material;

use std::fmt;

pub use file::{
    bundled_scene_names, bundled_scene_text, default_materials, load_scene, BuildingSpec, GroundSpec, MaterialSpec,
    SceneFile, SCENE_SCHEMA_VERSION,
};
pub use geo::{geo_to_local, GeoAnchor, METERS_PER_DEGREE};
pub use material::{itu_permittivity, Material};

use crate::error::{Error, Result};
use crate::geometry::{is_simple_polygon, point_in_polygon, signed_area2, Aabb, Plane};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl FaceId {
    pub const GROUND: FaceId = FaceId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceShape {
    Ground,
    /// Vertical rectangle above the footprint edge `a → b`.
    Wall { a: [f64; 2], b: [f64; 2], height: f64 },
    Roof { footprint: Vec<[f64; 2]>, height: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: FaceId,
    pub name: String,
    pub building: Option<usize>,
    pub shape: FaceShape,
    /// Plane with the outward normal.
    pub plane: Plane,
    pub material: usize,
}

impl Face {
    #[inline]
    pub fn normal(&self) -> Point3 {
        self.plane.normal
    }

    /// Whether a point already on the face plane lies inside the face
    /// (boundary included, up to `tol` meters).
    pub fn contains(&self, p: Point3, tol: f64) -> bool {
        match &self.shape {
            FaceShape::Ground => true,
            FaceShape::Wall { a, b, height } => {
                if p.z < -tol || p.z > height + tol {
                    return false;
                }
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = (dx * dx + dy * dy).sqrt();
                let u = ((p.x - a[0]) * dx + (p.y - a[1]) * dy) / len;
                u >= -tol && u <= len + tol
            }
            FaceShape::Roof { footprint, .. } => point_in_polygon([p.x, p.y], footprint),
        }
    }

    /// Centroid of the face (ground: origin).
    pub fn centroid(&self) -> Point3 {
        match &self.shape {
            FaceShape::Ground => Point3::zero(),
            FaceShape::Wall { a, b, height } => Point3::new(
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * height,
            ),
            FaceShape::Roof { footprint, height } => {
                let n = footprint.len() as f64;
                let (sx, sy) = footprint
                    .iter()
                    .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
                Point3::new(sx / n, sy / n, *height)
            }
        }
    }
}

/// Convex wedge edge usable for diffraction.
///
/// Angles around the edge are measured from face 0 (direction `t0` away from
/// the edge) towards its outward normal `n0`, through free space; face n sits
/// at `exterior_n · π`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub name: String,
    pub building: usize,
    pub start: Point3,
    pub end: Point3,
    pub face0: FaceId,
    pub face_n: FaceId,
    pub t0: Point3,
    pub n0: Point3,
    pub exterior_n: f64,
}

impl Edge {
    pub fn direction(&self) -> Point3 {
        (self.end - self.start).normalize()
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    /// Angle of `v` (pointing away from the edge) around the edge, in `[0, 2π)`.
    pub fn angle_of(&self, v: Point3) -> f64 {
        let e = self.direction();
        let v_perp = v - e * v.dot(e);
        let a = v_perp.dot(self.n0).atan2(v_perp.dot(self.t0));
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub name: String,
    /// Counter-clockwise footprint.
    pub footprint: Vec<[f64; 2]>,
    pub height: f64,
    pub material: usize,
    pub aabb: Aabb,
    pub faces: std::ops::Range<usize>,
}

impl Building {
    pub fn contains(&self, p: Point3) -> bool {
        p.z > 0.0 && p.z < self.height && point_in_polygon([p.x, p.y], &self.footprint)
    }

    /// Centroid of the solid (footprint vertex mean at half height).
    pub fn centroid(&self) -> Point3 {
        let n = self.footprint.len() as f64;
        let (sx, sy) = self
            .footprint
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        Point3::new(sx / n, sy / n, 0.5 * self.height)
    }
}

/// Ray/face intersection result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub face: FaceId,
}

/// Building input before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrudedPolygon {
    pub name: Option<String>,
    pub footprint: Vec<[f64; 2]>,
    pub height: f64,
    pub material: String,
}

#[derive(Clone, PartialEq)]
pub struct Scene {
    anchor: Option<GeoAnchor>,
    materials: Vec<Material>,
    ground_material: usize,
    buildings: Vec<Building>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
}

impl fmt::Debug for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scene")
            .field("anchor", &self.anchor)
            .field("materials", &self.materials.len())
            .field("buildings", &self.buildings.len())
            .field("faces", &self.faces.len())
            .field("edges", &self.edges.len())
            .finish()
    }
}

const DUPLICATE_VERTEX_TOL: f64 = 1e-9;
/// Turn angle below which a footprint vertex is treated as straight (no wedge).
const MIN_WEDGE_TURN: f64 = 1e-6;

impl Scene {
    /// Builds a scene from validated materials and raw building specs.
    pub fn new(
        anchor: Option<GeoAnchor>,
        materials: Vec<Material>,
        ground_material: &str,
        buildings: Vec<ExtrudedPolygon>,
    ) -> Result<Self> {
        if let Some(a) = anchor {
            a.validate()?;
        }
        for m in &materials {
            m.validate()?;
        }
        let find = |name: &str| {
            materials
                .iter()
                .position(|m| m.name == name)
                .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
        };
        let ground_idx = find(ground_material)?;

        let mut faces = vec![Face {
            id: FaceId::GROUND,
            name: "ground".into(),
            building: None,
            shape: FaceShape::Ground,
            plane: Plane::from_point_normal(Point3::zero(), Point3::unit_z()),
            material: ground_idx,
        }];
        let mut edges = Vec::new();
        let mut built = Vec::with_capacity(buildings.len());

        for (bi, spec) in buildings.into_iter().enumerate() {
            let name = spec.name.clone().unwrap_or_else(|| format!("bldg{bi}"));
            let material = find(&spec.material)?;
            let footprint = validate_footprint(&name, spec.footprint, spec.height)?;
            let h = spec.height;
            let n = footprint.len();
            let face_start = faces.len();
            for k in 0..n {
                let a = footprint[k];
                let b = footprint[(k + 1) % n];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = (dx * dx + dy * dy).sqrt();
                let normal = Point3::new(dy / len, -dx / len, 0.0);
                faces.push(Face {
                    id: FaceId(faces.len() as u32),
                    name: format!("{name}.wall{k}"),
                    building: Some(bi),
                    shape: FaceShape::Wall { a, b, height: h },
                    plane: Plane::from_point_normal(Point3::new(a[0], a[1], 0.0), normal),
                    material,
                });
            }
            let roof_id = FaceId(faces.len() as u32);
            faces.push(Face {
                id: roof_id,
                name: format!("{name}.roof"),
                building: Some(bi),
                shape: FaceShape::Roof {
                    footprint: footprint.clone(),
                    height: h,
                },
                plane: Plane::from_point_normal(Point3::new(0.0, 0.0, h), Point3::unit_z()),
                material,
            });
            let wall_id = |k: usize| FaceId((face_start + k) as u32);

            for k in 0..n {
                let prev = footprint[(k + n - 1) % n];
                let cur = footprint[k];
                let next = footprint[(k + 1) % n];
                let din = [cur[0] - prev[0], cur[1] - prev[1]];
                let dout = [next[0] - cur[0], next[1] - cur[1]];
                let turn = (din[0] * dout[1] - din[1] * dout[0])
                    .atan2(din[0] * dout[0] + din[1] * dout[1]);
                if turn > MIN_WEDGE_TURN {
                    let t0 = Point3::new(dout[0], dout[1], 0.0).normalize();
                    edges.push(Edge {
                        id: EdgeId(edges.len() as u32),
                        name: format!("{name}.vedge{k}"),
                        building: bi,
                        start: Point3::new(cur[0], cur[1], 0.0),
                        end: Point3::new(cur[0], cur[1], h),
                        face0: wall_id(k),
                        face_n: wall_id((k + n - 1) % n),
                        t0,
                        n0: faces[wall_id(k).index()].normal(),
                        exterior_n: 1.0 + turn / std::f64::consts::PI,
                    });
                }
            }
            for k in 0..n {
                let a = footprint[k];
                let b = footprint[(k + 1) % n];
                let wall_normal = faces[wall_id(k).index()].normal();
                edges.push(Edge {
                    id: EdgeId(edges.len() as u32),
                    name: format!("{name}.redge{k}"),
                    building: bi,
                    start: Point3::new(a[0], a[1], h),
                    end: Point3::new(b[0], b[1], h),
                    face0: roof_id,
                    face_n: wall_id(k),
                    t0: -wall_normal,
                    n0: Point3::unit_z(),
                    exterior_n: 1.5,
                });
            }

            let aabb = Aabb::from_points(
                footprint
                    .iter()
                    .flat_map(|p| [Point3::new(p[0], p[1], 0.0), Point3::new(p[0], p[1], h)]),
            );
            built.push(Building {
                name,
                footprint,
                height: h,
                material,
                aabb,
                faces: face_start..faces.len(),
            });
        }

        Ok(Self {
            anchor,
            materials,
            ground_material: ground_idx,
            buildings: built,
            faces,
            edges,
        })
    }

    /// Ground plane only, with the default material set.
    pub fn ground_only() -> Self {
        Self::new(None, default_materials(), "concrete", Vec::new())
            .expect("default materials contain concrete")
    }

    /// A bundled fixture scene by name (see [`bundled_scene_names`]).
    pub fn bundled(name: &str) -> Result<Self> {
        file::bundled_scene(name)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: SceneFile = serde_json::from_str(text).map_err(Error::SceneParse)?;
        spec.build()
    }

    pub fn anchor(&self) -> Option<GeoAnchor> {
        self.anchor
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn material(&self, idx: usize) -> &Material {
        &self.materials[idx]
    }

    pub fn ground_material(&self) -> &Material {
        &self.materials[self.ground_material]
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    #[inline]
    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id.index()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.index()]
    }

    pub fn face_material(&self, id: FaceId) -> &Material {
        &self.materials[self.face(id).material]
    }

    /// Bounding box of all buildings, `None` for a ground-only scene.
    pub fn building_bounds(&self) -> Option<Aabb> {
        if self.buildings.is_empty() {
            return None;
        }
        Some(Aabb::from_points(
            self.buildings.iter().flat_map(|b| [b.aabb.min, b.aabb.max]),
        ))
    }

    pub fn is_inside_building(&self, p: Point3) -> bool {
        self.buildings.iter().any(|b| b.contains(p))
    }

    /// Validates a transmitter/receiver position: above ground, outside buildings.
    pub fn check_endpoint(&self, p: Point3, what: &str) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::InvalidPosition(format!("{what} is not finite")));
        }
        if p.z <= 0.0 {
            return Err(Error::InvalidPosition(format!(
                "{what} at z = {} is not above ground",
                p.z
            )));
        }
        if let Some(b) = self.buildings.iter().find(|b| b.contains(p)) {
            return Err(Error::InvalidPosition(format!(
                "{what} ({:.3}, {:.3}, {:.3}) lies inside {}",
                p.x, p.y, p.z, b.name
            )));
        }
        Ok(())
    }

    /// Nearest face hit along a ray with `t` in `(t_min, t_max)`.
    pub fn first_hit(
        &self,
        origin: Point3,
        dir: Point3,
        skip: Option<FaceId>,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut best_t = t_max;
        if dir.z < 0.0 && skip != Some(FaceId::GROUND) {
            let t = -origin.z / dir.z;
            if t > t_min && t < best_t {
                best_t = t;
                best = Some(Hit {
                    t,
                    face: FaceId::GROUND,
                });
            }
        }
        let inv = Point3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        for b in &self.buildings {
            if b.aabb.ray_interval(origin, inv, t_min, best_t).is_none() {
                continue;
            }
            for face in &self.faces[b.faces.clone()] {
                if Some(face.id) == skip {
                    continue;
                }
                let Some(t) = face.plane.intersect_param(origin, dir) else {
                    continue;
                };
                if t <= t_min || t >= best_t {
                    continue;
                }
                if face.contains(origin + dir * t, 0.0) {
                    best_t = t;
                    best = Some(Hit { t, face: face.id });
                }
            }
        }
        best
    }

    /// Whether the open segment `p → q` crosses any face not listed in `ignore`.
    ///
    /// The ground never blocks: both endpoints are at or above it.
    pub fn segment_blocked(&self, p: Point3, q: Point3, ignore: &[FaceId]) -> bool {
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            return false;
        }
        let eps = (1e-7 / len).min(1e-3);
        let inv = Point3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        for b in &self.buildings {
            if b.aabb.ray_interval(p, inv, eps, 1.0 - eps).is_none() {
                continue;
            }
            for face in &self.faces[b.faces.clone()] {
                if ignore.contains(&face.id) {
                    continue;
                }
                let Some(t) = face.plane.intersect_param(p, d) else {
                    continue;
                };
                if t > eps && t < 1.0 - eps && face.contains(p + d * t, 0.0) {
                    return true;
                }
            }
        }
        false
    }

    pub fn face_name(&self, id: FaceId) -> &str {
        &self.face(id).name
    }

    pub fn edge_name(&self, id: EdgeId) -> &str {
        &self.edge(id).name
    }
}

fn validate_footprint(name: &str, mut fp: Vec<[f64; 2]>, height: f64) -> Result<Vec<[f64; 2]>> {
    if !(height.is_finite() && height > 0.0) {
        return Err(Error::InvalidScene(format!(
            "{name}: height must be positive, got {height}"
        )));
    }
    if fp.len() < 3 {
        return Err(Error::InvalidScene(format!(
            "{name}: footprint needs at least 3 vertices, got {}",
            fp.len()
        )));
    }
    if fp.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidScene(format!("{name}: non-finite vertex")));
    }
    for i in 0..fp.len() {
        for j in (i + 1)..fp.len() {
            let (a, b) = (fp[i], fp[j]);
            if (a[0] - b[0]).hypot(a[1] - b[1]) <= DUPLICATE_VERTEX_TOL {
                return Err(Error::InvalidScene(format!(
                    "{name}: duplicate footprint vertex ({}, {})",
                    a[0], a[1]
                )));
            }
        }
    }
    if !is_simple_polygon(&fp) {
        return Err(Error::InvalidScene(format!(
            "{name}: footprint is self-intersecting"
        )));
    }
    let area2 = signed_area2(&fp);
    if area2.abs() < 1e-12 {
        return Err(Error::InvalidScene(format!("{name}: footprint has zero area")));
    }
    if area2 < 0.0 {
        fp.reverse();
    }
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(name: &str, x0: f64, y0: f64, w: f64, h: f64) -> ExtrudedPolygon {
        ExtrudedPolygon {
            name: Some(name.into()),
            footprint: vec![[x0, y0], [x0 + w, y0], [x0 + w, y0 + w], [x0, y0 + w]],
            height: h,
            material: "brick".into(),
        }
    }

    fn scene_with(b: Vec<ExtrudedPolygon>) -> Result<Scene> {
        Scene::new(None, default_materials(), "concrete", b)
    }

    #[test]
    fn normals_point_outward() {
        let mut cw = square("cw", 0.0, 0.0, 4.0, 6.0);
        cw.footprint.reverse();
        let lshape = ExtrudedPolygon {
            name: Some("l".into()),
            footprint: vec![
                [10.0, 0.0],
                [20.0, 0.0],
                [20.0, 10.0],
                [15.0, 10.0],
                [15.0, 5.0],
                [10.0, 5.0],
            ],
            height: 8.0,
            material: "brick".into(),
        };
        let s = scene_with(vec![cw, lshape]).unwrap();
        for b in s.buildings() {
            assert!(signed_area2(&b.footprint) > 0.0);
            for f in &s.faces()[b.faces.clone()] {
                // Probe just outside the face centroid: must be outside the solid.
                let probe_out = f.centroid() + f.normal() * 1e-3;
                let probe_in = f.centroid() - f.normal() * 1e-3;
                assert!(!b.contains(probe_out), "{} normal points inward", f.name);
                assert!(b.contains(probe_in), "{} inner probe outside", f.name);
            }
        }
        // Convex square: normal · (solid centroid − face centroid) < 0.
        let sq = &s.buildings()[0];
        for f in &s.faces()[sq.faces.clone()] {
            assert!(f.normal().dot(sq.centroid() - f.centroid()) < 0.0);
        }
    }

    #[test]
    fn reflex_corner_has_no_vertical_wedge() {
        let lshape = ExtrudedPolygon {
            name: Some("l".into()),
            footprint: vec![
                [0.0, 0.0],
                [10.0, 0.0],
                [10.0, 10.0],
                [5.0, 10.0],
                [5.0, 5.0],
                [0.0, 5.0],
            ],
            height: 8.0,
            material: "brick".into(),
        };
        let s = scene_with(vec![lshape]).unwrap();
        let vertical = s.edges().iter().filter(|e| e.name.contains("vedge")).count();
        assert_eq!(vertical, 5);
        assert!(s.edges().iter().all(|e| e.name != "l.vedge4"));
        for e in s.edges().iter().filter(|e| e.name.contains("vedge")) {
            assert!((e.exterior_n - 1.5).abs() < 1e-12);
            // face n lies at n·π from face 0
            let fn_dir = {
                let f = s.face(e.face_n);
                f.centroid() - e.start
            };
            let ang = e.angle_of(Point3::new(fn_dir.x, fn_dir.y, 0.0));
            assert!((ang - 1.5 * std::f64::consts::PI).abs() < 1e-9, "{}", e.name);
        }
    }

    #[test]
    fn invalid_buildings_rejected() {
        let mut dup = square("d", 0.0, 0.0, 1.0, 3.0);
        dup.footprint.push([0.0, 0.0]);
        assert!(matches!(scene_with(vec![dup]), Err(Error::InvalidScene(_))));
        let bow = ExtrudedPolygon {
            name: None,
            footprint: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
            height: 3.0,
            material: "brick".into(),
        };
        assert!(scene_with(vec![bow]).is_err());
        assert!(scene_with(vec![square("z", 0.0, 0.0, 1.0, 0.0)]).is_err());
        let mut unknown = square("u", 0.0, 0.0, 1.0, 3.0);
        unknown.material = "marble".into();
        assert!(matches!(
            scene_with(vec![unknown]),
            Err(Error::UnknownMaterial(_))
        ));
    }

    #[test]
    fn ray_hits_nearest_wall() {
        let s = scene_with(vec![square("a", 10.0, -5.0, 10.0, 10.0)]).unwrap();
        let hit = s
            .first_hit(
                Point3::new(0.0, 0.0, 2.0),
                Point3::new(1.0, 0.0, 0.0),
                None,
                1e-9,
                f64::INFINITY,
            )
            .unwrap();
        assert!((hit.t - 10.0).abs() < 1e-12);
        assert!(s.face_name(hit.face).starts_with("a.wall"));
        let down = s
            .first_hit(
                Point3::new(0.0, 0.0, 2.0),
                Point3::new(1.0, 0.0, -1.0).normalize(),
                None,
                1e-9,
                f64::INFINITY,
            )
            .unwrap();
        assert_eq!(down.face, FaceId::GROUND);
    }

    #[test]
    fn blocking_and_inside_tests() {
        let s = scene_with(vec![square("a", 10.0, -5.0, 10.0, 10.0)]).unwrap();
        let p = Point3::new(0.0, 0.0, 2.0);
        assert!(s.segment_blocked(p, Point3::new(30.0, 0.0, 2.0), &[]));
        assert!(!s.segment_blocked(p, Point3::new(30.0, 20.0, 2.0), &[]));
        assert!(s.is_inside_building(Point3::new(15.0, 0.0, 2.0)));
        assert!(s.check_endpoint(Point3::new(15.0, 0.0, 2.0), "tx").is_err());
        assert!(s.check_endpoint(Point3::new(0.0, 0.0, 0.0), "tx").is_err());
    }
}
