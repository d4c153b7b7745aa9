//! Shooting-and-bouncing-rays candidate discovery.
//!
//! Rays only propose interaction sequences; every proposal is rebuilt
//! exactly by the image-method solver, so launch density affects which
//! paths are found but not their geometry.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::geometry::{segment_segment_closest, Aabb};
use crate::scene::{EdgeId, FaceId, Scene};
use crate::Point3;

use super::launch::launch_directions;

/// Reception radius per unit unfolded length, relative to the launch spacing.
const RECEPTION_FACTOR: f64 = 1.2;
const CHUNK: usize = 2048;

pub(crate) type Sequence = Vec<FaceId>;

#[derive(Debug, Default)]
pub(crate) struct Candidates {
    /// Reflection sequences (non-empty) per destination.
    pub per_dst: Vec<BTreeSet<Sequence>>,
    /// Pre-diffraction reflection sequences paired with the edge they graze.
    pub edges: BTreeSet<(Sequence, EdgeId)>,
}

impl Candidates {
    fn empty(n: usize) -> Self {
        Self {
            per_dst: vec![BTreeSet::new(); n],
            edges: BTreeSet::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.per_dst.iter_mut().zip(other.per_dst) {
            a.extend(b);
        }
        self.edges.extend(other.edges);
        self
    }
}

pub(crate) struct Launch<'a> {
    pub scene: &'a Scene,
    pub src: Point3,
    pub dsts: &'a [Point3],
    pub max_reflections: usize,
    pub diffraction: bool,
    pub angular_resolution: f64,
}

impl Launch<'_> {
    pub fn run(&self) -> Candidates {
        let dirs = launch_directions(self.angular_resolution);
        let n = self.dsts.len();
        let mut pts: Vec<Point3> = self.dsts.to_vec();
        pts.push(self.src);
        // reach below ground so ground hits are strictly inside the box
        pts.push(Point3::new(self.src.x, self.src.y, -1.0));
        let mut world = Aabb::from_points(pts.iter().copied());
        if let Some(b) = self.scene.building_bounds() {
            world = Aabb::from_points([world.min, world.max, b.min, b.max]);
        }
        let world = world.inflate(1.0);
        let center = (world.min + world.max) * 0.5;
        let (dst_center, dst_radius) = bounding_sphere(self.dsts);
        let edges_by_building = self.edges_by_building();
        let ctx = Ctx {
            launch: self,
            world,
            world_diag: (world.max - world.min).norm() + (self.src - center).norm(),
            dst_center,
            dst_radius,
            edges_by_building,
        };
        dirs.par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = Candidates::empty(n);
                for &d in chunk {
                    ctx.shoot(d, &mut acc);
                }
                acc
            })
            .reduce(|| Candidates::empty(n), Candidates::merge)
    }

    fn edges_by_building(&self) -> Vec<Vec<EdgeId>> {
        let mut out = vec![Vec::new(); self.scene.buildings().len()];
        if self.diffraction {
            for e in self.scene.edges() {
                out[e.building].push(e.id);
            }
        }
        out
    }
}

fn bounding_sphere(points: &[Point3]) -> (Point3, f64) {
    if points.is_empty() {
        return (Point3::zero(), -1.0);
    }
    let b = Aabb::from_points(points.iter().copied());
    let c = (b.min + b.max) * 0.5;
    let r = points.iter().map(|p| p.distance(c)).fold(0.0, f64::max);
    (c, r)
}

struct Ctx<'a> {
    launch: &'a Launch<'a>,
    world: Aabb,
    world_diag: f64,
    dst_center: Point3,
    dst_radius: f64,
    edges_by_building: Vec<Vec<EdgeId>>,
}

impl Ctx<'_> {
    fn radius(&self, unfolded: f64) -> f64 {
        RECEPTION_FACTOR * self.launch.angular_resolution * unfolded
    }

    fn shoot(&self, dir: Point3, acc: &mut Candidates) {
        let scene = self.launch.scene;
        let mut origin = self.launch.src;
        let mut d = dir;
        let mut unfolded = 0.0;
        let mut seq: Sequence = Vec::new();
        let mut last: Option<FaceId> = None;
        loop {
            let inv = Point3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
            let Some((_, t_exit)) = self.world.ray_interval(origin, inv, 0.0, self.world_diag)
            else {
                return;
            };
            let hit = scene.first_hit(origin, d, last, 1e-9, t_exit);
            let t_end = hit.as_ref().map_or(t_exit, |h| h.t);
            if !seq.is_empty() {
                // past the last hit the ray is free, even outside the world box
                let t_recv = hit.as_ref().map_or(f64::INFINITY, |h| h.t);
                self.receive(origin, d, t_recv, unfolded, &seq, acc);
            }
            if self.launch.diffraction {
                self.graze(origin, d, inv, t_end, unfolded, &seq, acc);
            }
            let Some(h) = hit else {
                return;
            };
            if seq.len() == self.launch.max_reflections {
                return;
            }
            let n = scene.face(h.face).normal();
            origin = origin + d * h.t;
            d = d.reflect(n).normalize();
            unfolded += h.t;
            seq.push(h.face);
            last = Some(h.face);
        }
    }

    fn receive(
        &self,
        o: Point3,
        d: Point3,
        t_end: f64,
        unfolded: f64,
        seq: &Sequence,
        acc: &mut Candidates,
    ) {
        if self.dst_radius < 0.0 {
            return;
        }
        let s = (self.dst_center - o).dot(d).clamp(0.0, t_end);
        let miss = (o + d * s).distance(self.dst_center);
        if miss > self.dst_radius + self.radius(unfolded + s + self.dst_radius) {
            return;
        }
        for (i, &p) in self.launch.dsts.iter().enumerate() {
            let s = (p - o).dot(d);
            if s < 0.0 || s > t_end {
                continue;
            }
            if (o + d * s).distance(p) <= self.radius(unfolded + s) {
                acc.per_dst[i].insert(seq.clone());
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn graze(
        &self,
        o: Point3,
        d: Point3,
        inv: Point3,
        t_end: f64,
        unfolded: f64,
        seq: &Sequence,
        acc: &mut Candidates,
    ) {
        let scene = self.launch.scene;
        let margin = self.radius(unfolded + t_end);
        let seg = d * t_end;
        for (bi, b) in scene.buildings().iter().enumerate() {
            let edges = &self.edges_by_building[bi];
            if edges.is_empty() || b.aabb.inflate(margin).ray_interval(o, inv, 0.0, t_end).is_none() {
                continue;
            }
            for &eid in edges {
                let e = scene.edge(eid);
                let (s, _, dist) = segment_segment_closest(o, seg, e.start, e.end - e.start);
                if dist <= self.radius(unfolded + s * t_end) {
                    acc.edges.insert((seq.clone(), eid));
                }
            }
        }
    }
}
