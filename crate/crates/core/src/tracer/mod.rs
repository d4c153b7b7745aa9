//! Path finding between two points: SBR discovery with exact image-method
//! refinement, first-order edge diffraction, and an exhaustive image-method
//! oracle for low orders.

mod launch;
mod path;
mod sbr;
mod solve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{FaceId, Scene};
use crate::Point3;

pub use launch::{geodesic_directions, launch_directions, subdivision_for};
pub use path::{canonicalize, filter_paths, Interaction, PathFilter, PropagationPath};
pub use solve::{keller_point, solve_diffraction, solve_reflections, solve_sequence};

/// Highest order accepted by [`image_trace`].
pub const IMAGE_TRACE_MAX_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub max_reflections: usize,
    /// 0 or 1.
    pub max_diffractions: usize,
    /// SBR launch spacing in radians.
    pub angular_resolution: f64,
    /// Meters; paths with equal sequences closer than this are merged.
    pub dedup_tolerance: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            max_reflections: 5,
            max_diffractions: 0,
            angular_resolution: 0.25f64.to_radians(),
            dedup_tolerance: 1e-3,
        }
    }
}

impl TraceConfig {
    pub fn reflections(max_reflections: usize) -> Self {
        Self {
            max_reflections,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_diffractions > 1 {
            return Err(Error::InvalidConfig(format!(
                "max_diffractions must be 0 or 1, got {}",
                self.max_diffractions
            )));
        }
        if !(self.angular_resolution > 0.0 && self.angular_resolution <= 0.2) {
            return Err(Error::InvalidConfig(format!(
                "angular_resolution must be in (0, 0.2] rad, got {}",
                self.angular_resolution
            )));
        }
        if !(self.dedup_tolerance >= 0.0 && self.dedup_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dedup_tolerance must be non-negative, got {}",
                self.dedup_tolerance
            )));
        }
        Ok(())
    }
}

/// All paths from `src` to `dst` within the configured interaction budget.
pub fn trace(scene: &Scene, src: Point3, dst: Point3, cfg: &TraceConfig) -> Result<Vec<PropagationPath>> {
    Ok(trace_many(scene, src, &[dst], cfg)?.pop().unwrap_or_default())
}

/// [`trace`] for many destinations sharing one source (one ray launch).
///
/// Each destination's result is identical to a separate [`trace`] call.
pub fn trace_many(
    scene: &Scene,
    src: Point3,
    dsts: &[Point3],
    cfg: &TraceConfig,
) -> Result<Vec<Vec<PropagationPath>>> {
    cfg.validate()?;
    scene.check_endpoint(src, "source")?;
    for (i, &d) in dsts.iter().enumerate() {
        scene.check_endpoint(d, &format!("destination {i}"))?;
        if d.distance(src) < 1e-9 {
            return Err(Error::InvalidPosition(format!(
                "destination {i} coincides with the source"
            )));
        }
    }
    let diffraction = cfg.max_diffractions > 0 && !scene.edges().is_empty();
    let candidates = if cfg.max_reflections > 0 || diffraction {
        sbr::Launch {
            scene,
            src,
            dsts,
            max_reflections: cfg.max_reflections,
            diffraction,
            angular_resolution: cfg.angular_resolution,
        }
        .run()
    } else {
        sbr::Candidates {
            per_dst: vec![Default::default(); dsts.len()],
            edges: Default::default(),
        }
    };
    let r = cfg.max_reflections;
    let out = dsts
        .par_iter()
        .zip(candidates.per_dst.par_iter())
        .map(|(&dst, seqs)| {
            let mut paths = Vec::new();
            if !scene.segment_blocked(src, dst, &[]) {
                paths.push(PropagationPath::new(vec![src, dst], Vec::new()));
            }
            paths.extend(seqs.iter().filter_map(|s| solve_sequence(scene, src, dst, s)));
            if diffraction {
                let after_faces: Vec<FaceId> = scene
                    .faces()
                    .iter()
                    .filter(|f| f.plane.signed_distance(dst) > 0.0)
                    .map(|f| f.id)
                    .collect();
                for (before, edge) in &candidates.edges {
                    if before.len() > r {
                        continue;
                    }
                    paths.extend(solve_diffraction(scene, src, dst, before, *edge, &[]));
                    if before.len() < r {
                        let e = scene.edge(*edge);
                        for &f in &after_faces {
                            let plane = &scene.face(f).plane;
                            if plane.signed_distance(e.start) <= 0.0 && plane.signed_distance(e.end) <= 0.0 {
                                continue;
                            }
                            paths.extend(solve_diffraction(scene, src, dst, before, *edge, &[f]));
                        }
                    }
                }
            }
            canonicalize(&mut paths, cfg.dedup_tolerance);
            paths
        })
        .collect();
    Ok(out)
}

/// Exhaustive image-method enumeration of reflection paths (no diffraction).
pub fn image_trace(
    scene: &Scene,
    src: Point3,
    dst: Point3,
    max_reflections: usize,
) -> Result<Vec<PropagationPath>> {
    if max_reflections > IMAGE_TRACE_MAX_ORDER {
        return Err(Error::ReflectionOrderTooHigh {
            requested: max_reflections,
            max: IMAGE_TRACE_MAX_ORDER,
        });
    }
    scene.check_endpoint(src, "source")?;
    scene.check_endpoint(dst, "destination")?;
    let mut paths = Vec::new();
    if !scene.segment_blocked(src, dst, &[]) {
        paths.push(PropagationPath::new(vec![src, dst], Vec::new()));
    }
    let mut seq = Vec::with_capacity(max_reflections);
    enumerate(scene, src, dst, src, max_reflections, &mut seq, &mut paths);
    canonicalize(&mut paths, 0.0);
    Ok(paths)
}

fn enumerate(
    scene: &Scene,
    src: Point3,
    dst: Point3,
    image: Point3,
    depth: usize,
    seq: &mut Vec<FaceId>,
    out: &mut Vec<PropagationPath>,
) {
    if depth == 0 {
        return;
    }
    for face in scene.faces() {
        if seq.last() == Some(&face.id) || face.plane.signed_distance(image) <= 0.0 {
            continue;
        }
        seq.push(face.id);
        out.extend(solve_sequence(scene, src, dst, seq));
        enumerate(scene, src, dst, face.plane.mirror(image), depth - 1, seq, out);
        seq.pop();
    }
}
