//! Scripted sweeps: moving UE/RIS lines, RIS size tables and the coverage grid.

mod config;
mod output;

use rayon::prelude::*;

use crate::channel::{assemble, policy_coeffs, segment_channels, ChannelReport, LinkParams, LinkPaths};
use crate::error::{Error, Result};
use crate::ris::{cascade, RisPanel, SegmentChannel};
use crate::scene::Scene;
use crate::tracer::{trace, trace_many, PropagationPath, TraceConfig};
use crate::Point3;

pub use config::{
    apply_override, check_square, CoverageMode, GridSpec, Motion, PolicyName, ScenarioConfig, ScenarioKind,
    SweepSpec, TraceSettings, CONFIG_SCHEMA_VERSION, PRESET_VERSION,
};
pub use output::{
    format_f64, path_dump_csv, ris_sizes_csv, run, sweep_csv, RunOutput, SWEEP_HEADER, GRID_HEADER,
};

/// Position of a row along the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coordinate {
    /// Distance travelled from the first point.
    Sweep(f64),
    Grid { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub coordinate: Coordinate,
    pub report: ChannelReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn p_los(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.p_los_dbm).collect()
    }

    pub fn p_ris(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.p_ris_dbm).collect()
    }

    pub fn p_total(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.p_total_dbm).collect()
    }

    /// Index of the minimum LOS-link power (the operational deep fade).
    pub fn deep_fade_index(&self) -> Option<usize> {
        self.rows
            .iter()
            .min_by(|a, b| a.report.p_los_dbm.total_cmp(&b.report.p_los_dbm))
            .map(|r| r.index)
    }
}

/// Endpoint positions for every sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLayout {
    pub bs: Point3,
    pub ues: Vec<Point3>,
    pub ris_centers: Vec<Point3>,
    pub coordinates: Vec<Coordinate>,
}

impl SweepLayout {
    pub fn len(&self) -> usize {
        self.ues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ues.is_empty()
    }
}

pub fn layout(cfg: &ScenarioConfig) -> SweepLayout {
    let bs = Point3::new(cfg.bs[0], cfg.bs[1], cfg.tx_height);
    let ue0 = Point3::new(cfg.ue[0], cfg.ue[1], cfg.ue_height);
    let ris0 = Point3::new(cfg.ris[0], cfg.ris[1], cfg.ris_height);
    let motion = cfg.scenario.motion();
    if motion == Motion::Grid {
        let s = cfg.grid.spacing_wavelengths * cfg.wavelength();
        let (nx, ny) = (cfg.grid.nx, cfg.grid.ny);
        let mut ues = Vec::with_capacity(nx * ny);
        let mut coordinates = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = cfg.ue[0] + (ix as f64 - (nx - 1) as f64 / 2.0) * s;
                let y = cfg.ue[1] + (iy as f64 - (ny - 1) as f64 / 2.0) * s;
                ues.push(Point3::new(x, y, cfg.ue_height));
                coordinates.push(Coordinate::Grid { x, y });
            }
        }
        let ris_centers = vec![ris0; ues.len()];
        return SweepLayout { bs, ues, ris_centers, coordinates };
    }
    let [dx, dy] = cfg.sweep.direction;
    let norm = dx.hypot(dy);
    let dir = Point3::new(dx / norm, dy / norm, 0.0);
    let n = cfg.sweep.count + 1;
    let mut out = SweepLayout {
        bs,
        ues: Vec::with_capacity(n),
        ris_centers: Vec::with_capacity(n),
        coordinates: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = i as f64 * cfg.sweep.step_m;
        let shift = dir * t;
        let (ue, ris) = match motion {
            Motion::UeAndRis => (ue0 + shift, ris0 + shift),
            Motion::Ris => (ue0, ris0 + shift),
            Motion::Ue => (ue0 + shift, ris0),
            Motion::Grid => unreachable!(),
        };
        out.ues.push(ue);
        out.ris_centers.push(ris);
        out.coordinates.push(Coordinate::Sweep(t));
    }
    out
}

/// Rejects layouts that leave the horizontal extent of the scene's buildings.
pub fn check_bounds(scene: &Scene, layout: &SweepLayout, with_ris: bool) -> Result<()> {
    let Some(b) = scene.building_bounds() else {
        return Ok(());
    };
    let check = |p: Point3, what: &str, i: usize| -> Result<()> {
        if p.x < b.min.x || p.x > b.max.x || p.y < b.min.y || p.y > b.max.y {
            return Err(Error::InvalidPosition(format!(
                "{what} at sweep point {i} ({:.3}, {:.3}) leaves the scene bounds",
                p.x, p.y
            )));
        }
        Ok(())
    };
    check(layout.bs, "BS", 0)?;
    for i in 0..layout.len() {
        check(layout.ues[i], "UE", i)?;
        if with_ris {
            check(layout.ris_centers[i], "RIS", i)?;
        }
    }
    Ok(())
}

/// Traced path sets for one sweep point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TracedPoint {
    pub direct: Vec<PropagationPath>,
    /// `(BS → RIS, RIS → UE)`.
    pub ris: Option<(Vec<PropagationPath>, Vec<PropagationPath>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedSweep {
    pub layout: SweepLayout,
    pub points: Vec<TracedPoint>,
}

fn reversed_all(sets: Vec<Vec<PropagationPath>>) -> Vec<Vec<PropagationPath>> {
    sets.into_iter()
        .map(|v| v.iter().map(PropagationPath::reversed).collect())
        .collect()
}

/// Paths from a fixed or moving `a` to each `b`, using one launch per fixed endpoint.
fn trace_pairs(scene: &Scene, a: &[Point3], b: &[Point3], cfg: &TraceConfig) -> Result<Vec<Vec<PropagationPath>>> {
    let fixed = |v: &[Point3]| v.windows(2).all(|w| w[0] == w[1]);
    if fixed(a) {
        trace_many(scene, a[0], b, cfg)
    } else if fixed(b) {
        Ok(reversed_all(trace_many(scene, b[0], a, cfg)?))
    } else {
        a.iter().zip(b).map(|(&p, &q)| trace(scene, p, q, cfg)).collect()
    }
}

/// Traces the direct link (when `direct`) and the RIS segments (when `with_ris`).
pub fn trace_sweep(
    scene: &Scene,
    layout: SweepLayout,
    cfg: &TraceConfig,
    direct: bool,
    with_ris: bool,
) -> Result<TracedSweep> {
    let n = layout.len();
    let bs = vec![layout.bs; n];
    let direct_paths = if direct {
        trace_pairs(scene, &bs, &layout.ues, cfg)?
    } else {
        vec![Vec::new(); n]
    };
    let mut points: Vec<TracedPoint> = direct_paths
        .into_iter()
        .map(|direct| TracedPoint { direct, ris: None })
        .collect();
    if with_ris {
        let to = trace_pairs(scene, &bs, &layout.ris_centers, cfg)?;
        let from = trace_pairs(scene, &layout.ris_centers, &layout.ues, cfg)?;
        for ((p, t), f) in points.iter_mut().zip(to).zip(from) {
            p.ris = Some((t, f));
        }
    }
    Ok(TracedSweep { layout, points })
}

impl ScenarioConfig {
    pub fn link_params(&self, stream: u64) -> LinkParams {
        LinkParams {
            freq_ghz: self.freq_ghz,
            ptx_dbm: self.ptx_dbm,
            policy: self.coefficient_policy(),
            stream,
            filter: self.path_filter,
        }
    }

    /// Square panel of `n` elements centered at `center` with the configured orientation.
    pub fn panel(&self, center: Point3, n: usize) -> Result<RisPanel<f64>> {
        check_square(n)?;
        RisPanel::square(
            center,
            self.ris_azimuth_deg.to_radians(),
            self.ris_tilt_deg.to_radians(),
            n,
            self.ris_spacing_wavelengths * self.wavelength(),
        )
    }
}

/// Channel reports for every traced point (point index doubles as the random stream).
pub fn assemble_sweep(scene: &Scene, cfg: &ScenarioConfig, traced: &TracedSweep) -> Result<SweepResult> {
    let rows = (0..traced.points.len())
        .into_par_iter()
        .map(|i| {
            let point = &traced.points[i];
            let panel = match &point.ris {
                Some(_) => Some(cfg.panel(traced.layout.ris_centers[i], cfg.ris_elements)?),
                None => None,
            };
            let ris = point.ris.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
            let report = assemble(
                scene,
                panel.as_ref(),
                LinkPaths { direct: &point.direct, ris },
                &cfg.link_params(i as u64),
            )?;
            Ok(SweepRow {
                index: i,
                coordinate: traced.layout.coordinates[i],
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Traces and evaluates a line sweep (every scenario except C).
pub fn run_sweep(scene: &Scene, cfg: &ScenarioConfig) -> Result<(SweepResult, TracedSweep)> {
    if cfg.scenario.motion() == Motion::Grid {
        return Err(Error::InvalidConfig("scenario C is a coverage grid, use run_coverage".into()));
    }
    let layout = layout(cfg);
    check_bounds(scene, &layout, cfg.ris_enabled)?;
    let traced = trace_sweep(scene, layout, &cfg.trace_config(), true, cfg.ris_enabled)?;
    Ok((assemble_sweep(scene, cfg, &traced)?, traced))
}

/// Alias of [`run_sweep`] for the A family (UE and RIS move together).
pub fn run_scenario_a(scene: &Scene, cfg: &ScenarioConfig) -> Result<SweepResult> {
    expect_motion(cfg, &[Motion::UeAndRis])?;
    Ok(run_sweep(scene, cfg)?.0)
}

/// Alias of [`run_sweep`] for the B family (RIS moves, or the UE for the variant).
pub fn run_scenario_b(scene: &Scene, cfg: &ScenarioConfig) -> Result<SweepResult> {
    expect_motion(cfg, &[Motion::Ris, Motion::Ue])?;
    Ok(run_sweep(scene, cfg)?.0)
}

fn expect_motion(cfg: &ScenarioConfig, allowed: &[Motion]) -> Result<()> {
    if allowed.contains(&cfg.scenario.motion()) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "scenario {} does not belong to this family",
            cfg.scenario
        )))
    }
}

/// Trace settings for one coverage mode: diffraction only in its own mode.
pub fn coverage_trace_config(cfg: &ScenarioConfig, mode: CoverageMode) -> TraceConfig {
    TraceConfig {
        max_diffractions: usize::from(mode == CoverageMode::Diffraction),
        ..cfg.trace_config()
    }
}

/// One scenario C map.
pub fn run_coverage(scene: &Scene, cfg: &ScenarioConfig, mode: CoverageMode) -> Result<SweepResult> {
    let mut grid_cfg = cfg.clone();
    grid_cfg.scenario = ScenarioKind::C;
    let layout = layout(&grid_cfg);
    let with_ris = mode == CoverageMode::Ris;
    check_bounds(scene, &layout, with_ris)?;
    let traced = trace_sweep(scene, layout, &coverage_trace_config(cfg, mode), !with_ris, with_ris)?;
    assemble_sweep(scene, cfg, &traced)
}

/// Segment channels of one traced point for a panel of `n` elements.
pub fn point_segments(
    scene: &Scene,
    cfg: &ScenarioConfig,
    traced: &TracedSweep,
    index: usize,
    n: usize,
) -> Result<(SegmentChannel<f64>, SegmentChannel<f64>)> {
    let (to, from) = traced.points[index]
        .ris
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("sweep was traced without the RIS".into()))?;
    let panel = cfg.panel(traced.layout.ris_centers[index], n)?;
    segment_channels(scene, &panel, to, from, &cfg.link_params(index as u64))
}

/// RIS-link power under each policy at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeRow {
    pub n: usize,
    pub p_optimal_dbm: f64,
    pub p_unit_dbm: f64,
    /// Mean linear power over `random_trials` seeds, in dBm.
    pub p_random_dbm: f64,
    /// Expected random-phase power `Σ|ht_n hr_n|²`, in dBm.
    pub p_incoherent_dbm: f64,
}

fn linear_to_dbm(p: f64, ptx_dbm: f64) -> f64 {
    if p > 0.0 {
        ptx_dbm + 10.0 * p.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Mean `|h_ris|²` over `trials` consecutive seeds starting at `seed`.
pub fn random_mean_power(
    ht: &SegmentChannel<f64>,
    hr: &SegmentChannel<f64>,
    seed: u64,
    stream: u64,
    trials: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    for t in 0..trials as u64 {
        let c = crate::ris::random_coeffs_stream(ht.len(), seed.wrapping_add(t), stream);
        sum += cascade(ht, hr, &c)?.norm_sqr();
    }
    Ok(sum / trials as f64)
}

/// `Σ|ht_n|²|hr_n|²`: the expectation of `|h_ris|²` under i.i.d. uniform phases.
pub fn incoherent_power(ht: &SegmentChannel<f64>, hr: &SegmentChannel<f64>) -> f64 {
    ht.per_element
        .iter()
        .zip(&hr.per_element)
        .map(|(t, r)| t.norm_sqr() * r.norm_sqr())
        .sum()
}

/// RIS size table at sweep point `index` of an already traced sweep.
pub fn ris_size_sweep(
    scene: &Scene,
    cfg: &ScenarioConfig,
    traced: &TracedSweep,
    index: usize,
    sizes: &[usize],
) -> Result<Vec<SizeRow>> {
    let h_los = {
        let params = cfg.link_params(index as u64);
        crate::channel::direct_channel(scene, &traced.points[index].direct, &params)?.0
    };
    sizes
        .iter()
        .map(|&n| {
            let (ht, hr) = point_segments(scene, cfg, traced, index, n)?;
            let stream = index as u64;
            let power = |policy| -> Result<f64> {
                let c = policy_coeffs(policy, stream, &ht, &hr, h_los)?;
                Ok(cascade(&ht, &hr, &c)?.norm_sqr())
            };
            Ok(SizeRow {
                n,
                p_optimal_dbm: linear_to_dbm(power(crate::ris::CoefficientPolicy::Optimal)?, cfg.ptx_dbm),
                p_unit_dbm: linear_to_dbm(power(crate::ris::CoefficientPolicy::Unit)?, cfg.ptx_dbm),
                p_random_dbm: linear_to_dbm(
                    random_mean_power(&ht, &hr, cfg.seed, stream, cfg.random_trials)?,
                    cfg.ptx_dbm,
                ),
                p_incoherent_dbm: linear_to_dbm(incoherent_power(&ht, &hr), cfg.ptx_dbm),
            })
        })
        .collect()
}

/// `p_los − p_ris` in dB for rows where both are finite.
pub fn los_minus_ris_db(result: &SweepResult) -> Vec<f64> {
    result
        .rows
        .iter()
        .map(|r| r.report.p_los_dbm - r.report.p_ris_dbm)
        .filter(|d| d.is_finite())
        .collect()
}

