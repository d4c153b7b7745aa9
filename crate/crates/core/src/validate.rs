//! Built-in oracle suite: the simulator against closed forms.

use std::fmt;

use crate::analysis::{db_per_octave, fit_loglog, friis_db, ris_cascade_closed_form, two_ray_power};
use crate::error::Result;
use crate::ris::{cascade, optimal_coeffs};
use crate::scenarios::{point_segments, run_sweep, trace_sweep, ScenarioConfig, ScenarioKind, SweepLayout};
use crate::scene::Scene;
use crate::Point3;

/// Fault injection for the suite itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Multiplies the wavelength the simulator sees (1 for a faithful run).
    pub lambda_scale: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { lambda_scale: 1.0 }
    }
}

impl OracleOptions {
    fn sim_freq(&self, freq_ghz: f64) -> f64 {
        freq_ghz / self.lambda_scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured deviation in `unit`.
    pub deviation: f64,
    pub tolerance: f64,
    pub unit: &'static str,
    pub detail: String,
}

impl fmt::Display for OracleReport {
    /// One machine-readable line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "oracle={} status={} deviation={:.6} tolerance={} unit={} {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.deviation,
            self.tolerance,
            self.unit,
            self.detail
        )
    }
}

fn with_overrides(kind: ScenarioKind, overrides: &[&str]) -> Result<ScenarioConfig> {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ScenarioConfig::resolve(&format!(r#"{{"scenario": "{}"}}"#, kind.name()), &o)
}

/// Free-space LOS sweep over `1..=512` m at equal heights.
pub fn friis_config() -> Result<ScenarioConfig> {
    with_overrides(
        ScenarioKind::FreeSpaceA,
        &[
            "bs=[0,0]",
            "ue=[1,0]",
            "ue_height=5",
            "ris_enabled=false",
            "sweep.step_m=1",
            "sweep.count=511",
            "sweep.direction=[1,0]",
        ],
    )
}

/// Two-ray sweep over `150..=900` m in 0.5 m steps.
pub fn two_ray_config() -> Result<ScenarioConfig> {
    with_overrides(
        ScenarioKind::TwoRayA,
        &[
            "bs=[0,0]",
            "ue=[150,0]",
            "ris_enabled=false",
            "sweep.step_m=0.5",
            "sweep.count=1500",
            "sweep.direction=[1,0]",
        ],
    )
}

pub fn friis(scene: &Scene, opts: OracleOptions) -> Result<OracleReport> {
    let mut cfg = friis_config()?;
    let f = cfg.freq_ghz;
    cfg.freq_ghz = opts.sim_freq(f);
    let (result, traced) = run_sweep(scene, &cfg)?;
    let d: Vec<f64> = traced.layout.ues.iter().map(|u| u.distance(traced.layout.bs)).collect();
    let gain: Vec<f64> = result.p_los().iter().map(|p| p - cfg.ptx_dbm).collect();
    let dev = d
        .iter()
        .zip(&gain)
        .map(|(&d, &g)| (g - friis_db(d, f)).abs())
        .fold(0.0, f64::max);
    let slope = db_per_octave(&d, &gain)?;
    let slope_dev = (slope + 20.0 * 2f64.log10()).abs();
    Ok(OracleReport {
        name: "friis",
        passed: dev <= 0.01 && slope_dev <= 0.01,
        deviation: dev,
        tolerance: 0.01,
        unit: "dB",
        detail: format!("slope_db_per_octave={slope:.6} points={}", d.len()),
    })
}

/// Local minima of a sampled curve, refined by a parabola through three samples.
pub fn refined_minima(x: &[f64], y: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] < y[i - 1] && y[i] <= y[i + 1] {
            let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            let shift = if denom > 0.0 { 0.5 * (y[i - 1] - y[i + 1]) / denom } else { 0.0 };
            out.push((i, x[i] + shift * (x[i + 1] - x[i])));
        }
    }
    out
}

/// Local maxima indices.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

/// Detailed two-ray comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoRayComparison {
    pub distance: Vec<f64>,
    pub simulated_db: Vec<f64>,
    pub oracle_db: Vec<f64>,
    /// Worst |simulated − oracle| over samples at least 1 dB above the nearest null.
    pub max_deviation_db: f64,
    pub compared_samples: usize,
    /// Worst distance between matched null positions (m).
    pub null_mismatch_m: f64,
    pub oracle_nulls: usize,
    pub simulated_nulls: usize,
    /// Regression slope of the simulated local maxima.
    pub peak_slope_db_per_octave: f64,
    pub step_m: f64,
}

pub fn two_ray_comparison(scene: &Scene, opts: OracleOptions) -> Result<TwoRayComparison> {
    let mut cfg = two_ray_config()?;
    let f = cfg.freq_ghz;
    cfg.freq_ghz = opts.sim_freq(f);
    let (result, traced) = run_sweep(scene, &cfg)?;
    let layout: &SweepLayout = &traced.layout;
    let distance: Vec<f64> = layout
        .ues
        .iter()
        .map(|u| (u.x - layout.bs.x).hypot(u.y - layout.bs.y))
        .collect();
    let simulated_db: Vec<f64> = result.p_los().iter().map(|p| p - cfg.ptx_dbm).collect();
    let ground = scene.ground_material();
    let oracle_db = distance
        .iter()
        .map(|&d| two_ray_power(d, cfg.tx_height, cfg.ue_height, f, ground))
        .collect::<Result<Vec<f64>>>()?;

    let oracle_min = refined_minima(&distance, &oracle_db);
    let sim_min = refined_minima(&distance, &simulated_db);
    let mut max_dev = 0.0f64;
    let mut compared = 0;
    for i in 0..distance.len() {
        let nearest = oracle_min
            .iter()
            .min_by_key(|(j, _)| j.abs_diff(i))
            .map(|&(j, _)| oracle_db[j]);
        let above = nearest.map_or(f64::INFINITY, |floor| oracle_db[i] - floor);
        if above >= 1.0 {
            compared += 1;
            max_dev = max_dev.max((simulated_db[i] - oracle_db[i]).abs());
        }
    }
    let mut mismatch = 0.0f64;
    for &(_, xo) in &oracle_min {
        let nearest = sim_min
            .iter()
            .map(|&(_, xs)| (xs - xo).abs())
            .fold(f64::INFINITY, f64::min);
        mismatch = mismatch.max(nearest);
    }
    if sim_min.len() != oracle_min.len() {
        mismatch = f64::INFINITY;
    }
    let peaks = local_maxima(&simulated_db);
    let px: Vec<f64> = peaks.iter().map(|&i| distance[i]).collect();
    let py: Vec<f64> = peaks.iter().map(|&i| simulated_db[i]).collect();
    let peak_slope = if peaks.len() >= 2 { db_per_octave(&px, &py)? } else { f64::NAN };
    Ok(TwoRayComparison {
        distance,
        simulated_db,
        oracle_db,
        max_deviation_db: max_dev,
        compared_samples: compared,
        null_mismatch_m: mismatch,
        oracle_nulls: oracle_min.len(),
        simulated_nulls: sim_min.len(),
        peak_slope_db_per_octave: peak_slope,
        step_m: cfg.sweep.step_m,
    })
}

pub fn two_ray(scene: &Scene, opts: OracleOptions) -> Result<OracleReport> {
    let c = two_ray_comparison(scene, opts)?;
    let slope_dev = (c.peak_slope_db_per_octave + 20.0 * 2f64.log10()).abs();
    Ok(OracleReport {
        name: "two-ray",
        passed: c.max_deviation_db <= 0.5 && c.null_mismatch_m < c.step_m && slope_dev <= 0.2,
        deviation: c.max_deviation_db,
        tolerance: 0.5,
        unit: "dB",
        detail: format!(
            "compared={} nulls={} null_mismatch_m={:.4} peak_slope_db_per_octave={:.4}",
            c.compared_samples, c.oracle_nulls, c.null_mismatch_m, c.peak_slope_db_per_octave
        ),
    })
}

/// Free-space cascade geometry: panel facing +x at the origin, both ends in front.
pub fn cascade_geometry() -> (Point3, Point3, Point3) {
    (
        Point3::new(20.0, -15.0, 5.0),
        Point3::new(0.0, 0.0, 5.0),
        Point3::new(30.0, 20.0, 5.0),
    )
}

pub const CASCADE_SIZES: [usize; 4] = [16, 64, 256, 1024];

/// Simulated optimal-phase `|h_ris|²` for each size with the closed form alongside.
pub fn cascade_powers(scene: &Scene, opts: OracleOptions, sizes: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    let (bs, ris, ue) = cascade_geometry();
    let mut cfg = with_overrides(
        ScenarioKind::FreeSpaceB,
        &["ris_azimuth_deg=0", "ris_tilt_deg=0", "sweep.count=0"],
    )?;
    let f = cfg.freq_ghz;
    cfg.freq_ghz = opts.sim_freq(f);
    let layout = SweepLayout {
        bs,
        ues: vec![ue],
        ris_centers: vec![ris],
        coordinates: vec![crate::scenarios::Coordinate::Sweep(0.0)],
    };
    let traced = trace_sweep(scene, layout, &cfg.trace_config(), false, true)?;
    let (dt, dr) = (bs.distance(ris), ris.distance(ue));
    sizes
        .iter()
        .map(|&n| {
            let (ht, hr) = point_segments(scene, &cfg, &traced, 0, n)?;
            let c = optimal_coeffs(&ht, &hr)?;
            let sim = cascade(&ht, &hr, &c)?.norm_sqr();
            let oracle = ris_cascade_closed_form(n, dt, dr, f).powi(2);
            Ok((n, sim, oracle))
        })
        .collect()
}

pub fn n_squared(scene: &Scene, opts: OracleOptions) -> Result<OracleReport> {
    let rows = cascade_powers(scene, opts, &CASCADE_SIZES)?;
    let n: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let p: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let slope = fit_loglog(&n, &p)?.coefficients[1];
    Ok(OracleReport {
        name: "n-squared",
        passed: (1.95..=2.05).contains(&slope),
        deviation: (slope - 2.0).abs(),
        tolerance: 0.05,
        unit: "exponent",
        detail: format!("slope={slope:.6}"),
    })
}

pub fn cascade_closed_form(scene: &Scene, opts: OracleOptions) -> Result<OracleReport> {
    let rows = cascade_powers(scene, opts, &CASCADE_SIZES)?;
    let dev = rows
        .iter()
        .map(|&(_, sim, oracle)| (10.0 * (sim / oracle).log10()).abs())
        .fold(0.0, f64::max);
    Ok(OracleReport {
        name: "cascade",
        passed: dev <= 0.5,
        deviation: dev,
        tolerance: 0.5,
        unit: "dB",
        detail: format!("sizes={:?}", CASCADE_SIZES),
    })
}

/// Runs every oracle on the ground-only scene.
pub fn run_all(opts: OracleOptions) -> Result<Vec<OracleReport>> {
    let scene = Scene::ground_only();
    Ok(vec![
        friis(&scene, opts)?,
        two_ray(&scene, opts)?,
        n_squared(&scene, opts)?,
        cascade_closed_form(&scene, opts)?,
    ])
}
