//! CSV tables, summaries and the full per-scenario run.

use std::fmt::Write as _;

use crate::analysis::{fit_gaussian_cdf, normal_cdf, Ecdf};
use crate::em::path_gain;
use crate::error::Result;
use crate::scene::Scene;
use crate::tracer::PropagationPath;

use super::{
    los_minus_ris_db, ris_size_sweep, run_coverage, run_sweep, Coordinate, Motion, ScenarioConfig,
    SizeRow, SweepResult,
};

pub const SWEEP_HEADER: &str = "index,sweep_coordinate_m,p_los_dbm,p_ris_dbm,p_total_dbm,n_paths_los,n_paths_t,n_paths_r";
pub const GRID_HEADER: &str = "index,x_m,y_m,p_los_dbm,p_ris_dbm,p_total_dbm,n_paths_los,n_paths_t,n_paths_r";
pub const PATH_DUMP_HEADER: &str = "path_id,interactions,length_m,aod_az,aod_el,aoa_az,aoa_el,gain_db,phase_rad";
pub const RIS_SIZES_HEADER: &str = "n,policy,p_ris_dbm";
pub const ECDF_HEADER: &str = "diff_db,ecdf,gaussian_cdf";

/// Shortest round-trip decimal, with `-inf`/`inf`/`nan` sentinels.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let grid = matches!(result.rows.first().map(|r| r.coordinate), Some(Coordinate::Grid { .. }));
    let mut s = String::new();
    s.push_str(if grid { GRID_HEADER } else { SWEEP_HEADER });
    s.push('\n');
    for r in &result.rows {
        let c = &r.report;
        let coord = match r.coordinate {
            Coordinate::Sweep(t) => format_f64(t),
            Coordinate::Grid { x, y } => format!("{},{}", format_f64(x), format_f64(y)),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.index,
            coord,
            format_f64(c.p_los_dbm),
            format_f64(c.p_ris_dbm),
            format_f64(c.p_total_dbm),
            c.path_counts.los,
            c.path_counts.tx_ris,
            c.path_counts.ris_rx
        );
    }
    s
}

fn azimuth_elevation_deg(d: crate::Point3) -> (f64, f64) {
    (d.y.atan2(d.x).to_degrees(), d.z.clamp(-1.0, 1.0).asin().to_degrees())
}

/// One row per path; LOS has an empty interaction string, angles in degrees.
pub fn path_dump_csv(paths: &[PropagationPath], scene: &Scene, freq_ghz: f64) -> Result<String> {
    let mut s = String::from(PATH_DUMP_HEADER);
    s.push('\n');
    for (i, p) in paths.iter().enumerate() {
        let g = path_gain(p, scene, freq_ghz)?;
        let label = if p.is_los() { String::new() } else { p.sequence_label(scene) };
        let (daz, del) = azimuth_elevation_deg(p.departure_dir);
        // Arrival angles describe where the wave comes from, as seen by the receiver.
        let (aaz, ael) = azimuth_elevation_deg(-p.arrival_dir);
        let _ = writeln!(
            s,
            "{i},{label},{},{},{},{},{},{},{}",
            format_f64(p.length),
            format_f64(daz),
            format_f64(del),
            format_f64(aaz),
            format_f64(ael),
            format_f64(g.gain_db()),
            format_f64(g.phase())
        );
    }
    Ok(s)
}

pub fn ris_sizes_csv(rows: &[SizeRow]) -> String {
    let mut s = String::from(RIS_SIZES_HEADER);
    s.push('\n');
    for r in rows {
        for (name, p) in [
            ("optimal", r.p_optimal_dbm),
            ("unit", r.p_unit_dbm),
            ("random", r.p_random_dbm),
            ("incoherent", r.p_incoherent_dbm),
        ] {
            let _ = writeln!(s, "{},{name},{}", r.n, format_f64(p));
        }
    }
    s
}

/// Named text outputs of one run, in emission order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    fn push(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str())
    }
}

fn finite_mean(v: &[f64]) -> Option<f64> {
    let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    (!f.is_empty()).then(|| f.iter().sum::<f64>() / f.len() as f64)
}

fn power_summary(s: &mut String, prefix: &str, result: &SweepResult) {
    for (name, v) in [("p_los", result.p_los()), ("p_ris", result.p_ris()), ("p_total", result.p_total())] {
        let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
        let _ = writeln!(s, "{prefix}{name}_finite_points={}", finite.len());
        if let Some(m) = finite_mean(&finite) {
            let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(s, "{prefix}{name}_mean_dbm={}", format_f64(m));
            let _ = writeln!(s, "{prefix}{name}_min_dbm={}", format_f64(min));
            let _ = writeln!(s, "{prefix}{name}_max_dbm={}", format_f64(max));
        }
    }
}

/// ECDF table of `p_los − p_ris` with the fitted Gaussian, plus summary lines.
fn ecdf_outputs(result: &SweepResult, summary: &mut String) -> Option<String> {
    let diff = los_minus_ris_db(result);
    let ecdf = Ecdf::new(&diff).ok()?;
    let fit = fit_gaussian_cdf(&ecdf);
    let mut s = String::from(ECDF_HEADER);
    s.push('\n');
    for (x, f) in ecdf.steps() {
        let g = match &fit {
            Ok(fit) => normal_cdf((x - fit.coefficients[0]) / fit.coefficients[1]),
            Err(_) => f64::NAN,
        };
        let _ = writeln!(s, "{},{},{}", format_f64(x), format_f64(f), format_f64(g));
    }
    let _ = writeln!(summary, "diff_samples={}", ecdf.len());
    match fit {
        Ok(fit) => {
            let _ = writeln!(summary, "diff_gaussian_mu_db={}", format_f64(fit.coefficients[0]));
            let _ = writeln!(summary, "diff_gaussian_sigma_db={}", format_f64(fit.coefficients[1]));
            let _ = writeln!(summary, "diff_gaussian_rss={}", format_f64(fit.residual));
        }
        Err(e) => {
            let _ = writeln!(summary, "diff_gaussian_fit=unavailable ({e})");
        }
    }
    let _ = writeln!(summary, "diff_ecdf_at_0db={}", format_f64(ecdf.eval(0.0)));
    let _ = writeln!(summary, "diff_ecdf_at_3db={}", format_f64(ecdf.eval(3.0)));
    Some(s)
}

/// Runs the configured scenario and renders every output file.
///
/// Line sweeps produce `sweep.csv`; scenario C produces one
/// `coverage_<mode>.csv` per mode. Every run adds `summary.txt` and the
/// resolved-config sidecar `config.json`.
pub fn run(scene: &Scene, cfg: &ScenarioConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let mut summary = String::new();
    let _ = writeln!(summary, "scenario={}", cfg.scenario);
    if cfg.scenario.motion() == Motion::Grid {
        for &mode in &cfg.coverage_modes {
            let result = run_coverage(scene, cfg, mode)?;
            power_summary(&mut summary, &format!("{}_", mode.name()), &result);
            out.push(format!("coverage_{}.csv", mode.name()), sweep_csv(&result));
        }
    } else {
        let (result, traced) = run_sweep(scene, cfg)?;
        let _ = writeln!(summary, "points={}", result.rows.len());
        power_summary(&mut summary, "", &result);
        out.push("sweep.csv", sweep_csv(&result));
        if cfg.ris_enabled && cfg.scenario.motion() == Motion::UeAndRis {
            if let Some(table) = ecdf_outputs(&result, &mut summary) {
                out.push("ecdf.csv", table);
            }
        }
        if cfg.ris_enabled && !cfg.ris_sizes.is_empty() {
            let df1 = result.deep_fade_index().unwrap_or(0);
            let _ = writeln!(summary, "df1_index={df1}");
            let rows = ris_size_sweep(scene, cfg, &traced, df1, &cfg.ris_sizes)?;
            out.push("ris_sizes.csv", ris_sizes_csv(&rows));
        }
    }
    out.push("summary.txt", summary);
    out.push("config.json", cfg.to_json_pretty() + "\n");
    Ok(out)
}
