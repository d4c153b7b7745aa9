//! Total channel `h = h_s + Σ hr_n e^{jψ_n} ht_n` and received power.

use num_complex::Complex;

use crate::em::path_gain;
use crate::error::Result;
use crate::ris::{
    cascade, optimal_coeffs_aligned, random_coeffs_stream, segment_channel_from_paths, unit_coeffs,
    CoefficientPolicy, RisCoefficients, RisPanel, SegmentChannel,
};
use crate::scene::Scene;
use crate::tracer::{trace, PathFilter, PropagationPath, TraceConfig};
use crate::Point3;

/// `ptx + 20·log10|h|`, `-∞` for `h = 0`.
pub fn received_power_dbm(h: Complex<f64>, ptx_dbm: f64) -> f64 {
    let m = h.norm();
    if m == 0.0 {
        f64::NEG_INFINITY
    } else {
        ptx_dbm + 20.0 * m.log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathCounts {
    pub los: usize,
    pub tx_ris: usize,
    pub ris_rx: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub h_los: Complex<f64>,
    pub h_ris: Complex<f64>,
    pub h_total: Complex<f64>,
    pub p_los_dbm: f64,
    pub p_ris_dbm: f64,
    pub p_total_dbm: f64,
    pub path_counts: PathCounts,
}

/// Everything needed to evaluate one link apart from geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub freq_ghz: f64,
    pub ptx_dbm: f64,
    pub policy: CoefficientPolicy,
    /// Sub-stream for random coefficients (e.g. sweep index).
    pub stream: u64,
    pub filter: PathFilter,
}

/// Pre-traced geometry of one link.
#[derive(Debug, Clone, Copy)]
pub struct LinkPaths<'a> {
    pub direct: &'a [PropagationPath],
    /// `(tx → panel, panel → rx)` when a panel is present.
    pub ris: Option<(&'a [PropagationPath], &'a [PropagationPath])>,
}

/// Coefficients for `policy` given the segment channels and direct channel.
pub fn policy_coeffs(
    policy: CoefficientPolicy,
    stream: u64,
    ht: &SegmentChannel<f64>,
    hr: &SegmentChannel<f64>,
    h_los: Complex<f64>,
) -> Result<RisCoefficients<f64>> {
    Ok(match policy {
        CoefficientPolicy::Optimal => {
            let reference = if h_los.norm() > 0.0 { h_los.arg() } else { 0.0 };
            optimal_coeffs_aligned(ht, hr, reference)?
        }
        CoefficientPolicy::Unit => unit_coeffs(ht.len()),
        CoefficientPolicy::Random { seed } => random_coeffs_stream(ht.len(), seed, stream),
    })
}

/// Segment channels for a panel from its two traced path sets.
pub fn segment_channels(
    scene: &Scene,
    panel: &RisPanel<f64>,
    to_panel: &[PropagationPath],
    from_panel: &[PropagationPath],
    params: &LinkParams,
) -> Result<(SegmentChannel<f64>, SegmentChannel<f64>)> {
    let keep = |v: &[PropagationPath]| -> Vec<PropagationPath> {
        v.iter().filter(|p| params.filter.accepts(p)).cloned().collect()
    };
    let ht = segment_channel_from_paths(&keep(to_panel), panel, scene, params.freq_ghz)?;
    let hr = segment_channel_from_paths(&keep(from_panel), panel, scene, params.freq_ghz)?;
    Ok((ht, hr))
}

/// Coherent sum of path gains after filtering.
pub fn direct_channel(scene: &Scene, paths: &[PropagationPath], params: &LinkParams) -> Result<(Complex<f64>, usize)> {
    let mut h = Complex::new(0.0, 0.0);
    let mut n = 0;
    for p in paths.iter().filter(|p| params.filter.accepts(p)) {
        h += path_gain(p, scene, params.freq_ghz)?.amplitude;
        n += 1;
    }
    Ok((h, n))
}

/// Channel report from already-traced paths.
pub fn assemble(
    scene: &Scene,
    panel: Option<&RisPanel<f64>>,
    paths: LinkPaths<'_>,
    params: &LinkParams,
) -> Result<ChannelReport> {
    let (h_los, n_los) = direct_channel(scene, paths.direct, params)?;
    let mut counts = PathCounts {
        los: n_los,
        ..PathCounts::default()
    };
    let mut h_ris = Complex::new(0.0, 0.0);
    if let (Some(panel), Some((to, from))) = (panel, paths.ris) {
        let (ht, hr) = segment_channels(scene, panel, to, from, params)?;
        counts.tx_ris = ht.contributions.len();
        counts.ris_rx = hr.contributions.len();
        let coeffs = policy_coeffs(params.policy, params.stream, &ht, &hr, h_los)?;
        h_ris = cascade(&ht, &hr, &coeffs)?;
    }
    let h_total = h_los + h_ris;
    Ok(ChannelReport {
        h_los,
        h_ris,
        h_total,
        p_los_dbm: received_power_dbm(h_los, params.ptx_dbm),
        p_ris_dbm: received_power_dbm(h_ris, params.ptx_dbm),
        p_total_dbm: received_power_dbm(h_total, params.ptx_dbm),
        path_counts: counts,
    })
}

/// Traces the direct and (if a panel is given) both RIS segments, then assembles.
pub fn evaluate(
    scene: &Scene,
    tx: Point3,
    rx: Point3,
    panel: Option<&RisPanel<f64>>,
    cfg: &TraceConfig,
    params: &LinkParams,
) -> Result<ChannelReport> {
    let direct = trace(scene, tx, rx, cfg)?;
    let segments = match panel {
        Some(p) => Some((trace(scene, tx, p.center, cfg)?, trace(scene, p.center, rx, cfg)?)),
        None => None,
    };
    let ris = segments.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
    assemble(scene, panel, LinkPaths { direct: &direct, ris }, params)
}
