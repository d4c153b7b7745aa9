//! Reconfigurable intelligent surface: lattice geometry, steering vectors,
//! per-element segment channels, coefficient policies and the cascade sum.

use std::io::Write;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::em::path_gain;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::{cis, wavenumber, wrap_phase, Scalar};
use crate::scene::Scene;
use crate::tracer::PropagationPath;

/// Planar rectangular array of phase-only elements.
///
/// Azimuth is measured from +x towards +y; the tilt raises the normal above
/// the horizon. Element `n = row·cols + col` sits at
/// `(col − (cols−1)/2)·u + (row − (rows−1)/2)·v` times the spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisPanel<T> {
    pub center: Vec3<T>,
    pub boresight_azimuth: T,
    pub elevation_tilt: T,
    pub rows: usize,
    pub cols: usize,
    pub spacing: T,
}

impl<T: Scalar> RisPanel<T> {
    pub fn new(
        center: Vec3<T>,
        boresight_azimuth: T,
        elevation_tilt: T,
        rows: usize,
        cols: usize,
        spacing: T,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("RIS needs at least one element".into()));
        }
        if !(spacing > T::zero() && spacing.is_finite()) {
            return Err(Error::InvalidConfig(format!("RIS spacing must be positive, got {spacing}")));
        }
        if !center.is_finite() || !boresight_azimuth.is_finite() || !elevation_tilt.is_finite() {
            return Err(Error::InvalidConfig("RIS pose must be finite".into()));
        }
        Ok(Self {
            center,
            boresight_azimuth,
            elevation_tilt,
            rows,
            cols,
            spacing,
        })
    }

    /// Square panel of `n` elements; `n` must be a perfect square.
    pub fn square(center: Vec3<T>, azimuth: T, tilt: T, n: usize, spacing: T) -> Result<Self> {
        let side = (n as f64).sqrt().round() as usize;
        if side * side != n {
            return Err(Error::InvalidConfig(format!(
                "square RIS needs a square element count, got {n}"
            )));
        }
        Self::new(center, azimuth, tilt, side, side, spacing)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn normal(&self) -> Vec3<T> {
        let (sa, ca) = self.boresight_azimuth.sin_cos();
        let (se, ce) = self.elevation_tilt.sin_cos();
        Vec3::new(ce * ca, ce * sa, se)
    }

    /// In-plane horizontal lattice axis (columns).
    pub fn u_axis(&self) -> Vec3<T> {
        let (sa, ca) = self.boresight_azimuth.sin_cos();
        Vec3::new(-sa, ca, T::zero())
    }

    /// In-plane lattice axis along the tilted vertical (rows).
    pub fn v_axis(&self) -> Vec3<T> {
        let (sa, ca) = self.boresight_azimuth.sin_cos();
        let (se, ce) = self.elevation_tilt.sin_cos();
        Vec3::new(-se * ca, -se * sa, ce)
    }

    pub fn row_col(&self, n: usize) -> (usize, usize) {
        (n / self.cols, n % self.cols)
    }

    pub fn element_offset(&self, n: usize) -> Vec3<T> {
        let (r, c) = self.row_col(n);
        let half = T::lit(0.5);
        let cu = T::from_usize_lossy(c) - T::from_usize_lossy(self.cols - 1) * half;
        let rv = T::from_usize_lossy(r) - T::from_usize_lossy(self.rows - 1) * half;
        (self.u_axis() * cu + self.v_axis() * rv) * self.spacing
    }

    pub fn element_position(&self, n: usize) -> Vec3<T> {
        self.center + self.element_offset(n)
    }

    /// Half-isotropic element pattern: 1 in front of the panel, 0 behind.
    pub fn element_pattern(&self, direction: Vec3<T>) -> T {
        if direction.dot(self.normal()) > T::zero() {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// Per-element phasors `e^{jk·p_n·û}` for a plane wave whose source lies
/// along `direction` as seen from the panel.
pub fn steering_phase<T: Scalar>(panel: &RisPanel<T>, direction: Vec3<T>, freq_ghz: T) -> Vec<Complex<T>> {
    let k = wavenumber(freq_ghz);
    (0..panel.len())
        .map(|n| cis(k * panel.element_offset(n).dot(direction)))
        .collect()
}

/// One path's contribution at the panel center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathContribution<T> {
    pub gain: Complex<T>,
    /// Unit vector from the panel towards the path's neighbouring vertex.
    pub direction: Vec3<T>,
    pub accepted: bool,
}

/// Channel between one endpoint and every element of the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentChannel<T> {
    pub per_element: Vec<Complex<T>>,
    pub contributions: Vec<PathContribution<T>>,
}

impl<T: Scalar> SegmentChannel<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            per_element: vec![Complex::new(T::zero(), T::zero()); n],
            contributions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.per_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_element.is_empty()
    }
}

/// Builds the per-element channel from `(gain at center, direction)` pairs.
pub fn segment_channel<T: Scalar>(
    rays: &[(Complex<T>, Vec3<T>)],
    panel: &RisPanel<T>,
    freq_ghz: T,
) -> SegmentChannel<T> {
    let mut ch = SegmentChannel::zeros(panel.len());
    for &(gain, dir) in rays {
        let accepted = panel.element_pattern(dir) > T::zero();
        if accepted {
            for (acc, s) in ch.per_element.iter_mut().zip(steering_phase(panel, dir, freq_ghz)) {
                *acc = *acc + gain * s;
            }
        }
        ch.contributions.push(PathContribution {
            gain,
            direction: dir,
            accepted,
        });
    }
    ch
}

/// Per-element channel from traced paths that start or end at the panel center.
pub fn segment_channel_from_paths(
    paths: &[PropagationPath],
    panel: &RisPanel<f64>,
    scene: &Scene,
    freq_ghz: f64,
) -> Result<SegmentChannel<f64>> {
    let mut rays = Vec::with_capacity(paths.len());
    for p in paths {
        let dir = if p.source().distance(panel.center) < 1e-9 {
            p.departure_dir
        } else if p.destination().distance(panel.center) < 1e-9 {
            -p.arrival_dir
        } else {
            return Err(Error::InvalidPosition(
                "segment path does not touch the panel center".into(),
            ));
        };
        rays.push((path_gain(p, scene, freq_ghz)?.amplitude, dir));
    }
    Ok(segment_channel(&rays, panel, freq_ghz))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum CoefficientPolicy {
    #[default]
    Optimal,
    Unit,
    Random {
        seed: u64,
    },
}

impl CoefficientPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            CoefficientPolicy::Optimal => "optimal",
            CoefficientPolicy::Unit => "unit",
            CoefficientPolicy::Random { .. } => "random",
        }
    }
}

/// Phase-only coefficients `e^{jψ_n}`, `ψ_n ∈ [−π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisCoefficients<T> {
    pub phases: Vec<T>,
    pub policy: CoefficientPolicy,
}

impl<T: Scalar> RisCoefficients<T> {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Coefficients that co-phase every element term `hr_n·e^{jψ_n}·ht_n`.
pub fn optimal_coeffs<T: Scalar>(ht: &SegmentChannel<T>, hr: &SegmentChannel<T>) -> Result<RisCoefficients<T>> {
    optimal_coeffs_aligned(ht, hr, T::zero())
}

/// As [`optimal_coeffs`] with the co-phased sum rotated to `reference` rad
/// (used to add the RIS term in phase with the direct channel).
pub fn optimal_coeffs_aligned<T: Scalar>(
    ht: &SegmentChannel<T>,
    hr: &SegmentChannel<T>,
    reference: T,
) -> Result<RisCoefficients<T>> {
    check_len(ht.len(), hr.len())?;
    let phases = ht
        .per_element
        .iter()
        .zip(&hr.per_element)
        .map(|(t, r)| {
            if t.norm_sqr() == T::zero() || r.norm_sqr() == T::zero() {
                T::zero()
            } else {
                wrap_phase(reference - r.arg() - t.arg())
            }
        })
        .collect();
    Ok(RisCoefficients {
        phases,
        policy: CoefficientPolicy::Optimal,
    })
}

pub fn unit_coeffs<T: Scalar>(n: usize) -> RisCoefficients<T> {
    RisCoefficients {
        phases: vec![T::zero(); n],
        policy: CoefficientPolicy::Unit,
    }
}

/// I.i.d. uniform phases from a ChaCha8 stream keyed by `seed`.
pub fn random_coeffs<T: Scalar>(n: usize, seed: u64) -> RisCoefficients<T> {
    random_coeffs_stream(n, seed, 0)
}

/// Independent sub-stream of [`random_coeffs`] (e.g. one per sweep point).
pub fn random_coeffs_stream<T: Scalar>(n: usize, seed: u64, stream: u64) -> RisCoefficients<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let pi = std::f64::consts::PI;
    let phases = (0..n)
        .map(|_| wrap_phase(T::lit(rng.random_range(-pi..pi))))
        .collect();
    RisCoefficients {
        phases,
        policy: CoefficientPolicy::Random { seed },
    }
}

/// `Σ_n hr_n · e^{jψ_n} · ht_n`.
pub fn cascade<T: Scalar>(
    ht: &SegmentChannel<T>,
    hr: &SegmentChannel<T>,
    coeffs: &RisCoefficients<T>,
) -> Result<Complex<T>> {
    check_len(ht.len(), hr.len())?;
    check_len(ht.len(), coeffs.len())?;
    Ok(ht
        .per_element
        .iter()
        .zip(&hr.per_element)
        .zip(&coeffs.phases)
        .fold(Complex::new(T::zero(), T::zero()), |acc, ((t, r), &psi)| {
            acc + *r * cis(psi) * *t
        }))
}

/// Writes `element,row,col,phase_rad` rows.
pub fn write_coefficients_csv<T: Scalar, W: Write>(
    panel: &RisPanel<T>,
    coeffs: &RisCoefficients<T>,
    mut out: W,
) -> Result<()> {
    check_len(panel.len(), coeffs.len())?;
    writeln!(out, "element,row,col,phase_rad")?;
    for (n, psi) in coeffs.phases.iter().enumerate() {
        let (r, c) = panel.row_col(n);
        writeln!(out, "{n},{r},{c},{psi}")?;
    }
    Ok(())
}
