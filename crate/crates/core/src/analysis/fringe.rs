use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Dominant plane-wave ripple of a scalar field sampled on scattered points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fringe {
    /// Azimuth of the fringe normal in degrees, folded into `[0, 180)`.
    pub normal_azimuth_deg: f64,
    /// Cycles per meter.
    pub spatial_frequency: f64,
    /// Magnitude of the projection at the peak.
    pub strength: f64,
}

fn projection(xy: &[(f64, f64)], r: &[f64], kx: f64, ky: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    xy.iter()
        .zip(r)
        .fold(Complex::new(0.0, 0.0), |acc, (&(x, y), &v)| {
            acc + Complex::from_polar(v, -tau * (kx * x + ky * y))
        })
        .norm()
}

/// Finds the strongest spatial frequency above `min_frequency` after removing
/// the best-fit plane, by a coarse grid search refined around the peak.
pub fn dominant_fringe(xy: &[(f64, f64)], values: &[f64], min_frequency: f64, max_frequency: f64) -> Result<Fringe> {
    if xy.len() != values.len() || xy.len() < 4 {
        return Err(Error::Analysis("fringe analysis needs at least 4 matching samples".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Analysis("fringe analysis needs finite samples".into()));
    }
    if !(min_frequency >= 0.0 && max_frequency > min_frequency) {
        return Err(Error::Analysis("invalid fringe frequency band".into()));
    }
    let n = xy.len();
    let cx = xy.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let cy = xy.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let pts: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x - cx, y - cy)).collect();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0,
        _ => pts[i].1,
    });
    let b = DVector::from_column_slice(values);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Analysis(e.to_string()))?;
    let resid: Vec<f64> = (&b - &a * coef).iter().copied().collect();

    let coarse = max_frequency / 90.0;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let steps = (max_frequency / coarse).ceil() as i64;
    for i in -steps..=steps {
        // Half-plane only: (k) and (−k) give the same magnitude.
        for j in 0..=steps {
            let (kx, ky) = (i as f64 * coarse, j as f64 * coarse);
            let f = kx.hypot(ky);
            if f < min_frequency || f > max_frequency {
                continue;
            }
            let m = projection(&pts, &resid, kx, ky);
            if m > best.0 {
                best = (m, kx, ky);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Analysis("empty fringe frequency band".into()));
    }
    let mut step = coarse;
    for _ in 0..4 {
        let fine = step / 10.0;
        let (_, bx, by) = best;
        for i in -10..=10 {
            for j in -10..=10 {
                let (kx, ky) = (bx + i as f64 * fine, by + j as f64 * fine);
                let f = kx.hypot(ky);
                if f < min_frequency || f > max_frequency {
                    continue;
                }
                let m = projection(&pts, &resid, kx, ky);
                if m > best.0 {
                    best = (m, kx, ky);
                }
            }
        }
        step = fine;
    }
    let (strength, kx, ky) = best;
    Ok(Fringe {
        normal_azimuth_deg: fold_axis_deg(ky.atan2(kx).to_degrees()),
        spatial_frequency: kx.hypot(ky),
        strength,
    })
}

/// Folds an azimuth into `[0, 180)` so that opposite directions coincide.
pub fn fold_axis_deg(az: f64) -> f64 {
    let a = az.rem_euclid(180.0);
    if a >= 180.0 {
        0.0
    } else {
        a
    }
}

/// Smallest angle between two undirected axes, in degrees.
pub fn axis_difference_deg(a: f64, b: f64) -> f64 {
    let d = (fold_axis_deg(a) - fold_axis_deg(b)).abs();
    d.min(180.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_ripple() {
        let theta = 23.0f64.to_radians();
        let f0 = 2.7;
        let mut xy = Vec::new();
        let mut v = Vec::new();
        for iy in 0..31 {
            for ix in 0..31 {
                let (x, y) = (ix as f64 * 0.03, iy as f64 * 0.03);
                xy.push((x + 10.0, y - 4.0));
                let u = x * theta.cos() + y * theta.sin();
                v.push(0.4 * x - 0.2 * y + 0.5 * (std::f64::consts::TAU * f0 * u).cos());
            }
        }
        let f = dominant_fringe(&xy, &v, 0.5, 15.0).unwrap();
        assert!(axis_difference_deg(f.normal_azimuth_deg, 23.0) < 0.5, "{f:?}");
        assert!((f.spatial_frequency - f0).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn axes() {
        assert_eq!(fold_axis_deg(-163.5), 16.5);
        assert!((axis_difference_deg(179.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((axis_difference_deg(-10.0, 170.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dominant_fringe(&[(0.0, 0.0)], &[1.0], 0.1, 1.0).is_err());
        let xy = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        assert!(dominant_fringe(&xy, &[1.0, f64::NAN, 0.0, 0.0], 0.1, 1.0).is_err());
    }
}
