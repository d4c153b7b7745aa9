use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::Ecdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    GaussianCdf,
    Polynomial(usize),
    LogLogLine,
}

/// Fitted coefficients with the residual sum of squares.
///
/// Gaussian: `[μ, σ]`; polynomial: ascending powers; log-log line:
/// `[intercept, slope]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub kind: FitKind,
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

impl FitResult {
    pub fn eval_polynomial(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Least-squares fit of `Φ((x − μ)/σ)` to the ECDF, evaluated at the
/// midpoint of the jump at each distinct sample value.
pub fn fit_gaussian_cdf(ecdf: &Ecdf) -> Result<FitResult> {
    let xs = ecdf.samples();
    if xs.len() < 3 {
        return Err(Error::Analysis("Gaussian fit needs at least 3 samples".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Analysis("Gaussian fit of a zero-variance sample".into()));
    }
    let mut pts = ecdf.steps();
    let mut below = 0.0;
    for p in pts.iter_mut() {
        let top = p.1;
        p.1 = 0.5 * (below + top);
        below = top;
    }
    let rss = |mu: f64, sigma: f64| -> f64 {
        pts.iter()
            .map(|&(x, f)| (normal_cdf((x - mu) / sigma) - f).powi(2))
            .sum()
    };
    let (mut mu, mut sigma) = (mean, var.sqrt());
    let mut cost = rss(mu, sigma);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        // normal equations of the Gauss-Newton step
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, f) in &pts {
            let z = (x - mu) / sigma;
            let r = normal_cdf(z) - f;
            let p = normal_pdf(z);
            let j1 = -p / sigma;
            let j2 = -p * z / sigma;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 += j1 * r;
            b2 += j2 * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (d11, d22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
            let det = d11 * d22 - a12 * a12;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let dmu = -(d22 * b1 - a12 * b2) / det;
            let dsig = -(d11 * b2 - a12 * b1) / det;
            let (m2, s2) = (mu + dmu, sigma + dsig);
            if s2 > 0.0 {
                let c2 = rss(m2, s2);
                if c2 < cost {
                    let rel = (cost - c2) / cost.max(1e-300);
                    mu = m2;
                    sigma = s2;
                    cost = c2;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = rel > 1e-14;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(FitResult {
        kind: FitKind::GaussianCdf,
        coefficients: vec![mu, sigma],
        residual: cost,
    })
}

/// Ordinary least squares polynomial of `degree` (ascending coefficients).
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() <= degree {
        return Err(Error::Analysis(format!(
            "degree-{degree} fit needs more than {degree} points, got {}",
            x.len()
        )));
    }
    let m = x.len();
    let cols = degree + 1;
    let mut a = DMatrix::from_fn(m, cols, |i, j| x[i].powi(j as i32));
    let scale: Vec<f64> = (0..cols)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::Analysis(format!(
            "rank-deficient degree-{degree} polynomial fit"
        )));
    }
    let b = DVector::from_column_slice(y);
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Analysis(e.to_string()))?;
    let coefficients: Vec<f64> = sol.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let fit = FitResult {
        kind: FitKind::Polynomial(degree),
        coefficients,
        residual: 0.0,
    };
    let residual = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (fit.eval_polynomial(xi) - yi).powi(2))
        .sum();
    Ok(FitResult { residual, ..fit })
}

fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Analysis("line fit needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Analysis("line fit with constant abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(a, b)| (intercept + slope * a - b).powi(2))
        .sum();
    Ok((intercept, slope, rss))
}

/// Straight line through `(log10 x, log10 y)`; the slope is the power-law exponent.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Analysis("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let (a, b, rss) = line_fit(&lx, &ly)?;
    Ok(FitResult {
        kind: FitKind::LogLogLine,
        coefficients: vec![a, b],
        residual: rss,
    })
}

/// Regression slope of a dB quantity per doubling of `x`.
pub fn db_per_octave(x: &[f64], y_db: &[f64]) -> Result<f64> {
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Analysis("octave slope needs positive abscissae".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    Ok(line_fit(&lx, y_db)?.1)
}

/// Best `C` in `p ≈ C/(d_t²·d_r²)` and the residual as a fraction of the
/// variance of `p`.
pub fn fit_inverse_square_product(dt: &[f64], dr: &[f64], p: &[f64]) -> Result<(f64, f64)> {
    if dt.len() != p.len() || dr.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: dt.len().min(dr.len()),
        });
    }
    if p.len() < 2 {
        return Err(Error::Analysis("placement fit needs at least 2 points".into()));
    }
    let u: Vec<f64> = dt.iter().zip(dr).map(|(a, b)| 1.0 / (a * a * b * b)).collect();
    let c = u.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / u.iter().map(|a| a * a).sum::<f64>();
    let n = p.len() as f64;
    let mean = p.iter().sum::<f64>() / n;
    let var: f64 = p.iter().map(|v| (v - mean).powi(2)).sum();
    let rss: f64 = u.iter().zip(p).map(|(a, b)| (c * a - b).powi(2)).sum();
    let frac = if var > 0.0 { rss / var } else { 0.0 };
    Ok((c, frac))
}
