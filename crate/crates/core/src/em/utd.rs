//! Uniform theory of diffraction for a wedge with finite-conductivity faces.
//!
//! Kouyoumjian–Pathak coefficients with the face reflection coefficients
//! inserted in the image terms. Angles are measured around the edge from
//! face 0 through free space; face n sits at `nπ`.

use num_complex::Complex;

use crate::scalar::Scalar;

use super::fresnel::FresnelPair;

/// Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt` and `S(x)` likewise with sine.
pub fn fresnel_integrals<T: Scalar>(x: T) -> (T, T) {
    let ax = x.abs();
    let (c, s) = if ax <= T::lit(1.5) {
        series(ax)
    } else {
        let (gc, gs) = complement(ax);
        (T::lit(0.5) - gc, T::lit(0.5) - gs)
    };
    if x < T::zero() {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series<T: Scalar>(x: T) -> (T, T) {
    if x < T::min_positive_value().sqrt() {
        return (x, T::zero());
    }
    let fact = T::FRAC_PI_2() * x * x;
    let (mut sum, mut sum_s, mut sum_c) = (T::zero(), T::zero(), x);
    let mut sign = T::one();
    let mut term = x;
    let mut odd = true;
    let mut n = T::lit(3.0);
    for k in 1..200 {
        term = term * fact / T::from_usize_lossy(k);
        sum = sum + sign * term / n;
        let test = sum.abs() * T::epsilon();
        if odd {
            sign = -sign;
            sum_s = sum;
            sum = sum_c;
        } else {
            sum_c = sum;
            sum = sum_s;
        }
        if term < test {
            break;
        }
        odd = !odd;
        n = n + T::two();
    }
    (sum_c, sum_s)
}

/// `(½ − C(x), ½ − S(x))` for `x > 0` via the continued fraction.
fn complement<T: Scalar>(x: T) -> (T, T) {
    let eps = T::epsilon();
    let tiny = T::lit(1e-30);
    let pix2 = T::PI() * x * x;
    let one = Complex::new(T::one(), T::zero());
    let mut b = Complex::new(T::one(), -pix2);
    let mut cc = one / Complex::new(tiny, T::zero());
    let mut d = one / b;
    let mut h = d;
    let mut n = -T::one();
    for _ in 0..400 {
        n = n + T::two();
        let a = -n * (n + T::one());
        b = b + Complex::new(T::lit(4.0), T::zero());
        d = one / (d * a + b);
        cc = b + Complex::new(a, T::zero()) / cc;
        let del = cc * d;
        h = h * del;
        if (del.re - T::one()).abs() + del.im.abs() < eps {
            break;
        }
    }
    h = h * Complex::new(x, -x);
    let half = T::lit(0.5);
    let g = Complex::new(half, half) * Complex::new((half * pix2).cos(), (half * pix2).sin()) * h;
    (g.re, g.im)
}

/// Transition function `F(X) = 2j√X e^{jX} ∫_{√X}^∞ e^{−jτ²} dτ` for `X ≥ 0`.
pub fn transition_function<T: Scalar>(x: T) -> Complex<T> {
    let x = x.max(T::zero());
    if x > T::lit(1e6) {
        let j = Complex::new(T::zero(), T::one());
        let r = T::one() / x;
        return Complex::new(T::one(), T::zero()) + j * (r * T::lit(0.5))
            - Complex::new(T::lit(0.75) * r * r, T::zero())
            - j * (T::lit(15.0 / 8.0) * r * r * r);
    }
    let sq = x.sqrt();
    let w = sq * (T::two() / T::PI()).sqrt();
    let (gc, gs) = if w > T::lit(1.5) {
        complement(w)
    } else {
        let (c, s) = series(w);
        (T::lit(0.5) - c, T::lit(0.5) - s)
    };
    // ∫_{√X}^∞ e^{−jτ²} dτ = √(π/2)·[(½ − C) − j(½ − S)]
    let tail = Complex::new(gc, -gs) * T::FRAC_PI_2().sqrt();
    let j2 = Complex::new(T::zero(), T::two() * sq);
    j2 * Complex::new(x.cos(), x.sin()) * tail
}

/// Geometry of one diffraction in edge-fixed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeGeometry<T> {
    /// Exterior wedge angle divided by π.
    pub n: T,
    /// Angle of the incident direction (pointing back to the source).
    pub phi_inc: T,
    /// Angle of the diffracted direction.
    pub phi_obs: T,
    /// Angle between the incident ray and the edge.
    pub beta0: T,
    /// Distance source to edge.
    pub s_inc: T,
    /// Distance edge to observer.
    pub s_obs: T,
}

impl<T: Scalar> WedgeGeometry<T> {
    /// Incidence angles from the face normals for the two image terms.
    pub fn face_incidence_angles(&self) -> (T, T) {
        let half_pi = T::FRAC_PI_2();
        let clamp = |grazing: T| (half_pi - grazing).abs().min(half_pi - T::lit(1e-9));
        (
            clamp(self.phi_inc),
            clamp(self.n * T::PI() - self.phi_obs),
        )
    }

    /// Spherical-wave spreading factor `√(s'/(s(s + s')))`.
    pub fn spreading(&self) -> T {
        (self.s_inc / (self.s_obs * (self.s_obs + self.s_inc))).sqrt()
    }
}

/// Soft (E parallel to the edge) and hard diffraction coefficients.
///
/// `r0` and `rn` are the reflection coefficients of face 0 and face n at the
/// angles from [`WedgeGeometry::face_incidence_angles`]; soft uses `Γ⊥`,
/// hard uses `Γ∥`.
pub fn diffraction_coefficients<T: Scalar>(
    k: T,
    g: &WedgeGeometry<T>,
    r0: FresnelPair<T>,
    rn: FresnelPair<T>,
) -> (Complex<T>, Complex<T>) {
    let pi = T::PI();
    let n = g.n;
    let sin_b = g.beta0.sin();
    let l = g.s_inc * g.s_obs * sin_b * sin_b / (g.s_inc + g.s_obs);
    let kl = k * l;
    let e_mj4 = Complex::new(T::FRAC_PI_4().cos(), -T::FRAC_PI_4().sin());
    let pref = -e_mj4 / (T::two() * n * (T::two() * pi * k).sqrt() * sin_b);

    let term = |sign: T, beta: T| -> Complex<T> {
        let arg = (pi + sign * beta) / (T::two() * n);
        let sin_a = arg.sin();
        let big_n = ((beta + sign * pi) / (T::two() * pi * n)).round();
        if sin_a.abs() < T::lit(1e-10) {
            // shadow or reflection boundary: average of the one-sided limits
            return Complex::new(T::zero(), T::zero());
        }
        let c = (T::two() * n * pi * big_n - beta) * T::lit(0.5);
        let a = T::two() * c.cos() * c.cos();
        transition_function(kl * a) * (arg.cos() / sin_a)
    };

    let d = g.phi_obs - g.phi_inc;
    let s = g.phi_obs + g.phi_inc;
    let one = T::one();
    let t1 = term(one, d);
    let t2 = term(-one, d);
    let t3 = term(-one, s);
    let t4 = term(one, s);
    let soft = pref * (t1 + t2 + r0.gamma_perp * t3 + rn.gamma_perp * t4);
    let hard = pref * (t1 + t2 + r0.gamma_par * t3 + rn.gamma_par * t4);
    (soft, hard)
}
