//! Fresnel reflection coefficients for a half-space of complex permittivity.
//!
//! Time convention `e^{+jωt}`: lossy media have `Im(ε) ≤ 0` and the root
//! `√(ε − sin²θ)` is taken with non-positive imaginary part so the
//! transmitted wave decays into the medium.
//!
//! The parallel coefficient refers the reflected field to the basis vector
//! `ŝ × d̂_r` (ŝ normal to the plane of incidence), i.e. the basis rotates
//! with the ray. In that basis a perfect conductor gives `Γ∥ = +1`, normal
//! incidence on ε = 4 gives `Γ∥ = +1/3` (the same physical field as
//! `Γ⊥ = −1/3`), and both coefficients tend to −1 at grazing incidence.

use num_complex::Complex;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair<T> {
    pub gamma_perp: Complex<T>,
    pub gamma_par: Complex<T>,
}

impl<T: Scalar> FresnelPair<T> {
    pub fn new(gamma_perp: Complex<T>, gamma_par: Complex<T>) -> Self {
        Self {
            gamma_perp,
            gamma_par,
        }
    }

    /// Same real coefficient for both polarizations.
    pub fn uniform(g: T) -> Self {
        let c = Complex::new(g, T::zero());
        Self::new(c, c)
    }

    /// Scalar reflection coefficient for an equal-weight Jones vector:
    /// magnitude is the RMS of the two magnitudes, phase is that of
    /// `Γ⊥ + Γ∥`.
    pub fn jones_averaged(&self) -> Complex<T> {
        let half = T::lit(0.5);
        let mag = ((self.gamma_perp.norm_sqr() + self.gamma_par.norm_sqr()) * half).sqrt();
        let sum = self.gamma_perp + self.gamma_par;
        let phase = if sum.norm_sqr() > T::zero() {
            sum.arg()
        } else {
            T::zero()
        };
        Complex::from_polar(mag, phase)
    }
}

/// Reflection coefficients at `incidence_angle` (radians from the normal).
pub fn fresnel<T: Scalar>(eps: Complex<T>, incidence_angle: T) -> FresnelPair<T> {
    let (s, c) = incidence_angle.sin_cos();
    let mut root = (eps - Complex::new(s * s, T::zero())).sqrt();
    if root.im > T::zero() {
        root = -root;
    }
    let c = Complex::new(c, T::zero());
    let gamma_perp = (c - root) / (c + root);
    let gamma_par = (eps * c - root) / (eps * c + root);
    FresnelPair {
        gamma_perp,
        gamma_par,
    }
}
