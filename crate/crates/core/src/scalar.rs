//! Floating-point abstraction shared by the numeric kernels.
//!
//! The electromagnetic, RIS and closed-form oracle routines are written
//! against [`Scalar`] so they can run in `f32` for quick sweeps or `f64`
//! for validation. Scene handling and the tracer are `f64` only.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the generic numeric kernels (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength in meters for a carrier frequency in GHz.
#[inline]
pub fn wavelength<T: Scalar>(freq_ghz: T) -> T {
    T::lit(SPEED_OF_LIGHT) / (freq_ghz * T::lit(1e9))
}

/// Free-space wavenumber 2π/λ (rad/m).
#[inline]
pub fn wavenumber<T: Scalar>(freq_ghz: T) -> T {
    T::two() * T::PI() / wavelength(freq_ghz)
}

/// Wraps an angle into `[-π, π)`.
#[inline]
pub fn wrap_phase<T: Scalar>(x: T) -> T {
    let two_pi = T::two() * T::PI();
    let w = x - two_pi * ((x + T::PI()) / two_pi).floor();
    // floor() rounding can land exactly on +π
    if w >= T::PI() {
        w - two_pi
    } else {
        w
    }
}

/// `e^{jθ}`.
#[inline]
pub fn cis<T: Scalar>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}
