//! Electromagnetic primitives: material reflection, polarization tracking,
//! wedge diffraction and free-space propagation.

mod fresnel;
mod gain;
mod jones;
mod utd;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{wavelength, wavenumber, Scalar};

pub use fresnel::{fresnel, FresnelPair};
pub use gain::{path_gain, PathGain};
pub use jones::{vh_frame, JonesField};
pub use utd::{diffraction_coefficients, fresnel_integrals, transition_function, WedgeGeometry};

/// Complex free-space gain `λ/(4πd)·e^{−jkd}` between isotropic antennas.
pub fn free_space_gain<T: Scalar>(distance: T, freq_ghz: T) -> Result<Complex<T>> {
    if !(distance > T::zero()) || !distance.is_finite() {
        return Err(Error::NonPositiveDistance(distance.to_f64().unwrap_or(f64::NAN)));
    }
    let lambda = wavelength(freq_ghz);
    let mag = lambda / (T::lit(4.0) * T::PI() * distance);
    let phase = -wavenumber(freq_ghz) * distance;
    Ok(Complex::from_polar(mag, phase))
}

/// Free-space path loss in dB.
pub fn free_space_loss_db<T: Scalar>(distance: T, freq_ghz: T) -> Result<T> {
    let g = free_space_gain(distance, freq_ghz)?;
    Ok(-T::lit(20.0) * g.norm().log10())
}
