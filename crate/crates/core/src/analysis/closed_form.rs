use num_complex::Complex;

use crate::em::fresnel;
use crate::error::Result;
use crate::scalar::{wavelength, wavenumber, Scalar};
use crate::scene::Material;

fn free_space<T: Scalar>(d: T, freq_ghz: T) -> Complex<T> {
    let lambda = wavelength(freq_ghz);
    Complex::from_polar(lambda / (T::lit(4.0) * T::PI() * d), -wavenumber(freq_ghz) * d)
}

/// Two-ray field with a caller-supplied ground coefficient `Γ(θ)` (θ from the normal).
pub fn two_ray_gain_with<T: Scalar>(
    d: T,
    h_t: T,
    h_r: T,
    freq_ghz: T,
    gamma: impl Fn(T) -> Complex<T>,
) -> Complex<T> {
    let d1 = (d * d + (h_t - h_r) * (h_t - h_r)).sqrt();
    let d2 = (d * d + (h_t + h_r) * (h_t + h_r)).sqrt();
    let theta = d.atan2(h_t + h_r);
    free_space(d1, freq_ghz) + gamma(theta) * free_space(d2, freq_ghz)
}

/// Classical two-ray power (dB relative to transmit) over a dielectric ground
/// using the polarization-averaged Fresnel coefficient.
pub fn two_ray_power<T: Scalar>(d: T, h_t: T, h_r: T, freq_ghz: T, ground: &Material) -> Result<T> {
    let eps = ground.permittivity(freq_ghz)?;
    let g = two_ray_gain_with(d, h_t, h_r, freq_ghz, |th| fresnel(eps, th).jones_averaged());
    Ok(T::lit(20.0) * g.norm().log10())
}

/// Free-space cascade amplitude with co-phased elements: `N·λ²/((4π)²·d_t·d_r)`.
pub fn ris_cascade_closed_form<T: Scalar>(n: usize, d_t: T, d_r: T, freq_ghz: T) -> T {
    let lambda = wavelength(freq_ghz);
    let four_pi = T::lit(4.0) * T::PI();
    T::from_usize_lossy(n) * (lambda / (four_pi * d_t)) * (lambda / (four_pi * d_r))
}

/// Friis power gain in dB.
pub fn friis_db<T: Scalar>(d: T, freq_ghz: T) -> T {
    T::lit(20.0) * free_space(d, freq_ghz).norm().log10()
}
