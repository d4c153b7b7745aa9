//! ITU-R P.2040 style material model: ε′ = a·f^b, σ = c·f^d with f in GHz.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub eps_a: f64,
    pub eps_b: f64,
    pub sigma_c: f64,
    pub sigma_d: f64,
    /// Validity range in GHz, inclusive.
    pub valid_freq_ghz: (f64, f64),
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        eps_a: f64,
        eps_b: f64,
        sigma_c: f64,
        sigma_d: f64,
        valid_freq_ghz: (f64, f64),
    ) -> Result<Self> {
        let name = name.into();
        let m = Self {
            name,
            eps_a,
            eps_b,
            sigma_c,
            sigma_d,
            valid_freq_ghz,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps_a, self.eps_b, self.sigma_c, self.sigma_d]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidScene(format!(
                "material `{}` has non-finite constants",
                self.name
            )));
        }
        if self.eps_a < 1.0 {
            return Err(Error::InvalidScene(format!(
                "material `{}`: permittivity coefficient a = {} < 1",
                self.name, self.eps_a
            )));
        }
        if self.sigma_c < 0.0 {
            return Err(Error::InvalidScene(format!(
                "material `{}`: conductivity coefficient c = {} < 0",
                self.name, self.sigma_c
            )));
        }
        let (lo, hi) = self.valid_freq_ghz;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidScene(format!(
                "material `{}`: bad frequency range [{lo}, {hi}]",
                self.name
            )));
        }
        Ok(())
    }

    /// ITU-R P.2040 concrete.
    pub fn concrete() -> Self {
        Self {
            name: "concrete".into(),
            eps_a: 5.24,
            eps_b: 0.0,
            sigma_c: 0.0462,
            sigma_d: 0.7822,
            valid_freq_ghz: (1.0, 100.0),
        }
    }

    /// ITU-R P.2040 brick.
    pub fn brick() -> Self {
        Self {
            name: "brick".into(),
            eps_a: 3.91,
            eps_b: 0.0,
            sigma_c: 0.0238,
            sigma_d: 0.16,
            valid_freq_ghz: (1.0, 40.0),
        }
    }

    fn check_freq(&self, freq_ghz: f64) -> Result<()> {
        let (lo, hi) = self.valid_freq_ghz;
        if !(freq_ghz >= lo && freq_ghz <= hi) {
            return Err(Error::FrequencyOutOfRange {
                material: self.name.clone(),
                freq_ghz,
                min_ghz: lo,
                max_ghz: hi,
            });
        }
        Ok(())
    }

    /// Conductivity σ(f) in S/m.
    pub fn conductivity(&self, freq_ghz: f64) -> Result<f64> {
        self.check_freq(freq_ghz)?;
        Ok(self.sigma_c * freq_ghz.powf(self.sigma_d))
    }

    pub fn permittivity<T: Scalar>(&self, freq_ghz: T) -> Result<Complex<T>> {
        itu_permittivity(self, freq_ghz)
    }
}

/// Complex relative permittivity `ε′ − jε″` with `ε″ = 17.98·σ/f_GHz`
/// (time convention `e^{+jωt}`, so the imaginary part is never positive).
pub fn itu_permittivity<T: Scalar>(material: &Material, freq_ghz: T) -> Result<Complex<T>> {
    let f = freq_ghz.to_f64().unwrap_or(f64::NAN);
    let sigma = material.conductivity(f)?;
    let real = T::lit(material.eps_a) * freq_ghz.powf(T::lit(material.eps_b));
    let imag = T::lit(17.98 * sigma) / freq_ghz;
    Ok(Complex::new(real, -imag))
}
