//! Complex gain of one traced path.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{wavelength, wavenumber};
use crate::scene::Scene;
use crate::tracer::{Interaction, PropagationPath};

use super::{diffraction_coefficients, fresnel, FresnelPair, JonesField, WedgeGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGain {
    pub amplitude: Complex<f64>,
}

impl PathGain {
    pub fn magnitude(&self) -> f64 {
        self.amplitude.norm()
    }

    pub fn gain_db(&self) -> f64 {
        20.0 * self.amplitude.norm().log10()
    }

    pub fn phase(&self) -> f64 {
        self.amplitude.arg()
    }
}

fn incidence_angle(dir: crate::Point3, normal: crate::Point3) -> f64 {
    dir.dot(normal).abs().clamp(0.0, 1.0).acos()
}

/// Complex amplitude of `path` between isotropic antennas.
///
/// Spreading follows the unfolded length (or the caustic-corrected form
/// after a diffraction); polarization is tracked as a Jones pair from an
/// equal-weight V/H transmitter and reduced at the receiver to the norm of
/// the field with the phase of its co-polarized projection.
pub fn path_gain(path: &PropagationPath, scene: &Scene, freq_ghz: f64) -> Result<PathGain> {
    let lambda = wavelength(freq_ghz);
    let k = wavenumber(freq_ghz);
    let v = &path.vertices;
    let seg_dir = |i: usize| -> Result<crate::Point3> {
        (v[i + 1] - v[i])
            .try_normalize(1e-12)
            .ok_or(Error::DegenerateFrame)
    };
    let mut field = JonesField::transmit(seg_dir(0)?);
    let mut spread = lambda / (4.0 * std::f64::consts::PI * path.length);
    let mut travelled = v[0].distance(v[1]);
    for (i, inter) in path.interactions.iter().enumerate() {
        let d_in = seg_dir(i)?;
        let d_out = seg_dir(i + 1)?;
        match *inter {
            Interaction::Reflection(f) => {
                let face = scene.face(f);
                let eps = face_permittivity(scene, face.material, freq_ghz)?;
                let pair = fresnel(eps, incidence_angle(d_in, face.normal()));
                field = field.reflect(pair, face.normal())?;
                field.dir = d_out;
            }
            Interaction::Diffraction(eid) => {
                let e = scene.edge(eid);
                let edge_dir = e.direction();
                let s_inc = travelled;
                let s_obs = path.length - travelled;
                let sin_b = edge_dir.cross(d_in).norm();
                if sin_b < 1e-9 {
                    return Err(Error::DegenerateFrame);
                }
                let geom = WedgeGeometry {
                    n: e.exterior_n,
                    phi_inc: e.angle_of(-d_in),
                    phi_obs: e.angle_of(d_out),
                    beta0: sin_b.clamp(0.0, 1.0).asin(),
                    s_inc,
                    s_obs,
                };
                let (th0, thn) = geom.face_incidence_angles();
                let m0 = scene.face(e.face0).material;
                let mn = scene.face(e.face_n).material;
                let r0: FresnelPair<f64> = fresnel(face_permittivity(scene, m0, freq_ghz)?, th0);
                let rn: FresnelPair<f64> = fresnel(face_permittivity(scene, mn, freq_ghz)?, thn);
                let (ds, dh) = diffraction_coefficients(k, &geom, r0, rn);
                let phi_in = edge_dir.cross(d_in).normalize();
                let beta_in = phi_in.cross(d_in);
                let phi_out = edge_dir
                    .cross(d_out)
                    .try_normalize(1e-12)
                    .ok_or(Error::DegenerateFrame)?;
                let beta_out = phi_out.cross(d_out);
                field = JonesField {
                    dir: d_out,
                    e1: beta_out,
                    e2: phi_out,
                    c1: ds * field.component(beta_in),
                    c2: dh * field.component(phi_in),
                };
                // (λ/4π)·(1/s')·√(s'/(s(s+s'))) replaces λ/(4π(s+s'))
                spread = lambda / (4.0 * std::f64::consts::PI)
                    / (s_inc * s_obs * (s_inc + s_obs)).sqrt();
            }
        }
        travelled += v[i + 1].distance(v[i + 2]);
    }
    let c = field.project_receiver();
    let pol_phase = if c.norm() > 1e-9 * field.norm() {
        c.arg()
    } else if field.c1.norm() >= field.c2.norm() {
        field.c1.arg()
    } else {
        field.c2.arg()
    };
    let mag = spread * field.norm();
    Ok(PathGain {
        amplitude: Complex::from_polar(mag, -k * path.length + pol_phase),
    })
}

fn face_permittivity(scene: &Scene, material: usize, freq_ghz: f64) -> Result<Complex<f64>> {
    scene.material(material).permittivity(freq_ghz)
}
