//! Two-component polarization bookkeeping along a ray.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Scalar;

use super::fresnel::FresnelPair;

/// Vertical/horizontal antenna frame for propagation direction `dir`.
///
/// `v` lies in the vertical plane containing `dir`; `h = dir × v`. For a
/// vertical `dir` the x axis replaces z as the reference.
pub fn vh_frame<T: Scalar>(dir: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let d = dir.normalize();
    let z = Vec3::unit_z();
    let eps = T::lit(1e-9);
    let v = match (z - d * z.dot(d)).try_normalize(eps) {
        Some(v) => v,
        None => {
            let x = Vec3::new(T::one(), T::zero(), T::zero());
            (x - d * x.dot(d)).normalize()
        }
    };
    (v, d.cross(v))
}

/// Transverse field `c1·e1 + c2·e2` travelling along `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesField<T> {
    pub dir: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub c1: Complex<T>,
    pub c2: Complex<T>,
}

impl<T: Scalar> JonesField<T> {
    /// Unit-power field with equal V and H components.
    pub fn transmit(dir: Vec3<T>) -> Self {
        let (v, h) = vh_frame(dir);
        let a = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self {
            dir: dir.normalize(),
            e1: v,
            e2: h,
            c1: a,
            c2: a,
        }
    }

    pub fn norm(&self) -> T {
        (self.c1.norm_sqr() + self.c2.norm_sqr()).sqrt()
    }

    /// Component along a real unit vector.
    pub fn component(&self, u: Vec3<T>) -> Complex<T> {
        self.c1 * u.dot(self.e1) + self.c2 * u.dot(self.e2)
    }

    /// Projection onto the receiver's equal-weight V/H polarization.
    pub fn project_receiver(&self) -> Complex<T> {
        let (v, h) = vh_frame(self.dir);
        self.component((v + h) * T::FRAC_1_SQRT_2())
    }

    /// Reflects off a planar interface with unit `normal`.
    pub fn reflect(&self, pair: FresnelPair<T>, normal: Vec3<T>) -> Result<Self> {
        let d = self.dir;
        let cos_i = d.dot(normal).abs();
        if cos_i < T::lit(1e-12) {
            return Err(Error::DegenerateFrame);
        }
        let s = d
            .cross(normal)
            .try_normalize(T::lit(1e-9))
            .unwrap_or_else(|| self.e2.normalize());
        let p_in = s.cross(d);
        let d_out = d.reflect(normal);
        let p_out = s.cross(d_out);
        let e_perp = self.component(s);
        let e_par = self.component(p_in);
        Ok(Self {
            dir: d_out,
            e1: s,
            e2: p_out,
            c1: pair.gamma_perp * e_perp,
            c2: pair.gamma_par * e_par,
        })
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self {
            c1: self.c1 * a,
            c2: self.c2 * a,
            ..*self
        }
    }
}
