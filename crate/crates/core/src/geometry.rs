//! Small 3-vector type and the handful of geometric primitives the tracer needs.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction. Returns `None` for (near-)zero input.
    #[inline]
    pub fn try_normalize(self, eps: T) -> Option<Self> {
        let n = self.norm();
        if n > eps {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn normalize(self) -> Self {
        self / self.norm()
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Specular reflection of a direction about a plane with unit normal `n`.
    #[inline]
    pub fn reflect(self, n: Self) -> Self {
        self - n * (T::two() * self.dot(n))
    }

    /// Azimuth (from +x towards +y) and elevation of a direction, radians.
    pub fn az_el(self) -> (T, T) {
        let horiz = (self.x * self.x + self.y * self.y).sqrt();
        (self.y.atan2(self.x), self.z.atan2(horiz))
    }

    pub fn map<U: Scalar>(self, f: impl Fn(T) -> U) -> Vec3<U> {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Infinite plane `n·p = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn from_point_normal(point: Vec3<f64>, normal: Vec3<f64>) -> Self {
        let normal = normal.normalize();
        Self {
            normal,
            offset: normal.dot(point),
        }
    }

    #[inline]
    pub fn signed_distance(&self, p: Vec3<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Mirror image of a point.
    #[inline]
    pub fn mirror(&self, p: Vec3<f64>) -> Vec3<f64> {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    /// Parameter `t` where `origin + t·dir` meets the plane, if not parallel.
    #[inline]
    pub fn intersect_param(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<f64> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-15 {
            return None;
        }
        Some((self.offset - self.normal.dot(origin)) / denom)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3<f64>,
    pub max: Vec3<f64>,
}

impl Aabb {
    pub fn from_points(points: impl IntoIterator<Item = Vec3<f64>>) -> Self {
        let mut min = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut max = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Vec3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Vec3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        Self { min, max }
    }

    pub fn inflate(&self, r: f64) -> Self {
        let d = Vec3::new(r, r, r);
        Self {
            min: self.min - d,
            max: self.max + d,
        }
    }

    pub fn contains(&self, p: Vec3<f64>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Slab test: parameter interval of `origin + t·dir` inside the box,
    /// clipped to `[t_min, t_max]`.
    pub fn ray_interval(
        &self,
        origin: Vec3<f64>,
        inv_dir: Vec3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Option<(f64, f64)> {
        let mut lo = t_min;
        let mut hi = t_max;
        for (o, inv, mn, mx) in [
            (origin.x, inv_dir.x, self.min.x, self.max.x),
            (origin.y, inv_dir.y, self.min.y, self.max.y),
            (origin.z, inv_dir.z, self.min.z, self.max.z),
        ] {
            if inv.is_infinite() {
                if o < mn || o > mx {
                    return None;
                }
                continue;
            }
            let mut t0 = (mn - o) * inv;
            let mut t1 = (mx - o) * inv;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            lo = lo.max(t0);
            hi = hi.min(t1);
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// Squared distance from a point to the box (zero inside).
    pub fn distance_sq(&self, p: Vec3<f64>) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        let dz = (self.min.z - p.z).max(0.0).max(p.z - self.max.z);
        dx * dx + dy * dy + dz * dz
    }
}

/// Closest points between segment `p0 + s·u` (s∈[0,1]) and `q0 + t·v` (t∈[0,1]).
/// Returns `(s, t, distance)`.
pub fn segment_segment_closest(
    p0: Vec3<f64>,
    u: Vec3<f64>,
    q0: Vec3<f64>,
    v: Vec3<f64>,
) -> (f64, f64, f64) {
    let w0 = p0 - q0;
    let a = u.dot(u);
    let b = u.dot(v);
    let c = v.dot(v);
    let d = u.dot(w0);
    let e = v.dot(w0);
    let denom = a * c - b * b;
    let mut s = if denom > 1e-14 * a * c {
        ((b * e - c * d) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = if c > 0.0 { (b * s + e) / c } else { 0.0 };
    if t < 0.0 {
        t = 0.0;
        s = if a > 0.0 { (-d / a).clamp(0.0, 1.0) } else { 0.0 };
    } else if t > 1.0 {
        t = 1.0;
        s = if a > 0.0 { ((b - d) / a).clamp(0.0, 1.0) } else { 0.0 };
    }
    let dist = ((p0 + u * s) - (q0 + v * t)).norm();
    (s, t, dist)
}

/// Even-odd point-in-polygon test in 2D.
pub fn point_in_polygon(pt: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > pt[1]) != (yj > pt[1]) {
            let x_cross = xj + (pt[1] - yj) * (xi - xj) / (yi - yj);
            if pt[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Twice the signed area of a 2D polygon (positive when counter-clockwise).
pub fn signed_area2(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum()
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test in 2D (touching counts).
pub fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// True when the closed polygon has no self-intersections between
/// non-adjacent edges.
pub fn is_simple_polygon(poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Vec3<f64>;

    #[test]
    fn mirror_is_involution() {
        let pl = Plane::from_point_normal(V::new(2.0, 0.0, 0.0), V::new(1.0, 1.0, 0.0));
        let p = V::new(0.3, -4.0, 2.0);
        let back = pl.mirror(pl.mirror(p));
        assert!(back.distance(p) < 1e-12);
        assert!((pl.signed_distance(pl.mirror(p)) + pl.signed_distance(p)).abs() < 1e-12);
    }

    #[test]
    fn reflect_preserves_tangential_component() {
        let n = V::unit_z();
        let d = V::new(0.6, 0.0, -0.8);
        let r = d.reflect(n);
        assert!((r.x - 0.6).abs() < 1e-15 && (r.z - 0.8).abs() < 1e-15);
    }

    #[test]
    fn polygon_predicates() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(signed_area2(&sq) > 0.0);
        assert!(point_in_polygon([0.5, 0.5], &sq));
        assert!(!point_in_polygon([1.5, 0.5], &sq));
        assert!(is_simple_polygon(&sq));
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple_polygon(&bow));
    }

    #[test]
    fn skew_segments_distance() {
        let (s, t, d) = segment_segment_closest(
            V::new(0.0, 0.0, 0.0),
            V::new(2.0, 0.0, 0.0),
            V::new(1.0, -1.0, 1.0),
            V::new(0.0, 2.0, 0.0),
        );
        assert!((s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12 && (d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slab_test_hits_and_misses() {
        let b = Aabb::from_points([V::new(0.0, 0.0, 0.0), V::new(1.0, 1.0, 1.0)]);
        let dir = V::new(1.0, 0.0, 0.0);
        let inv = V::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let hit = b.ray_interval(V::new(-1.0, 0.5, 0.5), inv, 0.0, f64::INFINITY);
        assert_eq!(hit, Some((1.0, 2.0)));
        assert!(b.ray_interval(V::new(-1.0, 2.0, 0.5), inv, 0.0, f64::INFINITY).is_none());
    }
}
