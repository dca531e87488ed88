use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Plain Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Returns `None` for (numerically) zero vectors.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::min_positive_value().sqrt() && n.is_finite() {
            Some(self.scale(n.recip()))
        } else {
            None
        }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// A point of the unit sphere.
///
/// Construction renormalizes; inputs further than `1e-6` from unit norm are
/// rejected rather than silently projected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec<T>(Vec3<T>);

impl<T: Real> UnitVec<T> {
    pub const INPUT_NORM_TOL: f64 = 1e-6;

    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        let n = v.norm();
        if !n.is_finite() || (n - T::one()).abs() > lit(Self::INPUT_NORM_TOL) {
            return Err(Error::OutOfRange(format!("point ({x}, {y}, {z}) has norm {n}, expected 1")));
        }
        Ok(Self(v.scale(n.recip())))
    }

    /// Projects an arbitrary non-zero vector to the sphere.
    pub fn from_vec(v: Vec3<T>) -> Option<Self> {
        v.normalized().map(Self)
    }

    /// Point with latitude `lat` and longitude `lon` (radians).
    pub fn from_lat_lon(lat: T, lon: T) -> Self {
        let (sl, cl) = lat.sin_cos();
        let (so, co) = lon.sin_cos();
        Self(Vec3::new(cl * co, cl * so, sl))
    }

    pub fn e_x() -> Self {
        Self(Vec3::new(T::one(), T::zero(), T::zero()))
    }

    pub fn e_y() -> Self {
        Self(Vec3::new(T::zero(), T::one(), T::zero()))
    }

    pub fn e_z() -> Self {
        Self(Vec3::new(T::zero(), T::zero(), T::one()))
    }

    pub fn vec(self) -> Vec3<T> {
        self.0
    }

    pub fn dot(self, o: Self) -> T {
        self.0.dot(o.0)
    }

    pub fn latitude(self) -> T {
        self.0.z.max(-T::one()).min(T::one()).asin()
    }

    pub fn longitude(self) -> T {
        self.0.y.atan2(self.0.x)
    }

    /// Great-circle distance, computed with `atan2` for conditioning at 0 and π.
    pub fn distance(self, o: Self) -> T {
        self.0.cross(o.0).norm().atan2(self.0.dot(o.0))
    }

    pub fn antipode(self) -> Self {
        Self(-self.0)
    }

    /// Rotation about the unit `axis` by `angle` (right-hand rule).
    pub fn rotate(self, axis: Self, angle: T) -> Self {
        Self(rotate_vec(self.0, axis.0, angle))
    }
}

pub(crate) fn rotate_vec<T: Real>(p: Vec3<T>, axis: Vec3<T>, angle: T) -> Vec3<T> {
    let (s, c) = angle.sin_cos();
    p.scale(c) + axis.cross(p).scale(s) + axis.scale(axis.dot(p) * (T::one() - c))
}

/// Orthonormal tangent frame `(e1, e2)` at `n` with `e1 × e2 = n`.
pub fn tangent_frame<T: Real>(n: UnitVec<T>) -> (Vec3<T>, Vec3<T>) {
    let v = n.vec();
    let helper = if v.x.abs() < lit(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let e1 = (helper - v.scale(helper.dot(v))).normalized().expect("non-parallel helper");
    let e2 = v.cross(e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_small_errors_rejects_large() {
        let p = UnitVec::<f64>::new(1.0 + 1e-9, 0.0, 0.0).unwrap();
        assert!((p.vec().norm() - 1.0).abs() < 1e-15);
        assert!(UnitVec::new(1.1, 0.0, 0.0).is_err());
        assert!(UnitVec::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn rotation_about_z() {
        let p = UnitVec::<f64>::e_x().rotate(UnitVec::e_z(), std::f64::consts::FRAC_PI_2);
        assert!((p.vec() - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn distance_is_accurate_near_zero_and_pi() {
        let a = UnitVec::<f64>::e_x();
        let b = UnitVec::from_lat_lon(0.0, 1e-9);
        assert!((a.distance(b) - 1e-9).abs() < 1e-22);
        assert!((a.distance(a.antipode()) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn frame_is_right_handed() {
        let n = UnitVec::new(0.3f64, -0.4, (1.0f64 - 0.25).sqrt()).unwrap();
        let (e1, e2) = tangent_frame(n);
        assert!((e1.cross(e2) - n.vec()).norm() < 1e-14);
    }
}
