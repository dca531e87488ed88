use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::vec3::{UnitVec, Vec3};

/// Closed half-space `{p : p · normal ≥ offset}`; on the sphere, a cap of
/// angular radius `acos(offset)` about `normal` (a hemisphere when `offset = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace<T> {
    pub normal: UnitVec<T>,
    pub offset: T,
}

impl<T: Real> HalfSpace<T> {
    pub fn new(normal: UnitVec<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    /// Cap of geodesic radius `radius` about `center`.
    pub fn cap(center: UnitVec<T>, radius: T) -> Self {
        Self::new(center, radius.cos())
    }

    /// Points at latitude `≥ b`.
    pub fn above_latitude(b: T) -> Self {
        Self::new(UnitVec::e_z(), b.sin())
    }

    pub fn signed(&self, p: UnitVec<T>) -> T {
        p.vec().dot(self.normal.vec()) - self.offset
    }

    pub fn complement(&self) -> Self {
        Self::new(self.normal.antipode(), -self.offset)
    }

    pub fn radius(&self) -> T {
        self.offset.max(-T::one()).min(T::one()).acos()
    }
}

/// Arc of the circle `{p : p · axis = cos_radius}`, traversed from `start`
/// by the signed angle `sweep` about `axis` (counterclockwise seen from the
/// tip of `axis` when positive). With positive sweep the axis side lies on the
/// left of travel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleArc<T> {
    pub axis: UnitVec<T>,
    pub cos_radius: T,
    pub start: UnitVec<T>,
    pub sweep: T,
}

impl<T: Real> CircleArc<T> {
    pub fn new(axis: UnitVec<T>, cos_radius: T, start: UnitVec<T>, sweep: T) -> Self {
        Self { axis, cos_radius, start, sweep }
    }

    /// Minor great-circle arc between two distinct, non-antipodal points.
    pub fn geodesic(from: UnitVec<T>, to: UnitVec<T>) -> Result<Self> {
        let c = from.vec().cross(to.vec());
        let s = c.norm();
        if s < lit(1e-14) {
            return Err(Error::DegenerateEdge("geodesic endpoints coincide or are antipodal".into()));
        }
        let axis = UnitVec::from_vec(c).expect("non-zero");
        Ok(Self::new(axis, T::zero(), from, s.atan2(from.dot(to))))
    }

    pub fn is_geodesic(&self) -> bool {
        self.cos_radius.abs() < lit(1e-14)
    }

    /// Angular radius of the supporting circle.
    pub fn radius(&self) -> T {
        self.cos_radius.max(-T::one()).min(T::one()).acos()
    }

    pub fn length(&self) -> T {
        self.sweep.abs() * self.radius().sin()
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: T) -> UnitVec<T> {
        self.start.rotate(self.axis, t * self.sweep)
    }

    pub fn end(&self) -> UnitVec<T> {
        self.point(T::one())
    }

    /// Derivative of [`point`](Self::point) with respect to `t`.
    pub fn derivative(&self, t: T) -> Vec3<T> {
        let p = self.point(t).vec();
        self.axis.vec().cross(p).scale(self.sweep)
    }

    /// Unit tangent at parameter `t`.
    pub fn unit_tangent(&self, t: T) -> Vec3<T> {
        self.derivative(t).normalized().unwrap_or_else(Vec3::zero)
    }

    /// Integral of geodesic curvature along the arc (left-turning positive).
    pub fn turning(&self) -> T {
        self.sweep * self.cos_radius
    }

    /// Sub-arc between parameters `t0 < t1`.
    pub fn sub_arc(&self, t0: T, t1: T) -> Self {
        Self::new(self.axis, self.cos_radius, self.point(t0), (t1 - t0) * self.sweep)
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.axis, self.cos_radius, self.end(), -self.sweep)
    }

    /// Parameters in `(0, 1)` where the arc crosses the boundary of `h`, sorted.
    pub fn crossings(&self, h: &HalfSpace<T>) -> Vec<T> {
        let a = self.axis.vec();
        let s = self.start.vec();
        let n = h.normal.vec();
        // p(φ)·n = A cos φ + B sin φ + C along the rotation of `start` about `a`.
        let c0 = a.dot(s) * a.dot(n);
        let ca = s.dot(n) - c0;
        let cb = a.cross(s).dot(n);
        let r = (ca * ca + cb * cb).sqrt();
        if r < lit(1e-15) {
            return Vec::new();
        }
        let rhs = (h.offset - c0) / r;
        if rhs.abs() > T::one() {
            return Vec::new();
        }
        let base = cb.atan2(ca);
        let delta = rhs.acos();
        let mut out = Vec::new();
        let edge = lit::<T>(1e-12);
        for phi0 in [base + delta, base - delta] {
            // All φ ≡ phi0 (mod 2π) inside the sweep range.
            let tau = T::TAU();
            let (lo, hi) = if self.sweep >= T::zero() { (T::zero(), self.sweep) } else { (self.sweep, T::zero()) };
            let mut phi = phi0 - ((phi0 - lo) / tau).floor() * tau;
            while phi <= hi {
                let t = phi / self.sweep;
                if t > edge && t < T::one() - edge && !out.iter().any(|&u: &T| (u - t).abs() < edge) {
                    out.push(t);
                }
                phi += tau;
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        out
    }
}

/// Positive angle in `(0, 2π]` that rotates `from` onto `to` about `axis`
/// (both points on the same circle about `axis`).
pub fn sweep_about<T: Real>(axis: UnitVec<T>, from: UnitVec<T>, to: UnitVec<T>) -> T {
    let a = axis.vec();
    let f = from.vec() - a.scale(a.dot(from.vec()));
    let t = to.vec() - a.scale(a.dot(to.vec()));
    let ang = a.dot(f.cross(t)).atan2(f.dot(t));
    if ang <= lit(1e-13) {
        ang + T::TAU()
    } else {
        ang
    }
}

/// Full circle bounding `h`, oriented with the cap on the left.
pub fn full_circle<T: Real>(h: &HalfSpace<T>) -> CircleArc<T> {
    let n = h.normal;
    let (e1, _) = super::vec3::tangent_frame(n);
    let r = h.radius();
    let start = UnitVec::from_vec(n.vec().scale(r.cos()) + e1.scale(r.sin())).expect("unit");
    CircleArc::new(n, h.offset, start, T::TAU())
}
