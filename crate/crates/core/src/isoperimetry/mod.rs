//! Isoperimetric checks `L² ≥ A(4aπ − A)` on spindles and doubled convex
//! polygons, the sum lemma, the cap profile identity, and the convex-subset
//! form `L² ≥ A(2πa − A)`.

mod doubled;
mod family;

pub use doubled::{DoubledRegion, Sheet};
pub use family::{FamilyKind, IsoTestCurveFamily, TestBoundary, TestCurve};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sphere_geom::{Domain, SphericalRegion};
use crate::spindle::{curve_length, enclosed_area, iso_profile, SpindleParam};

/// Relative (to `(4aπ)²`) slack below zero still accepted as a pass.
pub const PASS_TOL: f64 = 1e-6;
/// Relative band around zero counted as equality.
pub const EQUALITY_TOL: f64 = 1e-8;

/// Closed surface on which curves are tested.
#[derive(Debug, Clone)]
pub enum Surface<T> {
    Spindle(SpindleParam<T>),
    /// Two copies of a convex region glued along the boundary.
    Doubled(Domain<T>),
}

impl<T: Real> Surface<T> {
    /// The parameter `a` with total area `4aπ`.
    pub fn a(&self) -> T {
        match self {
            Surface::Spindle(a) => a.get(),
            Surface::Doubled(w) => w.a(),
        }
    }

    pub fn total_area(&self) -> T {
        lit::<T>(4.0) * T::PI() * self.a()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsoCheckResult<T> {
    pub l: T,
    pub area: T,
    /// `L² − A(4aπ − A)`.
    pub margin: T,
    /// `margin / (4aπ)²`.
    pub relative_margin: T,
    pub pass: bool,
    pub equality: bool,
}

impl<T: Real> IsoCheckResult<T> {
    pub fn from_measures(l: T, area: T, a: T) -> Self {
        let total = lit::<T>(4.0) * T::PI() * a;
        let margin = l * l - area * (total - area);
        let relative_margin = margin / (total * total);
        Self {
            l,
            area,
            margin,
            relative_margin,
            pass: relative_margin >= -lit::<T>(PASS_TOL),
            equality: relative_margin.abs() <= lit(EQUALITY_TOL),
        }
    }
}

/// Length and enclosed area of a boundary on `surface`.
pub fn measure<T: Real>(surface: &Surface<T>, boundary: &TestBoundary<T>) -> Result<(T, T)> {
    match (surface, boundary) {
        (Surface::Spindle(a), TestBoundary::Spindle(loops)) => {
            let mut l = T::zero();
            let mut area = T::zero();
            for c in loops {
                l += curve_length(*a, c.as_ref())?;
                area += enclosed_area(*a, c.as_ref())?;
            }
            Ok((l, area))
        }
        (Surface::Doubled(w), TestBoundary::Doubled(parts)) => {
            let mut l = T::zero();
            let mut area = T::zero();
            for p in parts {
                p.validate(w)?;
                l += p.length(w);
                area += p.area();
            }
            Ok((l, area))
        }
        _ => Err(Error::ChartViolation("boundary does not live on this surface".into())),
    }
}

/// Measures a boundary and compares it with the isoperimetric profile.
pub fn check_curve<T: Real>(surface: &Surface<T>, boundary: &TestBoundary<T>) -> Result<IsoCheckResult<T>> {
    let (l, area) = measure(surface, boundary)?;
    Ok(IsoCheckResult::from_measures(l, area, surface.a()))
}

/// Whether `(ΣL)² > (ΣA)(4πa − ΣA)` for pairs each satisfying the
/// isoperimetric inequality. Requires at least two pairs.
pub fn lemma_sum_check<T: Real>(ls: &[T], areas: &[T], a: T) -> Result<bool> {
    if ls.len() != areas.len() || ls.len() < 2 {
        return Err(Error::PremiseViolated(format!("need m ≥ 2 matching pairs, got {} and {}", ls.len(), areas.len())));
    }
    let total = lit::<T>(4.0) * T::PI() * a;
    for (j, (&l, &ar)) in ls.iter().zip(areas).enumerate() {
        let rhs = ar * (total - ar);
        if !(l > T::zero() && ar > T::zero()) || l * l < rhs - lit::<T>(1e-12) * rhs.abs() {
            return Err(Error::PremiseViolated(format!("pair {j}: L = {l}, A = {ar}")));
        }
    }
    let l: T = ls.iter().copied().sum();
    let ar: T = areas.iter().copied().sum();
    Ok(l * l > ar * (total - ar))
}

/// Largest `|L(t)L′(t) − (2π − G(t))|` over `ts` for the cap profile
/// `L(t)² = t(4aπ − t)` with `G(t) = t + 2π(1 − a)`. `LL′` is half the
/// derivative of `L²`, taken by a central difference (exact for quadratics).
pub fn profile_ode_identity<T: Real>(a: SpindleParam<T>, ts: &[T]) -> Result<T> {
    let total = a.total_area();
    let d = total * lit(1e-4);
    let l2 = |t: T| -> Result<T> {
        if t > T::zero() && t < total {
            Ok(iso_profile(a, t)?.sq())
        } else {
            // Extend by the same quadratic across the endpoints.
            Ok(t * (total - t))
        }
    };
    let mut worst = T::zero();
    for &t in ts {
        if !(t > T::zero() && t < total) {
            return Err(Error::OutOfRange(format!("t = {t} outside (0, 4aπ)")));
        }
        let ll = (l2(t + d)? - l2(t - d)?) / (d * lit(4.0));
        let g = t + T::TAU() * (T::one() - a.get());
        worst = worst.max((ll - (T::TAU() - g)).abs());
    }
    Ok(worst)
}

/// Checks `L² ≥ A(2πa − A)` for `V ⊂ W`, where `L` is the part of `∂V`
/// interior to `W` (the Dirichlet-tagged pieces). Doubling `W` gives a
/// surface of area `4πa` on which `V` doubles to `(2L, 2A)`; the returned
/// lengths, areas and margins are those of `V` itself.
pub fn check_convex_subset<T: Real>(w: &Domain<T>, v: &SphericalRegion<T>) -> Result<IsoCheckResult<T>> {
    let part = DoubledRegion::both(v.clone());
    let surface = Surface::Doubled(w.clone());
    let r = check_curve(&surface, &TestBoundary::Doubled(vec![part]))?;
    Ok(IsoCheckResult { l: r.l * T::half(), area: r.area * T::half(), margin: r.margin * lit(0.25), ..r })
}
