//! C² smoothing of the conical tips of `S_a`.
//!
//! Near a tip the surface is the graph of revolution `(w(ρ), ρ cos v, ρ sin v)`
//! with `w(ρ) = a* − g(arccos(ρ/a))`. On `[0, ε]` the profile is replaced by
//! the even quartic `b0 + b1 ρ² + b2 ρ⁴` that matches `w` to second order at
//! `ρ = ε`; outside the two tip discs the curvature stays 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{lit, Real};
use crate::sphere_geom::SphericalPolygon;
use crate::spindle::{profile_g, tip_coordinate, SpindleParam};

/// Tolerance on `K_ε(ε) = 1` used to accept an ε.
pub const CURVATURE_MATCH_TOL: f64 = 1e-6;

/// Grid size used by [`smoothing_coeffs`] to check the sign conditions.
pub const SIGN_GRID: usize = 1000;

/// The unsmoothed tip profile `w` of `S_a` on `[0, a]`.
#[derive(Debug, Clone, Copy)]
pub struct TipProfile<T> {
    a: SpindleParam<T>,
    a_star: T,
}

impl<T: Real> TipProfile<T> {
    pub fn new(a: SpindleParam<T>) -> Self {
        Self { a, a_star: tip_coordinate(a) }
    }

    pub fn a(&self) -> SpindleParam<T> {
        self.a
    }

    fn check(&self, rho: T) -> Result<()> {
        if rho >= T::zero() && rho <= self.a.get() {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("radius {rho} outside [0, {}]", self.a.get())))
        }
    }

    pub fn w(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        let u = (rho / self.a.get()).min(T::one()).acos();
        Ok(self.a_star - profile_g(self.a, u)?)
    }

    /// `w′(ρ) = √((1 − a² + ρ²)/(a² − ρ²))`.
    pub fn dw(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        let a2 = self.a.get().sq();
        Ok(((T::one() - a2 + rho * rho) / (a2 - rho * rho)).sqrt())
    }

    /// `w″(ρ) = ρ / ((a² − ρ²)^{3/2} (1 − a² + ρ²)^{1/2})`.
    pub fn d2w(&self, rho: T) -> Result<T> {
        self.check(rho)?;
        let a2 = self.a.get().sq();
        let d = a2 - rho * rho;
        Ok(rho / (d * d.sqrt() * (T::one() - a2 + rho * rho).sqrt()))
    }
}

/// Height of `S_a` above its tip at radial coordinate `ρ`.
pub fn tip_profile_w<T: Real>(a: SpindleParam<T>, rho: T) -> Result<T> {
    TipProfile::new(a).w(rho)
}

/// The quartic cap `w_ε(ρ) = b0 + b1 ρ² + b2 ρ⁴` on `[0, ε]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothedTipProfile<T> {
    pub a: T,
    pub eps: T,
    pub b0: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Real> SmoothedTipProfile<T> {
    /// Solves the three matching equations without checking the sign
    /// conditions; any `ε ∈ (0, a)` is accepted.
    pub fn unchecked(a: SpindleParam<T>, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps < a.get()) {
            return Err(Error::EpsilonTooLarge(format!("ε = {eps} not in (0, a)")));
        }
        let tip = TipProfile::new(a);
        let (w, w1, w2) = (tip.w(eps)?, tip.dw(eps)?, tip.d2w(eps)?);
        let b0 = (lit::<T>(8.0) * w - lit::<T>(5.0) * w1 * eps + w2 * eps * eps) / lit(8.0);
        let b1 = (lit::<T>(3.0) * w1 - w2 * eps) / (lit::<T>(4.0) * eps);
        let b2 = (w2 * eps - w1) / (lit::<T>(8.0) * eps.powi(3));
        Ok(Self { a: a.get(), eps, b0, b1, b2 })
    }

    pub fn w(&self, u: T) -> T {
        let u2 = u * u;
        self.b0 + u2 * (self.b1 + u2 * self.b2)
    }

    pub fn dw(&self, u: T) -> T {
        u * (self.b1.twice() + lit::<T>(4.0) * self.b2 * u * u)
    }

    pub fn d2w(&self, u: T) -> T {
        self.b1.twice() + lit::<T>(12.0) * self.b2 * u * u
    }

    pub fn d3w(&self, u: T) -> T {
        lit::<T>(24.0) * self.b2 * u
    }

    /// `|w_ε − w|, |w_ε′ − w′|, |w_ε″ − w″|` at `ρ = ε`.
    pub fn matching_residuals(&self) -> Result<[T; 3]> {
        let tip = TipProfile::new(SpindleParam::new(self.a)?);
        let e = self.eps;
        Ok([(self.w(e) - tip.w(e)?).abs(), (self.dw(e) - tip.dw(e)?).abs(), (self.d2w(e) - tip.d2w(e)?).abs()])
    }

    pub fn curvature(&self, u: T) -> T {
        smoothed_curvature(self, u)
    }

    /// `sup_{[0,ε]} |w_ε| / ε`; bounded as `ε → 0`.
    pub fn height_ratio(&self) -> T {
        self.b0.abs().max(self.w(self.eps).abs()) / self.eps
    }

    /// Curvature mass `∫ K_ε dA` over the smoothed disc `ρ ≤ ε`.
    pub fn curvature_mass(&self) -> Result<T> {
        let r = integrate(
            |u: T| {
                let p = self.dw(u);
                T::TAU() * self.curvature(u) * u * (T::one() + p * p).sqrt()
            },
            T::zero(),
            self.eps,
            QuadOptions::default(),
        )?;
        Ok(r.value)
    }

    /// Area of the smoothed disc `ρ ≤ ε`.
    pub fn disc_area(&self) -> Result<T> {
        let r = integrate(
            |u: T| {
                let p = self.dw(u);
                T::TAU() * u * (T::one() + p * p).sqrt()
            },
            T::zero(),
            self.eps,
            QuadOptions::default(),
        )?;
        Ok(r.value)
    }
}

/// Coefficients of the smoothed tip, rejecting ε outside the regime where
/// the sign conditions and `K_ε(ε) = 1` hold.
pub fn smoothing_coeffs<T: Real>(a: SpindleParam<T>, eps: T) -> Result<SmoothedTipProfile<T>> {
    let s = SmoothedTipProfile::unchecked(a, eps)?;
    let report = sign_conditions(&s, SIGN_GRID);
    if let Some(v) = report.first_violation {
        return Err(Error::EpsilonTooLarge(format!(
            "sign condition {:?} fails at u = {}",
            v.condition,
            v.u.to_f64_lossy()
        )));
    }
    let k = smoothed_curvature(&s, eps);
    if (k - T::one()).abs() > lit(CURVATURE_MATCH_TOL) {
        return Err(Error::EpsilonTooLarge(format!("K_ε(ε) = {k}")));
    }
    Ok(s)
}

/// `K(u) = (2b1 + 4b2u²)(2b1 + 12b2u²) / (1 + (2b1u + 4b2u³)²)²`.
pub fn smoothed_curvature<T: Real>(s: &SmoothedTipProfile<T>, u: T) -> T {
    let u2 = u * u;
    let p = s.dw(u);
    (s.b1.twice() + lit::<T>(4.0) * s.b2 * u2) * s.d2w(u) / (T::one() + p * p).sq()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignCondition {
    /// `b1 > 0` and `b2 < 0`.
    Coefficients,
    /// `w_ε′ > 0` on `(0, ε]`.
    Increasing,
    /// `w_ε‴ < 0` on `(0, ε]`.
    ThirdDerivative,
    /// `w_ε″ ≥ w″(ε) > 0` on `[0, ε]`.
    Convex,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignViolation<T> {
    pub condition: SignCondition,
    pub u: T,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignReport<T> {
    pub holds: bool,
    pub first_violation: Option<SignViolation<T>>,
}

/// Checks the sign conditions on `n + 1` equally spaced points of `[0, ε]`.
/// `w_ε′` and `w_ε‴` vanish at `u = 0` by symmetry, so their strict
/// inequalities are only tested for `u > 0`.
pub fn sign_conditions<T: Real>(s: &SmoothedTipProfile<T>, n: usize) -> SignReport<T> {
    let fail = |condition, u| SignReport { holds: false, first_violation: Some(SignViolation { condition, u }) };
    if !(s.b1 > T::zero() && s.b2 < T::zero()) {
        return fail(SignCondition::Coefficients, T::zero());
    }
    let w2_eps = s.d2w(s.eps);
    if !(w2_eps > T::zero()) {
        return fail(SignCondition::Convex, s.eps);
    }
    let slack = w2_eps.abs() * lit(1e-12);
    for k in 0..=n {
        let u = s.eps * lit::<T>(k as f64) / lit(n as f64);
        if k > 0 && !(s.dw(u) > T::zero()) {
            return fail(SignCondition::Increasing, u);
        }
        if k > 0 && !(s.d3w(u) < T::zero()) {
            return fail(SignCondition::ThirdDerivative, u);
        }
        if s.d2w(u) < w2_eps - slack {
            return fail(SignCondition::Convex, u);
        }
    }
    SignReport { holds: true, first_violation: None }
}

/// Curvature and area bookkeeping for `S_{a,ε}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TotalCurvature<T> {
    /// `∫ K_ε` over the whole surface.
    pub total: T,
    /// `∫ K_ε` over one smoothed tip disc.
    pub tip_mass: T,
    /// Area of the curvature-1 band between the tip discs.
    pub band_area: T,
    /// Area of `S_{a,ε}`.
    pub area: T,
}

/// Integrates `K_ε` over `S_{a,ε}`. The band `a cos u ≥ ε` has curvature 1,
/// so its contribution is its area.
pub fn total_curvature_smoothed<T: Real>(a: SpindleParam<T>, eps: T) -> Result<TotalCurvature<T>> {
    let s = SmoothedTipProfile::unchecked(a, eps)?;
    let tip_mass = s.curvature_mass()?;
    let u_eps = (eps / a.get()).acos();
    let av = a.get();
    let band_area = integrate(|u: T| T::TAU() * av * u.cos(), -u_eps, u_eps, QuadOptions::default())?.value;
    let disc = s.disc_area()?;
    Ok(TotalCurvature { total: band_area + tip_mass.twice(), tip_mass, band_area, area: band_area + disc.twice() })
}

/// Closed-form tip mass `2π(1 − √(a² − ε²))`.
pub fn tip_mass_exact<T: Real>(a: SpindleParam<T>, eps: T) -> T {
    T::TAU() * (T::one() - (a.get().sq() - eps * eps).sqrt())
}

/// Empirical constant for the `Cε` terms.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration<T> {
    /// Largest observed `(excess)/ε` over the grid.
    pub max_ratio: T,
    /// Twice `max_ratio`.
    pub c_hat: T,
    pub grid: Vec<(T, T)>,
}

/// Calibrates `Ĉ` from the tip-mass excess over `2π(1 − a)`, the area
/// defect `|Area(S_{a,ε}) − 4aπ|` and the height ratio `sup|w_ε|/ε`.
pub fn calibrate_c_hat<T: Real>(a_grid: &[T], eps_grid: &[T]) -> Result<Calibration<T>> {
    let mut max_ratio = T::zero();
    let mut grid = Vec::new();
    for &a in a_grid {
        let ap = SpindleParam::new(a)?;
        for &eps in eps_grid {
            let tc = total_curvature_smoothed(ap, eps)?;
            let s = SmoothedTipProfile::unchecked(ap, eps)?;
            let excess = (tc.tip_mass - ap.tip_mass()).max(T::zero());
            let defect = (tc.area - ap.total_area()).abs();
            let r = (excess / eps).max(defect / eps).max(s.height_ratio());
            max_ratio = max_ratio.max(r);
            grid.push((a, eps));
        }
    }
    Ok(Calibration { max_ratio, c_hat: max_ratio.twice(), grid })
}

/// Upper bound `Area(V) + 2Σ(π − θ_j) + Ĉε` on the curvature of a region
/// containing smoothed tips of angles `θ_j`.
pub fn curvature_budget<T: Real>(area: T, tip_angles: &[T], eps: T, c_hat: T) -> Result<T> {
    let mut deficit = T::zero();
    for &th in tip_angles {
        if !(th > T::zero() && th < T::PI()) {
            return Err(Error::OutOfRange(format!("tip angle {th} not in (0, π)")));
        }
        deficit += (T::PI() - th).twice();
    }
    Ok(area + deficit + c_hat * eps)
}

/// One smoothed tip per vertex of the doubled polygon; the cone at vertex
/// `j` is that of `S_{a_j}` with `a_j = θ_j / π`.
pub fn polygon_tip_profiles<T: Real>(p: &SphericalPolygon<T>, eps: T) -> Result<Vec<SmoothedTipProfile<T>>> {
    p.interior_angles().into_iter().map(|th| smoothing_coeffs(SpindleParam::new(th / T::PI())?, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sp(a: f64) -> SpindleParam<f64> {
        SpindleParam::new(a).unwrap()
    }

    #[test]
    fn tip_profile_endpoints() {
        let t = TipProfile::new(sp(0.5));
        assert_eq!(t.w(0.0).unwrap(), 0.0);
        assert!((t.w(0.5).unwrap() - tip_coordinate(sp(0.5))).abs() < 1e-14);
        assert!(t.w(0.6).is_err());
        assert!((t.dw(0.0).unwrap() - 0.75f64.sqrt() / 0.5).abs() < 1e-14);
    }

    #[test]
    fn tip_profile_derivative_by_chain_rule() {
        for a in [0.3, 0.5, 0.9] {
            let t = TipProfile::new(sp(a));
            for rho in [0.05, 0.1, 0.2] {
                let h = 1e-5;
                let fd = (t.w(rho + h).unwrap() - t.w(rho - h).unwrap()) / (2.0 * h);
                let up = -(rho / a).acos();
                let chain = (1.0 - a * a * up.sin().powi(2)).sqrt() / (a * -up.sin());
                assert!((fd - chain).abs() < 1e-6, "{fd} {chain}");
                assert!((t.dw(rho).unwrap() - chain).abs() < 1e-12);
                let fd2 = (t.dw(rho + h).unwrap() - t.dw(rho - h).unwrap()) / (2.0 * h);
                assert!((fd2 - t.d2w(rho).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn coefficients_match_and_have_signs() {
        for a in [0.25, 0.5, 0.75, 0.9] {
            for eps in [1e-2, 1e-3] {
                let s = smoothing_coeffs(sp(a), eps).unwrap();
                for r in s.matching_residuals().unwrap() {
                    assert!(r <= 1e-9, "{a} {eps} {r}");
                }
                assert!(s.b1 > 0.0 && s.b2 < 0.0);
                assert!((s.curvature(eps) - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn coefficient_asymptotics() {
        // The deviations scale like ε and 1/ε: the ratios settle to a constant.
        let t = TipProfile::new(sp(0.5));
        let ratios: Vec<(f64, f64)> = [1e-2, 1e-3]
            .iter()
            .map(|&eps| {
                let s = smoothing_coeffs(sp(0.5), eps).unwrap();
                let w1 = t.dw(eps).unwrap();
                ((s.b1 - 0.75 * w1 / eps).abs() / eps, (s.b2 + 0.125 * w1 / eps.powi(3)).abs() * eps)
            })
            .collect();
        for k in 0..2 {
            let (r0, r1) = if k == 0 { (ratios[0].0, ratios[1].0) } else { (ratios[0].1, ratios[1].1) };
            assert!(r0 < 10.0 && (r0 - r1).abs() < 0.01 * r0, "{r0} {r1}");
        }
        let b0: Vec<f64> =
            [1e-2, 5e-3, 2.5e-3, 1.25e-3].iter().map(|&e| smoothing_coeffs(sp(0.5), e).unwrap().b0).collect();
        assert!(b0.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn curvature_spike_and_monotone() {
        let s = smoothing_coeffs(sp(0.5), 1e-2).unwrap();
        assert!((s.curvature(0.0) - 4.0 * s.b1 * s.b1).abs() < 1e-9 * s.curvature(0.0));
        let n = 1000;
        let ks: Vec<f64> = (0..=n).map(|k| s.curvature(1e-2 * k as f64 / n as f64)).collect();
        assert!(ks.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn large_eps_is_rejected() {
        let s = SmoothedTipProfile::unchecked(sp(0.6), 0.5).unwrap();
        let r = sign_conditions(&s, 1000);
        assert!(!r.holds);
        assert!(matches!(smoothing_coeffs(sp(0.6), 0.5), Err(Error::EpsilonTooLarge(_))));
        // the round sphere has no cone to smooth
        assert!(smoothing_coeffs(sp(1.0), 1e-2).is_err());
    }

    #[test]
    fn gauss_bonnet_total() {
        for a in [0.25, 0.5, 0.75, 0.9, 1.0] {
            for eps in [1e-2, 1e-3] {
                let tc = total_curvature_smoothed(sp(a), eps).unwrap();
                assert!((tc.total - 4.0 * PI).abs() < 1e-10, "{a} {eps} {}", tc.total);
                assert!((tc.tip_mass - tip_mass_exact(sp(a), eps)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tip_mass_extrapolates_to_cone_deficit() {
        let a = sp(0.5);
        let m: Vec<f64> =
            [1e-2, 5e-3, 2.5e-3].iter().map(|&e| total_curvature_smoothed(a, e).unwrap().tip_mass).collect();
        let r1 = (4.0 * m[1] - m[0]) / 3.0;
        let r2 = (4.0 * m[2] - m[1]) / 3.0;
        assert!((r2 - a.tip_mass()).abs() < 1e-9);
        assert!((r2 - a.tip_mass()).abs() <= (r1 - a.tip_mass()).abs() + 1e-15);
    }

    #[test]
    fn budget_examples() {
        assert_eq!(curvature_budget(1.0, &[], 1e-2, 3.0).unwrap(), 1.0 + 3e-2);
        let b = curvature_budget(1.0, &[PI * 0.4], 0.0, 3.0).unwrap();
        assert!((b - (1.0 + 2.0 * PI * 0.6)).abs() < 1e-14);
        assert!(curvature_budget(1.0, &[PI], 0.0, 1.0).is_err());
    }

    #[test]
    fn octant_tips() {
        use crate::sphere_geom::UnitVec;
        let p = SphericalPolygon::new(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::<f64>::e_z()]).unwrap();
        let tips = polygon_tip_profiles(&p, 1e-3).unwrap();
        assert_eq!(tips.len(), 3);
        assert!(tips.iter().all(|t| (t.a - 0.5).abs() < 1e-14));
    }
}
