//! The constant-curvature spindle surfaces `S_a`: profile functions, caps,
//! the isometry with the lune, and curve measurements in `(u, v)` coordinates.
//!
//! `S_a` is the surface of revolution `(g(u), a cos u cos v, a cos u sin v)`
//! with `g(u) = ∫₀ᵘ √(1 − a² sin² t) dt`, `u ∈ [−π/2, π/2]`. Its metric is
//! `du² + a² cos²u dv²` and it is isometric to two copies of the lune Ω_a
//! glued along their boundary.

mod curve;

pub use curve::{check_simple, curve_length, enclosed_area, FnCurve, SampledCurve, SpindleCurve};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{lit, Real};

/// Absolute accuracy requested from the profile quadrature.
pub const PROFILE_TOL: f64 = 1e-13;

/// The spindle parameter `a ∈ (0, 1]`; `a = 1` is the round unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpindleParam<T>(T);

impl<T: Real> SpindleParam<T> {
    pub fn new(a: T) -> Result<Self> {
        if a > T::zero() && a <= T::one() {
            Ok(Self(a))
        } else {
            Err(Error::OutOfRange(format!("spindle parameter a = {a} not in (0, 1]")))
        }
    }

    pub fn get(self) -> T {
        self.0
    }

    /// Total area `4aπ`.
    pub fn total_area(self) -> T {
        lit::<T>(4.0) * T::PI() * self.0
    }

    /// Curvature mass carried by each conical tip, `2π(1 − a)`.
    pub fn tip_mass(self) -> T {
        T::TAU() * (T::one() - self.0)
    }
}

fn check_u<T: Real>(u: T) -> Result<()> {
    if u.is_finite() && u.abs() <= T::FRAC_PI_2() * (T::one() + T::epsilon()) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("coordinate u = {u} outside [-π/2, π/2]")))
    }
}

/// Axial profile `g(u) = ∫₀ᵘ √(1 − a² sin² t) dt` (an incomplete elliptic
/// integral of the second kind with modulus `a`).
pub fn profile_g<T: Real>(a: SpindleParam<T>, u: T) -> Result<T> {
    check_u(u)?;
    let a2 = a.get().sq();
    if a2 == T::one() {
        return Ok(u.sin());
    }
    let r = integrate(
        |t: T| (T::one() - a2 * t.sin().sq()).sqrt(),
        T::zero(),
        u.abs(),
        QuadOptions::absolute(lit(PROFILE_TOL)),
    )?;
    Ok(r.value.copysign(u))
}

/// Radial profile `h(u) = a cos u`.
pub fn profile_h<T: Real>(a: SpindleParam<T>, u: T) -> T {
    a.get() * u.cos()
}

/// `g′(u) = √(1 − a² sin² u)`.
pub fn profile_g_prime<T: Real>(a: SpindleParam<T>, u: T) -> T {
    (T::one() - a.get().sq() * u.sin().sq()).sqrt()
}

/// Axial coordinate of the upper tip, `a* = g(π/2)`.
pub fn tip_coordinate<T: Real>(a: SpindleParam<T>) -> T {
    profile_g(a, T::FRAC_PI_2()).expect("π/2 is in range")
}

/// Gaussian curvature of the profile surface `(g, h cos v, h sin v)` from
/// the general surface-of-revolution formula with analytic derivatives.
pub fn profile_curvature<T: Real>(a: SpindleParam<T>, u: T) -> T {
    let av = a.get();
    let (s, c) = u.sin_cos();
    let gp = profile_g_prime(a, u);
    let gpp = -av * av * s * c / gp;
    let h = av * c;
    let hp = -av * s;
    let hpp = -av * c;
    gp * (gpp * hp - gp * hpp) / (h * (gp * gp + hp * hp).sq())
}

/// Rotationally symmetric cap `U_{a,b} = {u ≥ b}` about the upper tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap<T> {
    pub a: SpindleParam<T>,
    pub b: T,
}

impl<T: Real> Cap<T> {
    pub fn new(a: SpindleParam<T>, b: T) -> Result<Self> {
        if b.is_finite() && b.abs() < T::FRAC_PI_2() {
            Ok(Self { a, b })
        } else {
            Err(Error::OutOfRange(format!("cap latitude b = {b} not in (-π/2, π/2)")))
        }
    }

    /// `2aπ(1 − sin b)`.
    pub fn area(&self) -> T {
        T::TAU() * self.a.get() * (T::one() - self.b.sin())
    }

    /// `2aπ cos b`.
    pub fn perimeter(&self) -> T {
        T::TAU() * self.a.get() * self.b.cos()
    }
}

pub fn cap_area<T: Real>(c: &Cap<T>) -> T {
    c.area()
}

pub fn cap_perimeter<T: Real>(c: &Cap<T>) -> T {
    c.perimeter()
}

fn check_area<T: Real>(a: SpindleParam<T>, area: T) -> Result<()> {
    if area > T::zero() && area < a.total_area() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("area {area} not in (0, {})", a.total_area())))
    }
}

/// Extremal perimeter `√(A(4aπ − A))` for enclosed area `A`.
pub fn iso_profile<T: Real>(a: SpindleParam<T>, area: T) -> Result<T> {
    check_area(a, area)?;
    Ok((area * (a.total_area() - area)).sqrt())
}

/// The cap of area `A`: `b = arcsin(1 − A/(2aπ))`.
pub fn cap_with_area<T: Real>(a: SpindleParam<T>, area: T) -> Result<Cap<T>> {
    check_area(a, area)?;
    let s = (T::one() - area / (T::TAU() * a.get())).max(-T::one()).min(T::one());
    Cap::new(a, s.asin())
}

/// Point of `S_a` in `(u, v)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpindlePoint<T> {
    pub u: T,
    pub v: T,
}

impl<T: Real> SpindlePoint<T> {
    pub fn is_tip(&self) -> bool {
        self.u.abs() >= T::FRAC_PI_2()
    }
}

/// Maps the lune point `(ũ, ṽ)`, `ṽ ∈ [0, aπ]`, to `(u, v) = (ũ, ṽ/a)` on the
/// front half of `S_a`.
pub fn lune_isometry<T: Real>(a: SpindleParam<T>, u_lune: T, v_lune: T) -> Result<SpindlePoint<T>> {
    check_u(u_lune)?;
    let vmax = T::PI() * a.get();
    if !(v_lune >= T::zero() && v_lune <= vmax * (T::one() + T::epsilon())) {
        return Err(Error::OutOfRange(format!("lune coordinate ṽ = {v_lune} not in [0, {vmax}]")));
    }
    Ok(SpindlePoint { u: u_lune, v: v_lune / a.get() })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sp(a: f64) -> SpindleParam<f64> {
        SpindleParam::new(a).unwrap()
    }

    #[test]
    fn param_range() {
        assert!(SpindleParam::new(0.0).is_err());
        assert!(SpindleParam::new(1.0 + 1e-12).is_err());
        assert!(SpindleParam::new(f64::NAN).is_err());
        assert!(SpindleParam::new(1.0).is_ok());
    }

    #[test]
    fn sphere_profile_is_sine() {
        let v = profile_g(sp(1.0), PI / 3.0).unwrap();
        assert!((v - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert_eq!(profile_g(sp(0.4), 0.0).unwrap(), 0.0);
        assert!(profile_g(sp(0.4), 1.6).is_err());
    }

    #[test]
    fn tip_coordinate_matches_complete_elliptic_integral() {
        // E(m = a²) evaluated with mpmath at 30 digits.
        for (a, e) in [
            (0.25, 1.545_957_256_105_465_035),
            (0.5, 1.467_462_209_339_427_155_5),
            (0.75, 1.318_472_107_994_620_997_4),
            (0.9, 1.171_697_052_781_614_113_8),
        ] {
            assert!((tip_coordinate(sp(a)) - e).abs() < 1e-13, "a = {a}");
        }
        assert!((tip_coordinate(sp(1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_is_odd() {
        for u in [0.1, 0.7, 1.5] {
            let a = sp(0.6);
            assert_eq!(profile_g(a, -u).unwrap(), -profile_g(a, u).unwrap());
        }
    }

    #[test]
    fn cap_examples() {
        let c = Cap::new(sp(1.0), 0.0).unwrap();
        assert!((c.area() - 2.0 * PI).abs() < 1e-15);
        assert!((c.perimeter() - 2.0 * PI).abs() < 1e-15);
        assert!((Cap::new(sp(0.5), 0.0).unwrap().area() - PI).abs() < 1e-15);
        let c = Cap::new(sp(0.5), PI / 6.0).unwrap();
        assert!((c.perimeter() - PI * 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!(Cap::new(sp(0.5), FRAC_PI_2).is_err());
    }

    #[test]
    fn iso_profile_and_inverse() {
        let a = sp(0.3);
        let half = 2.0 * PI * 0.3;
        assert!((iso_profile(a, half).unwrap() - half).abs() < 1e-14);
        assert!(iso_profile(a, 0.0).is_err());
        assert!(iso_profile(a, a.total_area()).is_err());
        assert!(cap_with_area(a, half).unwrap().b.abs() < 1e-15);
        assert!(cap_with_area(a, 1e-14).unwrap().b > FRAC_PI_2 - 1e-6);
        let b = 0.4;
        let sphere = sp(1.0);
        let l = iso_profile(sphere, 2.0 * PI * (1.0 - f64::sin(b))).unwrap();
        assert!((l - 2.0 * PI * b.cos()).abs() < 1e-13);
    }

    #[test]
    fn isometry_examples() {
        let p = lune_isometry(sp(0.5), 0.0, 0.0).unwrap();
        assert_eq!((p.u, p.v), (0.0, 0.0));
        let p = lune_isometry(sp(0.5), PI / 4.0, PI / 8.0).unwrap();
        assert!((p.u - PI / 4.0).abs() < 1e-15 && (p.v - PI / 4.0).abs() < 1e-15);
        assert!(lune_isometry(sp(0.5), 0.0, 2.0).is_err());
        assert!(lune_isometry(sp(0.5), 2.0, 0.0).is_err());
    }

    #[test]
    fn smooth_part_has_unit_curvature() {
        for a in [0.2, 0.5, 0.99] {
            for u in [-1.2, -0.3, 0.0, 0.8, 1.4] {
                assert!((profile_curvature(sp(a), u) - 1.0).abs() < 1e-12);
            }
        }
    }
}
