//! First Dirichlet eigenvalue of the caps `U_{1,b}` by shooting.
//!
//! The first eigenfunction of a cap is rotationally symmetric, so with
//! `s = π/2 − u` the problem becomes `(sin s · w′)′ + λ sin s · w = 0` on
//! `(0, π/2 − b]`, bounded at `s = 0`, with `w(π/2 − b) = 0`. Integration
//! uses the state `(w, p = sin s · w′)` and RK4. Past `s = π/2` the step is
//! taken in `τ = −ln(π − s)` so the approach to the antipodal singular point
//! stays well resolved when `b` is close to `−π/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spindle::{cap_with_area, SpindleParam};

/// Largest step used in `s`.
pub const MAX_STEP: f64 = 1e-4;
/// Minimum number of steps across `(0, π/2 − b]`.
pub const MIN_STEPS: f64 = 4000.0;
/// Bracket expansion gives up beyond this value.
pub const LAMBDA_CEILING: f64 = 1e8;
/// Default relative tolerance on eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shooting,
    Fem,
}

/// An eigenvalue estimate together with how it was obtained.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenResult<T> {
    pub value: T,
    pub method: Method,
    /// ODE step or mesh size of the finest level used.
    pub discretization: T,
    pub error_estimate: T,
}

/// `α = −1/2 + √(1/4 + λ)`, the degree of the harmonic function on the
/// cone over a domain with eigenvalue `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharExponent<T> {
    pub alpha: T,
}

impl<T: Real> CharExponent<T> {
    pub fn eigenvalue(&self) -> T {
        self.alpha * (self.alpha + T::one())
    }
}

pub fn char_exponent<T: Real>(eig: T) -> Result<CharExponent<T>> {
    if !(eig >= T::zero()) {
        return Err(Error::NegativeEigenvalue(eig.to_f64_lossy()));
    }
    let q = lit::<T>(0.25);
    // λ / (1/2 + √(1/4 + λ)) avoids cancellation for small λ.
    Ok(CharExponent { alpha: eig / (T::half() + (q + eig).sqrt()) })
}

/// The cap problem `U_{1,b}` with solver settings.
#[derive(Debug, Clone, Copy)]
pub struct CapEigenProblem<T> {
    pub b: T,
    /// Relative tolerance: the result satisfies `error_estimate ≤ tol·max(1, λ)`.
    pub tol: T,
    pub max_bisection: usize,
}

impl<T: Real> CapEigenProblem<T> {
    pub fn new(b: T, tol: T) -> Result<Self> {
        let lo = -T::FRAC_PI_2() + lit(1e-6);
        let hi = T::FRAC_PI_2() - lit(1e-3);
        if !(b > lo && b < hi) {
            return Err(Error::OutOfRange(format!("cap boundary b = {b} outside (−π/2 + 1e-6, π/2 − 1e-3)")));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(Self { b, tol, max_bisection: 200 })
    }

    fn s_end(&self) -> T {
        T::FRAC_PI_2() - self.b
    }

    /// Default step `min(1e-4, s_end/4000)`.
    pub fn base_step(&self) -> T {
        lit::<T>(MAX_STEP).min(self.s_end() / lit(MIN_STEPS))
    }

    /// Eigenvalue with a fixed step and no extrapolation.
    pub fn solve_fixed(&self, h: T) -> Result<T> {
        let s_end = self.s_end();
        let guess = T::two() / (T::one() - self.b.sin());
        let shoot = |lam: T| Shooter::new(lam, s_end, h).run(None);
        let ceiling = lit::<T>(LAMBDA_CEILING);

        let mut lo = guess * T::half();
        let mut hi = guess.twice();
        let mut steps = 0;
        while shoot(lo).crossings > 0 {
            lo *= T::half();
            steps += 1;
            if steps > self.max_bisection {
                return Err(Error::NoConvergence("no lower bracket for λ".into()));
            }
        }
        let mut hi_shot = shoot(hi);
        while hi_shot.crossings == 0 {
            lo = hi;
            hi = hi.twice();
            if hi > ceiling {
                return Err(Error::NoConvergence(format!("λ exceeds {LAMBDA_CEILING:e}")));
            }
            hi_shot = shoot(hi);
        }
        // Narrow until exactly one node lies in (0, s_end], then w(s_end)
        // changes sign across the bracket.
        let mut bisections = 0;
        while hi_shot.crossings > 1 || !(hi_shot.w_end < T::zero()) {
            let mid = (lo + hi) * T::half();
            let m = shoot(mid);
            if m.crossings == 0 {
                lo = mid;
            } else {
                hi = mid;
                hi_shot = m;
            }
            bisections += 1;
            if bisections > self.max_bisection {
                return Err(Error::NoConvergence("bisection on λ did not isolate the first zero".into()));
            }
        }
        let mut f_lo = shoot(lo).w_end;
        let mut f_hi = hi_shot.w_end;
        // Illinois regula falsi on w(s_end; λ).
        let mut side = 0i8;
        let mut x = lo;
        for _ in 0..self.max_bisection {
            x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if !(x > lo && x < hi) {
                x = (lo + hi) * T::half();
            }
            if hi - lo <= lit::<T>(4.0) * T::epsilon() * hi {
                break;
            }
            let fx = shoot(x).w_end;
            if fx == T::zero() {
                return Ok(x);
            }
            if fx > T::zero() {
                lo = x;
                f_lo = fx;
                if side == 1 {
                    f_hi *= T::half();
                }
                side = 1;
            } else {
                hi = x;
                f_hi = fx;
                if side == -1 {
                    f_lo *= T::half();
                }
                side = -1;
            }
        }
        Ok(x)
    }

    /// Eigenvalue with step-halving Richardson extrapolation (RK4 is fourth
    /// order); halves further while the estimate exceeds the tolerance.
    pub fn solve(&self) -> Result<EigenResult<T>> {
        let mut h = self.base_step();
        let mut coarse = self.solve_fixed(h)?;
        for _ in 0..4 {
            let fine = self.solve_fixed(h * T::half())?;
            let value = fine + (fine - coarse) / lit(15.0);
            let scale = T::one().max(value.abs());
            let est = ((fine - coarse) / lit(15.0)).abs().max(lit::<T>(16.0) * T::epsilon() * scale);
            if est <= self.tol * scale {
                return Ok(EigenResult {
                    value,
                    method: Method::Shooting,
                    discretization: h * T::half(),
                    error_estimate: est,
                });
            }
            h *= T::half();
            coarse = fine;
        }
        Err(Error::NoConvergence("Richardson estimate above tolerance".into()))
    }

    /// Samples `(u, w(u))` of the eigenfunction for `λ` at every integration
    /// node with step `h`, normalized so `w(π/2) = 1`.
    pub fn eigenfunction(&self, lambda: T, h: T) -> Vec<(T, T)> {
        let mut out = Vec::new();
        Shooter::new(lambda, self.s_end(), h).run(Some(&mut out));
        out.into_iter().map(|(s, w)| (T::FRAC_PI_2() - s, w)).collect()
    }
}

/// `λ(U_{1,b})`; by the isometry with the lune it equals `λ(U_{a,b})` for every `a`.
pub fn cap_eigenvalue<T: Real>(b: T, tol: T) -> Result<EigenResult<T>> {
    CapEigenProblem::new(b, tol)?.solve()
}

/// `α(U_{1,b}) + α(U_{1,−b})`.
pub fn bkp_sum<T: Real>(b: T, tol: T) -> Result<T> {
    if !(b.abs() < T::FRAC_PI_2() - lit(1e-3)) {
        return Err(Error::OutOfRange(format!("|b| = {} too close to π/2", b.abs())));
    }
    let l1 = cap_eigenvalue(b, tol)?.value;
    let l2 = if b == T::zero() { l1 } else { cap_eigenvalue(-b, tol)?.value };
    Ok(char_exponent(l1)?.alpha + char_exponent(l2)?.alpha)
}

/// Lower bound on the first Dirichlet eigenvalue of any region of area `A`
/// on `S_a` or a doubled polygon in the same class: the cap of equal area.
pub fn faber_krahn_bound<T: Real>(a: SpindleParam<T>, area: T, tol: T) -> Result<EigenResult<T>> {
    let cap = cap_with_area(a, area)?;
    cap_eigenvalue(cap.b, tol)
}

struct Shot<T> {
    crossings: u32,
    w_end: T,
}

struct Shooter<T> {
    lambda: T,
    s_end: T,
    h: T,
}

impl<T: Real> Shooter<T> {
    fn new(lambda: T, s_end: T, h: T) -> Self {
        Self { lambda, s_end, h }
    }

    /// Start point and state from the hypergeometric series of the regular
    /// solution, `w = Σ c_k t^k`, `t = sin²(s/2)`,
    /// `c_k = c_{k−1}·((k−1)k − λ)/k²`.
    fn start(&self) -> (T, T, T) {
        let lam = self.lambda;
        let s0 = (lit::<T>(0.05) / lam.max(T::one()).sqrt()).min(self.s_end / lit(20.0));
        let t = (s0 * T::half()).sin().sq();
        let (mut c, mut tk) = (T::one(), T::one());
        let (mut w, mut dw_dt) = (T::one(), T::zero());
        for k in 1..12 {
            let kf = lit::<T>(k as f64);
            c = c * ((kf - T::one()) * kf - lam) / (kf * kf);
            dw_dt += kf * c * tk;
            tk *= t;
            w += c * tk;
        }
        // p = sin s · dw/ds, dt/ds = sin s / 2
        let p = s0.sin().sq() * T::half() * dw_dt;
        (s0, w, p)
    }

    fn run(&self, mut record: Option<&mut Vec<(T, T)>>) -> Shot<T> {
        let lam = self.lambda;
        let (s0, mut w, mut p) = self.start();
        let mut crossings = 0u32;
        let early_exit = record.is_none();
        if let Some(r) = record.as_deref_mut() {
            r.push((T::zero(), T::one()));
            r.push((s0, w));
        }
        let mut track = |s: T, w_prev: T, w: T, record: &mut Option<&mut Vec<(T, T)>>| -> bool {
            if let Some(r) = record.as_deref_mut() {
                r.push((s, w));
            }
            if (w_prev > T::zero()) != (w > T::zero()) {
                crossings += 1;
            }
            early_exit && crossings >= 2
        };

        let mid = T::FRAC_PI_2();
        let s_stop = self.s_end.min(mid);
        let n1 = ((s_stop - s0) / self.h).ceil().to_usize().unwrap_or(1).max(1);
        let h1 = (s_stop - s0) / lit(n1 as f64);
        let f = |s: T, w: T, p: T| (p / s.sin(), -lam * s.sin() * w);
        for i in 0..n1 {
            let s = s0 + h1 * lit(i as f64);
            let w_prev = w;
            (w, p) = rk4(f, s, w, p, h1);
            if track(s + h1, w_prev, w, &mut record) {
                return Shot { crossings, w_end: w };
            }
        }
        if self.s_end > mid {
            let tau0 = -(T::PI() - mid).ln();
            let tau1 = -(T::PI() - self.s_end).ln();
            let dt = self.h * lit(2.0) / T::PI();
            let n2 = ((tau1 - tau0) / dt).ceil().to_usize().unwrap_or(1).max(1);
            let h2 = (tau1 - tau0) / lit(n2 as f64);
            let g = |tau: T, w: T, p: T| {
                let sig = (-tau).exp();
                let ss = sig.sin();
                (sig * p / ss, -lam * sig * ss * w)
            };
            for i in 0..n2 {
                let tau = tau0 + h2 * lit(i as f64);
                let w_prev = w;
                (w, p) = rk4(g, tau, w, p, h2);
                let s = T::PI() - (-(tau + h2)).exp();
                if track(s, w_prev, w, &mut record) {
                    return Shot { crossings, w_end: w };
                }
            }
        }
        Shot { crossings, w_end: w }
    }
}

fn rk4<T: Real, F: Fn(T, T, T) -> (T, T)>(f: F, x: T, w: T, p: T, h: T) -> (T, T) {
    let hh = h * T::half();
    let (k1w, k1p) = f(x, w, p);
    let (k2w, k2p) = f(x + hh, w + hh * k1w, p + hh * k1p);
    let (k3w, k3p) = f(x + hh, w + hh * k2w, p + hh * k2p);
    let (k4w, k4p) = f(x + h, w + h * k3w, p + h * k3p);
    let six = lit::<T>(6.0);
    (w + h * (k1w + k2w.twice() + k3w.twice() + k4w) / six, p + h * (k1p + k2p.twice() + k3p.twice() + k4p) / six)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_exponent_examples() {
        assert_eq!(char_exponent(2.0).unwrap().alpha, 1.0);
        assert_eq!(char_exponent(0.0).unwrap().alpha, 0.0);
        assert!((char_exponent(6.0f64).unwrap().alpha - 2.0).abs() < 1e-15);
        assert!(matches!(char_exponent(-1.0), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn hemisphere() {
        let r = cap_eigenvalue(0.0f64, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
        assert!(r.error_estimate > 0.0 && r.error_estimate <= 1e-10 * 2.0);
        assert_eq!(r.method, Method::Shooting);
    }

    #[test]
    fn range_checks() {
        assert!(cap_eigenvalue(1.5704, 1e-9).is_err());
        assert!(cap_eigenvalue(-std::f64::consts::FRAC_PI_2 - 1e-5, 1e-9).is_err());
        assert!(bkp_sum(1.5703, 1e-9).is_err());
    }
}
