use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, QuadOptions};
use crate::scalar::{lit, Real};

use super::SpindleParam;

/// A piecewise-C¹ curve `t ↦ (u(t), v(t))`, `t ∈ [0, 1]`, on `S_a`.
///
/// `v` is an unwrapped (continuous, real-valued) longitude, so a closed curve
/// winding once around a tip ends at `v(0) ± 2π`.
pub trait SpindleCurve<T: Real>: Sync {
    fn point(&self, t: T) -> (T, T);
    fn velocity(&self, t: T) -> (T, T);

    /// Parameters where the curve may fail to be C¹; must include 0 and 1.
    fn breakpoints(&self) -> Vec<T> {
        vec![T::zero(), T::one()]
    }
}

/// Curve given by closures for position and velocity.
pub struct FnCurve<P, V> {
    pub pos: P,
    pub vel: V,
}

impl<T, P, V> SpindleCurve<T> for FnCurve<P, V>
where
    T: Real,
    P: Fn(T) -> (T, T) + Sync,
    V: Fn(T) -> (T, T) + Sync,
{
    fn point(&self, t: T) -> (T, T) {
        (self.pos)(t)
    }

    fn velocity(&self, t: T) -> (T, T) {
        (self.vel)(t)
    }
}

/// Piecewise-linear interpolation of `(u, v)` samples; closed curves wrap
/// from the last sample back to the first with the longitude unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve<T> {
    nodes: Vec<(T, T)>,
}

impl<T: Real> SampledCurve<T> {
    pub fn new(samples: &[(T, T)], closed: bool) -> Result<Self> {
        if samples.len() < if closed { 3 } else { 2 } {
            return Err(Error::InvalidInput("too few curve samples".into()));
        }
        let mut nodes: Vec<(T, T)> = Vec::with_capacity(samples.len() + 1);
        let unwrap = |prev: T, v: T| -> T {
            let k = ((v - prev) / T::TAU()).round();
            v - k * T::TAU()
        };
        for &(u, v) in samples {
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::NonFinite("sample is not finite".into()));
            }
            let v = match nodes.last() {
                Some(&(_, pv)) => unwrap(pv, v),
                None => v,
            };
            nodes.push((u, v));
        }
        if closed {
            let (u0, v0) = nodes[0];
            let last = nodes.last().expect("non-empty").1;
            nodes.push((u0, unwrap(last, v0)));
        }
        Ok(Self { nodes })
    }

    /// Reads `{ "samples": [[u, v], ...], "closed": true }`.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Exchange {
            samples: Vec<[f64; 2]>,
            #[serde(default = "closed_default")]
            closed: bool,
        }
        fn closed_default() -> bool {
            true
        }
        let e: Exchange = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let samples: Vec<(T, T)> = e.samples.iter().map(|p| (lit(p[0]), lit(p[1]))).collect();
        Self::new(&samples, e.closed)
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    fn locate(&self, t: T) -> (usize, T) {
        let m = self.segments();
        let x = t.max(T::zero()).min(T::one()) * lit(m as f64);
        let k = x.floor().to_usize().unwrap_or(0).min(m - 1);
        (k, x - lit(k as f64))
    }
}

impl<T: Real> SpindleCurve<T> for SampledCurve<T> {
    fn point(&self, t: T) -> (T, T) {
        let (k, s) = self.locate(t);
        let (u0, v0) = self.nodes[k];
        let (u1, v1) = self.nodes[k + 1];
        (u0 + (u1 - u0) * s, v0 + (v1 - v0) * s)
    }

    fn velocity(&self, t: T) -> (T, T) {
        let (k, _) = self.locate(t);
        let m = lit::<T>(self.segments() as f64);
        let (u0, v0) = self.nodes[k];
        let (u1, v1) = self.nodes[k + 1];
        ((u1 - u0) * m, (v1 - v0) * m)
    }

    fn breakpoints(&self) -> Vec<T> {
        let m = self.segments();
        (0..=m).map(|k| lit::<T>(k as f64) / lit(m as f64)).collect()
    }
}

fn curve_opts<T: Real>() -> QuadOptions<T> {
    QuadOptions { abs_tol: lit(1e-11), rel_tol: lit(1e-11), max_intervals: 20_000 }
}

fn in_chart<T: Real>(u: T, v: T) -> bool {
    u.is_finite() && v.is_finite() && u.abs() <= T::FRAC_PI_2() * (T::one() + T::epsilon())
}

/// Length `∫ √(u′² + a² cos²u · v′²) dt` in the spindle metric.
pub fn curve_length<T: Real, C: SpindleCurve<T> + ?Sized>(a: SpindleParam<T>, c: &C) -> Result<T> {
    let av = a.get();
    let mut bad = false;
    let r = integrate_pieces(
        |t| {
            let (u, v) = c.point(t);
            let (du, dv) = c.velocity(t);
            if !in_chart(u, v) || !du.is_finite() || !dv.is_finite() {
                bad = true;
                return T::zero();
            }
            (du * du + (av * u.cos() * dv).sq()).sqrt()
        },
        &c.breakpoints(),
        curve_opts(),
    )?;
    if bad {
        return Err(Error::NonFinite("curve leaves the coordinate range".into()));
    }
    Ok(r.value)
}

/// Area of the region to the left of a simple closed curve.
///
/// Uses the flux `∮ −a sin u dv` of the area form `a cos u dv∧du`, plus
/// `2πa` when the curve winds once around a tip (the chart degenerates there).
/// A curve with zero winding and negative flux bounds, on its left, the
/// complement of a tip-free disc: its area is `4aπ` plus the flux.
pub fn enclosed_area<T: Real, C: SpindleCurve<T> + ?Sized>(a: SpindleParam<T>, c: &C) -> Result<T> {
    let (u0, v0) = c.point(T::zero());
    let (u1, v1) = c.point(T::one());
    let winding = ((v1 - v0) / T::TAU()).round();
    if (u1 - u0).abs() > lit(1e-9) || (v1 - v0 - winding * T::TAU()).abs() > lit(1e-9) {
        return Err(Error::InvalidInput("curve is not closed".into()));
    }
    check_simple(c, 512)?;
    let av = a.get();
    let mut bad = false;
    let flux = integrate_pieces(
        |t| {
            let (u, v) = c.point(t);
            let (_, dv) = c.velocity(t);
            if !in_chart(u, v) || !dv.is_finite() {
                bad = true;
                return T::zero();
            }
            -av * u.sin() * dv
        },
        &c.breakpoints(),
        curve_opts(),
    )?
    .value;
    if bad {
        return Err(Error::NonFinite("curve leaves the coordinate range".into()));
    }
    let total = a.total_area();
    let area = match winding.to_i64().unwrap_or(i64::MAX) {
        0 if flux >= T::zero() => flux,
        0 => total + flux,
        1 | -1 => flux + T::TAU() * av,
        w => return Err(Error::InvalidInput(format!("closed curve winds {w} times around the axis"))),
    };
    Ok(area)
}

/// Rejects curves whose polyline sampling (at least `n` points, plus the
/// curve's breakpoints) has a pair of crossing non-adjacent segments in the
/// `(v, u)` chart, taking the periodicity of `v` into account.
pub fn check_simple<T: Real, C: SpindleCurve<T> + ?Sized>(c: &C, n: usize) -> Result<()> {
    let mut ts: Vec<T> = (0..=n).map(|k| lit::<T>(k as f64) / lit(n as f64)).collect();
    let bps = c.breakpoints();
    if bps.len() <= 4096 {
        ts.extend(bps);
    }
    ts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    ts.dedup_by(|x, y| (*x - *y).abs() < lit(1e-15));
    let pts: Vec<(T, T)> = ts
        .iter()
        .map(|&t| {
            let (u, v) = c.point(t);
            (v, u)
        })
        .collect();
    let m = pts.len() - 1;
    let closed = {
        let (v0, u0) = pts[0];
        let (v1, u1) = pts[m];
        (u0 - u1).abs() < lit(1e-9) && (((v1 - v0) / T::TAU()).round() * T::TAU() - (v1 - v0)).abs() < lit(1e-9)
    };
    // Bounding boxes per segment, shifted copies handled by nearest 2π offset.
    for i in 0..m {
        let (p0, p1) = (pts[i], pts[i + 1]);
        for j in (i + 2)..m {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            let (mut q0, mut q1) = (pts[j], pts[j + 1]);
            let mid_p = (p0.0 + p1.0) * T::half();
            let mid_q = (q0.0 + q1.0) * T::half();
            let k = ((mid_q - mid_p) / T::TAU()).round() * T::TAU();
            q0.0 -= k;
            q1.0 -= k;
            if segments_cross(p0, p1, q0, q1) {
                return Err(Error::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

fn orient<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> T {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross<T: Real>(p0: (T, T), p1: (T, T), q0: (T, T), q1: (T, T)) -> bool {
    if p0.0.max(p1.0) < q0.0.min(q1.0)
        || q0.0.max(q1.0) < p0.0.min(p1.0)
        || p0.1.max(p1.1) < q0.1.min(q1.1)
        || q0.1.max(q1.1) < p0.1.min(p1.1)
    {
        return false;
    }
    let d1 = orient(p0, p1, q0);
    let d2 = orient(p0, p1, q1);
    let d3 = orient(q0, q1, p0);
    let d4 = orient(q0, q1, p1);
    d1 * d2 <= T::zero() && d3 * d4 <= T::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sp(a: f64) -> SpindleParam<f64> {
        SpindleParam::new(a).unwrap()
    }

    fn latitude(b: f64) -> FnCurve<impl Fn(f64) -> (f64, f64) + Sync, impl Fn(f64) -> (f64, f64) + Sync> {
        FnCurve { pos: move |t: f64| (b, 2.0 * PI * t), vel: move |_t: f64| (0.0, 2.0 * PI) }
    }

    #[test]
    fn latitude_circle_length_and_area() {
        for (a, b) in [(0.5, 0.3), (1.0, -0.7), (0.2, 1.2)] {
            let c = latitude(b);
            let l = curve_length(sp(a), &c).unwrap();
            assert!((l - 2.0 * PI * a * f64::cos(b)).abs() < 1e-12);
            let area = enclosed_area(sp(a), &c).unwrap();
            assert!((area - 2.0 * PI * a * (1.0 - f64::sin(b))).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_latitude_encloses_lower_cap() {
        let b = 0.3;
        let c = FnCurve { pos: move |t: f64| (b, -2.0 * PI * t), vel: |_t: f64| (0.0, -2.0 * PI) };
        let area = enclosed_area(sp(0.5), &c).unwrap();
        assert!((area - PI * (1.0 + f64::sin(b))).abs() < 1e-12);
    }

    #[test]
    fn meridian_has_length_pi() {
        let c = FnCurve { pos: |t: f64| (-FRAC_PI_2 + PI * t, 0.3), vel: |_t: f64| (PI, 0.0) };
        assert!((curve_length(sp(0.4), &c).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn small_loop_without_tip_and_its_complement() {
        // small chart circle centred at (0, 0): area ≈ a·πr² for small r
        let r = 0.01;
        let ccw = FnCurve {
            pos: move |t: f64| (r * (2.0 * PI * t).sin(), r * (2.0 * PI * t).cos()),
            vel: move |t: f64| (2.0 * PI * r * (2.0 * PI * t).cos(), -2.0 * PI * r * (2.0 * PI * t).sin()),
        };
        // (v, u) = (r cos, r sin) runs counterclockwise in the (v, u) chart
        let a = sp(0.5);
        let area = enclosed_area(a, &ccw).unwrap();
        assert!(area > 0.0 && (area - 0.5 * PI * r * r).abs() < 1e-8, "{area}");
        let cw = FnCurve {
            pos: move |t: f64| (-r * (2.0 * PI * t).sin(), r * (2.0 * PI * t).cos()),
            vel: move |t: f64| (-2.0 * PI * r * (2.0 * PI * t).cos(), -2.0 * PI * r * (2.0 * PI * t).sin()),
        };
        let outside = enclosed_area(a, &cw).unwrap();
        assert!((outside + area - a.total_area()).abs() < 1e-12);
    }

    #[test]
    fn sampled_curve_closure_and_errors() {
        let samples: Vec<(f64, f64)> = (0..200).map(|k| (0.2, 2.0 * PI * k as f64 / 200.0)).collect();
        let c = SampledCurve::new(&samples, true).unwrap();
        let area = enclosed_area(sp(0.7), &c).unwrap();
        assert!((area - 2.0 * PI * 0.7 * (1.0 - f64::sin(0.2))).abs() < 1e-12);
        // inscribed polygon in the chart: the latitude segments are exact
        let l = curve_length(sp(0.7), &c).unwrap();
        assert!((l - 2.0 * PI * 0.7 * f64::cos(0.2)).abs() < 1e-12);

        let bad = FnCurve { pos: |t: f64| (2.0 * t, 0.0), vel: |_t: f64| (2.0, 0.0) };
        assert!(matches!(curve_length(sp(0.5), &bad), Err(Error::NonFinite(_))));
    }

    #[test]
    fn figure_eight_is_rejected() {
        let c = FnCurve {
            pos: |t: f64| {
                let s = 2.0 * PI * t + 0.1;
                (0.2 * (2.0 * s).sin(), 0.3 * s.sin())
            },
            vel: |t: f64| {
                let s = 2.0 * PI * t + 0.1;
                (0.8 * PI * (2.0 * s).cos(), 0.6 * PI * s.cos())
            },
        };
        assert!(matches!(enclosed_area(sp(0.5), &c), Err(Error::SelfIntersection(_, _))));
    }
}
