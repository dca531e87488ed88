//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature.

#![allow(clippy::excessive_precision)] // tabulated Kronrod nodes

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn absolute(abs_tol: T) -> Self {
        Self { abs_tol, rel_tol: T::zero(), max_intervals: 4000 }
    }
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self { abs_tol: lit(1e-12), rel_tol: lit(1e-12), max_intervals: 4000 }
    }
}

/// Integral value and the estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let center = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(center);
    let mut kron = fc * lit::<T>(WGK[7]);
    let mut gauss = fc * lit::<T>(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * lit::<T>(x);
        let fsum = f(center - dx) + f(center + dx);
        kron += lit::<T>(w) * fsum;
        if j % 2 == 1 {
            gauss += lit::<T>(WG[j / 2]) * fsum;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, opts: QuadOptions<T>) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: T::zero(), intervals: 0 });
    }
    let mut panels = vec![kronrod(&mut f, a, b)];
    loop {
        let value: T = panels.iter().map(|p| p.value).sum();
        let error: T = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure(error.to_f64_lossy()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        // Roundoff floor: panel errors below a few ulps of the panel value cannot shrink.
        let floor: T = panels.iter().map(|p| p.value.abs() * T::epsilon() * lit(50.0)).sum();
        if error <= target || error <= floor {
            return Ok(QuadResult { value, error, intervals: panels.len() });
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure(error.to_f64_lossy()));
        }
        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::half();
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
    }
}

/// Integrates across a sorted list of breakpoints, restarting the adaptive
/// scheme on each piece so kinks in piecewise-smooth integrands are resolved.
pub fn integrate_pieces<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breakpoints: &[T],
    opts: QuadOptions<T>,
) -> Result<QuadResult<T>> {
    let mut total = QuadResult { value: T::zero(), error: T::zero(), intervals: 0 };
    for w in breakpoints.windows(2) {
        let r = integrate(&mut f, w[0], w[1], opts)?;
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(9) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn resolves_endpoint_sqrt_singularity() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, QuadOptions::absolute(1e-12)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x: f64| (30.0 * x).cos(), 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((r.value - (90f64).sin() / 30.0).abs() < 1e-12);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let opts = QuadOptions { max_intervals: 50, ..QuadOptions::default() };
        assert!(integrate(|x: f64| 1.0 / x, 0.0, 1.0, opts).is_err());
    }

    #[test]
    fn f32_instantiation() {
        let r = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, QuadOptions::absolute(1e-5)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }
}
