#![allow(clippy::excessive_precision)] // oracle values kept at full printed precision

use spindle_core::spectral::{bkp_sum, cap_eigenvalue, char_exponent, faber_krahn_bound, CapEigenProblem};
use spindle_core::spindle::SpindleParam;

// Legendre-function roots computed with mpmath: P_ν(−sin b) = 0, λ = ν(ν + 1).
const LEGENDRE: &[(f64, f64)] = &[
    (0.0, 2.0),
    (0.1, 2.3310416591821141718),
    (-0.1, 1.7261675387149050407),
    (0.3, 3.2412731050403950353),
    (0.4, 3.8802009879279798484),
    (0.5, 4.7059488556664740658),
    (-0.5, 0.99421452187305162469),
    (0.8, 9.3983527854769025673),
    (1.0, 17.415723873183980336),
    (-1.0, 0.5002426969052215667),
    (1.4, 197.91514942373962823),
    (1.5, 1153.5069580516710411),
    (-1.4, 0.23935074818945416674),
    (-1.5, 0.17052502823409772212),
    (-1.55, 0.12107252687574027756),
];

#[test]
fn matches_legendre_oracle() {
    for &(b, lam) in LEGENDRE {
        let r = cap_eigenvalue(b, 1e-10).unwrap();
        let rel = (r.value - lam).abs() / lam;
        assert!(rel < 1e-9, "b = {b}: {} vs {lam} (rel {rel:e}, est {:e})", r.value, r.error_estimate);
    }
}

#[test]
fn tends_to_zero_as_cap_fills_sphere() {
    let l: Vec<f64> = [-1.4, -1.5, -1.55].iter().map(|&b| cap_eigenvalue(b, 1e-9).unwrap().value).collect();
    assert!(l[0] > l[1] && l[1] > l[2] && l[2] > 0.0);
}

#[test]
fn increasing_in_b() {
    let l: Vec<f64> =
        (0..50).map(|k| -1.5 + 3.0 * k as f64 / 49.0).map(|b| cap_eigenvalue(b, 1e-9).unwrap().value).collect();
    assert!(l.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn eigenfunction_residual_and_sign() {
    for b in [-0.7, 0.0, 0.3, 1.2] {
        let p = CapEigenProblem::new(b, 1e-10f64).unwrap();
        let lam = p.solve().unwrap().value;
        let h = p.base_step();
        let f = p.eigenfunction(lam, h);
        // no node strictly inside (b, π/2)
        let wmax = f.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
        assert!(f[..f.len() - 1].iter().all(|&(_, w)| w > -1e-9 * wmax));
        assert!(f.last().unwrap().1.abs() < 1e-6 * wmax);
        // 5-point stencil on a uniform sub-grid of the first phase
        let stride = 20;
        let pts: Vec<(f64, f64)> = f[1..].iter().step_by(stride).copied().filter(|&(u, _)| u > 0.0).collect();
        let d = pts[0].0 - pts[1].0;
        let mut worst: f64 = 0.0;
        for k in 2..pts.len().saturating_sub(2) {
            let (u, w) = pts[k];
            let wm2 = pts[k + 2].1;
            let wm1 = pts[k + 1].1;
            let wp1 = pts[k - 1].1;
            let wp2 = pts[k - 2].1;
            let w1 = (-wp2 + 8.0 * wp1 - 8.0 * wm1 + wm2) / (12.0 * d);
            let w2 = (-wp2 + 16.0 * wp1 - 30.0 * w + 16.0 * wm1 - wm2) / (12.0 * d * d);
            let res = u.cos() * w2 - u.sin() * w1 + lam * u.cos() * w;
            worst = worst.max(res.abs());
        }
        assert!(worst <= 1e-6 * wmax * lam.max(1.0), "b = {b}: residual {worst:e}");
    }
}

#[test]
fn fourth_order_convergence() {
    let p = CapEigenProblem::new(0.3, 1e-9).unwrap();
    let l: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| p.solve_fixed(h).unwrap()).collect();
    let ratio = (l[0] - l[1]) / (l[1] - l[2]);
    let order = ratio.abs().log2();
    assert!((2.0..=8.0).contains(&order), "order {order}");
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn bkp_examples() {
    assert!((bkp_sum(0.0f64, 1e-10).unwrap() - 2.0).abs() < 1e-9);
    let s = bkp_sum(0.5f64, 1e-10).unwrap();
    assert!(s > 2.0 + 1e-3);
    assert!((bkp_sum(-0.5f64, 1e-10).unwrap() - s).abs() < 2e-9);
    let oracle = 1.7261960505908894604 + 0.61544364352173867444;
    assert!((s - oracle).abs() < 1e-8);
}

#[test]
fn alpha_round_trip() {
    for &(_, lam) in LEGENDRE {
        let a = char_exponent(lam).unwrap();
        assert!((a.eigenvalue() - lam).abs() <= 1e-12 * lam.max(1.0));
    }
}

#[test]
fn faber_krahn_examples() {
    let hemi = faber_krahn_bound(SpindleParam::new(1.0).unwrap(), 2.0 * std::f64::consts::PI, 1e-10).unwrap();
    assert!((hemi.value - 2.0).abs() < 1e-8);
    let half = faber_krahn_bound(SpindleParam::new(0.5).unwrap(), std::f64::consts::PI, 1e-10).unwrap();
    assert!((half.value - 2.0).abs() < 1e-8);
    let tiny = faber_krahn_bound(SpindleParam::new(1.0).unwrap(), 1e-3, 1e-9).unwrap();
    assert!(tiny.value > 100.0);
}
