use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spindle_core::isoperimetry::{check_curve, lemma_sum_check, Surface, TestBoundary};
use spindle_core::spindle::SampledCurve;
use spindle_core::verify::{
    bkp_grid, format_float, gen_p_all_splits, run_lemma_suite, run_theorem_iso_suite, suite_polygons, sum_lemma_tuple,
    Report, SuiteConfig, Verdict,
};
use spindle_core::{SphericalPolygon64, SpindleParam64, UnitVec64};

fn small_config() -> SuiteConfig {
    let mut cfg = SuiteConfig::default();
    cfg.iso.curves_per_surface = 20;
    cfg.iso.random_polygon_sizes = vec![4, 5];
    cfg.lemma.sum_lemma_tuples = 500;
    cfg.lemma.gen_p_polygons = 50;
    cfg
}

#[test]
fn shipped_config_parses_and_rejects_unknown_keys() {
    let cfg = SuiteConfig::default();
    assert_eq!(cfg.iso.spindles, vec![0.25, 0.5, 0.75, 1.0]);
    assert_eq!(cfg.faber_krahn.h, 0.05);
    let mut v: serde_json::Value = serde_json::to_value(&cfg).unwrap();
    assert_eq!(SuiteConfig::from_json(&v.to_string()).unwrap(), cfg);
    v["lemma"]["surprise"] = 1.into();
    assert!(SuiteConfig::from_json(&v.to_string()).is_err());
}

#[test]
fn suites_are_deterministic_and_pass() {
    let cfg = small_config();
    let run = |seed| {
        let mut r = run_theorem_iso_suite(&cfg, seed);
        r.extend(run_lemma_suite(&cfg, seed));
        r
    };
    let (a, b) = (run(7), run(7));
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.passed(), "{}", a.to_json());
    assert_eq!(a.summary.fail, 0);
    assert!(a.claim("lemma/c-hat").is_some_and(|c| c.verdict == Verdict::Informational));
    // claims come out sorted
    let ids: Vec<&str> = a.claims.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_ne!(run(8).to_json(), a.to_json());
}

#[test]
fn report_round_trips_and_uses_fixed_digits() {
    let cfg = small_config();
    let r = run_lemma_suite(&cfg, 3);
    let json = r.to_json();
    let back: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json(), json);
    let c = r.claim("lemma/profile-ode").unwrap();
    let tol = format_float(c.tolerance, 17);
    assert!(json.contains(&format!("\"tolerance\": {tol}")), "{tol}");

    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("claim_id,verdict,key,value\n"));
    for line in csv.lines().skip(1) {
        let value = line.rsplit(',').next().unwrap();
        if let Some((mant, _)) = value.split_once('e') {
            if mant.parse::<f64>().is_ok() {
                let digits = mant.trim_start_matches('-').replace('.', "");
                assert_eq!(digits.len(), 12, "{line}");
            }
        }
    }
}

#[test]
fn format_float_significant_digits() {
    assert_eq!(format_float(0.1, 17), "1.0000000000000001e-1");
    assert_eq!(format_float(-2.0, 12), "-2.00000000000e0");
    assert_eq!(format_float(f64::INFINITY, 12), "inf");
}

#[test]
fn bkp_grid_is_symmetric_and_contains_zero() {
    let g = bkp_grid(100, 1.5);
    assert_eq!(g.len(), 101);
    assert!(g.contains(&0.0));
    assert_eq!(g[0], -1.5);
    assert_eq!(g[99], 1.5);
    for k in 0..100 {
        assert!((g[k] + g[99 - k]).abs() < 1e-15);
    }
    assert_eq!(bkp_grid(3, 1.0), vec![-1.0, 0.0, 1.0]);
}

#[test]
fn gen_p_identity_on_octant_and_regular_hexagon() {
    let oct = SphericalPolygon64::new(vec![UnitVec64::e_x(), UnitVec64::e_y(), UnitVec64::e_z()]).unwrap();
    let (res, holds) = gen_p_all_splits(&oct).unwrap();
    assert!(res <= 1e-12 && holds);

    let z = 0.8f64;
    let r = (1.0 - z * z).sqrt();
    let hex: Vec<UnitVec64> = (0..6)
        .map(|k| {
            let t = k as f64 * PI / 3.0;
            UnitVec64::new(r * t.cos(), r * t.sin(), z).unwrap()
        })
        .collect();
    let (res, holds) = gen_p_all_splits(&SphericalPolygon64::new(hex).unwrap()).unwrap();
    assert!(res <= 1e-12 && holds);
}

#[test]
fn suite_polygons_are_named_and_reproducible() {
    let a = suite_polygons(true, &[4, 6], 11);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["octant", "polygon0-4", "polygon1-6"]);
    assert_eq!(a[2].1.len(), 6);
    let b = suite_polygons(true, &[4, 6], 11);
    for ((_, p), (_, q)) in a.iter().zip(&b) {
        assert_eq!(p.area(), q.area());
    }
}

#[test]
fn exchanged_latitude_circle_is_extremal() {
    let a = 0.6;
    let b = 0.4f64;
    let n = 400;
    let samples: Vec<[f64; 2]> = (0..n).map(|k| [b, 2.0 * PI * k as f64 / n as f64]).collect();
    let json = serde_json::json!({ "samples": samples, "closed": true }).to_string();
    let c = SampledCurve::<f64>::from_json(&json).unwrap();
    let s = Surface::Spindle(SpindleParam64::new(a).unwrap());
    let r = check_curve(&s, &TestBoundary::Spindle(vec![Arc::new(c)])).unwrap();
    assert!((r.l - 2.0 * PI * a * b.cos()).abs() < 1e-12, "{}", r.l);
    assert!(r.equality, "{r:?}");

    assert!(SampledCurve::<f64>::from_json(r#"{"samples": [[0, 0]]}"#).is_err());
    assert!(SampledCurve::<f64>::from_json(r#"{"samples": [], "extra": 1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_sum_lemma_tuples_are_strict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ls, areas, a) = sum_lemma_tuple(&mut rng);
        let total = 4.0 * PI * a;
        prop_assert!(areas.iter().sum::<f64>() < total);
        for (l, ar) in ls.iter().zip(&areas) {
            prop_assert!(*l >= (ar * (total - ar)).sqrt() * (1.0 - 1e-15));
        }
        prop_assert!(lemma_sum_check(&ls, &areas, a).unwrap());
    }

    #[test]
    fn gen_p_identity_on_random_polygons(seed in any::<u64>(), n in 3usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: SphericalPolygon64 = spindle_core::sphere_geom::random_convex_polygon(&mut rng, n);
        let (res, holds) = gen_p_all_splits(&p).unwrap();
        prop_assert!(res <= 1e-12);
        prop_assert!(holds);
    }
}
