use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{LemmaConfig, SuiteConfig};
use super::report::{Claim, ClaimBuilder, Report};
use super::{suite_polygons, STREAM_GEN_P, STREAM_SUM_LEMMA};
use crate::isoperimetry::{lemma_sum_check, profile_ode_identity};
use crate::smoothing::{
    calibrate_c_hat, curvature_budget, polygon_tip_profiles, sign_conditions, smoothed_curvature, smoothing_coeffs,
    total_curvature_smoothed, SmoothedTipProfile,
};
use crate::sphere_geom::{gen_p_dichotomy, random_convex_polygon, SphericalPolygon};
use crate::spindle::SpindleParam;

const ANCHOR_SMOOTH: &str = "w_eps = b0 + b1 u^2 + b2 u^4 matches w to second order at eps, b1 > 0 > b2, K_eps(eps) = 1 and K_eps is non-increasing";
const ANCHOR_GB: &str =
    "the integral of K_eps over S_{a,eps} is 4 pi; each smoothed tip carries at most 2 pi (1 - a) + C eps";
const ANCHOR_CHAT: &str = "C in the smoothing error terms; calibrated and reported";
const ANCHOR_BUDGET: &str = "integral of K_eps over V <= Area(V) + 2 sum (pi - theta_j) + C eps";
const ANCHOR_SUM: &str =
    "if L_j^2 >= A_j(4 pi a - A_j) for m >= 2 pieces then (sum L_j)^2 > (sum A_j)(4 pi a - sum A_j)";
const ANCHOR_GENP: &str =
    "for any split of the angles of a convex polygon of area 2 pi a, q1 + q2 = 2a and max(q1, q2) >= a";
const ANCHOR_ODE: &str = "L(t) L'(t) = 2 pi - G(t) with G(t) = t + 2 pi (1 - a) along the cap profile";

pub fn run_lemma_suite(cfg: &SuiteConfig, seed: u64) -> Report {
    let l = &cfg.lemma;
    let mut report = Report::new(&cfg.version, seed);
    report.push(smoothing_claim(l));
    let (gb, chat, budget) = gauss_bonnet_claims(l, seed, cfg);
    report.push(gb);
    report.push(chat);
    report.push(budget);
    report.push(sum_lemma_claim(l, seed));
    report.push(gen_p_claim(l, seed));
    report.push(profile_claim(l));
    report
}

fn grid(l: &LemmaConfig) -> Vec<(f64, f64)> {
    l.smoothing_a.iter().flat_map(|&a| l.smoothing_eps.iter().map(move |&e| (a, e))).collect()
}

/// Largest relative increase of `K_ε` between consecutive points of `[0, ε]`.
pub fn curvature_increase(s: &SmoothedTipProfile<f64>, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut prev = smoothed_curvature(s, 0.0);
    for k in 1..=n {
        let k_u = smoothed_curvature(s, s.eps * k as f64 / n as f64);
        worst = worst.max((k_u - prev) / prev.abs().max(1.0));
        prev = k_u;
    }
    worst
}

fn smoothing_claim(l: &LemmaConfig) -> Claim {
    let mut b = ClaimBuilder::new("lemma/smoothing", ANCHOR_SMOOTH, l, l.matching_tol);
    let mut worst_res: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    for (a, eps) in grid(l) {
        let tag = format!("a={a} eps={eps}");
        let s = match SpindleParam::new(a).and_then(|p| smoothing_coeffs(p, eps)) {
            Ok(s) => s,
            Err(e) => {
                b.error(&tag, &e);
                continue;
            }
        };
        match s.matching_residuals() {
            Ok(r) => {
                let m = r.iter().fold(0.0f64, |x, y| x.max(y.abs()));
                worst_res = worst_res.max(m);
                b.check(m <= l.matching_tol, || format!("{tag}: matching residual {m:e}"));
            }
            Err(e) => b.error(&tag, &e),
        }
        b.check(s.b1 > 0.0 && s.b2 < 0.0, || format!("{tag}: b1 = {}, b2 = {}", s.b1, s.b2));
        let k_eps = smoothed_curvature(&s, eps);
        worst_k = worst_k.max((k_eps - 1.0).abs());
        b.check((k_eps - 1.0).abs() <= 1e-6, || format!("{tag}: K(eps) = {k_eps}"));
        let inc = curvature_increase(&s, l.monotone_grid);
        b.check(inc <= 1e-12, || format!("{tag}: K increases by {inc:e}"));
        let sc = sign_conditions(&s, l.monotone_grid);
        b.check(sc.holds, || format!("{tag}: {:?}", sc.first_violation));
    }
    b.value("max_matching_residual", worst_res).value("max_curvature_match_error", worst_k);
    b.finish()
}

fn gauss_bonnet_claims(l: &LemmaConfig, seed: u64, cfg: &SuiteConfig) -> (Claim, Claim, Claim) {
    let mut gb = ClaimBuilder::new("lemma/gauss-bonnet", ANCHOR_GB, l, l.gauss_bonnet_rel_tol);
    let mut chat = ClaimBuilder::new("lemma/c-hat", ANCHOR_CHAT, l, 0.0).informational();
    let mut budget = ClaimBuilder::new("lemma/curvature-budget", ANCHOR_BUDGET, &(l, seed), 0.0);
    let c_hat = match calibrate_c_hat(&l.smoothing_a, &l.smoothing_eps) {
        Ok(c) => {
            chat.value("c_hat", c.c_hat).value("max_ratio", c.max_ratio);
            c.c_hat
        }
        Err(e) => {
            chat.error("calibration", &e);
            f64::NAN
        }
    };
    let mut worst: f64 = 0.0;
    for (a, eps) in grid(l) {
        let tag = format!("a={a} eps={eps}");
        let ap = SpindleParam::new(a).expect("config a in range");
        match total_curvature_smoothed(ap, eps) {
            Ok(tc) => {
                let rel = (tc.total - 4.0 * PI).abs() / (4.0 * PI);
                worst = worst.max(rel);
                gb.check(rel <= l.gauss_bonnet_rel_tol, || format!("{tag}: relative error {rel:e}"));
                let cap = ap.tip_mass() + c_hat * eps;
                gb.check(tc.tip_mass <= cap, || format!("{tag}: tip mass {} > {cap}", tc.tip_mass));
            }
            Err(e) => gb.error(&tag, &e),
        }
    }
    gb.value("max_relative_error", worst);

    // doubled polygons: each smoothed corner against its own budget
    let polys = suite_polygons(cfg.iso.octant, &cfg.iso.random_polygon_sizes, seed);
    for (name, p) in polys {
        let eps = l.polygon_eps;
        match polygon_tip_profiles(&p, eps) {
            Ok(tips) => {
                for (j, (s, th)) in tips.iter().zip(p.interior_angles()).enumerate() {
                    let r = s.curvature_mass().and_then(|m| {
                        let area = s.disc_area()?;
                        Ok((m, curvature_budget(area, &[th], eps, c_hat)?))
                    });
                    match r {
                        Ok((m, cap)) => {
                            budget.check(m <= cap, || format!("{name} corner {j}: {m} > {cap}"));
                        }
                        Err(e) => budget.error(&format!("{name} corner {j}"), &e),
                    }
                }
            }
            Err(e) => budget.error(&name, &e),
        }
    }
    (gb.finish(), chat.finish(), budget.finish())
}

/// A random tuple satisfying the premise of the sum lemma.
pub fn sum_lemma_tuple(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64) {
    let a = rng.gen_range(0.05..=1.0);
    let total = 4.0 * PI * a;
    let m = rng.gen_range(2..=6);
    let frac = rng.gen_range(0.01..0.99);
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let ws: f64 = w.iter().sum();
    let areas: Vec<f64> = w.iter().map(|x| x / ws * frac * total).collect();
    let ls = areas
        .iter()
        .map(|&ar| {
            let base = (ar * (total - ar)).sqrt();
            if rng.gen_bool(0.3) {
                base
            } else {
                base * (1.0 + rng.gen_range(0.0..0.5))
            }
        })
        .collect();
    (ls, areas, a)
}

fn sum_lemma_claim(l: &LemmaConfig, seed: u64) -> Claim {
    let mut b = ClaimBuilder::new("lemma/sum", ANCHOR_SUM, &(l.sum_lemma_tuples, seed), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_SUM_LEMMA);
    for k in 0..l.sum_lemma_tuples {
        let (ls, areas, a) = sum_lemma_tuple(&mut rng);
        match lemma_sum_check(&ls, &areas, a) {
            Ok(strict) => {
                b.check(strict, || format!("tuple {k}: not strict"));
            }
            Err(e) => b.error(&format!("tuple {k}"), &e),
        }
    }
    b.value("tuples", l.sum_lemma_tuples);
    b.finish()
}

/// All splits of all cyclic rotations; returns (max |q1 + q2 − 2a|, all max(q1, q2) ≥ a).
pub fn gen_p_all_splits(p: &SphericalPolygon<f64>) -> crate::Result<(f64, bool)> {
    let angles = p.interior_angles();
    let n = angles.len();
    let a = p.area() / (2.0 * PI);
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for r in 0..n {
        let mut rot = angles.clone();
        rot.rotate_left(r);
        for m in 1..n {
            let q = gen_p_dichotomy(&rot, m, a)?;
            worst = worst.max((q.q1 + q.q2 - 2.0 * a).abs());
            holds &= q.holds;
        }
    }
    Ok((worst, holds))
}

fn gen_p_claim(l: &LemmaConfig, seed: u64) -> Claim {
    let mut b = ClaimBuilder::new("lemma/gen-p", ANCHOR_GENP, &(l.gen_p_polygons, seed), l.gen_p_tol);
    let results: Vec<crate::Result<(f64, bool)>> = (0..l.gen_p_polygons)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_GEN_P + k as u64);
            let n = rng.gen_range(3..=8);
            gen_p_all_splits(&random_convex_polygon(&mut rng, n))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok((w, holds)) => {
                worst = worst.max(w);
                b.check(w <= l.gen_p_tol, || format!("polygon {k}: identity residual {w:e}"));
                b.check(holds, || format!("polygon {k}: max(q1, q2) < a"));
            }
            Err(e) => b.error(&format!("polygon {k}"), &e),
        }
    }
    b.value("max_identity_residual", worst);
    b.finish()
}

fn profile_claim(l: &LemmaConfig) -> Claim {
    let mut b = ClaimBuilder::new("lemma/profile-ode", ANCHOR_ODE, l, l.profile_tol);
    let mut worst: f64 = 0.0;
    for &a in &l.profile_a {
        let ap = SpindleParam::new(a).expect("config a in range");
        let total = ap.total_area();
        let ts: Vec<f64> = (0..l.profile_points).map(|k| total * (k as f64 + 0.5) / l.profile_points as f64).collect();
        match profile_ode_identity(ap, &ts) {
            Ok(w) => {
                worst = worst.max(w);
                b.check(w <= l.profile_tol, || format!("a={a}: {w:e}"));
            }
            Err(e) => b.error(&format!("a={a}"), &e),
        }
    }
    b.value("max_residual", worst);
    b.finish()
}
