use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{IsoConfig, SuiteConfig};
use super::report::{ClaimBuilder, Report};
use super::{suite_polygons, STREAM_CAP_IDENTITY, STREAM_CUTS};
use crate::isoperimetry::{
    check_convex_subset, check_curve, FamilyKind, IsoTestCurveFamily, Surface, EQUALITY_TOL, PASS_TOL,
};
use crate::sphere_geom::{BoundaryTag, Domain, HalfSpace, UnitVec, Vec3};
use crate::spindle::{cap_area, cap_perimeter, profile_g, Cap, SpindleParam};

const ANCHOR_INEQUALITY: &str =
    "L^2 >= A(4 a pi - A) for every region of S_a and of a doubled convex polygon of area 2 pi a";
const ANCHOR_EQUALITY: &str = "equality in L^2 >= A(4 a pi - A) holds only for the caps U_{a,b}";
const ANCHOR_CAP: &str = "cap of S_a: area 2 a pi (1 - sin b), perimeter 2 a pi cos b, so L^2 = A(4 a pi - A)";
const ANCHOR_SPHERE: &str = "S_1 is the round sphere: g(u) = sin u, total area 4 pi";
const ANCHOR_CONVEX: &str = "L^2 >= A(2 pi a - A) for V inside a convex spherical region of area 2 pi a";
const ANCHOR_DELTA: &str = "the isoperimetric deficit of doubled polygons grows with delta(P) = min angle - pi a";

struct Named {
    name: String,
    surface: Surface<f64>,
}

fn surfaces(cfg: &IsoConfig, seed: u64) -> Vec<Named> {
    let mut out: Vec<Named> = cfg
        .spindles
        .iter()
        .filter_map(|&a| {
            SpindleParam::new(a).ok().map(|p| Named { name: format!("spindle-{a}"), surface: Surface::Spindle(p) })
        })
        .collect();
    for (name, p) in suite_polygons(cfg.octant, &cfg.random_polygon_sizes, seed) {
        out.push(Named { name, surface: Surface::Doubled(Domain::Polygon(p)) });
    }
    out
}

struct Outcome {
    kind: FamilyKind,
    id: usize,
    relative_margin: f64,
    pass: bool,
    equality: bool,
    expected_equality: bool,
}

fn run_surface(s: &Surface<f64>, seed: u64, n: usize) -> Result<Vec<Outcome>, String> {
    let kinds = FamilyKind::ALL;
    let per = n.div_ceil(kinds.len());
    let mut jobs = Vec::new();
    for (k, kind) in kinds.iter().enumerate() {
        let count = per.min(n.saturating_sub(k * per));
        jobs.extend((0..count).map(|id| (*kind, id)));
    }
    jobs.into_par_iter()
        .map(|(kind, id)| {
            let fam = IsoTestCurveFamily::new(s.clone(), seed, kind);
            let c = fam.curve(id).map_err(|e| format!("{kind} #{id}: {e}"))?;
            let r = check_curve(s, &c.boundary).map_err(|e| format!("{kind} #{id}: {e}"))?;
            Ok(Outcome {
                kind,
                id,
                relative_margin: r.relative_margin,
                pass: r.pass,
                equality: r.equality,
                expected_equality: c.expected_equality,
            })
        })
        .collect()
}

pub fn run_theorem_iso_suite(cfg: &SuiteConfig, seed: u64) -> Report {
    let mut report = Report::new(&cfg.version, seed);
    let c = &cfg.iso;
    let named = surfaces(c, seed);
    let results: Vec<Result<Vec<Outcome>, String>> =
        named.par_iter().map(|s| run_surface(&s.surface, seed, c.curves_per_surface)).collect();

    let mut eq = ClaimBuilder::new("iso/equality-cases", ANCHOR_EQUALITY, &(c, seed), EQUALITY_TOL);
    let mut delta = ClaimBuilder::new("iso/delta-margin", ANCHOR_DELTA, &(c, seed), 0.0).informational();
    let mut flagged = Vec::new();
    for (s, res) in named.iter().zip(results) {
        let mut b =
            ClaimBuilder::new(format!("iso/inequality/{}", s.name), ANCHOR_INEQUALITY, &(c, seed, &s.name), PASS_TOL);
        b.value("a", s.surface.a());
        match res {
            Err(e) => {
                b.check(false, || e);
            }
            Ok(outs) => {
                let mut min_rel = f64::INFINITY;
                let mut min_strict = f64::INFINITY;
                let mut n_eq = 0;
                for o in &outs {
                    b.check(o.pass, || format!("{} #{}: relative margin {:e}", o.kind, o.id, o.relative_margin));
                    eq.check(o.equality == o.expected_equality, || {
                        format!(
                            "{} {} #{}: equality {} expected {}",
                            s.name, o.kind, o.id, o.equality, o.expected_equality
                        )
                    });
                    if o.equality {
                        n_eq += 1;
                        flagged.push(format!("{}/{}", s.name, o.kind));
                    }
                    min_rel = min_rel.min(o.relative_margin);
                    if !o.expected_equality {
                        min_strict = min_strict.min(o.relative_margin);
                    }
                }
                b.value("curves", outs.len()).value("min_relative_margin", min_rel).value("equality_count", n_eq);
                if let Surface::Doubled(w) = &s.surface {
                    delta.value(&format!("{}/delta", s.name), w.delta());
                    delta.value(&format!("{}/min_relative_margin", s.name), min_strict);
                }
                if matches!(s.surface, Surface::Spindle(_)) && s.surface.a() == 1.0 {
                    b.value("classical_sphere", true);
                }
            }
        }
        report.push(b.finish());
    }
    flagged.dedup();
    eq.value("flagged_families", flagged);
    report.push(eq.finish());
    report.push(delta.finish());
    report.push(cap_identity_claim(cfg, seed));
    report.push(sphere_reduction_claim());
    report.push(convex_subset_claim(c, seed));
    report
}

fn cap_identity_claim(cfg: &SuiteConfig, seed: u64) -> super::report::Claim {
    let l = &cfg.lemma;
    let mut b = ClaimBuilder::new("iso/cap-identity", ANCHOR_CAP, &(l.cap_identity_samples, seed), l.cap_identity_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CAP_IDENTITY);
    let mut worst: f64 = 0.0;
    for _ in 0..l.cap_identity_samples {
        let a = rng.gen_range(1e-3..=1.0);
        let bb = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
        let cap = Cap::new(SpindleParam::new(a).expect("a in range"), bb).expect("b in range");
        let total = 4.0 * a * std::f64::consts::PI;
        let (p, ar) = (cap_perimeter(&cap), cap_area(&cap));
        let rel = (p * p - ar * (total - ar)).abs() / (total * total);
        worst = worst.max(rel);
        b.check(rel <= l.cap_identity_tol, || format!("a={a} b={bb}: {rel:e}"));
    }
    b.value("max_relative_residual", worst);
    b.finish()
}

fn sphere_reduction_claim() -> super::report::Claim {
    let mut b = ClaimBuilder::new("iso/sphere-reduction", ANCHOR_SPHERE, &1000usize, 1e-12);
    let one = SpindleParam::new(1.0).expect("a = 1");
    let mut worst: f64 = 0.0;
    for k in 0..=1000 {
        let u = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / 1000.0;
        match profile_g(one, u) {
            Ok(g) => {
                let err = (g - u.sin()).abs();
                worst = worst.max(err);
            }
            Err(e) => b.error("profile_g", &e),
        }
    }
    b.check(worst <= 1e-12, || format!("profile error {worst:e}"));
    let area_err = (one.total_area() - 4.0 * std::f64::consts::PI).abs();
    b.check(area_err <= 1e-10, || format!("area error {area_err:e}"));
    b.value("max_profile_error", worst).value("area_error", area_err);
    b.finish()
}

fn convex_subset_claim(c: &IsoConfig, seed: u64) -> super::report::Claim {
    let mut b = ClaimBuilder::new("iso/convex-subset", ANCHOR_CONVEX, &(c, seed), PASS_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CUTS);
    let mut min_rel = f64::INFINITY;
    for (name, p) in suite_polygons(c.octant, &c.random_polygon_sizes, seed) {
        let w = Domain::Polygon(p.clone());
        for k in 0..20 {
            // a plane through a random interior point
            let mut s = Vec3::zero();
            for v in p.vertices() {
                s += v.vec().scale(rng.gen_range(0.05..1.0));
            }
            let q = UnitVec::from_vec(s).expect("interior");
            let n = UnitVec::from_vec(Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ))
            .unwrap_or(UnitVec::e_z());
            // keep the convex side so that V stays convex
            let h = if n.dot(q) >= 0.0 { HalfSpace::new(n, n.dot(q)) } else { HalfSpace::new(n.antipode(), -n.dot(q)) };
            let r = w.boundary().clip(&h, BoundaryTag::Dirichlet, "cut").and_then(|v| check_convex_subset(&w, &v));
            match r {
                Ok(r) => {
                    let total = 2.0 * std::f64::consts::PI * w.a();
                    let rel = r.margin / (total * total);
                    min_rel = min_rel.min(rel);
                    b.check(rel >= -PASS_TOL, || format!("{name} cut {k}: {rel:e}"));
                }
                Err(e) => b.error(&format!("{name} cut {k}"), &e),
            }
        }
    }
    b.value("min_relative_margin", min_rel);
    b.finish()
}
