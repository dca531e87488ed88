use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::config::{FaberKrahnConfig, SuiteConfig};
use super::report::{Claim, ClaimBuilder, Report};
use super::suite_polygons;
use crate::error::{Error, Result};
use crate::fem::{build_region, lune_lower_bound, partition_alpha_sum, region_eigenvalue, VSpec};
use crate::spectral::{bkp_sum, cap_eigenvalue, char_exponent};
use crate::sphere_geom::{Domain, HalfSpace, Lune, SphericalPolygon, SphericalRegion, UnitVec, Vec3};

const ANCHOR_FK: &str =
    "mu(V) >= mu(Omega_{a,b}) = lambda(U_{1,b}) for V inside a convex W of area 2 pi a, Area(Omega_{a,b}) = Area(V)";
const ANCHOR_FK_EQ: &str = "mu(Omega_{a,b}) = mu(Omega_{1,b}) = lambda(U_{1,b})";
const ANCHOR_CONV: &str = "first-order surface elements converge at second order in h";
const ANCHOR_FH: &str = "alpha(V) + alpha(W minus V) >= 2 for V inside a convex W";
const ANCHOR_MONO: &str = "enlarging the Dirichlet part does not lower the first eigenvalue";
const ANCHOR_CHAT: &str = "mu(V_k) <= mu(V)(1 + C Area(V minus V_k)); C is calibrated and reported";
const ANCHOR_HEMI: &str = "lambda(U_{1,0}) = 2 with eigenfunction sin u";
const ANCHOR_BKP: &str = "alpha(U_{1,b}) + alpha(U_{1,-b}) >= 2, with equality only at b = 0";

/// A one-parameter family of subsets whose area increases with `t`.
struct Shape {
    name: &'static str,
    w: Domain<f64>,
    t: (f64, f64),
    v: Box<dyn Fn(f64) -> VSpec + Sync + Send>,
    lune_like: bool,
}

fn arr(v: Vec3<f64>) -> [f64; 3] {
    v.to_array()
}

fn octant() -> SphericalPolygon<f64> {
    SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).expect("octant")
}

fn lune(a: f64) -> Domain<f64> {
    Domain::Lune(Lune::new(a).expect("a in range"))
}

fn shrink_towards(p: &SphericalPolygon<f64>, s: f64) -> Vec<[f64; 3]> {
    let c = p.centroid_direction().vec();
    p.vertices().iter().map(|v| arr((c + (v.vec() - c).scale(s)).normalized().expect("non-zero"))).collect()
}

fn shape(name: &str, seed: u64) -> Result<Shape> {
    let lat = |below: bool| -> Box<dyn Fn(f64) -> VSpec + Sync + Send> {
        Box::new(move |t: f64| VSpec::LatitudeCap {
            b: if below { -(1.0 - 2.0 * t).asin() } else { (1.0 - 2.0 * t).asin() },
            below,
        })
    };
    let disc = |c: [f64; 3]| -> Box<dyn Fn(f64) -> VSpec + Sync + Send> {
        Box::new(move |r| VSpec::GeodesicDisc { center: c, radius: r })
    };
    let oct = octant();
    let centroid = arr(oct.centroid_direction().vec());
    let poly = || {
        suite_polygons(false, &[5], seed).pop().map(|(_, p)| p).ok_or_else(|| Error::InvalidInput("no polygon".into()))
    };
    Ok(match name {
        "lune-0.5-latitude" => {
            Shape { name: "lune-0.5-latitude", w: lune(0.5), t: (0.01, 0.99), v: lat(false), lune_like: true }
        }
        "lune-0.25-latitude" => {
            Shape { name: "lune-0.25-latitude", w: lune(0.25), t: (0.01, 0.99), v: lat(false), lune_like: true }
        }
        "hemisphere-latitude" => {
            Shape { name: "hemisphere-latitude", w: lune(1.0), t: (0.01, 0.99), v: lat(false), lune_like: true }
        }
        "lune-0.75-below" => {
            Shape { name: "lune-0.75-below", w: lune(0.75), t: (0.01, 0.99), v: lat(true), lune_like: true }
        }
        "octant-vertex-sector" => Shape {
            name: "octant-vertex-sector",
            w: Domain::Polygon(oct),
            t: (0.05, FRAC_PI_2 - 0.05),
            v: disc([0.0, 0.0, 1.0]),
            lune_like: false,
        },
        "octant-central-disc" => Shape {
            name: "octant-central-disc",
            w: Domain::Polygon(oct),
            t: (0.05, 1.5),
            v: disc(centroid),
            lune_like: false,
        },
        "octant-edge-disc" => {
            let m = [0.5f64.sqrt(), 0.5f64.sqrt(), 0.0];
            Shape { name: "octant-edge-disc", w: Domain::Polygon(oct), t: (0.05, 1.5), v: disc(m), lune_like: false }
        }
        "octant-inner-triangle" => {
            let p = oct.clone();
            Shape {
                name: "octant-inner-triangle",
                w: Domain::Polygon(oct),
                t: (0.05, 0.97),
                v: Box::new(move |s| VSpec::Polyline { points: shrink_towards(&p, s) }),
                lune_like: false,
            }
        }
        "polygon-central-disc" => {
            let p = poly()?;
            let c = arr(p.centroid_direction().vec());
            Shape { name: "polygon-central-disc", w: Domain::Polygon(p), t: (0.02, 2.0), v: disc(c), lune_like: false }
        }
        "polygon-vertex-disc" => {
            let p = poly()?;
            // the widest corner keeps the corner angle of V away from the mesh quality limit
            let angles = p.interior_angles();
            let k = (0..angles.len()).fold(0, |best, i| if angles[i] > angles[best] { i } else { best });
            let c = arr(p.vertex(k).vec());
            Shape { name: "polygon-vertex-disc", w: Domain::Polygon(p), t: (0.02, 2.0), v: disc(c), lune_like: false }
        }
        other => return Err(Error::InvalidInput(format!("unknown region shape '{other}'"))),
    })
}

impl Shape {
    fn region(&self, t: f64) -> Result<SphericalRegion<f64>> {
        build_region(&self.w, &(self.v)(t), &[], &[])
    }

    fn area(&self, t: f64) -> f64 {
        self.region(t).map(|r| r.area()).unwrap_or(0.0)
    }

    /// Parameter with `area(V) = frac · area(W)`, by bisection.
    fn solve_fraction(&self, frac: f64) -> Result<f64> {
        let target = frac * self.w.area();
        let (mut lo, mut hi) = self.t;
        if !(self.area(lo) < target && self.area(hi) > target) {
            return Err(Error::OutOfRange(format!("{}: area fraction {frac} not reachable", self.name)));
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.area(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

struct Row {
    label: String,
    mu: f64,
    bound: f64,
    delta: f64,
}

fn zoo_row(s: &Shape, frac: f64, c: &FaberKrahnConfig) -> Result<Row> {
    let t = s.solve_fraction(frac)?;
    let region = s.region(t)?;
    let mu = region_eigenvalue(&region, c.h, c.eigen_tol)?.value;
    let bound = lune_lower_bound(s.w.area(), region.area(), c.eigen_tol)?.value;
    Ok(Row { label: format!("{}@{frac}", s.name), mu, bound, delta: s.w.delta() })
}

pub fn run_faber_krahn_suite(cfg: &SuiteConfig, seed: u64) -> Report {
    let c = &cfg.faber_krahn;
    let mut report = Report::new(&cfg.version, seed);
    let slack = c.slack_factor * c.h * c.h;

    let shapes: Vec<Result<Shape>> = c.shapes.iter().map(|n| shape(n, seed)).collect();
    let jobs: Vec<(usize, f64)> =
        (0..shapes.len()).flat_map(|i| c.area_fractions.iter().map(move |&f| (i, f))).collect();
    let rows: Vec<Result<Row>> = jobs
        .par_iter()
        .map(|&(i, f)| match &shapes[i] {
            Ok(s) => zoo_row(s, f, c),
            Err(e) => Err(e.clone()),
        })
        .collect();

    let mut fk = ClaimBuilder::new("fk/inequality", ANCHOR_FK, &(c, seed), slack);
    let mut eq = ClaimBuilder::new("fk/lune-equality", ANCHOR_FK_EQ, &(c, seed), slack);
    let mut strict = ClaimBuilder::new("fk/strict-margins", ANCHOR_FK, &(c, seed), slack).informational();
    for ((i, f), row) in jobs.iter().zip(rows) {
        let name = c.shapes[*i].as_str();
        match row {
            Ok(r) => {
                fk.check(r.mu >= r.bound - slack, || format!("{}: mu {} < bound {}", r.label, r.mu, r.bound));
                fk.value(&format!("{}/mu", r.label), r.mu).value(&format!("{}/bound", r.label), r.bound);
                let lune_like = shapes[*i].as_ref().map(|s| s.lune_like).unwrap_or(false);
                if lune_like {
                    eq.check((r.mu - r.bound).abs() <= slack, || {
                        format!("{}: |mu - bound| = {:e}", r.label, (r.mu - r.bound).abs())
                    });
                    eq.value(&format!("{}/gap", r.label), r.mu - r.bound);
                } else {
                    strict.value(&format!("{}/relative_margin", r.label), (r.mu - r.bound) / r.bound);
                    strict.value(&format!("{}/delta", r.label), r.delta);
                }
            }
            Err(e) => fk.error(&format!("{name}@{f}"), &e),
        }
    }
    report.push(fk.finish());
    report.push(eq.finish());
    report.push(strict.finish());
    report.push(convergence_claim(c));
    report.push(partition_claim(c, seed));
    let (mono, chat) = nested_claims(c);
    report.push(mono);
    report.push(chat);
    report.push(hemisphere_claim(c));
    report.push(bkp_claim(c));
    report
}

fn convergence_claim(c: &FaberKrahnConfig) -> Claim {
    let mut b = ClaimBuilder::new("fk/convergence-order", ANCHOR_CONV, &c.convergence_levels, 0.5);
    let w = lune(1.0);
    let v = VSpec::LatitudeCap { b: 0.0, below: false };
    let mus: Result<Vec<f64>> = c
        .convergence_levels
        .par_iter()
        .map(|&h| region_eigenvalue(&build_region(&w, &v, &[], &[])?, h, c.eigen_tol).map(|e| e.value))
        .collect();
    match mus {
        Ok(m) if m.len() >= 3 => {
            let n = m.len();
            let hs = &c.convergence_levels;
            let err: Vec<f64> = m.iter().map(|x| (x - 2.0).abs()).collect();
            let order = (err[n - 2] / err[n - 1]).ln() / (hs[n - 2] / hs[n - 1]).ln();
            // without the exact value: successive differences
            let ratio = (m[n - 3] - m[n - 2]) / (m[n - 2] - m[n - 1]);
            let order3 = ratio.ln() / (hs[n - 2] / hs[n - 1]).ln();
            b.check((1.5..=2.5).contains(&order), || format!("observed order {order}"));
            b.value("mu", m.clone()).value("observed_order", order).value("three_level_order", order3);
        }
        Ok(_) => {
            b.check(false, || "need three refinement levels".into());
        }
        Err(e) => b.error("refinement study", &e),
    }
    b.finish()
}

fn partitions(seed: u64) -> Vec<(String, Domain<f64>, HalfSpace<f64>, bool)> {
    let mut out = vec![
        ("hemisphere-equator".to_string(), lune(1.0), HalfSpace::above_latitude(0.0), true),
        ("lune-0.5-latitude-0.3".into(), lune(0.5), HalfSpace::above_latitude(0.3), false),
        (
            "octant-bisector".into(),
            Domain::Polygon(octant()),
            HalfSpace::new(UnitVec::from_vec(Vec3::new(1.0, -1.0, 0.0)).expect("unit"), 0.0),
            false,
        ),
        ("octant-latitude-0.7".into(), Domain::Polygon(octant()), HalfSpace::above_latitude(0.7), false),
    ];
    if let Some((name, p)) = suite_polygons(false, &[6], seed).pop() {
        let c = p.centroid_direction();
        let a = UnitVec::from_vec(p.vertex(0).vec() - c.vec().scale(c.dot(p.vertex(0)))).expect("tangent");
        let n = UnitVec::from_vec(c.vec().cross(a.vec())).expect("unit");
        out.push((format!("{name}-centre-cut"), Domain::Polygon(p), HalfSpace::new(n, 0.0), false));
    }
    out
}

fn partition_claim(c: &FaberKrahnConfig, seed: u64) -> Claim {
    let band = c.slack_factor * c.partition_h * c.partition_h;
    let mut b = ClaimBuilder::new("fk/partition-alpha-sum", ANCHOR_FH, &(c, seed), c.partition_tol);
    let parts = partitions(seed);
    let sums: Vec<Result<(f64, f64)>> =
        parts.par_iter().map(|(_, w, h, _)| partition_alpha_sum(w, h, c.partition_h, c.eigen_tol)).collect();
    for ((name, _, _, half), r) in parts.iter().zip(sums) {
        match r {
            Ok((a1, a2)) => {
                let s = a1 + a2;
                b.check(s >= 2.0 - c.partition_tol, || format!("{name}: {s}"));
                if *half {
                    b.check((s - 2.0).abs() <= band, || format!("{name}: |sum - 2| = {:e}", (s - 2.0).abs()));
                }
                b.value(&format!("{name}/alpha_sum"), s);
            }
            Err(e) => b.error(name, &e),
        }
    }
    b.finish()
}

fn nested_claims(c: &FaberKrahnConfig) -> (Claim, Claim) {
    let slack = c.slack_factor * c.h * c.h;
    let mut mono = ClaimBuilder::new("fk/nested-monotonicity", ANCHOR_MONO, &c, slack);
    let mut chat = ClaimBuilder::new("fk/sliver-constant", ANCHOR_CHAT, &c, 0.0).informational();
    let w = lune(0.5);
    let base_spec = |db: f64| VSpec::LatitudeCap { b: db, below: false };
    let levels: Vec<f64> = std::iter::once(0.0).chain(c.nested_steps.iter().copied()).collect();
    let mus: Result<Vec<(f64, f64)>> = levels
        .par_iter()
        .map(|&db| {
            let r = build_region(&w, &base_spec(db), &[], &[])?;
            Ok((r.area(), region_eigenvalue(&r, c.h, c.eigen_tol)?.value))
        })
        .collect();
    match mus {
        Ok(m) => {
            let (area0, mu0) = m[0];
            let mut c_hat: f64 = 0.0;
            for w2 in m.windows(2) {
                mono.check(w2[1].1 >= w2[0].1 - slack, || format!("{} then {}", w2[0].1, w2[1].1));
            }
            for &(area, mu) in &m[1..] {
                c_hat = c_hat.max((mu / mu0 - 1.0) / (area0 - area));
            }
            mono.value("mu", m.iter().map(|x| x.1).collect::<Vec<_>>());
            chat.value("c_hat", c_hat);
        }
        Err(e) => {
            mono.error("nested lune caps", &e);
            chat.error("nested lune caps", &e);
        }
    }
    (mono.finish(), chat.finish())
}

fn hemisphere_claim(c: &FaberKrahnConfig) -> Claim {
    let tol = 1e-8;
    let mut b = ClaimBuilder::new("spectral/hemisphere", ANCHOR_HEMI, &c.eigen_tol, tol);
    match cap_eigenvalue(0.0, c.eigen_tol) {
        Ok(e) => {
            b.check((e.value - 2.0).abs() <= tol, || format!("lambda = {}", e.value));
            let alpha = char_exponent(e.value).map(|a| a.alpha).unwrap_or(f64::NAN);
            b.value("lambda", e.value).value("alpha", alpha).value("error_estimate", e.error_estimate);
        }
        Err(e) => b.error("cap_eigenvalue(0)", &e),
    }
    b.finish()
}

/// `bkp_points` equally spaced points of `[−range, range]`, plus `b = 0`.
pub fn bkp_grid(points: usize, range: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..points).map(|k| -range + 2.0 * range * k as f64 / (points - 1) as f64).collect();
    if !g.contains(&0.0) {
        g.push(0.0);
    }
    g
}

fn bkp_claim(c: &FaberKrahnConfig) -> Claim {
    let mut b = ClaimBuilder::new("spectral/bkp-sum", ANCHOR_BKP, &c, c.bkp_tol);
    let grid = bkp_grid(c.bkp_points, c.bkp_range);
    let sums: Vec<Result<f64>> = grid.par_iter().map(|&x| bkp_sum(x, c.eigen_tol)).collect();
    let mut min_off_zero = f64::INFINITY;
    for (&x, s) in grid.iter().zip(sums) {
        match s {
            Ok(s) => {
                b.check(s >= 2.0 - c.bkp_tol, || format!("b = {x}: {s}"));
                let near = (s - 2.0).abs() <= c.bkp_equality_band;
                b.check(near == (x == 0.0), || format!("b = {x}: sum {s}, equality band {near}"));
                if x != 0.0 {
                    min_off_zero = min_off_zero.min(s - 2.0);
                }
            }
            Err(e) => b.error(&format!("b = {x}"), &e),
        }
    }
    b.value("points", grid.len()).value("min_excess_off_zero", min_off_zero);
    b.finish()
}
