use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::doubled::{DoubledRegion, Sheet};
use super::Surface;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sphere_geom::{BoundaryTag, Domain, HalfSpace, SphericalRegion, UnitVec};
use crate::spindle::{FnCurve, SpindleCurve};

/// Distance kept between generated spindle curves and the tips.
pub const TIP_CLEARANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Latitude circles (on doubles: equal vertex sectors on both sheets).
    Latitude,
    PerturbedCaps,
    OffCenterCircles,
    StarShaped,
    MultiComponent,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Latitude,
        FamilyKind::PerturbedCaps,
        FamilyKind::OffCenterCircles,
        FamilyKind::StarShaped,
        FamilyKind::MultiComponent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Latitude => "latitude",
            FamilyKind::PerturbedCaps => "perturbed-caps",
            FamilyKind::OffCenterCircles => "off-center-circles",
            FamilyKind::StarShaped => "star-shaped",
            FamilyKind::MultiComponent => "multi-component",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown curve family '{s}'")))
    }
}

pub type DynCurve<T> = Arc<dyn SpindleCurve<T> + Send + Sync>;

/// The boundary of a test region: disjoint closed curves on a spindle, or
/// disjoint regions on a doubled polygon.
#[derive(Clone)]
pub enum TestBoundary<T> {
    Spindle(Vec<DynCurve<T>>),
    Doubled(Vec<DoubledRegion<T>>),
}

#[derive(Clone)]
pub struct TestCurve<T> {
    pub id: usize,
    pub kind: FamilyKind,
    pub boundary: TestBoundary<T>,
    /// Whether the curve is an extremal (equality) configuration.
    pub expected_equality: bool,
}

/// A seeded generator of test boundaries of one kind on one surface.
#[derive(Debug, Clone)]
pub struct IsoTestCurveFamily<T> {
    pub surface: Surface<T>,
    pub seed: u64,
    pub kind: FamilyKind,
}

impl<T: Real> IsoTestCurveFamily<T> {
    pub fn new(surface: Surface<T>, seed: u64, kind: FamilyKind) -> Self {
        Self { surface, seed, kind }
    }

    /// Curve `id` uses its own ChaCha stream, so the output does not depend
    /// on how generation is scheduled.
    pub fn curve(&self, id: usize) -> Result<TestCurve<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.kind.stream() << 40) | id as u64);
        let (boundary, expected_equality) = match &self.surface {
            Surface::Spindle(a) => {
                let a = a.get().to_f64_lossy();
                spindle_curve(a, self.kind, id, &mut rng)
            }
            Surface::Doubled(w) => doubled_curve(w, self.kind, id, &mut rng)?,
        };
        Ok(TestCurve { id, kind: self.kind, boundary, expected_equality })
    }

    pub fn generate(&self, n: usize) -> Result<Vec<TestCurve<T>>> {
        (0..n).into_par_iter().map(|id| self.curve(id)).collect()
    }
}

fn uni(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn wavy_cap<T: Real>(b: f64, amp: f64, k: f64, phase: f64, s: f64) -> DynCurve<T> {
    let (b, amp, k, phase, s) = (lit::<T>(b), lit::<T>(amp), lit::<T>(k), lit::<T>(phase), lit::<T>(s));
    Arc::new(FnCurve {
        pos: move |t: T| (b + amp * (T::TAU() * k * t + phase).sin(), s * T::TAU() * t),
        vel: move |t: T| (amp * T::TAU() * k * (T::TAU() * k * t + phase).cos(), s * T::TAU()),
    })
}

/// Geodesic circle of radius `r` centred at latitude `c` carried to `S_a`
/// through the local isometry `(lat, lon) ↦ (u, v0 + lon/a)`.
fn sphere_circle<T: Real>(a: f64, c: f64, r: f64, v0: f64, s: f64) -> DynCurve<T> {
    let (a, c, r, v0, s) = (lit::<T>(a), lit::<T>(c), lit::<T>(r), lit::<T>(v0), lit::<T>(s));
    let frame = move |t: T| {
        let th = s * T::TAU() * t;
        let (sc, cc) = c.sin_cos();
        let (sr, cr) = r.sin_cos();
        let (st, ct) = th.sin_cos();
        // C = (cos c, 0, sin c), E = (0, 1, 0), N = (−sin c, 0, cos c)
        let p = [cr * cc - sr * st * sc, sr * ct, cr * sc + sr * st * cc];
        let dth = s * T::TAU();
        let dp = [-sr * ct * sc * dth, -sr * st * dth, sr * ct * cc * dth];
        (p, dp)
    };
    Arc::new(FnCurve {
        pos: move |t: T| {
            let (p, _) = frame(t);
            (p[2].max(-T::one()).min(T::one()).asin(), v0 + p[1].atan2(p[0]) / a)
        },
        vel: move |t: T| {
            let (p, dp) = frame(t);
            let cu = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let du = dp[2] / cu;
            let dlon = (p[0] * dp[1] - p[1] * dp[0]) / (cu * cu);
            (du, dlon / a)
        },
    })
}

/// Largest circle radius at latitude `c` that avoids the tips and stays in
/// one sheet of the longitude chart.
fn circle_radius_limit(a: f64, c: f64) -> f64 {
    let mut rmax = FRAC_PI_2 - c.abs() - 0.01;
    let lon_cap = 0.9 * PI * a;
    if lon_cap < FRAC_PI_2 {
        rmax = rmax.min((lon_cap.sin() * c.cos()).asin());
    }
    rmax
}

struct Star {
    b: f64,
    scale: f64,
    modes: Vec<(f64, f64, f64)>,
    gamma: f64,
    s: f64,
}

impl Star {
    fn f(&self, t: f64) -> f64 {
        self.modes.iter().map(|&(k, al, be)| al * (TAU * k * t).cos() + be * (TAU * k * t).sin()).sum()
    }
}

fn star_curve<T: Real>(st: Star) -> DynCurve<T> {
    let b = lit::<T>(st.b);
    let scale = lit::<T>(st.scale);
    let modes: Arc<Vec<(T, T, T)>> = Arc::new(st.modes.iter().map(|&(k, x, y)| (lit(k), lit(x), lit(y))).collect());
    let m2 = modes.clone();
    let (gamma, s) = (lit::<T>(st.gamma), lit::<T>(st.s));
    Arc::new(FnCurve {
        pos: move |t: T| {
            let f: T = modes.iter().map(|&(k, x, y)| x * (T::TAU() * k * t).cos() + y * (T::TAU() * k * t).sin()).sum();
            (b + scale * f, s * (T::TAU() * t + gamma * (T::TAU() * t).sin()))
        },
        vel: move |t: T| {
            let df: T = m2
                .iter()
                .map(|&(k, x, y)| T::TAU() * k * (y * (T::TAU() * k * t).cos() - x * (T::TAU() * k * t).sin()))
                .sum();
            (scale * df, s * T::TAU() * (T::one() + gamma * (T::TAU() * t).cos()))
        },
    })
}

fn spindle_curve<T: Real>(a: f64, kind: FamilyKind, id: usize, rng: &mut ChaCha8Rng) -> (TestBoundary<T>, bool) {
    let one = |c: DynCurve<T>| TestBoundary::Spindle(vec![c]);
    match kind {
        FamilyKind::Latitude => {
            let b = uni(rng, -1.3, 1.3);
            (one(wavy_cap(b, 0.0, 1.0, 0.0, sign(rng))), true)
        }
        FamilyKind::PerturbedCaps => {
            let b = uni(rng, -1.2, 1.2);
            let amp = uni(rng, 0.02, 0.1);
            // k = 1 is a tilt, which on the round sphere is an isometry to first order
            let k = rng.gen_range(2..=6) as f64;
            let phase = uni(rng, 0.0, TAU);
            (one(wavy_cap(b, amp, k, phase, sign(rng))), false)
        }
        FamilyKind::OffCenterCircles => {
            let c = uni(rng, -1.0, 1.0);
            let r = uni(rng, 0.05, circle_radius_limit(a, c));
            let v0 = uni(rng, 0.0, TAU);
            // On the round sphere every geodesic circle is extremal.
            (one(sphere_circle(a, c, r, v0, sign(rng))), a == 1.0)
        }
        FamilyKind::StarShaped => {
            let b = uni(rng, -0.8, 0.8);
            let nm = rng.gen_range(1..=5);
            let modes: Vec<(f64, f64, f64)> =
                (1..=nm).map(|k| (k as f64, uni(rng, -0.3, 0.3) / k as f64, uni(rng, -0.3, 0.3) / k as f64)).collect();
            let mut st = Star { b, scale: 1.0, modes, gamma: uni(rng, -0.5, 0.5), s: sign(rng) };
            let grid: Vec<f64> = (0..4096).map(|j| st.f(j as f64 / 4096.0)).collect();
            let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let limit = FRAC_PI_2 - TIP_CLEARANCE;
            if id % 4 == 3 && lo < 0.0 {
                // Stretch a lobe to within the clearance of the opposite tip.
                let scale = (-limit - b) / lo;
                if b + scale * hi < limit {
                    st.scale = scale;
                }
            } else {
                let span = (b + hi).max(-(b + lo)).max(1e-12);
                if span > 1.45 {
                    st.scale = 1.45 / span;
                }
            }
            (one(star_curve(st)), false)
        }
        FamilyKind::MultiComponent => {
            let b1 = uni(rng, 0.3, 1.2);
            let amp1 = uni(rng, 0.0, 0.05);
            let top = wavy_cap(b1, amp1, rng.gen_range(1..=4) as f64, uni(rng, 0.0, TAU), 1.0);
            if id.is_multiple_of(2) {
                let amp2 = uni(rng, 0.0, 0.05);
                let b2 = uni(rng, -1.2, b1 - amp1 - amp2 - 0.3);
                let bottom = wavy_cap(b2, amp2, rng.gen_range(1..=4) as f64, uni(rng, 0.0, TAU), -1.0);
                (TestBoundary::Spindle(vec![top, bottom]), false)
            } else {
                let r = uni(rng, 0.05, 0.3);
                let c = uni(rng, -1.4 + r, b1 - amp1 - 0.05 - r);
                let r = r.min(circle_radius_limit(a, c));
                let circle = sphere_circle(a, c, r, uni(rng, 0.0, TAU), 1.0);
                (TestBoundary::Spindle(vec![top, circle]), false)
            }
        }
    }
}

fn interior_point<T: Real>(w: &Domain<T>, rng: &mut ChaCha8Rng) -> UnitVec<T> {
    match w {
        Domain::Lune(l) => {
            let lon = uni(rng, 0.1, 0.9) * l.angle().to_f64_lossy();
            UnitVec::from_lat_lon(lit(uni(rng, -1.2, 1.2)), lit(lon))
        }
        Domain::Polygon(p) => {
            let s = p
                .vertices()
                .iter()
                .fold(crate::sphere_geom::Vec3::zero(), |acc, v| acc + v.vec().scale(lit(uni(rng, 0.1, 1.0))));
            UnitVec::from_vec(s).expect("positive combination of vertices")
        }
    }
}

/// Lower bound on the distance from `p` to `∂W`.
fn inradius<T: Real>(w: &Domain<T>, p: UnitVec<T>) -> T {
    w.half_spaces().iter().map(|h| h.signed(p).max(T::zero()).min(T::one()).asin()).fold(T::infinity(), T::min)
}

fn clip_cap<T: Real>(w: &Domain<T>, c: UnitVec<T>, r: T) -> Result<SphericalRegion<T>> {
    w.boundary().clip(&HalfSpace::cap(c, r), BoundaryTag::Dirichlet, "curve")
}

/// Largest sector radius at vertex `i`: below the adjacent edge lengths.
fn vertex_reach<T: Real>(w: &Domain<T>, i: usize) -> f64 {
    let b = w.boundary();
    let n = b.pieces().len();
    let e1 = b.pieces()[i].arc.length().to_f64_lossy();
    let e0 = b.pieces()[(i + n - 1) % n].arc.length().to_f64_lossy();
    e0.min(e1).min(1.2)
}

fn vertex_toward<T: Real>(v: UnitVec<T>, p: UnitVec<T>, angle: f64) -> UnitVec<T> {
    match UnitVec::from_vec(v.vec().cross(p.vec())) {
        Some(axis) => v.rotate(axis, lit(angle)),
        None => v,
    }
}

fn doubled_curve<T: Real>(
    w: &Domain<T>,
    kind: FamilyKind,
    id: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(TestBoundary<T>, bool)> {
    let verts = w.vertices();
    let nv = verts.len();
    let is_lune = matches!(w, Domain::Lune(_));
    let region = match kind {
        FamilyKind::Latitude => {
            let i = rng.gen_range(0..nv);
            let r = uni(rng, 0.1, 0.8) * vertex_reach(w, i);
            let d = DoubledRegion::both(clip_cap(w, verts[i], lit(r))?);
            return Ok((TestBoundary::Doubled(vec![d]), is_lune));
        }
        FamilyKind::PerturbedCaps => {
            let i = rng.gen_range(0..nv);
            let r = uni(rng, 0.1, 0.7) * vertex_reach(w, i);
            let r2 = r * (1.0 + uni(rng, 0.05, 0.3));
            let (f, b) = (clip_cap(w, verts[i], lit(r))?, clip_cap(w, verts[i], lit(r2))?);
            if rng.gen_bool(0.5) {
                DoubledRegion { front: Some(f), back: Some(b) }
            } else {
                DoubledRegion { front: Some(b), back: Some(f) }
            }
        }
        FamilyKind::OffCenterCircles => match id % 3 {
            0 => {
                let p = interior_point(w, rng);
                let r = uni(rng, 0.3, 0.9) * inradius(w, p).to_f64_lossy();
                let c = SphericalRegion::from_cap(&HalfSpace::cap(p, lit(r)), BoundaryTag::Dirichlet, "curve");
                DoubledRegion::one_sheet(c, if rng.gen_bool(0.5) { Sheet::Front } else { Sheet::Back })
            }
            1 => {
                let b = w.boundary();
                let arc = b.pieces()[rng.gen_range(0..b.pieces().len())].arc;
                let q = arc.point(lit(uni(rng, 0.25, 0.75)));
                let room = q.distance(arc.start).min(q.distance(arc.end())).to_f64_lossy().min(0.8);
                DoubledRegion::both(clip_cap(w, q, lit(uni(rng, 0.2, 0.6) * room))?)
            }
            _ => {
                let b = w.boundary();
                let m = b.pieces().len();
                let j = rng.gen_range(0..m);
                let k = (j + rng.gen_range(1..m)) % m;
                let q1 = b.pieces()[j].arc.point(lit(uni(rng, 0.2, 0.8)));
                let q2 = b.pieces()[k].arc.point(lit(uni(rng, 0.2, 0.8)));
                let n = UnitVec::from_vec(q1.vec().cross(q2.vec()))
                    .ok_or_else(|| Error::DegenerateEdge("chord endpoints are antipodal".into()))?;
                let n = if rng.gen_bool(0.5) { n } else { n.antipode() };
                let r = b.clip(&HalfSpace::new(n, T::zero()), BoundaryTag::Dirichlet, "chord")?;
                DoubledRegion::both(r)
            }
        },
        FamilyKind::StarShaped => {
            let i = rng.gen_range(0..nv);
            let reach = vertex_reach(w, i);
            let p = interior_point(w, rng);
            let mut sheet = || -> Result<SphericalRegion<T>> {
                let r = uni(rng, 0.15, 0.7) * reach;
                let c = vertex_toward(verts[i], p, uni(rng, 0.0, 0.3) * r);
                clip_cap(w, c, lit(r))
            };
            let f = sheet()?;
            let b = sheet()?;
            DoubledRegion { front: Some(f), back: Some(b) }
        }
        FamilyKind::MultiComponent => {
            let i = rng.gen_range(0..nv);
            let j = (i + rng.gen_range(1..nv)) % nv;
            let d = verts[i].distance(verts[j]).to_f64_lossy();
            let ri = uni(rng, 0.2, 0.4) * d.min(vertex_reach(w, i));
            let rj = uni(rng, 0.2, 0.4) * d.min(vertex_reach(w, j));
            let (gi, gj) = (1.0 + uni(rng, 0.0, 0.1), 1.0 + uni(rng, 0.0, 0.1));
            let mut parts = vec![
                DoubledRegion {
                    front: Some(clip_cap(w, verts[i], lit(ri))?),
                    back: Some(clip_cap(w, verts[i], lit(ri * gi))?),
                },
                DoubledRegion {
                    front: Some(clip_cap(w, verts[j], lit(rj * gj))?),
                    back: Some(clip_cap(w, verts[j], lit(rj))?),
                },
            ];
            let p = interior_point(w, rng);
            let r = 0.5 * inradius(w, p).to_f64_lossy();
            let clear = p.distance(verts[i]).to_f64_lossy() > r + ri * gi + 0.01
                && p.distance(verts[j]).to_f64_lossy() > r + rj * gj + 0.01;
            if clear && r > 0.02 {
                let c = SphericalRegion::from_cap(&HalfSpace::cap(p, lit(r)), BoundaryTag::Dirichlet, "curve");
                parts.push(DoubledRegion::one_sheet(c, Sheet::Back));
            }
            return Ok((TestBoundary::Doubled(parts), false));
        }
    };
    Ok((TestBoundary::Doubled(vec![region]), false))
}
