//! Claim-level verification suites producing seed-stamped reports.
//!
//! Suites run in `f64`. Every random input is drawn from a ChaCha stream
//! derived from the seed, so a report depends only on the seed, the config
//! and the tool version.

mod config;
mod faber_krahn;
mod iso;
mod lemma;
mod report;

pub use config::{FaberKrahnConfig, IsoConfig, LemmaConfig, SuiteConfig};
pub use faber_krahn::{bkp_grid, run_faber_krahn_suite};
pub use iso::run_theorem_iso_suite;
pub use lemma::{curvature_increase, gen_p_all_splits, run_lemma_suite, sum_lemma_tuple};
pub use report::{
    digest, format_float, to_json_string, Claim, ClaimBuilder, Report, Summary, Verdict, CSV_DIGITS, JSON_DIGITS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sphere_geom::{random_convex_polygon, SphericalPolygon, UnitVec};

const STREAM_POLYGONS: u64 = 1;
const STREAM_CAP_IDENTITY: u64 = 2;
const STREAM_CUTS: u64 = 3;
const STREAM_SUM_LEMMA: u64 = 4;
const STREAM_GEN_P: u64 = 1 << 32;

/// The named test polygons: optionally the octant, then one random convex
/// polygon per entry of `sizes`.
pub fn suite_polygons(octant: bool, sizes: &[usize], seed: u64) -> Vec<(String, SphericalPolygon<f64>)> {
    let mut out = Vec::new();
    if octant {
        let p = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).expect("octant");
        out.push(("octant".to_string(), p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_POLYGONS);
    for (i, &n) in sizes.iter().enumerate() {
        out.push((format!("polygon{i}-{n}"), random_convex_polygon(&mut rng, n)));
    }
    out
}

/// All three suites merged into one report.
pub fn run_all(cfg: &SuiteConfig, seed: u64) -> Report {
    let (iso, (fk, lemma)) = rayon::join(
        || run_theorem_iso_suite(cfg, seed),
        || rayon::join(|| run_faber_krahn_suite(cfg, seed), || run_lemma_suite(cfg, seed)),
    );
    let mut r = iso;
    r.extend(fk);
    r.extend(lemma);
    r
}
