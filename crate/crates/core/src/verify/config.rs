use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT: &str = include_str!("../../config/suites.json");

/// Grids for all suites; the shipped default is `config/suites.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub version: String,
    pub iso: IsoConfig,
    pub faber_krahn: FaberKrahnConfig,
    pub lemma: LemmaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoConfig {
    pub spindles: Vec<f64>,
    pub octant: bool,
    pub random_polygon_sizes: Vec<usize>,
    pub curves_per_surface: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaberKrahnConfig {
    pub h: f64,
    pub eigen_tol: f64,
    /// Discretization slack is `slack_factor · h²`.
    pub slack_factor: f64,
    pub area_fractions: Vec<f64>,
    pub shapes: Vec<String>,
    pub convergence_levels: Vec<f64>,
    pub partition_h: f64,
    pub partition_tol: f64,
    pub nested_steps: Vec<f64>,
    pub bkp_points: usize,
    pub bkp_range: f64,
    pub bkp_tol: f64,
    pub bkp_equality_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub smoothing_a: Vec<f64>,
    pub smoothing_eps: Vec<f64>,
    pub matching_tol: f64,
    pub monotone_grid: usize,
    pub gauss_bonnet_rel_tol: f64,
    pub polygon_eps: f64,
    pub sum_lemma_tuples: usize,
    pub gen_p_polygons: usize,
    pub gen_p_tol: f64,
    pub profile_a: Vec<f64>,
    pub profile_points: usize,
    pub profile_tol: f64,
    pub cap_identity_samples: usize,
    pub cap_identity_tol: f64,
}

impl SuiteConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("suite config: {e}")))
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT).expect("shipped config parses")
    }
}
