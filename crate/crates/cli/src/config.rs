use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use subconvexity_core::decomposition::{ExperimentConfig, DEFAULT_INNER_SUPPORT};
use subconvexity_core::oscint::SmoothWeight;
use subconvexity_core::voronoi::d3_provider;

use crate::UsageError;

/// The versioned defaults; run configs override any subset of these keys.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// Every key of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub modulus: u64,
    pub character_index: u64,
    pub t: f64,
    pub n_scale: f64,
    pub p_anchor: u64,
    pub l_anchor: u64,
    pub tolerance: f64,
    pub seed: u64,

    pub weil_c_max: u64,

    pub charsum_moduli: Vec<u64>,

    pub correlation_s_max: u64,
    pub correlation_t_values: Vec<i64>,
    pub correlation_n_values: Vec<i64>,
    pub correlation_c0_max: f64,

    pub spacing_anchors: Vec<u64>,
    pub spacing_moduli: Vec<u64>,
    pub spacing_ratio_max: f64,

    pub miller_x_min: u64,
    pub miller_x_max: u64,
    pub miller_grid_points: usize,
    pub miller_alpha_samples: usize,
    pub miller_rational_denominator: u64,
    pub miller_exponent_max: f64,

    pub stationary_ts: Vec<f64>,
    pub stationary_n_ratio: f64,
    pub stationary_slope_max: f64,

    pub frakj_points: usize,
    pub frakj_moduli: Vec<u64>,
    pub frakj_ts: Vec<f64>,
    pub frakj_constant_max: f64,
    pub frakj_derivative_tol: f64,

    pub bessel_us: Vec<f64>,
    pub bessel_envelope_us: Vec<f64>,
    pub bessel_rel_max: f64,
    pub bessel_envelope_max: f64,

    pub voronoi_moduli: Vec<i64>,
    pub voronoi_n_scale: f64,
    pub voronoi_log_moments: u32,
    pub voronoi_rel_max: f64,

    pub keylemma_moduli: Vec<u64>,
    pub keylemma_ts: Vec<f64>,
    pub keylemma_n: u64,

    pub decompose_ts: Vec<f64>,
    pub decompose_ratio_range: (f64, f64),
    pub decompose_envelope_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_table(default_table()).expect("the bundled defaults are valid")
    }
}

fn default_table() -> toml::Table {
    DEFAULT_CONFIG.parse().expect("the bundled defaults parse")
}

impl RunConfig {
    fn from_table(table: toml::Table) -> Result<Self, UsageError> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| UsageError(format!("invalid configuration: {}", e.message())))
    }

    /// Defaults, overridden by the file at `path` (if any), then by `key=value` assignments.
    pub fn load(path: Option<&Path>, assignments: &[String]) -> Result<Self, UsageError> {
        let mut table = default_table();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            let user: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| UsageError(format!("{}: {}", path.display(), e.message())))?;
            merge(&mut table, user)?;
        }
        for assignment in assignments {
            let user: toml::Table = assignment
                .parse()
                .map_err(|_| UsageError(format!("override `{assignment}` is not of the form key=value")))?;
            merge(&mut table, user)?;
        }
        Self::from_table(table)
    }

    /// The decomposition parameters with the default `d3` coefficients and weights.
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            modulus: self.modulus,
            character_index: self.character_index,
            t: self.t,
            n_scale: self.n_scale,
            p_anchor: self.p_anchor,
            l_anchor: self.l_anchor,
            provider: Arc::new(d3_provider()),
            outer_weight: SmoothWeight::bump(1.0, 2.0).expect("valid support"),
            inner_weight: SmoothWeight::bump(DEFAULT_INNER_SUPPORT.0, DEFAULT_INNER_SUPPORT.1).expect("valid support"),
            tolerance: self.tolerance,
            seed: self.seed,
        }
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) -> Result<(), UsageError> {
    for (key, value) in user {
        if !base.contains_key(&key) {
            return Err(UsageError(format!("unknown configuration key `{key}`")));
        }
        base.insert(key, value);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_standard_experiment() {
        let config = RunConfig::default();
        let standard = ExperimentConfig::standard();
        let experiment = config.experiment();
        assert_eq!(experiment.modulus, standard.modulus);
        assert_eq!(experiment.t, standard.t);
        assert_eq!(experiment.n_scale, standard.n_scale);
        assert_eq!(
            (experiment.p_anchor, experiment.l_anchor),
            (standard.p_anchor, standard.l_anchor)
        );
        assert_eq!(experiment.tolerance, standard.tolerance);
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let config = RunConfig::load(None, &["t = 200.0".into(), "weil_c_max=50".into()]).unwrap();
        assert_eq!(config.t, 200.0);
        assert_eq!(config.weil_c_max, 50);
        assert!(RunConfig::load(None, &["no_such_key = 1".into()]).is_err());
        assert!(RunConfig::load(None, &["t = \"fast\"".into()]).is_err());
        assert!(RunConfig::load(None, &["t".into()]).is_err());
    }
}
