use crate::bayes::ConjugateModel;
use crate::catlaws::{Comparison, VietorisVariant};
use crate::error::{Error, Result};
use crate::fullcp::TieGrid;
use crate::grid::GridSpec;
use crate::scores::ScoreFn;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Coverage,
    Diagram,
    BayesTriangle,
    MonadLaws,
    CategoryAxioms,
    Eposterior,
    IhdrOracle,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Coverage,
        Experiment::Diagram,
        Experiment::BayesTriangle,
        Experiment::MonadLaws,
        Experiment::CategoryAxioms,
        Experiment::Eposterior,
        Experiment::IhdrOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Coverage => "coverage",
            Experiment::Diagram => "diagram",
            Experiment::BayesTriangle => "bayes_triangle",
            Experiment::MonadLaws => "monad_laws",
            Experiment::CategoryAxioms => "category_axioms",
            Experiment::Eposterior => "eposterior",
            Experiment::IhdrOracle => "ihdr_oracle",
        }
    }

    pub fn from_name(s: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Data-generating process for the coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    IidGaussian { mean: f64, sd: f64 },
    IidUniform { lo: f64, hi: f64 },
    /// `μ ~ N(0, prior_sd²)`, then `y_i ~ N(μ, sd²)` given `μ`.
    ExchangeableMixture { prior_sd: f64, sd: f64 },
}

/// One monad-law run: which functor action, how fibers are compared, and
/// the base sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonadCheck {
    pub variant: VietorisVariant,
    pub comparison: Comparison,
    pub base_sizes: Vec<usize>,
    /// Functor laws are checked for all objects up to this size.
    #[serde(default)]
    pub functor_max_size: Option<usize>,
}

/// Credal prior family for the e-posterior experiment: constant lower and
/// upper densities, optionally overridden at one θ index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFamily {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub dip: Option<Dip>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dip {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Experiment-specific settings. Unused fields are ignored by experiments
/// that do not need them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Inclusive range for the sample size of randomized instances.
    pub n_range: Option<[usize; 2]>,
    /// Inclusive range for the grid size of randomized instances.
    pub grid_range: Option<[usize; 2]>,
    /// Brute-force IHDR is also compared when the grid has at most this many
    /// points.
    pub bruteforce_max_grid: Option<usize>,
    /// Number of nested triples in the IHDR oracle experiment.
    pub chain_trials: Option<u64>,
    pub monad_checks: Option<Vec<MonadCheck>>,
    /// Object sizes `[w, x, y, z]` for category axioms.
    pub category_sizes: Option<Vec<Vec<usize>>>,
    /// Object sizes `[a, b, c, d, e, f]` for the tensor laws.
    pub tensor_sizes: Option<Vec<Vec<usize>>>,
    /// Largest object in the random-size law trials.
    pub random_max_size: Option<usize>,
    /// Midpoint grid over Θ: `[lo, hi, count]`.
    pub theta_grid: Option<(f64, f64, usize)>,
    /// Midpoint grid over one observation: `[lo, hi, count]`.
    pub y_grid: Option<(f64, f64, usize)>,
    pub observations: Option<usize>,
    pub likelihood_sd: Option<f64>,
    pub families: Option<Vec<PriorFamily>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub trials: u64,
    /// Fixed level; when absent each trial draws its own level off the tie
    /// grid.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub score: Option<ScoreFn>,
    #[serde(default)]
    pub model: Option<ConjugateModel>,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub options: Options,
}

fn missing(what: &str, exp: Experiment) -> Error {
    Error::Config(format!("`{what}` is required for experiment `{}`", exp.name()))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sample sizes the experiment may use.
    pub fn n_values(&self) -> Option<(usize, usize)> {
        match (self.options.n_range, self.n) {
            (Some([lo, hi]), _) => Some((lo, hi)),
            (None, Some(n)) => Some((n, n)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let exp = self.experiment;
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be positive".into()));
        }
        if let Some([lo, hi]) = self.options.n_range {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("bad n_range [{lo}, {hi}]")));
            }
        }
        if let Some([lo, hi]) = self.options.grid_range {
            if lo < 2 || lo > hi {
                return Err(Error::Config(format!("bad grid_range [{lo}, {hi}]")));
            }
        }
        if let Some(model) = &self.model {
            model.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let conformal = matches!(
            exp,
            Experiment::Coverage | Experiment::Diagram | Experiment::BayesTriangle
        );
        if conformal {
            let (lo, hi) = self.n_values().ok_or_else(|| missing("n", exp))?;
            if lo == 0 {
                return Err(Error::Config("`n` must be positive".into()));
            }
            if let Some(alpha) = self.alpha {
                if !(0.0..1.0).contains(&alpha) {
                    return Err(Error::Config(format!("alpha = {alpha} must lie in [0, 1)")));
                }
                for n in lo..=hi {
                    if TieGrid::new(n)?.contains(alpha) {
                        return Err(Error::Config(format!(
                            "alpha = {alpha} lies on the tie grid for n = {n}"
                        )));
                    }
                }
            }
        }
        match exp {
            Experiment::Coverage => {
                let grid = self.grid.as_ref().ok_or_else(|| missing("grid", exp))?;
                grid.build().map_err(|e| Error::Config(e.to_string()))?;
                if self.scenario.is_none() {
                    return Err(missing("scenario", exp));
                }
                if self.alpha.is_none() {
                    return Err(missing("alpha", exp));
                }
                if let Some(score) = &self.score {
                    score
                        .validate(grid.counts.len())
                        .map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            Experiment::Diagram => {
                if let Some(score) = &self.score {
                    score.validate(1).map_err(|e| Error::Config(e.to_string()))?;
                }
                if let Some([_, hi]) = self.options.grid_range {
                    if hi > crate::imprecise::BRUTEFORCE_LIMIT {
                        return Err(Error::Config(format!(
                            "diagram grids are limited to {} points",
                            crate::imprecise::BRUTEFORCE_LIMIT
                        )));
                    }
                }
            }
            Experiment::BayesTriangle => {
                if self.model.is_none() {
                    return Err(missing("model", exp));
                }
            }
            Experiment::MonadLaws => {
                for c in self.options.monad_checks.iter().flatten() {
                    if c.base_sizes.iter().any(|&b| b == 0 || b > crate::catlaws::MAX_VIETORIS_BASE) {
                        return Err(Error::Config("monad base sizes must lie in 1..=4".into()));
                    }
                    if c.functor_max_size.is_some_and(|m| m == 0 || m > 3) {
                        return Err(Error::Config("functor_max_size must lie in 1..=3".into()));
                    }
                }
            }
            Experiment::CategoryAxioms => {
                for s in self.options.category_sizes.iter().flatten() {
                    if s.len() != 4 || s.iter().any(|&v| v == 0 || v > 6) {
                        return Err(Error::Config(format!("bad category sizes {s:?}")));
                    }
                }
                for s in self.options.tensor_sizes.iter().flatten() {
                    if s.len() != 6 || s.iter().any(|&v| v == 0 || v > 6) {
                        return Err(Error::Config(format!("bad tensor sizes {s:?}")));
                    }
                }
            }
            Experiment::Eposterior => {
                if self.options.families.as_ref().is_none_or(Vec::is_empty) {
                    return Err(missing("options.families", exp));
                }
            }
            Experiment::IhdrOracle => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
    }

    #[test]
    fn coverage_config_validation() {
        let ok = r#"{"experiment": "coverage", "trials": 10, "alpha": 0.13, "n": 20,
            "grid": {"bounds": [[-6, 6]], "counts": [201]},
            "scenario": {"kind": "iid_gaussian", "mean": 0, "sd": 1}}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
        let tie = ok.replace("0.13", "0.5").replace("\"n\": 20", "\"n\": 3");
        assert!(matches!(ExperimentConfig::from_json(&tie), Err(Error::Config(_))));
        let no_grid = r#"{"experiment": "coverage", "trials": 10, "alpha": 0.13, "n": 20,
            "scenario": {"kind": "iid_uniform", "lo": 0, "hi": 1}}"#;
        assert!(ExperimentConfig::from_json(no_grid).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "nope", "trials": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ihdr_oracle", "trials": 1, "extra": 1}"#).is_err());
    }
}
