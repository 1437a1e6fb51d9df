use super::config::{ExperimentConfig, Scenario};
use super::trial_rng;
use crate::error::{Error, Result};
use crate::fullcp::kappa;
use crate::grid::{Point, Sample};
use crate::scores::ScoreFn;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use std::sync::Arc;

/// Confidence of the reported Wilson interval.
pub const WILSON_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trials: u64,
    pub hits: u64,
    pub empirical_coverage: f64,
    /// `1 − α`.
    pub target: f64,
    pub wilson_lower_bound: f64,
    /// `(1 − α) − 3 sqrt(α(1 − α)/trials)`.
    pub binomial_floor: f64,
    pub alpha: f64,
    pub n: usize,
    pub grid_size: usize,
    pub scenario: Scenario,
    pub score: ScoreFn,
}

impl CoverageReport {
    /// Empirical coverage is at least the target minus three binomial
    /// standard errors.
    pub fn meets_bound(&self) -> bool {
        self.empirical_coverage >= self.binomial_floor
    }
}

/// Two-sided Wilson score interval lower end.
pub fn wilson_lower_bound(hits: u64, trials: u64, confidence: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let z = StdNormal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + confidence / 2.0);
    let t = trials as f64;
    let p = hits as f64 / t;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * t);
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    ((centre - half) / (1.0 + z2 / t)).max(0.0)
}

fn normal(mean: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mean, sd).map_err(|e| Error::Config(format!("scenario: {e}")))
}

/// `count` exchangeable draws of dimension `dim`.
fn draw<R: Rng>(rng: &mut R, scenario: &Scenario, count: usize, dim: usize) -> Result<Vec<Point>> {
    Ok(match *scenario {
        Scenario::IidGaussian { mean, sd } => {
            let d = normal(mean, sd)?;
            (0..count).map(|_| (0..dim).map(|_| d.sample(rng)).collect()).collect()
        }
        Scenario::IidUniform { lo, hi } => {
            if !(lo < hi) {
                return Err(Error::Config(format!("uniform scenario needs lo < hi, got [{lo}, {hi}]")));
            }
            let d = Uniform::new(lo, hi);
            (0..count).map(|_| (0..dim).map(|_| d.sample(rng)).collect()).collect()
        }
        Scenario::ExchangeableMixture { prior_sd, sd } => {
            let prior = normal(0.0, prior_sd)?;
            let mu: Vec<f64> = (0..dim).map(|_| prior.sample(rng)).collect();
            let noise = normal(0.0, sd)?;
            (0..count)
                .map(|_| mu.iter().map(|m| m + noise.sample(rng)).collect())
                .collect()
        }
    })
}

/// Draws `y^{n+1}`, snaps it to the grid, builds `κ_α` from the first `n`
/// points and records whether the last point's grid cell is inside.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let missing = |w: &str| Error::Config(format!("coverage needs `{w}`"));
    let grid = Arc::new(cfg.grid.as_ref().ok_or_else(|| missing("grid"))?.build()?);
    let scenario = cfg.scenario.clone().ok_or_else(|| missing("scenario"))?;
    let alpha = cfg.alpha.ok_or_else(|| missing("alpha"))?;
    let n = cfg.n.ok_or_else(|| missing("n"))?;
    let score = cfg.score.clone().unwrap_or(ScoreFn::MeanAbsDistance);

    let hits: Vec<bool> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let raw = draw(&mut rng, &scenario, n + 1, grid.dim())?;
            let idx = raw
                .iter()
                .map(|y| grid.nearest_index(y))
                .collect::<Result<Vec<_>>>()?;
            let train: Vec<Point> = idx[..n].iter().map(|&i| grid.point(i).to_vec()).collect();
            let region = kappa(alpha, &Sample::new(train)?, &score, &grid)?;
            Ok(region.contains(idx[n]))
        })
        .collect::<Result<_>>()?;

    let count = hits.iter().filter(|&&h| h).count() as u64;
    let trials = cfg.trials;
    Ok(CoverageReport {
        trials,
        hits: count,
        empirical_coverage: count as f64 / trials as f64,
        target: 1.0 - alpha,
        wilson_lower_bound: wilson_lower_bound(count, trials, WILSON_CONFIDENCE),
        binomial_floor: (1.0 - alpha) - 3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt(),
        alpha,
        n,
        grid_size: grid.len(),
        scenario,
        score,
    })
}
