//! Bayesian leg: a conjugate Gaussian location model, its posterior
//! predictive used as a nonconformity score, the predictive level-set region,
//! and the upper posterior of a credal prior with its e-posterior condition.

use crate::error::{Error, Result};
use crate::fullcp::{kappa, require_no_tie, transducer};
use crate::grid::{Grid, Region, Sample};
use crate::imprecise::{cred_from_transducer, ihdr_contour};
use crate::scores::{gaussian_pdf, ScoreFn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::Arc;

/// Normal likelihood with known noise and a normal prior on the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateModel {
    pub likelihood_sd: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

impl ConjugateModel {
    pub fn new(likelihood_sd: f64, prior_mean: f64, prior_sd: f64) -> Result<Self> {
        let m = ConjugateModel {
            likelihood_sd,
            prior_mean,
            prior_sd,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.likelihood_sd) || !ok(self.prior_sd) || !self.prior_mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "conjugate model needs positive finite sds, got sigma = {}, tau0 = {}",
                self.likelihood_sd, self.prior_sd
            )));
        }
        Ok(())
    }

    /// Posterior mean and variance of the location after observing `y_n`.
    pub fn posterior(&self, y_n: &Sample) -> Result<(f64, f64)> {
        self.validate()?;
        if y_n.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: y_n.dim(),
            });
        }
        let mut ys: Vec<f64> = y_n.points().iter().map(|p| p[0]).collect();
        ys.sort_by(f64::total_cmp);
        let sum: f64 = ys.iter().sum();
        let s2 = self.likelihood_sd * self.likelihood_sd;
        let t2 = self.prior_sd * self.prior_sd;
        let precision = 1.0 / t2 + y_n.n() as f64 / s2;
        let var = 1.0 / precision;
        let mean = var * (self.prior_mean / t2 + sum / s2);
        Ok((mean, var))
    }
}

/// Gaussian posterior predictive `p(y | y^n)` cached on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDensity {
    pub mean: f64,
    pub sd: f64,
    n: usize,
    universe: Arc<Grid>,
    evaluated: Vec<f64>,
}

impl PredictiveDensity {
    pub fn density(&self, y: f64) -> f64 {
        gaussian_pdf(y, self.mean, self.sd)
    }

    pub fn evaluated(&self) -> &[f64] {
        &self.evaluated
    }

    pub fn universe(&self) -> &Arc<Grid> {
        &self.universe
    }

    /// Sample size the predictive was conditioned on.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Exact normal predictive: posterior variance plus the noise variance.
pub fn posterior_predictive(
    m: &ConjugateModel,
    y_n: &Sample,
    universe: &Arc<Grid>,
) -> Result<PredictiveDensity> {
    if universe.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: universe.dim(),
        });
    }
    let (mean, var) = m.posterior(y_n)?;
    let sd = (var + m.likelihood_sd * m.likelihood_sd).sqrt();
    let evaluated = universe
        .points()
        .iter()
        .map(|p| gaussian_pdf(p[0], mean, sd))
        .collect();
    Ok(PredictiveDensity {
        mean,
        sd,
        n: y_n.n(),
        universe: universe.clone(),
        evaluated,
    })
}

/// The score `ψ(y) = −p(y | y^n)` with the predictive frozen inside.
pub fn bcp(y_n: &Sample, pd: &PredictiveDensity) -> Result<ScoreFn> {
    if y_n.n() != pd.n {
        return Err(Error::Precondition(format!(
            "predictive was built from {} observations, sample has {}",
            pd.n,
            y_n.n()
        )));
    }
    Ok(ScoreFn::NegPredictiveDensity {
        mean: pd.mean,
        sd: pd.sd,
    })
}

/// Predictive densities at the training points, refusing exact ties.
fn training_densities(y_n: &Sample, pd: &PredictiveDensity) -> Result<Vec<f64>> {
    let d: Vec<f64> = y_n.points().iter().map(|p| pd.density(p[0])).collect();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    for w in order.windows(2) {
        if d[w[0]] == d[w[1]] {
            return Err(Error::DensityTie {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
                density: d[w[0]],
            });
        }
    }
    Ok(order.iter().map(|&i| d[i]).collect())
}

/// `k = ⌈(n+1)α⌉`, found as the least `k` with `k/(n+1) > α` so the
/// comparison is the same floating-point expression the transducer uses.
fn order_index(alpha: f64, n: usize) -> usize {
    let m = (n + 1) as f64;
    (1..=n + 1)
        .find(|&k| k as f64 / m > alpha)
        .unwrap_or(n + 1)
}

/// Density threshold of the level set, `None` when every grid point
/// qualifies.
pub fn quant_threshold(alpha: f64, y_n: &Sample, pd: &PredictiveDensity) -> Result<Option<f64>> {
    require_no_tie(alpha, y_n.n())?;
    let sorted = training_densities(y_n, pd)?;
    let k = order_index(alpha, y_n.n());
    // a candidate is kept iff at least k - 1 training densities lie at or
    // below its own, so the threshold is the (k-1)-th smallest
    Ok(if k <= 1 { None } else { Some(sorted[k - 2]) })
}

/// `QUANT_α = H(c, y^n, P) = {y : p(y | y^n) >= c}` with `c` the training
/// order statistic matching the conformal region.
pub fn quant(
    alpha: f64,
    y_n: &Sample,
    pd: &PredictiveDensity,
    universe: &Arc<Grid>,
) -> Result<Region> {
    let c = quant_threshold(alpha, y_n, pd)?;
    Ok(level_set(pd, universe, c))
}

fn level_set(pd: &PredictiveDensity, universe: &Arc<Grid>, c: Option<f64>) -> Region {
    match c {
        None => Region::full(universe.clone()),
        Some(c) => Region::from_predicate(universe.clone(), |i| pd.density(universe.point(i)[0]) >= c),
    }
}

/// Level set at the threshold `c = inf{c : F(c) >= 1 − α}` with
/// `F(c) = P(p(Y) <= c)`, taken literally. For a Gaussian predictive the
/// region is the central interval of mass `α`.
pub fn quant_cdf(alpha: f64, pd: &PredictiveDensity, universe: &Arc<Grid>) -> Result<Region> {
    central_level_set(alpha, pd, universe)
}

/// Central interval of mass `1 − α`, the usual highest density region.
pub fn quant_hdr(alpha: f64, pd: &PredictiveDensity, universe: &Arc<Grid>) -> Result<Region> {
    central_level_set(1.0 - alpha, pd, universe)
}

fn central_level_set(mass: f64, pd: &PredictiveDensity, universe: &Arc<Grid>) -> Result<Region> {
    if !(0.0..1.0).contains(&mass) {
        return Err(Error::InvalidAlpha(mass));
    }
    let z = Normal::new(0.0, 1.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf((1.0 + mass) / 2.0);
    let c = pd.density(pd.mean + z * pd.sd);
    Ok(level_set(pd, universe, Some(c)))
}

/// Sizes of the CDF-defined regions against the order-statistic region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantDiagnostic {
    pub order_statistic_size: usize,
    pub cdf_literal_size: usize,
    pub cdf_literal_symmetric_difference: usize,
    pub hdr_size: usize,
    pub hdr_symmetric_difference: usize,
}

pub fn quant_diagnostic(
    alpha: f64,
    y_n: &Sample,
    pd: &PredictiveDensity,
    universe: &Arc<Grid>,
) -> Result<QuantDiagnostic> {
    let base = quant(alpha, y_n, pd, universe)?;
    let lit = quant_cdf(alpha, pd, universe)?;
    let hdr = quant_hdr(alpha, pd, universe)?;
    let sym = |r: &Region| base.bits().union(r.bits()).count() - base.bits().intersection(r.bits()).count();
    Ok(QuantDiagnostic {
        order_statistic_size: base.len(),
        cdf_literal_size: lit.len(),
        cdf_literal_symmetric_difference: sym(&lit),
        hdr_size: hdr.len(),
        hdr_symmetric_difference: sym(&hdr),
    })
}

/// The three regions of the Bayes/conformal/imprecise triangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleReport {
    pub quant: Region,
    pub kappa: Region,
    pub ihdr: Region,
    /// Whether the unnormalized BCP transducer reaches 1 on the grid.
    pub consonant: bool,
}

impl TriangleReport {
    pub fn agree(&self) -> bool {
        self.quant == self.kappa && self.kappa == self.ihdr
    }
}

/// Computes `QUANT_α`, `κ_α ∘ BCP` and `IHDR_α ∘ CRED ∘ BCP` on one instance.
pub fn bayes_triangle(
    alpha: f64,
    m: &ConjugateModel,
    y_n: &Sample,
    universe: &Arc<Grid>,
) -> Result<TriangleReport> {
    require_no_tie(alpha, y_n.n())?;
    let pd = posterior_predictive(m, y_n, universe)?;
    let psi = bcp(y_n, &pd)?;
    let quant = quant(alpha, y_n, &pd, universe)?;
    let kappa = kappa(alpha, y_n, &psi, universe)?;
    let t = transducer(y_n, &psi, universe)?;
    let ihdr = ihdr_contour(alpha, &cred_from_transducer(&t)?);
    Ok(TriangleReport {
        quant,
        kappa,
        ihdr,
        consonant: t.is_consonant(),
    })
}

/// True iff the three regions are identical bitsets.
pub fn check_bayes_triangle(
    alpha: f64,
    m: &ConjugateModel,
    y_n: &Sample,
    universe: &Arc<Grid>,
) -> Result<bool> {
    Ok(bayes_triangle(alpha, m, y_n, universe)?.agree())
}

/// A credal prior given by lower and upper densities on a midpoint θ-grid,
/// with a likelihood table `ℓ(y^n | θ)` over a discretized outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalPrior {
    theta_grid: Arc<Grid>,
    theta_weight: f64,
    lower_density: Vec<f64>,
    upper_density: Vec<f64>,
    /// `likelihood[θ][outcome]`.
    likelihood: Vec<Vec<f64>>,
    outcome_weight: f64,
}

/// Tolerance on the prior envelope `∫p̲ <= 1 <= ∫p̄`.
const ENVELOPE_TOL: f64 = 1e-9;
/// Tolerance on likelihood rows integrating to one.
pub const ROW_TOL: f64 = 1e-6;

impl CredalPrior {
    pub fn new(
        theta_grid: Arc<Grid>,
        lower_density: Vec<f64>,
        upper_density: Vec<f64>,
        likelihood: Vec<Vec<f64>>,
        outcome_weight: f64,
    ) -> Result<Self> {
        if theta_grid.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: theta_grid.dim(),
            });
        }
        let k = theta_grid.len();
        for len in [lower_density.len(), upper_density.len(), likelihood.len()] {
            if len != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: len,
                });
            }
        }
        let outcomes = likelihood[0].len();
        if outcomes == 0 || likelihood.iter().any(|r| r.len() != outcomes) {
            return Err(Error::InvalidPrior("ragged or empty likelihood table".into()));
        }
        if !(outcome_weight > 0.0 && outcome_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("outcome weight {outcome_weight}")));
        }
        let finite_nonneg = |v: &f64| v.is_finite() && *v >= 0.0;
        if !lower_density.iter().all(finite_nonneg)
            || !upper_density.iter().all(finite_nonneg)
            || !likelihood.iter().flatten().all(finite_nonneg)
        {
            return Err(Error::InvalidPrior("negative or non-finite entry".into()));
        }
        if let Some(i) = (0..k).find(|&i| lower_density[i] > upper_density[i]) {
            return Err(Error::InvalidPrior(format!("lower > upper at theta index {i}")));
        }
        let cp = CredalPrior {
            theta_weight: theta_grid.spacing()[0],
            theta_grid,
            lower_density,
            upper_density,
            likelihood,
            outcome_weight,
        };
        let (lo, hi) = (cp.lower_mass(), cp.upper_mass());
        if lo > 1.0 + ENVELOPE_TOL || hi < 1.0 - ENVELOPE_TOL {
            return Err(Error::InvalidPrior(format!(
                "envelope violates lower mass {lo} <= 1 <= upper mass {hi}"
            )));
        }
        Ok(cp)
    }

    /// i.i.d. Gaussian location likelihood for `n` observations on the
    /// midpoint grid `y_grid`, flattened over `y_grid^n` in lexicographic
    /// order. Each row is renormalized so it integrates to one under the
    /// quadrature.
    pub fn gaussian_location(
        theta_grid: Arc<Grid>,
        y_grid: &Grid,
        n: usize,
        sd: f64,
        lower_density: Vec<f64>,
        upper_density: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || !(sd > 0.0) {
            return Err(Error::InvalidParameter("need n >= 1 and sd > 0".into()));
        }
        let m = y_grid.len();
        let outcomes = m
            .checked_pow(n as u32)
            .filter(|&o| o <= 1 << 22)
            .ok_or(Error::UniverseTooLarge {
                size: m,
                limit: 1 << 22,
            })?;
        let dy = y_grid.spacing()[0];
        let weight = dy.powi(n as i32);
        let likelihood = theta_grid
            .points()
            .iter()
            .map(|t| {
                let marginal: Vec<f64> = y_grid
                    .points()
                    .iter()
                    .map(|y| gaussian_pdf(y[0], t[0], sd))
                    .collect();
                let mut row: Vec<f64> = (0..outcomes)
                    .map(|mut o| {
                        let mut v = 1.0;
                        for _ in 0..n {
                            v *= marginal[o % m];
                            o /= m;
                        }
                        v
                    })
                    .collect();
                let mass: f64 = row.iter().sum::<f64>() * weight;
                if mass > 0.0 {
                    row.iter_mut().for_each(|v| *v /= mass);
                }
                row
            })
            .collect();
        CredalPrior::new(theta_grid, lower_density, upper_density, likelihood, weight)
    }

    pub fn theta_grid(&self) -> &Arc<Grid> {
        &self.theta_grid
    }

    pub fn lower_density(&self) -> &[f64] {
        &self.lower_density
    }

    pub fn upper_density(&self) -> &[f64] {
        &self.upper_density
    }

    pub fn outcomes(&self) -> usize {
        self.likelihood[0].len()
    }

    pub fn likelihood(&self, theta: usize, outcome: usize) -> f64 {
        self.likelihood[theta][outcome]
    }

    /// `∫ p̲ dλ_Θ` by the midpoint rule.
    pub fn lower_mass(&self) -> f64 {
        self.lower_density.iter().sum::<f64>() * self.theta_weight
    }

    pub fn upper_mass(&self) -> f64 {
        self.upper_density.iter().sum::<f64>() * self.theta_weight
    }

    /// `ℓ̲(y^n) = ∫ ℓ(y^n | θ) p̲(θ) dλ_Θ`.
    pub fn lower_marginal(&self, outcome: usize) -> f64 {
        self.likelihood
            .iter()
            .zip(&self.lower_density)
            .map(|(row, p)| row[outcome] * p)
            .sum::<f64>()
            * self.theta_weight
    }

    /// Largest deviation of a likelihood row's integral from one.
    pub fn check_rows(&self) -> Result<()> {
        for (row, r) in self.likelihood.iter().enumerate() {
            let mass = r.iter().sum::<f64>() * self.outcome_weight;
            if (mass - 1.0).abs() > ROW_TOL {
                return Err(Error::ImproperLikelihood { row, mass });
            }
        }
        Ok(())
    }
}

/// `p̄(θ | y^n) = ℓ(y^n | θ) p̄(θ) / ℓ̲(y^n)` on the θ-grid.
pub fn upper_posterior(cp: &CredalPrior, outcome: usize) -> Result<Vec<f64>> {
    if outcome >= cp.outcomes() {
        return Err(Error::IndexOutOfRange {
            index: outcome,
            len: cp.outcomes(),
        });
    }
    let lower = cp.lower_marginal(outcome);
    if !(lower > 0.0) {
        return Err(Error::ZeroLowerMarginal { outcome });
    }
    Ok(cp
        .likelihood
        .iter()
        .zip(&cp.upper_density)
        .map(|(row, p)| row[outcome] * p / lower)
        .collect())
}

/// Ordinary Bayes posterior density for a single prior density `prior`.
pub fn precise_posterior(cp: &CredalPrior, prior: &[f64], outcome: usize) -> Result<Vec<f64>> {
    if prior.len() != cp.theta_grid.len() {
        return Err(Error::DimensionMismatch {
            expected: cp.theta_grid.len(),
            found: prior.len(),
        });
    }
    let joint: Vec<f64> = cp
        .likelihood
        .iter()
        .zip(prior)
        .map(|(row, p)| row[outcome] * p)
        .collect();
    let z = joint.iter().sum::<f64>() * cp.theta_weight;
    if !(z > 0.0) {
        return Err(Error::ZeroLowerMarginal { outcome });
    }
    Ok(joint.into_iter().map(|v| v / z).collect())
}

/// Both sides of the e-posterior biconditional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EPosteriorReport {
    /// `∫p̲ <= p̄(θ)` for every θ.
    pub condition_holds: bool,
    /// `max_θ E_{Y^n ~ L_θ}[1 / p̄(θ | Y^n)]`.
    pub max_evalue_expectation: f64,
    pub lower_mass: f64,
    pub min_upper_density: f64,
    /// θ-grid index attaining the maximum expectation.
    pub argmax_theta: usize,
    pub expectations: Vec<f64>,
}

impl EPosteriorReport {
    /// Whether the two sides agree, with `1e-9` slack on the expectation.
    pub fn consistent(&self) -> bool {
        self.condition_holds == (self.max_evalue_expectation <= 1.0 + 1e-9)
    }
}

/// Evaluates the prior condition and, by summation over the outcome grid,
/// the expectation of the reciprocal upper posterior under every `L_θ`.
pub fn check_eposterior(cp: &CredalPrior) -> Result<EPosteriorReport> {
    cp.check_rows()?;
    let lower_mass = cp.lower_mass();
    let min_upper = cp.upper_density.iter().copied().fold(f64::INFINITY, f64::min);
    let condition_holds = cp.upper_density.iter().all(|&p| lower_mass <= p);

    let lower_marginals: Vec<f64> = (0..cp.outcomes())
        .into_par_iter()
        .map(|o| cp.lower_marginal(o))
        .collect();
    if let Some(outcome) = lower_marginals.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::ZeroLowerMarginal { outcome });
    }

    let expectations: Vec<f64> = (0..cp.theta_grid.len())
        .into_par_iter()
        .map(|t| {
            let row = &cp.likelihood[t];
            let upper = cp.upper_density[t];
            let mut acc = 0.0;
            for (o, &lik) in row.iter().enumerate() {
                if lik == 0.0 {
                    continue;
                }
                let post = lik * upper / lower_marginals[o];
                acc += if post > 0.0 {
                    lik * cp.outcome_weight / post
                } else {
                    f64::INFINITY
                };
            }
            acc
        })
        .collect();
    let (argmax_theta, max) = expectations
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(EPosteriorReport {
        condition_holds,
        max_evalue_expectation: max,
        lower_mass,
        min_upper_density: min_upper,
        argmax_theta,
        expectations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fullcp::transducer;
    use crate::grid::make_uniform_grid;
    use crate::scores::Nonconformity;

    fn s(v: &[f64]) -> Sample {
        Sample::scalar(v).unwrap()
    }

    fn grid_1d(lo: f64, hi: f64, c: usize) -> Arc<Grid> {
        Arc::new(make_uniform_grid(&[(lo, hi)], &[c]).unwrap())
    }

    #[test]
    fn flat_prior_predictive_mean_is_sample_mean() {
        let m = ConjugateModel::new(1.0, 0.0, 1e6).unwrap();
        let pd = posterior_predictive(&m, &s(&[0.0; 4]), &grid_1d(-5.0, 5.0, 11)).unwrap();
        assert!(pd.mean.abs() < 1e-5);
    }

    #[test]
    fn one_observation_textbook_values() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let pd = posterior_predictive(&m, &s(&[0.0]), &grid_1d(-5.0, 5.0, 11)).unwrap();
        assert_eq!(pd.mean, 0.0);
        assert!((pd.sd - (0.5f64 + 1.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn predictive_integrates_to_one() {
        // trapezoid rule on a ±8 sd grid
        for (sigma, mu0, tau0, data) in [
            (1.0, 0.0, 1.0, vec![0.3, -1.2, 0.8]),
            (0.5, 2.0, 3.0, vec![1.9, 2.4]),
            (2.0, -1.0, 0.1, vec![5.0; 6]),
        ] {
            let m = ConjugateModel::new(sigma, mu0, tau0).unwrap();
            let y_n = s(&data);
            let (mean, var) = m.posterior(&y_n).unwrap();
            let sd = (var + sigma * sigma).sqrt();
            let u = grid_1d(mean - 8.0 * sd, mean + 8.0 * sd, 4001);
            let pd = posterior_predictive(&m, &y_n, &u).unwrap();
            let h = u.spacing()[0];
            let v = pd.evaluated();
            let integral = h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]));
            assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(ConjugateModel::new(0.0, 0.0, 1.0).is_err());
        assert!(ConjugateModel::new(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn bcp_score_is_negated_density() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let y_n = s(&[0.4, -0.3, 1.1]);
        let u = Arc::new(Grid::centered(0.0, 3.0, 61).unwrap());
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let psi = bcp(&y_n, &pd).unwrap();
        let scores: Vec<f64> = u.points().iter().map(|p| psi.score(y_n.points(), p)).collect();
        for (sc, d) in scores.iter().zip(pd.evaluated()) {
            assert_eq!(*sc, -d);
        }
        let at_mean = psi.score(y_n.points(), &[pd.mean]);
        assert!(scores.iter().all(|&v| v >= at_mean));
        let r = 0.77;
        assert_eq!(
            psi.score(y_n.points(), &[pd.mean + r]),
            psi.score(y_n.points(), &[pd.mean - r])
        );
        assert!(bcp(&s(&[0.0]), &pd).is_err());
    }

    #[test]
    fn bcp_transducer_is_consonant_at_the_mode() {
        let m = ConjugateModel::new(1.0, 0.0, 2.0).unwrap();
        let y_n = s(&[0.2, -0.9, 1.4, 0.05]);
        let (mean, var) = m.posterior(&y_n).unwrap();
        let u = Arc::new(Grid::centered(mean, 6.0 * (var + 1.0).sqrt(), 101).unwrap());
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let t = transducer(&y_n, &bcp(&y_n, &pd).unwrap(), &u).unwrap();
        assert_eq!(t.value(50), 1.0);
    }

    #[test]
    fn quant_small_alpha_is_full_grid() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let y_n = s(&[-0.4, 1.3]);
        let u = grid_1d(-6.0, 6.0, 121);
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let r = quant(0.01, &y_n, &pd, &u).unwrap();
        assert_eq!(r.len(), 121);
        // α = 0.4 with n = 2 keeps points at least as dense as the least dense
        // training point
        let lo = pd.density(-0.4).min(pd.density(1.3));
        let r = quant(0.4, &y_n, &pd, &u).unwrap();
        for i in 0..u.len() {
            assert_eq!(r.contains(i), pd.evaluated()[i] >= lo);
        }
    }

    #[test]
    fn quant_symmetric_data_gives_symmetric_region() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let y_n = s(&[-1.0, 1.0, 0.5]);
        let pd0 = posterior_predictive(&m, &y_n, &grid_1d(-1.0, 1.0, 3)).unwrap();
        let u = Arc::new(Grid::centered(pd0.mean, 6.0 * pd0.sd, 101).unwrap());
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let r = quant(0.3, &y_n, &pd, &u).unwrap();
        let idx = r.indices();
        let mirrored: Vec<usize> = idx.iter().rev().map(|&i| 100 - i).collect();
        assert_eq!(idx, mirrored);
    }

    #[test]
    fn quant_refuses_density_ties_and_tie_levels() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let u = grid_1d(-6.0, 6.0, 101);
        let y_n = s(&[0.5, 0.5, 0.5]);
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        assert!(matches!(quant(0.3, &y_n, &pd, &u), Err(Error::DensityTie { .. })));
        let y_n = s(&[0.5, -0.2, 0.9]);
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        assert!(matches!(quant(0.5, &y_n, &pd, &u), Err(Error::TieLevel { .. })));
    }

    #[test]
    fn quant_is_antitone_and_a_level_set() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..20).map(|i| (i as f64).sqrt() * 0.7 - 1.5).collect();
        let y_n = s(&data);
        let u = grid_1d(-6.0, 6.0, 201);
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let wide = quant(0.5 + 1e-3, &y_n, &pd, &u).unwrap();
        let core = quant(0.95 + 1e-3, &y_n, &pd, &u).unwrap();
        assert!(core.is_subset(&wide).unwrap());
        assert!(core.len() < wide.len());
        let d = pd.evaluated();
        for i in wide.indices() {
            for j in 0..u.len() {
                if d[j] >= d[i] {
                    assert!(wide.contains(j));
                }
            }
        }
    }

    #[test]
    fn triangle_on_the_reference_instance() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let data = [0.52, -1.31, 0.07, 1.88, -0.44, 0.91, -2.02, 0.33, -0.71, 1.24];
        let y_n = s(&data);
        let pd = posterior_predictive(&m, &y_n, &grid_1d(0.0, 1.0, 2)).unwrap();
        let u = Arc::new(Grid::centered(pd.mean, 6.0 * pd.sd, 101).unwrap());
        let rep = bayes_triangle(0.13, &m, &y_n, &u).unwrap();
        assert!(rep.consonant);
        assert!(rep.agree(), "{rep:?}");
        assert!(check_bayes_triangle(0.13, &m, &y_n, &u).unwrap());
        assert!(matches!(
            check_bayes_triangle(0.13, &m, &s(&[1.0; 10]), &u),
            Err(Error::DensityTie { .. })
        ));
    }

    #[test]
    fn cdf_literal_region_has_mass_alpha() {
        let m = ConjugateModel::new(1.0, 0.0, 1.0).unwrap();
        let y_n = s(&[0.1, -0.2, 0.35, 0.8, -1.0]);
        let pd0 = posterior_predictive(&m, &y_n, &grid_1d(0.0, 1.0, 2)).unwrap();
        let u = Arc::new(Grid::centered(pd0.mean, 6.0 * pd0.sd, 2001).unwrap());
        let pd = posterior_predictive(&m, &y_n, &u).unwrap();
        let h = u.spacing()[0];
        let mass = |r: &Region| r.indices().iter().map(|&i| pd.evaluated()[i]).sum::<f64>() * h;
        assert!((mass(&quant_cdf(0.2, &pd, &u).unwrap()) - 0.2).abs() < 0.01);
        assert!((mass(&quant_hdr(0.2, &pd, &u).unwrap()) - 0.8).abs() < 0.01);
        let diag = quant_diagnostic(0.2, &y_n, &pd, &u).unwrap();
        assert!(diag.cdf_literal_symmetric_difference > diag.hdr_symmetric_difference);
    }

    fn uniform_theta() -> Arc<Grid> {
        Arc::new(Grid::midpoint(0.0, 1.0, 101).unwrap())
    }

    fn y_grid() -> Grid {
        Grid::midpoint(-4.0, 5.0, 101).unwrap()
    }

    fn prior(lower: Vec<f64>, upper: Vec<f64>) -> CredalPrior {
        CredalPrior::gaussian_location(uniform_theta(), &y_grid(), 1, 1.0, lower, upper).unwrap()
    }

    #[test]
    fn precise_uniform_prior_is_the_equality_case() {
        let cp = prior(vec![1.0; 101], vec![1.0; 101]);
        let rep = check_eposterior(&cp).unwrap();
        assert!(rep.condition_holds);
        assert!((rep.max_evalue_expectation - 1.0).abs() < 1e-12);
        assert!(rep.consistent());
    }

    #[test]
    fn precise_prior_upper_posterior_is_bayes() {
        let p: Vec<f64> = (0..101).map(|i| 0.5 + i as f64 / 100.0).collect();
        let cp = prior(p.clone(), p.clone());
        for o in [0, 37, 100] {
            let up = upper_posterior(&cp, o).unwrap();
            let bayes = precise_posterior(&cp, &p, o).unwrap();
            for (a, b) in up.iter().zip(&bayes) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn doubling_the_upper_prior_doubles_the_upper_posterior() {
        let cp = prior(vec![1.0; 101], vec![2.0; 101]);
        let up = upper_posterior(&cp, 50).unwrap();
        let bayes = precise_posterior(&cp, &[1.0; 101], 50).unwrap();
        for (a, b) in up.iter().zip(&bayes) {
            assert!((a - 2.0 * b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn flat_likelihood_cancels() {
        let theta = uniform_theta();
        let upper: Vec<f64> = (0..101).map(|i| 1.0 + (i % 3) as f64).collect();
        let table = vec![vec![0.25; 4]; 101];
        let cp = CredalPrior::new(theta, vec![0.8; 101], upper.clone(), table, 1.0).unwrap();
        let up = upper_posterior(&cp, 2).unwrap();
        for (a, p) in up.iter().zip(&upper) {
            let expected = p / cp.lower_mass();
            assert!((a - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuous_lower_prior_hits_the_zero_marginal_guard() {
        let cp = prior(vec![0.0; 101], vec![1.5; 101]);
        assert!(matches!(upper_posterior(&cp, 3), Err(Error::ZeroLowerMarginal { .. })));
        assert!(matches!(check_eposterior(&cp), Err(Error::ZeroLowerMarginal { .. })));
    }

    #[test]
    fn shrinking_the_upper_prior_breaks_the_condition() {
        let mut upper = vec![1.5; 101];
        upper[40] = 0.2;
        let mut lower = vec![0.5; 101];
        lower[40] = 0.2;
        let cp = prior(lower, upper);
        let rep = check_eposterior(&cp).unwrap();
        assert!(!rep.condition_holds);
        assert_eq!(rep.argmax_theta, 40);
        // E = ∫p̲ / p̄(θ₀)
        assert!((rep.max_evalue_expectation - cp.lower_mass() / 0.2).abs() < 1e-9);
        assert!(rep.consistent());
    }

    #[test]
    fn improper_rows_and_bad_envelopes_are_rejected() {
        let theta = Arc::new(Grid::midpoint(0.0, 1.0, 4).unwrap());
        let table = vec![vec![0.3; 4]; 4];
        let cp = CredalPrior::new(theta.clone(), vec![1.0; 4], vec![1.0; 4], table, 1.0).unwrap();
        assert!(matches!(check_eposterior(&cp), Err(Error::ImproperLikelihood { .. })));
        let table = vec![vec![0.25; 4]; 4];
        assert!(CredalPrior::new(theta.clone(), vec![2.0; 4], vec![2.0; 4], table.clone(), 1.0).is_err());
        assert!(CredalPrior::new(theta, vec![1.0; 4], vec![0.5; 4], table, 1.0).is_err());
    }

    #[test]
    fn two_observation_product_likelihood() {
        let theta = Arc::new(Grid::midpoint(0.0, 1.0, 21).unwrap());
        let y = Grid::midpoint(-3.0, 4.0, 31).unwrap();
        let cp = CredalPrior::gaussian_location(theta, &y, 2, 1.0, vec![0.6; 21], vec![1.4; 21]).unwrap();
        assert_eq!(cp.outcomes(), 31 * 31);
        let rep = check_eposterior(&cp).unwrap();
        assert!(rep.condition_holds);
        assert!((rep.max_evalue_expectation - 0.6 / 1.4).abs() < 1e-9);
    }
}
