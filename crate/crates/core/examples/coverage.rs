//! Monte Carlo coverage of the conformal region under three exchangeable
//! scenarios.
//!
//! `cargo run --release --example coverage`

use ck::grid::GridSpec;
use ck::harness::config::{Experiment, ExperimentConfig, Scenario};
use ck::harness::run_coverage;

fn main() -> ck::Result<()> {
    let scenarios = [
        Scenario::IidGaussian { mean: 0.0, sd: 1.0 },
        Scenario::IidUniform { lo: -2.0, hi: 2.0 },
        Scenario::ExchangeableMixture { prior_sd: 1.5, sd: 1.0 },
    ];
    for (alpha, scenario) in [0.13, 0.009].into_iter().flat_map(|a| scenarios.clone().map(|s| (a, s))) {
        let cfg = ExperimentConfig {
            experiment: Experiment::Coverage,
            seed: 42,
            trials: 500,
            alpha: Some(alpha),
            n: Some(20),
            grid: Some(GridSpec {
                bounds: vec![[-7.0, 7.0]],
                counts: vec![201],
            }),
            score: None,
            model: None,
            scenario: Some(scenario.clone()),
            options: Default::default(),
        };
        let rep = run_coverage(&cfg)?;
        println!(
            "alpha {alpha:<6} {:<60} coverage {:.3}  wilson99 {:.3}  target {:.3}",
            format!("{scenario:?}"),
            rep.empirical_coverage,
            rep.wilson_lower_bound,
            rep.target
        );
    }
    Ok(())
}
