//! Experiment orchestration: randomized campaigns over the library's
//! constructions, and deterministic JSON or CSV reports.
//!
//! Every trial draws from its own ChaCha8 stream `(seed, trial_index)`, so a
//! report depends only on the configuration, never on the worker count.

mod campaigns;
pub mod config;
mod coverage;

pub use campaigns::{run_bayes_triangle, run_category_axioms, run_diagram, run_eposterior, run_ihdr_oracle, run_monad_laws};
pub use config::{Experiment, ExperimentConfig, Scenario};
pub use coverage::{run_coverage, wilson_lower_bound, CoverageReport};

use crate::error::{Error, Result};
use crate::fullcp::TieGrid;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub const RNG_NAME: &str = "ChaCha8";
/// Levels closer than this to a forbidden value are redrawn.
pub const ALPHA_MARGIN: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 10_000;

/// Generator for trial `t` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, t: u64) -> ChaCha8Rng {
    crate::catlaws::trial_rng(seed, t)
}

/// Uniform level in `[0, 1)` at distance more than [`ALPHA_MARGIN`] from
/// every value in `forbidden`.
pub fn sample_alpha_off<R: Rng>(rng: &mut R, forbidden: &[f64]) -> Result<f64> {
    for _ in 0..MAX_ATTEMPTS {
        let a: f64 = rng.gen();
        if forbidden.iter().all(|&v| (v - a).abs() > ALPHA_MARGIN) {
            return Ok(a);
        }
    }
    Err(Error::SamplingExhausted(MAX_ATTEMPTS))
}

/// Uniform level off the tie grid `S_{n+1}`.
pub fn sample_alpha<R: Rng>(rng: &mut R, n: usize) -> Result<f64> {
    sample_alpha_off(rng, TieGrid::new(n)?.levels())
}

/// One checked instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: Value,
    pub pass: bool,
    /// Evidence for a failure; `null` when the check passed.
    pub witnesses: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub rng: String,
    pub seed: u64,
    pub trials: u64,
    pub pass: bool,
    pub summary: Value,
    pub records: Vec<CheckRecord>,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig, summary: Value, records: Vec<CheckRecord>) -> Self {
        RunReport {
            experiment: cfg.experiment.name().into(),
            rng: RNG_NAME.into(),
            seed: cfg.seed,
            trials: cfg.trials,
            pass: records.iter().all(|r| r.pass),
            summary,
            records,
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Coverage => {
            let rep = run_coverage(cfg)?;
            let record = CheckRecord {
                check: "coverage_bound".into(),
                params: serde_json::to_value(&rep)?,
                pass: rep.meets_bound(),
                witnesses: Value::Null,
            };
            Ok(RunReport::new(cfg, serde_json::to_value(&rep)?, vec![record]))
        }
        Experiment::Diagram => run_diagram(cfg),
        Experiment::BayesTriangle => run_bayes_triangle(cfg),
        Experiment::MonadLaws => run_monad_laws(cfg),
        Experiment::CategoryAxioms => run_category_axioms(cfg),
        Experiment::Eposterior => run_eposterior(cfg),
        Experiment::IhdrOracle => run_ihdr_oracle(cfg),
    }
}

/// Serializes `report`. JSON objects have sorted keys; CSV has one row per
/// record after a leading summary row, with nested values as JSON text.
pub fn render(report: &RunReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            // going through `Value` sorts every object's keys
            let value = serde_json::to_value(report)?;
            let mut out = serde_json::to_vec_pretty(&value)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["experiment", "check", "pass", "params", "witnesses"])?;
            let summary = serde_json::to_string(&serde_json::to_value(&report.summary)?)?;
            w.write_record([
                report.experiment.as_str(),
                "summary",
                &report.pass.to_string(),
                &summary,
                "",
            ])?;
            for r in &report.records {
                let params = serde_json::to_string(&r.params)?;
                let witnesses = if r.witnesses.is_null() {
                    String::new()
                } else {
                    serde_json::to_string(&r.witnesses)?
                };
                w.write_record([
                    report.experiment.as_str(),
                    r.check.as_str(),
                    &r.pass.to_string(),
                    &params,
                    &witnesses,
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

/// Writes the rendered report to `path`, or to stdout when `path` is `None`.
pub fn emit(report: &RunReport, path: Option<&Path>, format: Format) -> Result<()> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
