//! `ck <experiment> --config <path.json> [--seed N] [--trials N] [--out path] [--format json|csv]`
//!
//! Exit status: 0 when every check passes, 1 when any check fails, 2 on a
//! configuration or I/O error. `CK_THREADS` caps the number of workers.

use ck::harness::{emit, run, Experiment, ExperimentConfig, Format};
use ck::Error;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ck", version, about = "Run a conformal / credal / categorical law experiment")]
struct Cli {
    /// coverage, diagram, bayes_triangle, monad_laws, category_axioms,
    /// eposterior or ihdr_oracle
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn threads() -> Result<Option<usize>, Error> {
    match std::env::var("CK_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("CK_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

fn main_inner(cli: Cli) -> Result<bool, Error> {
    let experiment = Experiment::from_name(&cli.experiment)
        .ok_or_else(|| Error::Config(format!("unknown experiment `{}`", cli.experiment)))?;
    if let Some(n) = threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut cfg = ExperimentConfig::from_path(&cli.config)?;
    if cfg.experiment != experiment {
        return Err(Error::Config(format!(
            "config is for `{}`, not `{}`",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    let report = run(&cfg)?;
    emit(&report, cli.out.as_deref(), cli.format)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ck: {e}");
            ExitCode::from(2)
        }
    }
}
