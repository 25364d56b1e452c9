//! Batch experiments: configuration, built-in corpus, runners and reports.

pub mod config;
pub mod corpus;
pub mod report;

mod bounded;
mod compact;
mod factor;
mod kernel;
mod lower;

pub use bounded::run_boundedness;
pub use compact::run_compactness;
pub use config::{Experiment, ExperimentConfig, Settings};
pub use factor::run_factorization;
pub use kernel::run_kernelcheck;
pub use lower::run_lowerbound;
pub use report::{Check, ExperimentReport, FittedConstant, Table};

use crate::error::{Error, Result};

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.experiment {
        Experiment::Boundedness => run_boundedness(cfg),
        Experiment::Compactness => run_compactness(cfg),
        Experiment::Factorization => run_factorization(cfg),
        Experiment::Lowerbound => run_lowerbound(cfg),
        Experiment::Kernelcheck => run_kernelcheck(cfg),
    }
}

/// Configuration and window problems, as opposed to failed checks or
/// numerical breakdowns.
pub fn is_setup_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::OutOfWindow { .. } | Error::InvalidExponent(_) | Error::InvalidArgument(_)
    )
}

fn new_report(cfg: &ExperimentConfig) -> ExperimentReport {
    let mut r = ExperimentReport::new(cfg.experiment.name(), cfg.hash(), cfg.seed);
    if cfg.settings.get("grid", "step").is_some() {
        r.note("Morrey and BMO suprema are taken over a finite interval lattice on the configured window");
    }
    r
}
