//! Configuration-driven experiments composing the other modules, with JSON reports and
//! CSV / two-column plot files.

mod assumptions;
mod config;
mod diagnostic;
mod kernel;
mod lemma;
mod report;
mod tangential;

pub use assumptions::run_assumptions_report;
pub use config::*;
pub use diagnostic::{diagnostic_sums, DiagnosticSums};
pub use kernel::{run_kernel_bounds, run_stable_oracle, QUADRATURE_AGREEMENT, RATIO_FLATNESS};
pub use lemma::run_lemma_suite;
pub use report::*;
pub use tangential::{gap_verdict, run_tangential_limit};

use std::time::Instant;

use crate::error::Result;

/// Validates `cfg` and runs its experiment. Worker count comes from `cfg.mc.workers` and
/// does not affect any reported number.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let hyp = cfg.validate()?;
    let mut blobs = Vec::new();
    let (mut report, tables) = match cfg.experiment {
        ExperimentKind::AssumptionsReport => run_assumptions_report(cfg)?,
        ExperimentKind::KernelBounds => run_kernel_bounds(cfg)?,
        ExperimentKind::StableOracle => {
            let (r, t, b) = run_stable_oracle(cfg)?;
            blobs = b;
            (r, t)
        }
        ExperimentKind::TangentialLimit => run_tangential_limit(cfg, &hyp)?,
        ExperimentKind::LemmaSuite => run_lemma_suite(cfg, &hyp)?,
    };
    report.tables = tables.iter().map(Table::reference).collect();
    report.finalize();
    Ok(RunOutput { report, tables, blobs, wall_clock_s: started.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests;
