//! Seeded Monte Carlo campaigns over `(n, c, r)` cells.
//!
//! Trial `t` of cell `k` draws everything from `stream(seed, k, t)`, and
//! results are collected in task order, so reports do not depend on the
//! worker count or on scheduling.

pub mod config;
pub mod report;
pub mod run;

pub use config::{CellSpec, ExperimentConfig, Mode};
pub use report::{emit_report, sidecar_path, Report};
pub use run::{
    run_census, run_maxdeg, run_tailcheck, with_workers, CellSummary, CensusReport, CensusRow,
    ExperimentRecord, MaxDegReport, TailReport, TailRow,
};

use crate::error::Result;

/// Runs the campaign described by `cfg` and writes its report to `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.mode {
        Mode::Maxdeg => emit_report(&run_maxdeg(cfg)?, cfg, &cfg.out),
        Mode::Census => emit_report(&run_census(cfg)?, cfg, &cfg.out),
        Mode::Tailcheck => emit_report(&run_tailcheck(cfg)?, cfg, &cfg.out),
    }
}
