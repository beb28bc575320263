//! Monte Carlo experiments for the smallest singular value.
//!
//! [`run_trials`] draws one matrix per `(distribution, n, trial)` from its own
//! random stream and records `s_n` together with the witness bound;
//! [`tail_table_and_fit`] turns the records into exceedance frequencies of
//! `s_n > eps^-2 n^-1/2` and the smallest constant `C` with
//! `p_hat <= C (eps + 1/sqrt(n))` in every cell.

mod probe;
mod stats;
mod trials;

pub use probe::{
    compressible_kernel_probe, compressible_probe_with_matrix, kernel_complement_study, KernelStudy,
    KernelStudyOptions, ProbeResult,
};
pub use stats::{
    tail_table_and_fit, wilson_interval, ConfigEcho, ExperimentReport, MonotonicityCheck, TailCell, WILSON_Z,
};
pub use trials::{
    records_to_csv, run_trials, ExperimentConfig, TrialRecord, DEFAULT_MASTER_SEED, DEFAULT_MAX_N,
    TRIAL_CSV_HEADER,
};

use crate::error::Result;

/// Runs the trials of `cfg` and fits the tail table.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, ExperimentReport)> {
    let records = run_trials(cfg)?;
    let report = tail_table_and_fit(&records, &cfg.eps_grid)?.with_config(ConfigEcho::from(cfg));
    Ok((records, report))
}
