//! Seeded Monte Carlo sweeps.
//!
//! Each sweep point runs its trials in parallel, each trial drawing from
//! random streams derived from `(seed, sweep point, trial index)`. Counters
//! are integer sums, so results do not depend on the number of workers.

mod ber;
mod config;
mod iq;
mod output;
mod pcc;

pub use ber::{run_ber_sweep, snr_at_ber};
pub use config::{parse_f64_list, ExperimentConfig, ExperimentKind, Method, SdmaSweepConfig};
pub use iq::read_iq_file;
pub use output::{write_csv, Metric, ResultRow, CSV_HEADER};
pub use pcc::{run_pcc_vs_offset, run_pcc_vs_samples, run_pcc_vs_snr, MethodSpec};

use crate::cdf::{build_cdf_table, QuantizedCdfTable};
use crate::error::{Error, Result};

/// Runs `f` on a pool with `workers` threads (0 = default size).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs the sweep selected by `config.experiment`.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::PccVsSnr => run_pcc_vs_snr(config),
        ExperimentKind::PccVsOffset => run_pcc_vs_offset(config),
        ExperimentKind::PccVsSamples => run_pcc_vs_samples(config),
        ExperimentKind::BerSweep => run_ber_sweep(config),
        ExperimentKind::BuildTable | ExperimentKind::Classify => Err(Error::Config(format!(
            "{} does not produce result rows",
            config.experiment.name()
        ))),
    }
}

/// Table written by `build-table`: `granularity_db` steps anchored at
/// multiples of the step, spanning the configured SNR grid.
pub fn build_table_from_config(config: &ExperimentConfig) -> Result<QuantizedCdfTable> {
    config.validate()?;
    let lo = config.snr_grid_db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = config.snr_grid_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = crate::cdf::anchored_snr_grid(lo, hi, config.granularity_db);
    build_cdf_table(&config.candidates, &grid, config.granularity_db)
}
