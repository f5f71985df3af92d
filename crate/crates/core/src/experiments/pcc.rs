//! Probability-of-correct-classification sweeps over SNR, SNR offset and
//! sample size.
//!
//! A trial's true format, symbols and noise depend only on
//! `(seed, true SNR, N, trial)`, so every method sees the same received
//! samples and points shared between sweeps (e.g. offset 0 at 15 dB and the
//! 15 dB point of the SNR sweep) reproduce exactly.

use std::fs::File;
use std::io::BufReader;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::output::{Metric, ResultRow};
use crate::cdf::{anchored_snr_grid, build_cdf_table, QuantizedCdfTable};
use crate::channel::{awgn_apply, snr_db_to_sigma_sq};
use crate::classify::{classify_cumulant, classify_ks_exact_with, classify_ks_table};
use crate::constellation::{Constellation, ModulationFormat};
use crate::error::{Error, Result};
use crate::seed::{SeedPath, Stream};

const PCC_DOMAIN: u64 = 0x70_6363;

/// A method after expanding `ks-table` over table granularities.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Ks,
    KsTable { granularity_db: f64 },
    Cumulant,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Ks => "ks".into(),
            MethodSpec::KsTable { granularity_db } => format!("ks-table-{granularity_db}db"),
            MethodSpec::Cumulant => "cumulant".into(),
        }
    }
}

struct Prepared {
    spec: MethodSpec,
    table: Option<QuantizedCdfTable>,
}

/// Expands methods and builds (or loads) the tables they need. Built tables
/// span `[lo_db, hi_db]`, the range of SNRs the classifiers will assume.
fn prepare(config: &ExperimentConfig, lo_db: f64, hi_db: f64) -> Result<Vec<Prepared>> {
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let mut out = Vec::new();
    for m in methods {
        match m {
            Method::Ks => out.push(Prepared {
                spec: MethodSpec::Ks,
                table: None,
            }),
            Method::Cumulant => out.push(Prepared {
                spec: MethodSpec::Cumulant,
                table: None,
            }),
            Method::KsTable => {
                if let Some(path) = &config.table {
                    let table = QuantizedCdfTable::read_from(BufReader::new(File::open(path)?))?;
                    out.push(Prepared {
                        spec: MethodSpec::KsTable {
                            granularity_db: table.granularity_db(),
                        },
                        table: Some(table),
                    });
                } else {
                    for &g in &config.table_granularities_db {
                        let grid = anchored_snr_grid(lo_db, hi_db, g);
                        out.push(Prepared {
                            spec: MethodSpec::KsTable { granularity_db: g },
                            table: Some(build_cdf_table(&config.candidates, &grid, g)?),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// True format and received samples of one trial.
pub(crate) fn trial_samples(
    seed: SeedPath,
    candidates: &[ModulationFormat],
    n: usize,
    snr_db: f64,
) -> Result<(ModulationFormat, Vec<Complex64>)> {
    let truth = candidates[seed.rng(Stream::Format).random_range(0..candidates.len())];
    let c = Constellation::new(truth);
    let mut sym = seed.rng(Stream::Symbols);
    let idx: Vec<usize> = (0..n).map(|_| sym.random_range(0..c.order())).collect();
    let x = c.modulate(&idx)?;
    let y = awgn_apply(&x, snr_db_to_sigma_sq(snr_db), &mut seed.rng(Stream::Noise))?;
    Ok((truth, y))
}

fn decide(
    method: &Prepared,
    config: &ExperimentConfig,
    samples: &[Complex64],
    assumed_snr_db: f64,
) -> Result<Option<ModulationFormat>> {
    let sigma_sq = snr_db_to_sigma_sq(assumed_snr_db);
    let candidates = &config.candidates;
    Ok(Some(match &method.spec {
        MethodSpec::Ks => classify_ks_exact_with(samples, sigma_sq.sqrt(), candidates, config.ks_sides)?.decided,
        MethodSpec::KsTable { .. } => {
            let table = method.table.as_ref().expect("table prepared");
            classify_ks_table(samples, assumed_snr_db, table, candidates)?.decided
        }
        // no decision when the normalization vanishes; scored as a miss
        MethodSpec::Cumulant => match classify_cumulant(samples, sigma_sq, candidates) {
            Ok(f) => f,
            Err(Error::DegenerateCumulant(_)) => return Ok(None),
            Err(e) => return Err(e),
        },
    }))
}

/// Correct decisions per method over `config.trials` trials.
fn pcc_point(
    config: &ExperimentConfig,
    methods: &[Prepared],
    true_snr_db: f64,
    assumed_snr_db: f64,
    n: usize,
) -> Result<Vec<u64>> {
    let point = SeedPath::new(config.seed)
        .child(PCC_DOMAIN)
        .child_f64(true_snr_db)
        .child(n as u64);
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let (truth, y) = trial_samples(point.child(t), &config.candidates, n, true_snr_db)?;
            methods
                .iter()
                .map(|m| Ok(u64::from(decide(m, config, &y, assumed_snr_db)? == Some(truth))))
                .collect()
        })
        .try_reduce(
            || vec![0; methods.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )
}

fn rows_for(
    config: &ExperimentConfig,
    methods: &[Prepared],
    variable: f64,
    correct: &[u64],
) -> Vec<ResultRow> {
    methods
        .iter()
        .zip(correct)
        .map(|(m, &c)| ResultRow {
            experiment: config.experiment.name().into(),
            method: m.spec.label(),
            variable,
            value: c as f64 / config.trials as f64,
            metric: Metric::Pcc,
            trials: config.trials as u64,
            seed: config.seed,
        })
        .collect()
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Pcc per method and SNR with the classifier told the true SNR.
pub fn run_pcc_vs_snr(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let (lo, hi) = range(&config.snr_grid_db);
    let methods = prepare(config, lo, hi)?;
    super::with_workers(config.workers, || {
        let mut rows = Vec::new();
        for &snr in &config.snr_grid_db {
            let correct = pcc_point(config, &methods, snr, snr, config.n_samples)?;
            rows.extend(rows_for(config, &methods, snr, &correct));
        }
        Ok(rows)
    })?
}

/// Pcc per method and SNR offset; the samples are at `offset_snr_db` and the
/// classifier assumes `offset_snr_db + offset`.
pub fn run_pcc_vs_offset(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let (lo, hi) = range(&config.offset_grid_db);
    let truth = config.offset_snr_db;
    let methods = prepare(config, truth + lo, truth + hi)?;
    super::with_workers(config.workers, || {
        let mut rows = Vec::new();
        for &off in &config.offset_grid_db {
            let correct = pcc_point(config, &methods, truth, truth + off, config.n_samples)?;
            rows.extend(rows_for(config, &methods, off, &correct));
        }
        Ok(rows)
    })?
}

/// Pcc per method and sample size at `samples_snr_db`.
pub fn run_pcc_vs_samples(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let snr = config.samples_snr_db;
    let methods = prepare(config, snr, snr)?;
    super::with_workers(config.workers, || {
        let mut rows = Vec::new();
        for &n in &config.sample_size_grid {
            let correct = pcc_point(config, &methods, snr, snr, n)?;
            rows.extend(rows_for(config, &methods, n as f64, &correct));
        }
        Ok(rows)
    })?
}
