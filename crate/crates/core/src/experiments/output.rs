use std::io::Write;

use crate::error::Result;

pub const CSV_HEADER: [&str; 7] = ["experiment", "method", "variable", "value", "metric", "trials", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Pcc,
    Ber,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Pcc => "pcc",
            Metric::Ber => "ber",
        }
    }
}

/// One point of a sweep.
///
/// `variable` is the independent variable (SNR, offset or sample size) and
/// `value` the measured metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub method: String,
    pub variable: f64,
    pub value: f64,
    pub metric: Metric,
    /// Trials for Pcc rows, frames for BER rows.
    pub trials: u64,
    pub seed: u64,
}

impl ResultRow {
    /// Binomial standard error of a Pcc estimate.
    pub fn std_error(&self) -> f64 {
        (self.value * (1.0 - self.value) / self.trials as f64).sqrt()
    }
}

/// Writes rows as CSV, sorted by experiment, method, then variable.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.experiment.as_str(), a.method.as_str())
            .cmp(&(b.experiment.as_str(), b.method.as_str()))
            .then(a.variable.total_cmp(&b.variable))
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in sorted {
        w.write_record([
            r.experiment.clone(),
            r.method.clone(),
            r.variable.to_string(),
            r.value.to_string(),
            r.metric.name().to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
