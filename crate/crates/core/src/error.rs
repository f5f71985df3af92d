//! Error types.

use thiserror::Error;

use crate::constellation::ModulationFormat;

/// Errors returned by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol index {index} out of range for {format} (order {order})")]
    IndexOutOfRange {
        index: usize,
        format: ModulationFormat,
        order: usize,
    },
    #[error("noise variance must be nonnegative, got {0}")]
    NegativeNoiseVariance(f64),
    #[error("noise standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("empty sample set")]
    EmptySamples,
    #[error("non-finite sample value {0}")]
    NonFiniteSample(f64),
    #[error("CDF evaluator returned {value} at z = {z}, outside [0, 1]")]
    CdfOutOfRange { z: f64, value: f64 },
    #[error("argument of the K-S series must be nonnegative, got {0}")]
    NegativeKsArgument(f64),
    #[error("invalid K-S distance {0}, expected a value in [0, 1]")]
    InvalidDistance(f64),
    #[error("sample count must be at least 1")]
    ZeroSampleCount,
    #[error("no candidate modulation formats given")]
    NoCandidates,
    #[error("negative significance level {0}")]
    NegativeSignificance(f64),
    #[error("degenerate cumulant normalization: |E|y|^2 - sigma^2| = {0:e}")]
    DegenerateCumulant(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("interferer channel is zero, MMSE normalization is singular")]
    SingularMmse,
    #[error("desired-user channel energy {0:e} too small for matched filtering")]
    DegenerateChannel(f64),
    #[error("format {0} is not present in the CDF table")]
    FormatNotInTable(ModulationFormat),
    #[error("SNR grid is not uniformly spaced by {step} dB")]
    NonUniformGrid { step: f64 },
    #[error("table: {0}")]
    Table(#[from] TableError),
    #[error("config: {0}")]
    Config(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Failures while loading a serialized CDF table.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("bad magic or unsupported version line {0:?}")]
    Version(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("row (format {format}, snr index {snr_index}) is not a valid nondecreasing CDF")]
    NonMonotone {
        format: ModulationFormat,
        snr_index: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
