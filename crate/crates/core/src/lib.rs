//! Kolmogorov-Smirnov modulation classification for QAM signals.
//!
//! The crate contains:
//!
//! * [`constellation`]: 4/16/64-QAM with Gray labels and analytic cumulants.
//! * [`channel`]: AWGN and the two-antenna two-user per-subcarrier channel.
//! * [`ks`]: ECDF, K-S distance, significance level, Gaussian tail.
//! * [`cdf`]: reference CDFs of the quadrature statistic and quantized tables.
//! * [`classify`]: K-S (exact and table) and cumulant classifiers.
//! * [`sdma`]: MMSE, interference-cancelling and genie receivers.
//! * [`experiments`]: seeded Monte Carlo sweeps emitting CSV.

pub mod cdf;
pub mod channel;
pub mod classify;
pub mod constellation;
pub mod error;
pub mod experiments;
pub mod ks;
pub mod sdma;
pub mod seed;

pub use error::{Error, Result, TableError};
