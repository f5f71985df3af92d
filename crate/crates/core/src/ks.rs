//! One-sample Kolmogorov-Smirnov machinery.
//!
//! Decision statistics are the pooled real and imaginary parts of the
//! received samples. A [`SampleSet`] keeps them sorted so the empirical CDF is
//! a binary search and the K-S distance a single pass.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sorted, finite real-valued decision statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(v));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Fraction of samples `<= z`.
    pub fn ecdf(&self, z: f64) -> f64 {
        self.values.partition_point(|&v| v <= z) as f64 / self.count() as f64
    }
}

/// Splits complex samples into the `2N` reals `{Re y_n} ∪ {Im y_n}`.
pub fn quadrature_split(samples: &[Complex64]) -> Result<SampleSet> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    SampleSet::new(samples.iter().flat_map(|y| [y.re, y.im]).collect())
}

/// `(1/M) #{z_n <= z}`.
pub fn ecdf_eval(set: &SampleSet, z: f64) -> f64 {
    set.ecdf(z)
}

/// Which side of each ECDF jump enters the K-S distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpSides {
    /// `max(|i/M - F|, |(i-1)/M - F|)` at every sorted sample.
    #[default]
    Both,
    /// `|i/M - F|` only, the right-continuous value at each sample.
    UpperOnly,
}

/// Sup-distance between the ECDF of `set` and the CDF `cdf`.
pub fn ks_statistic<F>(set: &SampleSet, cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    ks_statistic_with(set, cdf, JumpSides::Both)
}

pub fn ks_statistic_with<F>(set: &SampleSet, mut cdf: F, sides: JumpSides) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let m = set.count() as f64;
    let mut d: f64 = 0.0;
    for (i, &z) in set.values.iter().enumerate() {
        let f = cdf(z);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::CdfOutOfRange { z, value: f });
        }
        let upper = (i + 1) as f64 / m;
        d = d.max((upper - f).abs());
        if sides == JumpSides::Both {
            d = d.max((f - i as f64 / m).abs());
        }
    }
    Ok(d)
}

/// Asymptotic K-S tail `Q(x) = 2 Σ_{m>=1} (-1)^{m-1} exp(-2 m² x²)`.
///
/// Returns 1 for `x <= 0.05`; otherwise terms are added until one falls
/// below 1e-12 (that term is dropped) or 100 terms, and the result is
/// clamped to `[0, 1]`. Large `x` therefore yields exactly 0.
pub fn ks_q(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::NegativeKsArgument(x));
    }
    if x <= 0.05 {
        return Ok(1.0);
    }
    let a = -2.0 * x * x;
    let mut sum = 0.0;
    let mut sign = 2.0;
    for m in 1..=100u32 {
        let mf = f64::from(m);
        let term = sign * (a * mf * mf).exp();
        if term.abs() < 1e-12 {
            break;
        }
        sum += term;
        sign = -sign;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Significance level `Q((sqrt(M) + 0.12 + 0.11/sqrt(M)) D)`.
pub fn ks_significance(count: usize, d_hat: f64) -> Result<f64> {
    if count == 0 {
        return Err(Error::ZeroSampleCount);
    }
    if !(0.0..=1.0).contains(&d_hat) {
        return Err(Error::InvalidDistance(d_hat));
    }
    let s = (count as f64).sqrt();
    ks_q((s + 0.12 + 0.11 / s) * d_hat)
}

/// Gaussian tail probability `P(Z > a)` for standard normal `Z`.
pub fn gaussian_q(a: f64) -> f64 {
    0.5 * libm::erfc(a / SQRT_2)
}
