//! Modulation classifiers.
//!
//! The K-S classifier compares the ECDF of the pooled quadrature samples with
//! each candidate's reference CDF and picks the candidate at minimum
//! distance. The reference CDF either comes from the exact mixture
//! ([`classify_ks_exact`]) or from a precomputed table
//! ([`classify_ks_table`]). The cumulant baseline picks the candidate whose
//! fourth-order cumulant is closest to the normalized sample cumulant.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::cdf::{QuantizedCdfTable, TheoreticalCdf};
use crate::constellation::{theoretical_c42, ModulationFormat};
use crate::error::{Error, Result};
use crate::ks::{ks_significance, ks_statistic_with, quadrature_split, JumpSides, SampleSet};

/// Outcome of a K-S classification over a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub decided: ModulationFormat,
    pub d_hat: BTreeMap<ModulationFormat, f64>,
    pub alpha_hat: BTreeMap<ModulationFormat, f64>,
    pub soft: BTreeMap<ModulationFormat, f64>,
}

/// Sorted, deduplicated candidates. Ties in every argmin below resolve to the
/// first (lowest-order) entry.
fn canonical(candidates: &[ModulationFormat]) -> Result<Vec<ModulationFormat>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut c = candidates.to_vec();
    c.sort();
    c.dedup();
    Ok(c)
}

fn argmin_by_value(values: &BTreeMap<ModulationFormat, f64>) -> ModulationFormat {
    let mut it = values.iter();
    let (mut best, mut best_v) = it.next().map(|(f, v)| (*f, *v)).expect("nonempty");
    for (&f, &v) in it {
        if v < best_v {
            best = f;
            best_v = v;
        }
    }
    best
}

fn classify_with<F>(set: &SampleSet, candidates: &[ModulationFormat], mut distance: F) -> Result<ClassificationResult>
where
    F: FnMut(&SampleSet, ModulationFormat) -> Result<f64>,
{
    let candidates = canonical(candidates)?;
    let mut d_hat = BTreeMap::new();
    let mut alpha_hat = BTreeMap::new();
    for &f in &candidates {
        let d = distance(set, f)?;
        d_hat.insert(f, d);
        alpha_hat.insert(f, ks_significance(set.count(), d)?);
    }
    let soft = soft_decision(&alpha_hat)?;
    Ok(ClassificationResult {
        decided: argmin_by_value(&d_hat),
        d_hat,
        alpha_hat,
        soft,
    })
}

/// K-S classification against the exact reference CDFs at complex noise
/// standard deviation `sigma`.
pub fn classify_ks_exact(
    samples: &[Complex64],
    sigma: f64,
    candidates: &[ModulationFormat],
) -> Result<ClassificationResult> {
    classify_ks_exact_with(samples, sigma, candidates, JumpSides::Both)
}

pub fn classify_ks_exact_with(
    samples: &[Complex64],
    sigma: f64,
    candidates: &[ModulationFormat],
    sides: JumpSides,
) -> Result<ClassificationResult> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    let set = quadrature_split(samples)?;
    classify_with(&set, candidates, |set, f| {
        let cdf = TheoreticalCdf::new(f, sigma)?;
        ks_statistic_with(set, |z| cdf.eval(z), sides)
    })
}

/// K-S classification with reference CDFs read from `table` at the stored
/// SNR nearest `snr_db_assumed`.
pub fn classify_ks_table(
    samples: &[Complex64],
    snr_db_assumed: f64,
    table: &QuantizedCdfTable,
    candidates: &[ModulationFormat],
) -> Result<ClassificationResult> {
    let set = quadrature_split(samples)?;
    classify_with(&set, candidates, |set, f| {
        let curve = table.curve(f, snr_db_assumed)?;
        ks_statistic_with(set, |z| curve.eval(z), JumpSides::Both)
    })
}

/// Normalizes significance levels into probabilities.
///
/// Falls back to uniform when every level is below 1e-300.
pub fn soft_decision(
    alpha_hat: &BTreeMap<ModulationFormat, f64>,
) -> Result<BTreeMap<ModulationFormat, f64>> {
    if let Some(&a) = alpha_hat.values().find(|a| !(**a >= 0.0)) {
        return Err(Error::NegativeSignificance(a));
    }
    if alpha_hat.is_empty() {
        return Err(Error::NoCandidates);
    }
    if alpha_hat.values().all(|&a| a < 1e-300) {
        let u = 1.0 / alpha_hat.len() as f64;
        return Ok(alpha_hat.keys().map(|&f| (f, u)).collect());
    }
    let total: f64 = alpha_hat.values().sum();
    Ok(alpha_hat.iter().map(|(&f, &a)| (f, a / total)).collect())
}

/// Normalized sample fourth-order cumulant
/// `(E|y|^4 - |E y^2|^2 - 2 (E|y|^2)^2) / (E|y|^2 - sigma^2)^2`.
pub fn sample_c42(samples: &[Complex64], sigma_sq: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut e_y2 = Complex64::new(0.0, 0.0);
    for y in samples {
        let p = y.norm_sqr();
        m2 += p;
        m4 += p * p;
        e_y2 += y * y;
    }
    m2 /= n;
    m4 /= n;
    e_y2 /= n;
    let denom = m2 - sigma_sq;
    if !(denom.abs() >= 1e-9) {
        return Err(Error::DegenerateCumulant(denom.abs()));
    }
    Ok((m4 - e_y2.norm_sqr() - 2.0 * m2 * m2) / (denom * denom))
}

/// Candidate whose theoretical cumulant is closest to `c_hat`.
pub fn nearest_cumulant(c_hat: f64, candidates: &[ModulationFormat]) -> Result<ModulationFormat> {
    let dist: BTreeMap<_, _> = canonical(candidates)?
        .into_iter()
        .map(|f| (f, (c_hat - theoretical_c42(f)).abs()))
        .collect();
    Ok(argmin_by_value(&dist))
}

pub fn classify_cumulant(
    samples: &[Complex64],
    sigma_sq: f64,
    candidates: &[ModulationFormat],
) -> Result<ModulationFormat> {
    nearest_cumulant(sample_c42(samples, sigma_sq)?, candidates)
}
