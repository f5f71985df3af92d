//! Two-antenna OFDM-SDMA receivers.
//!
//! Per subcarrier `l` the receiver sees `Y = h X + g X' + W` where `X` is the
//! desired user's symbol and `X'` the interferer's. Four receivers are
//! modelled:
//!
//! * `mmse-only`: an MMSE filter that passes the desired user undistorted and
//!   suppresses the interferer, then a slicer.
//! * `ic-ks` / `ic-cumulant`: extract the interferer with the MMSE filter
//!   `m = α (h hᴴ + σ² I)⁻¹ g`, classify its modulation per subcarrier group
//!   (K-S or cumulant), slice its symbols, subtract `g X̂'` and matched-filter
//!   with `hᴴ`.
//! * `ideal`: subtracts the true `g X'` before matched filtering.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::cdf::QuantizedCdfTable;
use crate::channel::{draw_sdma_channels, sdma_transmit, sigma_sq_to_snr_db, SdmaChannelSet, Vec2};
use crate::classify::{classify_cumulant, classify_ks_exact, classify_ks_table};
use crate::constellation::{Constellation, ModulationFormat};
use crate::error::{Error, Result};
use crate::seed::{SeedPath, Stream};

fn dot_h(a: &Vec2, b: &Vec2) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn norm_sqr(a: &Vec2) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr()
}

/// Normalized MMSE filter for one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseFilter {
    pub m: Vec2,
    pub alpha: Complex64,
    /// Variance of `mᴴ(h X + W)` for unit-energy `X`.
    pub residual_var: f64,
}

/// Filter that passes the signal arriving through `g` with unit gain while
/// minimizing the power leaking from `h` and the noise.
pub fn mmse_design(h: &Vec2, g: &Vec2, sigma_sq: f64) -> Result<MmseFilter> {
    if !(sigma_sq > 0.0) {
        return Err(Error::NonPositiveSigma(sigma_sq));
    }
    // (σ² I + h hᴴ)⁻¹ g = (g - h (hᴴ g) / (σ² + |h|²)) / σ²
    let c = dot_h(h, g) / (sigma_sq + norm_sqr(h));
    let r_inv_g = [(g[0] - h[0] * c) / sigma_sq, (g[1] - h[1] * c) / sigma_sq];
    let quad = dot_h(g, &r_inv_g);
    if !(quad.norm() > 0.0) || !quad.is_finite() {
        return Err(Error::SingularMmse);
    }
    let alpha = quad.inv();
    let m = [alpha * r_inv_g[0], alpha * r_inv_g[1]];
    let residual_var = dot_h(&m, h).norm_sqr() + sigma_sq * norm_sqr(&m);
    Ok(MmseFilter {
        m,
        alpha,
        residual_var,
    })
}

/// `mᴴ y`.
pub fn mmse_output(filter: &MmseFilter, y: &Vec2) -> Complex64 {
    dot_h(&filter.m, y)
}

/// How the interferer's modulation is decided.
#[derive(Debug, Clone, Copy)]
pub enum InterfererClassifier<'a> {
    KsExact,
    /// Table lookup at the SNR implied by the mean residual variance.
    KsTable(&'a QuantizedCdfTable),
    Cumulant,
}

/// Classifies one subcarrier group of MMSE outputs, treating them as the
/// interferer's symbols in AWGN of variance `residual_var`.
pub fn classify_interferer(
    gamma_primes: &[Complex64],
    residual_var: f64,
    classifier: InterfererClassifier<'_>,
    candidates: &[ModulationFormat],
) -> Result<ModulationFormat> {
    if gamma_primes.is_empty() {
        return Err(Error::EmptySamples);
    }
    match classifier {
        InterfererClassifier::KsExact => {
            Ok(classify_ks_exact(gamma_primes, residual_var.sqrt(), candidates)?.decided)
        }
        InterfererClassifier::KsTable(table) => Ok(classify_ks_table(
            gamma_primes,
            sigma_sq_to_snr_db(residual_var),
            table,
            candidates,
        )?
        .decided),
        InterfererClassifier::Cumulant => classify_cumulant(gamma_primes, residual_var, candidates),
    }
}

/// Interference cancellation followed by matched filtering:
/// `β = hᴴ(y - g x̂')`, sliced after scaling by `1/|h|²`.
pub fn cancel_and_demod(
    y: &Vec2,
    h: &Vec2,
    g: &Vec2,
    x_prime_hat: Complex64,
    desired: &Constellation,
) -> Result<(Complex64, usize)> {
    let e = norm_sqr(h);
    if e < 1e-12 {
        return Err(Error::DegenerateChannel(e));
    }
    let clean = [y[0] - g[0] * x_prime_hat, y[1] - g[1] * x_prime_hat];
    let beta = dot_h(h, &clean);
    Ok((beta, desired.demodulate(beta / e)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReceiverMode {
    MmseOnly,
    IcKs,
    IcCumulant,
    Ideal,
}

impl ReceiverMode {
    pub const ALL: [ReceiverMode; 4] = [Self::MmseOnly, Self::IcKs, Self::IcCumulant, Self::Ideal];

    pub fn name(self) -> &'static str {
        match self {
            Self::MmseOnly => "mmse-only",
            Self::IcKs => "ic-ks",
            Self::IcCumulant => "ic-cumulant",
            Self::Ideal => "ideal",
        }
    }
}

impl fmt::Display for ReceiverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown receiver mode {s:?}")))
    }
}

/// Parameters of one simulated OFDM frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SdmaFrameConfig {
    /// Subcarriers per OFDM symbol (`P`).
    pub num_subcarriers: usize,
    /// OFDM symbols per frame (`N`).
    pub symbols_per_frame: usize,
    pub desired: ModulationFormat,
    /// Fixed interferer format, or `None` to draw it uniformly from `candidates`.
    pub interferer: Option<ModulationFormat>,
    pub candidates: Vec<ModulationFormat>,
    pub snr_db: f64,
    /// Subcarriers per classification group (`p`).
    pub group_size: usize,
    /// Average energy of each interferer channel entry.
    pub interferer_power: f64,
}

impl Default for SdmaFrameConfig {
    fn default() -> Self {
        Self {
            num_subcarriers: 512,
            symbols_per_frame: 1,
            desired: ModulationFormat::Qam16,
            interferer: None,
            candidates: ModulationFormat::ALL.to_vec(),
            snr_db: 15.0,
            group_size: 512,
            interferer_power: 1.0,
        }
    }
}

impl SdmaFrameConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.num_subcarriers == 0 {
            return bad("num_subcarriers must be at least 1");
        }
        if self.symbols_per_frame == 0 {
            return bad("symbols_per_frame must be at least 1");
        }
        if self.group_size == 0 {
            return bad("group_size must be at least 1");
        }
        if self.candidates.is_empty() {
            return bad("no candidate formats");
        }
        if self.snr_db.is_nan() {
            return bad("snr_db must be a number");
        }
        if !(self.interferer_power > 0.0) {
            return bad("interferer_power must be positive");
        }
        Ok(())
    }

    pub fn sigma_sq(&self) -> f64 {
        crate::channel::snr_db_to_sigma_sq(self.snr_db)
    }
}

/// One realization of the two-user frame.
#[derive(Debug, Clone)]
pub struct SdmaFrame {
    pub channels: SdmaChannelSet,
    pub interferer_format: ModulationFormat,
    /// Desired symbol indices, `[subcarrier][time]`.
    pub desired_indices: Vec<Vec<usize>>,
    pub interferer_indices: Vec<Vec<usize>>,
    pub received: Vec<Vec<Vec2>>,
    pub sigma_sq: f64,
}

impl SdmaFrame {
    /// Draws channels, symbols and noise from independent streams under `seed`.
    pub fn generate(config: &SdmaFrameConfig, seed: SeedPath) -> Result<Self> {
        config.validate()?;
        let p = config.num_subcarriers;
        let n = config.symbols_per_frame;
        let channels = draw_sdma_channels(p, config.interferer_power, &mut seed.rng(Stream::Channels))?;
        let interferer_format = match config.interferer {
            Some(f) => f,
            None => {
                let mut r = seed.rng(Stream::InterfererFormat);
                config.candidates[r.random_range(0..config.candidates.len())]
            }
        };
        let desired = Constellation::new(config.desired);
        let interferer = Constellation::new(interferer_format);
        let draw = |stream: Stream, order: usize| -> Vec<Vec<usize>> {
            let mut r = seed.rng(stream);
            (0..p)
                .map(|_| (0..n).map(|_| r.random_range(0..order)).collect())
                .collect()
        };
        let desired_indices = draw(Stream::Symbols, desired.order());
        let interferer_indices = draw(Stream::InterfererSymbols, interferer.order());
        let to_symbols = |c: &Constellation, idx: &[Vec<usize>]| -> Result<Vec<Vec<Complex64>>> {
            idx.iter().map(|row| c.modulate(row)).collect()
        };
        let x = to_symbols(&desired, &desired_indices)?;
        let x_prime = to_symbols(&interferer, &interferer_indices)?;
        let sigma_sq = config.sigma_sq();
        let received = sdma_transmit(&x, &x_prime, &channels, sigma_sq, &mut seed.rng(Stream::Noise))?;
        Ok(Self {
            channels,
            interferer_format,
            desired_indices,
            interferer_indices,
            received,
            sigma_sq,
        })
    }
}

/// Error counts of one receiver on one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdmaReceiverReport {
    /// Decided interferer format per group; empty for receivers that do not classify.
    pub classified_format: Vec<ModulationFormat>,
    pub groups_correct: usize,
    pub interferer_symbol_errors: usize,
    pub desired_bit_errors: u64,
    pub desired_bits_total: u64,
}

impl SdmaReceiverReport {
    pub fn ber(&self) -> f64 {
        if self.desired_bits_total == 0 {
            return 0.0;
        }
        self.desired_bit_errors as f64 / self.desired_bits_total as f64
    }

    /// Accumulates another report's counters.
    pub fn merge(&mut self, other: &SdmaReceiverReport) {
        self.classified_format.extend_from_slice(&other.classified_format);
        self.groups_correct += other.groups_correct;
        self.interferer_symbol_errors += other.interferer_symbol_errors;
        self.desired_bit_errors += other.desired_bit_errors;
        self.desired_bits_total += other.desired_bits_total;
    }
}

/// Runs `mode` on a generated frame.
///
/// `table` switches `ic-ks` from exact reference CDFs to table lookup.
pub fn receive(
    frame: &SdmaFrame,
    config: &SdmaFrameConfig,
    mode: ReceiverMode,
    table: Option<&QuantizedCdfTable>,
) -> Result<SdmaReceiverReport> {
    let desired = Constellation::new(config.desired);
    let p = frame.channels.num_subcarriers();
    let bits = u64::from(config.desired.bits_per_symbol());
    let mut report = SdmaReceiverReport::default();

    let count = |l: usize, n: usize, decided: usize, report: &mut SdmaReceiverReport| {
        report.desired_bit_errors += u64::from(desired.bit_errors(frame.desired_indices[l][n], decided));
        report.desired_bits_total += bits;
    };

    match mode {
        ReceiverMode::Ideal => {
            let truth = Constellation::new(frame.interferer_format);
            for l in 0..p {
                let (h, g) = (&frame.channels.h[l], &frame.channels.g[l]);
                for (n, y) in frame.received[l].iter().enumerate() {
                    let x_prime = truth.points()[frame.interferer_indices[l][n]];
                    let (_, d) = cancel_and_demod(y, h, g, x_prime, &desired)?;
                    count(l, n, d, &mut report);
                }
            }
        }
        ReceiverMode::MmseOnly => {
            for l in 0..p {
                let (h, g) = (&frame.channels.h[l], &frame.channels.g[l]);
                let f = mmse_design(g, h, frame.sigma_sq)?;
                for (n, y) in frame.received[l].iter().enumerate() {
                    count(l, n, desired.demodulate(mmse_output(&f, y)), &mut report);
                }
            }
        }
        ReceiverMode::IcKs | ReceiverMode::IcCumulant => {
            let classifier = match (mode, table) {
                (ReceiverMode::IcCumulant, _) => InterfererClassifier::Cumulant,
                (_, Some(t)) => InterfererClassifier::KsTable(t),
                _ => InterfererClassifier::KsExact,
            };
            let filters = (0..p)
                .map(|l| mmse_design(&frame.channels.h[l], &frame.channels.g[l], frame.sigma_sq))
                .collect::<Result<Vec<_>>>()?;
            let gammas: Vec<Vec<Complex64>> = (0..p)
                .map(|l| frame.received[l].iter().map(|y| mmse_output(&filters[l], y)).collect())
                .collect();
            let truth = Constellation::new(frame.interferer_format);

            for start in (0..p).step_by(config.group_size) {
                let group = start..(start + config.group_size).min(p);
                let samples: Vec<Complex64> = group.clone().flat_map(|l| gammas[l].iter().copied()).collect();
                let residual = group.clone().map(|l| filters[l].residual_var).sum::<f64>()
                    / group.len() as f64;
                let format = classify_interferer(&samples, residual, classifier, &config.candidates)?;
                report.classified_format.push(format);
                report.groups_correct += usize::from(format == frame.interferer_format);
                let slicer = Constellation::new(format);

                for l in group {
                    let (h, g) = (&frame.channels.h[l], &frame.channels.g[l]);
                    for (n, y) in frame.received[l].iter().enumerate() {
                        let x_hat = slicer.points()[slicer.demodulate(gammas[l][n])];
                        let sent = truth.points()[frame.interferer_indices[l][n]];
                        report.interferer_symbol_errors += usize::from((x_hat - sent).norm() > 1e-12);
                        let (_, d) = cancel_and_demod(y, h, g, x_hat, &desired)?;
                        count(l, n, d, &mut report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Generates one frame under `seed` and runs `mode` on it.
pub fn run_sdma_frame(
    config: &SdmaFrameConfig,
    mode: ReceiverMode,
    seed: SeedPath,
) -> Result<SdmaReceiverReport> {
    let frame = SdmaFrame::generate(config, seed)?;
    receive(&frame, config, mode, None)
}
