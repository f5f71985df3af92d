//! Channel simulation.
//!
//! The scalar AWGN channel `y = x + w` and the two-antenna, two-user
//! per-subcarrier channel `Y = H X + G X' + W`. Noise is circularly symmetric
//! complex Gaussian with total variance `sigma_sq` (`sigma_sq / 2` per rail).
//! Per-subcarrier channel vectors are i.i.d. unit-variance Rayleigh.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A complex 2-vector (one entry per receive antenna).
pub type Vec2 = [Complex64; 2];

/// Noise level, kept in both linear and dB form.
///
/// SNR is `1 / sigma_sq` against unit-energy constellations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    sigma_sq: f64,
}

impl NoiseParams {
    pub fn from_sigma_sq(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq >= 0.0) {
            return Err(Error::NegativeNoiseVariance(sigma_sq));
        }
        Ok(Self { sigma_sq })
    }

    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            sigma_sq: snr_db_to_sigma_sq(snr_db),
        }
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    pub fn snr_linear(&self) -> f64 {
        1.0 / self.sigma_sq
    }

    pub fn snr_db(&self) -> f64 {
        sigma_sq_to_snr_db(self.sigma_sq)
    }
}

pub fn snr_db_to_sigma_sq(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn sigma_sq_to_snr_db(sigma_sq: f64) -> f64 {
    -10.0 * sigma_sq.log10()
}

/// One draw of circularly symmetric complex Gaussian noise with variance `sigma_sq`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma_sq: f64) -> Complex64 {
    let s = (sigma_sq / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Adds complex AWGN of variance `sigma_sq` to `symbols`.
pub fn awgn_apply<R: Rng + ?Sized>(
    symbols: &[Complex64],
    sigma_sq: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(sigma_sq >= 0.0) {
        return Err(Error::NegativeNoiseVariance(sigma_sq));
    }
    if sigma_sq == 0.0 {
        return Ok(symbols.to_vec());
    }
    Ok(symbols
        .iter()
        .map(|&x| x + complex_gaussian(rng, sigma_sq))
        .collect())
}

/// Per-subcarrier channels of the desired user (`h`) and the interferer (`g`).
#[derive(Debug, Clone, PartialEq)]
pub struct SdmaChannelSet {
    pub h: Vec<Vec2>,
    pub g: Vec<Vec2>,
}

impl SdmaChannelSet {
    pub fn new(h: Vec<Vec2>, g: Vec<Vec2>) -> Result<Self> {
        if h.len() != g.len() || h.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} desired and {} interferer channel vectors",
                h.len(),
                g.len()
            )));
        }
        if h.iter().chain(&g).flatten().any(|c| !c.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite channel entry".into()));
        }
        Ok(Self { h, g })
    }

    pub fn num_subcarriers(&self) -> usize {
        self.h.len()
    }
}

/// Draws i.i.d. unit-variance Rayleigh channels for `num_subcarriers` subcarriers.
///
/// `interferer_power` scales the average energy of every `g` entry.
pub fn draw_sdma_channels<R: Rng + ?Sized>(
    num_subcarriers: usize,
    interferer_power: f64,
    rng: &mut R,
) -> Result<SdmaChannelSet> {
    if num_subcarriers == 0 {
        return Err(Error::DimensionMismatch("zero subcarriers".into()));
    }
    let mut draw = |p: f64| -> Vec2 { [complex_gaussian(rng, p), complex_gaussian(rng, p)] };
    let mut h = Vec::with_capacity(num_subcarriers);
    let mut g = Vec::with_capacity(num_subcarriers);
    for _ in 0..num_subcarriers {
        h.push(draw(1.0));
        g.push(draw(interferer_power));
    }
    SdmaChannelSet::new(h, g)
}

/// Received vectors `Y[l][n] = h[l] x[l][n] + g[l] x'[l][n] + W[l][n]`.
///
/// `x` and `x_prime` are indexed `[subcarrier][time]`.
pub fn sdma_transmit<R: Rng + ?Sized>(
    x: &[Vec<Complex64>],
    x_prime: &[Vec<Complex64>],
    channels: &SdmaChannelSet,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Vec2>>> {
    if !(sigma_sq >= 0.0) {
        return Err(Error::NegativeNoiseVariance(sigma_sq));
    }
    let p = channels.num_subcarriers();
    if x.len() != p || x_prime.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{p} subcarriers but {} desired and {} interferer rows",
            x.len(),
            x_prime.len()
        )));
    }
    let mut out = Vec::with_capacity(p);
    for l in 0..p {
        if x[l].len() != x_prime[l].len() {
            return Err(Error::DimensionMismatch(format!(
                "subcarrier {l}: {} desired and {} interferer symbols",
                x[l].len(),
                x_prime[l].len()
            )));
        }
        let (h, g) = (channels.h[l], channels.g[l]);
        let row = x[l]
            .iter()
            .zip(&x_prime[l])
            .map(|(&xd, &xi)| {
                let mut y = [h[0] * xd + g[0] * xi, h[1] * xd + g[1] * xi];
                if sigma_sq > 0.0 {
                    for ya in &mut y {
                        *ya += complex_gaussian(rng, sigma_sq);
                    }
                }
                y
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}
