//! Square QAM constellations.
//!
//! The three candidate formats are 4-, 16- and 64-QAM with unit average
//! energy. Point `i` of an `L x L` constellation sits at
//! `c * (a + jb)` where `a` is the `i / L`-th and `b` the `i % L`-th level of
//! `{-(L-1), ..., -1, 1, ..., L-1}` (row-major over ascending levels) and
//! `c` is `1/sqrt(2)`, `1/sqrt(10)` or `1/sqrt(42)`.
//!
//! Bits are Gray coded per rail. The high half of a symbol's bit pattern
//! labels the real rail, the low half the imaginary rail, and each rail uses
//! the reflected binary code of its ascending level index:
//!
//! | level index | 4-QAM rail | 16-QAM rail | 64-QAM rail |
//! |-------------|------------|-------------|-------------|
//! | 0           | `0`        | `00`        | `000`       |
//! | 1           | `1`        | `01`        | `001`       |
//! | 2           |            | `11`        | `011`       |
//! | 3           |            | `10`        | `010`       |
//! | 4           |            |             | `110`       |
//! | 5           |            |             | `111`       |
//! | 6           |            |             | `101`       |
//! | 7           |            |             | `100`       |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Candidate modulation formats, ordered by constellation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModulationFormat {
    Qam4,
    Qam16,
    Qam64,
}

impl ModulationFormat {
    pub const ALL: [ModulationFormat; 3] = [Self::Qam4, Self::Qam16, Self::Qam64];

    pub fn order(self) -> usize {
        match self {
            Self::Qam4 => 4,
            Self::Qam16 => 16,
            Self::Qam64 => 64,
        }
    }

    pub fn bits_per_symbol(self) -> u32 {
        self.order().trailing_zeros()
    }

    /// Number of amplitude levels per rail (`sqrt(order)`).
    pub fn levels_per_rail(self) -> usize {
        1 << (self.bits_per_symbol() / 2)
    }

    /// Scale factor bringing the odd-integer grid to unit average energy.
    pub fn scale(self) -> f64 {
        let l = self.levels_per_rail() as f64;
        // E|a + jb|^2 over odd levels = 2 (L^2 - 1) / 3
        (1.5 / (l * l - 1.0)).sqrt()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Qam4 => "QAM4",
            Self::Qam16 => "QAM16",
            Self::Qam64 => "QAM64",
        }
    }
}

impl fmt::Display for ModulationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "").as_str() {
            "QAM4" | "4QAM" | "QPSK" => Ok(Self::Qam4),
            "QAM16" | "16QAM" => Ok(Self::Qam16),
            "QAM64" | "64QAM" => Ok(Self::Qam64),
            _ => Err(Error::Config(format!("unknown modulation format {s:?}"))),
        }
    }
}

/// Parses a comma separated list such as `QAM4,QAM16,QAM64`.
pub fn parse_format_list(s: &str) -> Result<Vec<ModulationFormat>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// A unit-energy square QAM constellation with its Gray bit labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    format: ModulationFormat,
    points: Vec<Complex64>,
    real_levels: Vec<f64>,
    /// `labels[i]` is the bit pattern of point `i`.
    labels: Vec<u32>,
    /// `index_of_label[b]` is the point carrying bit pattern `b`.
    index_of_label: Vec<usize>,
}

fn gray(i: usize) -> u32 {
    (i ^ (i >> 1)) as u32
}

impl Constellation {
    pub fn new(format: ModulationFormat) -> Self {
        let l = format.levels_per_rail();
        let c = format.scale();
        let half = format.bits_per_symbol() / 2;
        let real_levels: Vec<f64> = (0..l)
            .map(|k| c * (2.0 * k as f64 - (l as f64 - 1.0)))
            .collect();

        let mut points = Vec::with_capacity(l * l);
        let mut labels = Vec::with_capacity(l * l);
        for ia in 0..l {
            for ib in 0..l {
                points.push(Complex64::new(real_levels[ia], real_levels[ib]));
                labels.push((gray(ia) << half) | gray(ib));
            }
        }
        let mut index_of_label = vec![0; l * l];
        for (i, &b) in labels.iter().enumerate() {
            index_of_label[b as usize] = i;
        }

        Self {
            format,
            points,
            real_levels,
            labels,
            index_of_label,
        }
    }

    pub fn format(&self) -> ModulationFormat {
        self.format
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Distinct real-axis coordinates, ascending.
    pub fn real_levels(&self) -> &[f64] {
        &self.real_levels
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Bit pattern carried by point `index`.
    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Point index carrying bit pattern `bits`.
    pub fn index_of_label(&self, bits: u32) -> usize {
        self.index_of_label[bits as usize]
    }

    /// Maps point indices to symbols.
    pub fn modulate(&self, indices: &[usize]) -> Result<Vec<Complex64>> {
        indices
            .iter()
            .map(|&i| {
                self.points.get(i).copied().ok_or(Error::IndexOutOfRange {
                    index: i,
                    format: self.format,
                    order: self.order(),
                })
            })
            .collect()
    }

    /// Nearest point to `sample`; ties resolve to the lowest index.
    ///
    /// The square grid makes the per-rail slicer exact, but the full search is
    /// kept so the tie rule is the literal argmin over indices.
    pub fn demodulate(&self, sample: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (sample - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Number of differing bits between the labels of two points.
    pub fn bit_errors(&self, sent: usize, decided: usize) -> u32 {
        (self.labels[sent] ^ self.labels[decided]).count_ones()
    }
}

/// Returns the constellation of `format`.
pub fn constellation_points(format: ModulationFormat) -> Constellation {
    Constellation::new(format)
}

/// `E|x|^4 - |E x^2|^2 - 2 (E|x|^2)^2` over equiprobable constellation points.
pub fn theoretical_c42(format: ModulationFormat) -> f64 {
    let points = Constellation::new(format).points;
    let n = points.len() as f64;
    let m2 = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
    let m4 = points.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / n;
    let e_x2 = points.iter().map(|p| p * p).sum::<Complex64>() / n;
    m4 - e_x2.norm_sqr() - 2.0 * m2 * m2
}
