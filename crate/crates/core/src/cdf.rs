//! Reference CDFs of the quadrature statistic.
//!
//! Under format `k` and complex noise variance `sigma^2`, each rail of the
//! received sample is an equal-weight Gaussian mixture centred on the real
//! levels of the constellation, each component with standard deviation
//! `sigma / sqrt(2)`:
//!
//! `F(z) = 1 - (1/L) Σ_x Q0(sqrt(2) (z - x) / sigma)`.
//!
//! [`QuantizedCdfTable`] stores these curves offline on an `(SNR, z)` grid so
//! that classification needs only lookups.
//!
//! # Table file format
//!
//! ```text
//! KSAMC-CDF v1
//! formats=QAM4,QAM16,QAM64
//! snr_db=<start>:<step>:<stop>
//! z=-4:0.01:4
//!
//! <little-endian f64 payload, row-major (format, snr, z)>
//! ```

use std::f64::consts::SQRT_2;
use std::io::{Read, Write};

use crate::constellation::{Constellation, ModulationFormat};
use crate::error::{Error, Result, TableError};
use crate::ks::gaussian_q;

pub const Z_MIN: f64 = -4.0;
pub const Z_MAX: f64 = 4.0;
pub const Z_STEP: f64 = 0.01;
/// Nodes on `[-4, 4]` at step 0.01.
pub const Z_POINTS: usize = 801;
const NODES_PER_UNIT: f64 = 100.0;

const MAGIC: &str = "KSAMC-CDF v1";
const Z_HEADER: &str = "z=-4:0.01:4";

/// `z` value of node `i`.
pub fn z_node(i: usize) -> f64 {
    (i as f64 - 400.0) / NODES_PER_UNIT
}

/// The exact reference CDF for one format at one noise level.
#[derive(Debug, Clone)]
pub struct TheoreticalCdf {
    format: ModulationFormat,
    sigma: f64,
    levels: Vec<f64>,
}

impl TheoreticalCdf {
    /// `sigma` is the complex noise standard deviation.
    pub fn new(format: ModulationFormat, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveSigma(sigma));
        }
        Ok(Self {
            format,
            sigma,
            levels: Constellation::new(format).real_levels().to_vec(),
        })
    }

    pub fn format(&self) -> ModulationFormat {
        self.format
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, z: f64) -> f64 {
        let k = SQRT_2 / self.sigma;
        let tail: f64 = self.levels.iter().map(|x| gaussian_q(k * (z - x))).sum();
        (1.0 - tail / self.levels.len() as f64).clamp(0.0, 1.0)
    }
}

pub fn theoretical_cdf_eval(format: ModulationFormat, sigma: f64, z: f64) -> Result<f64> {
    Ok(TheoreticalCdf::new(format, sigma)?.eval(z))
}

/// Precomputed CDF curves on a uniform SNR grid and the fixed `z` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCdfTable {
    formats: Vec<ModulationFormat>,
    snr_start_db: f64,
    snr_step_db: f64,
    snr_count: usize,
    /// `values[(f * snr_count + s) * Z_POINTS + i]`
    values: Vec<f64>,
}

impl QuantizedCdfTable {
    pub fn formats(&self) -> &[ModulationFormat] {
        &self.formats
    }

    pub fn granularity_db(&self) -> f64 {
        self.snr_step_db
    }

    pub fn snr_db(&self, s: usize) -> f64 {
        self.snr_start_db + s as f64 * self.snr_step_db
    }

    pub fn snr_grid_db(&self) -> Vec<f64> {
        (0..self.snr_count).map(|s| self.snr_db(s)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn format_index(&self, format: ModulationFormat) -> Result<usize> {
        self.formats
            .iter()
            .position(|&f| f == format)
            .ok_or(Error::FormatNotInTable(format))
    }

    /// Row stored for `format` at SNR index `s`.
    pub fn row(&self, format: ModulationFormat, s: usize) -> Result<&[f64]> {
        let f = self.format_index(format)?;
        let start = (f * self.snr_count + s) * Z_POINTS;
        Ok(&self.values[start..start + Z_POINTS])
    }

    /// Nearest stored SNR row, ties toward the lower row.
    pub fn nearest_snr_index(&self, snr_db: f64) -> usize {
        let pos = (snr_db - self.snr_start_db) / self.snr_step_db;
        let idx = (pos - 0.5).ceil();
        idx.clamp(0.0, (self.snr_count - 1) as f64) as usize
    }

    /// A lookup handle bound to one format and the SNR row nearest `snr_db`.
    pub fn curve(&self, format: ModulationFormat, snr_db: f64) -> Result<TableCurve<'_>> {
        Ok(TableCurve {
            row: self.row(format, self.nearest_snr_index(snr_db))?,
        })
    }

    pub fn lookup(&self, format: ModulationFormat, snr_db: f64, z: f64) -> Result<f64> {
        Ok(self.curve(format, snr_db)?.eval(z))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let names: Vec<&str> = self.formats.iter().map(|f| f.name()).collect();
        let stop = self.snr_db(self.snr_count - 1);
        write!(
            w,
            "{MAGIC}\nformats={}\nsnr_db={}:{}:{}\n{Z_HEADER}\n\n",
            names.join(","),
            self.snr_start_db,
            self.snr_step_db,
            stop
        )?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut lines: Vec<&str> = Vec::with_capacity(5);
        let mut offset = 0;
        while lines.len() < 5 {
            let rest = &bytes[offset..];
            let line = rest
                .iter()
                .position(|&b| b == b'\n')
                .and_then(|nl| std::str::from_utf8(&rest[..nl]).ok());
            match line {
                Some(l) if !lines.is_empty() || l == MAGIC => {
                    offset += l.len() + 1;
                    lines.push(l);
                }
                _ if lines.is_empty() => {
                    let head = String::from_utf8_lossy(&rest[..rest.len().min(16)]);
                    return Err(TableError::Version(head.into_owned()).into());
                }
                _ => return Err(TableError::Header("unterminated header".into()).into()),
            }
        }

        let formats_s = header_value(lines[1], "formats")?;
        let formats = crate::constellation::parse_format_list(formats_s)
            .map_err(|e| TableError::Header(e.to_string()))?;
        if formats.is_empty() {
            return Err(TableError::Header("no formats".into()).into());
        }
        let (start, step, stop) = parse_range(header_value(lines[2], "snr_db")?)?;
        if lines[3] != Z_HEADER {
            return Err(TableError::Header(format!("unsupported z grid {:?}", lines[3])).into());
        }
        if !lines[4].is_empty() {
            return Err(TableError::Header("missing blank separator line".into()).into());
        }
        if !(step > 0.0) || stop < start {
            return Err(TableError::Header(format!("bad SNR range {start}:{step}:{stop}")).into());
        }
        let count = ((stop - start) / step).round() as usize + 1;

        let payload = &bytes[offset..];
        let expected = formats.len() * count * Z_POINTS * 8;
        if payload.len() != expected {
            return Err(TableError::Truncated {
                expected,
                found: payload.len(),
            }
            .into());
        }
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let table = Self {
            formats,
            snr_start_db: start,
            snr_step_db: step,
            snr_count: count,
            values,
        };
        table.validate()?;
        Ok(table)
    }

    /// Every row must be a nondecreasing sequence in `[0, 1]`.
    fn validate(&self) -> std::result::Result<(), TableError> {
        for (f, &format) in self.formats.iter().enumerate() {
            for s in 0..self.snr_count {
                let start = (f * self.snr_count + s) * Z_POINTS;
                let row = &self.values[start..start + Z_POINTS];
                let ok = row.iter().all(|v| (0.0..=1.0).contains(v))
                    && row.windows(2).all(|w| w[0] <= w[1]);
                if !ok {
                    return Err(TableError::NonMonotone {
                        format,
                        snr_index: s,
                    });
                }
            }
        }
        Ok(())
    }
}

fn header_value<'a>(line: &'a str, key: &str) -> std::result::Result<&'a str, TableError> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| TableError::Header(format!("expected `{key}=...`, found {line:?}")))
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64, f64), TableError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || TableError::Header(format!("bad range {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

/// One stored curve, read by linear interpolation between `z` nodes.
#[derive(Debug, Clone, Copy)]
pub struct TableCurve<'a> {
    row: &'a [f64],
}

impl TableCurve<'_> {
    pub fn eval(&self, z: f64) -> f64 {
        if z < Z_MIN {
            return 0.0;
        }
        if z > Z_MAX {
            return 1.0;
        }
        let mut pos = (z - Z_MIN) * NODES_PER_UNIT;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            pos = nearest;
        }
        let i = (pos.floor() as usize).min(Z_POINTS - 1);
        let t = pos - i as f64;
        if t == 0.0 || i == Z_POINTS - 1 {
            return self.row[i];
        }
        self.row[i] + t * (self.row[i + 1] - self.row[i])
    }
}

/// Builds curves for `formats` at every SNR of `snr_grid_db`, which must be
/// uniformly spaced by `granularity_db`.
pub fn build_cdf_table(
    formats: &[ModulationFormat],
    snr_grid_db: &[f64],
    granularity_db: f64,
) -> Result<QuantizedCdfTable> {
    if formats.is_empty() {
        return Err(Error::NoCandidates);
    }
    if snr_grid_db.is_empty() {
        return Err(Error::Config("empty SNR grid".into()));
    }
    if !(granularity_db > 0.0) {
        return Err(Error::NonUniformGrid {
            step: granularity_db,
        });
    }
    let start = snr_grid_db[0];
    for (k, &s) in snr_grid_db.iter().enumerate() {
        if (s - (start + k as f64 * granularity_db)).abs() > 1e-9 {
            return Err(Error::NonUniformGrid {
                step: granularity_db,
            });
        }
    }
    let snr_count = snr_grid_db.len();
    let mut values = Vec::with_capacity(formats.len() * snr_count * Z_POINTS);
    for &f in formats {
        for s in 0..snr_count {
            let snr = start + s as f64 * granularity_db;
            let cdf = TheoreticalCdf::new(f, crate::channel::snr_db_to_sigma_sq(snr).sqrt())?;
            values.extend((0..Z_POINTS).map(|i| cdf.eval(z_node(i))));
        }
    }
    Ok(QuantizedCdfTable {
        formats: formats.to_vec(),
        snr_start_db: start,
        snr_step_db: granularity_db,
        snr_count,
        values,
    })
}

/// Uniform grid with step `granularity_db` anchored at multiples of the step,
/// covering `[lo_db, hi_db]`.
pub fn anchored_snr_grid(lo_db: f64, hi_db: f64, granularity_db: f64) -> Vec<f64> {
    let a = (lo_db / granularity_db).floor() as i64;
    let b = (hi_db / granularity_db).ceil() as i64;
    (a..=b).map(|k| k as f64 * granularity_db).collect()
}

pub fn table_lookup(
    table: &QuantizedCdfTable,
    format: ModulationFormat,
    snr_db: f64,
    z: f64,
) -> Result<f64> {
    table.lookup(format, snr_db, z)
}

pub fn serialize_table(table: &QuantizedCdfTable) -> Vec<u8> {
    table.to_bytes()
}

pub fn deserialize_table(bytes: &[u8]) -> Result<QuantizedCdfTable> {
    QuantizedCdfTable::from_bytes(bytes)
}
