use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reads complex samples from `path`.
///
/// Files ending in `.csv` hold one `re,im` pair per line (an optional
/// non-numeric header line is skipped). Anything else is raw interleaved
/// little-endian `f64` real/imaginary pairs.
pub fn read_iq_file(path: &Path) -> Result<Vec<Complex64>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut out = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Config(format!(
                    "{}: line {} has {} fields, expected re,im",
                    path.display(),
                    i + 1,
                    rec.len()
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(re), Ok(im)) => out.push(Complex64::new(re, im)),
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}: line {} is not numeric",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Ok(out)
    } else {
        let bytes = std::fs::read(path)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Config(format!(
                "{}: {} bytes is not a whole number of f64 pairs",
                path.display(),
                bytes.len()
            )));
        }
        Ok(bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect())
    }
}
