//! BER of the OFDM-SDMA receivers versus SNR.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::output::{Metric, ResultRow};
use crate::error::Result;
use crate::sdma::{receive, SdmaFrame, SdmaFrameConfig};
use crate::seed::SeedPath;

const BER_DOMAIN: u64 = 0x626572;

/// BER per receiver mode and SNR. All modes decode the same frames.
pub fn run_ber_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let s = &config.sdma;
    let mut modes = s.modes.clone();
    modes.sort();
    modes.dedup();

    super::with_workers(config.workers, || {
        let mut rows = Vec::new();
        for &snr in &config.snr_grid_db {
            let frame_cfg = SdmaFrameConfig {
                num_subcarriers: s.subcarriers,
                symbols_per_frame: s.symbols_per_frame,
                desired: s.desired,
                interferer: s.interferer,
                candidates: config.candidates.clone(),
                snr_db: snr,
                group_size: s.group_size.unwrap_or(s.subcarriers),
                interferer_power: s.interferer_power,
            };
            let point = SeedPath::new(config.seed).child(BER_DOMAIN).child_f64(snr);
            let zero = || vec![(0u64, 0u64); modes.len()];
            let counts = (0..s.frames as u64)
                .into_par_iter()
                .map(|f| -> Result<Vec<(u64, u64)>> {
                    let frame = SdmaFrame::generate(&frame_cfg, point.child(f))?;
                    modes
                        .iter()
                        .map(|&m| {
                            let r = receive(&frame, &frame_cfg, m, None)?;
                            Ok((r.desired_bit_errors, r.desired_bits_total))
                        })
                        .collect()
                })
                .try_reduce(zero, |a, b| {
                    Ok(a.iter().zip(&b).map(|(x, y)| (x.0 + y.0, x.1 + y.1)).collect())
                })?;
            for (m, (errors, bits)) in modes.iter().zip(counts) {
                rows.push(ResultRow {
                    experiment: config.experiment.name().into(),
                    method: m.name().into(),
                    variable: snr,
                    value: errors as f64 / bits as f64,
                    metric: Metric::Ber,
                    trials: s.frames as u64,
                    seed: config.seed,
                });
            }
        }
        Ok(rows)
    })?
}

/// SNR at which `method`'s BER curve first falls through `target`,
/// interpolating `log10(BER)` linearly between sweep points.
pub fn snr_at_ber(rows: &[ResultRow], method: &str, target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == method && r.metric == Metric::Ber)
        .map(|r| (r.variable, r.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 < target {
            if b1 <= 0.0 {
                return Some(s0 + (s1 - s0) * (b0 - target) / (b0 - b1));
            }
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            return Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}
