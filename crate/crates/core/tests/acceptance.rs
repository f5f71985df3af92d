//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]` line
//! (visible with `--nocapture`) before asserting.

use std::collections::BTreeMap;

use ksamc::cdf::{anchored_snr_grid, build_cdf_table, TheoreticalCdf};
use ksamc::channel::{awgn_apply, complex_gaussian, snr_db_to_sigma_sq};
use ksamc::classify::{classify_ks_exact, classify_ks_table, sample_c42};
use ksamc::constellation::{Constellation, ModulationFormat};
use ksamc::experiments::{self, snr_at_ber, ExperimentConfig, ExperimentKind, Method, ResultRow};
use ksamc::ks::{ks_statistic, quadrature_split, SampleSet};
use ksamc::sdma::{mmse_design, mmse_output, MmseFilter};
use ksamc::seed::{SeedPath, SimRng, Stream};
use num_complex::Complex64;
use rand::Rng;

const SEED: u64 = 2011;

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

/// `method -> variable -> (value, std error)`
fn table(rows: &[ResultRow]) -> BTreeMap<String, Vec<(f64, f64, f64)>> {
    let mut t: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in rows {
        t.entry(r.method.clone()).or_default().push((r.variable, r.value, r.std_error()));
    }
    for v in t.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    t
}

fn at(t: &BTreeMap<String, Vec<(f64, f64, f64)>>, method: &str, x: f64) -> (f64, f64) {
    let p = t[method].iter().find(|p| p.0 == x).unwrap();
    (p.1, p.2)
}

fn qam_samples(format: ModulationFormat, n: usize, snr_db: f64, seed: SeedPath) -> Vec<Complex64> {
    let c = Constellation::new(format);
    let mut r = seed.rng(Stream::Symbols);
    let idx: Vec<usize> = (0..n).map(|_| r.random_range(0..c.order())).collect();
    let x = c.modulate(&idx).unwrap();
    awgn_apply(&x, snr_db_to_sigma_sq(snr_db), &mut seed.rng(Stream::Noise)).unwrap()
}

#[test]
fn cdf_matches_simulated_quadrature_samples() {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (fi, f) in ModulationFormat::ALL.into_iter().enumerate() {
        for snr in [5.0, 15.0, 25.0] {
            let y = qam_samples(f, 1_000_000, snr, SeedPath::new(SEED).child(fi as u64).child_f64(snr));
            let set = quadrature_split(&y).unwrap();
            let cdf = TheoreticalCdf::new(f, snr_db_to_sigma_sq(snr).sqrt()).unwrap();
            // sup over both sides of every jump, counted directly
            let v = set.values();
            let m = v.len() as f64;
            let mut d: f64 = 0.0;
            for (i, &z) in v.iter().enumerate() {
                let fz = cdf.eval(z);
                d = d.max((fz - i as f64 / m).abs()).max(((i + 1) as f64 / m - fz).abs());
            }
            worst = worst.max(d);
            detail.push(format!("{f}@{snr}dB={d:.5}"));
        }
    }
    let pass = worst < 0.002;
    report("cdf sup-distance < 0.002", pass, &detail.join(" "));
    assert!(pass, "worst sup-distance {worst}");
}

#[test]
fn cumulant_of_full_enumeration() {
    let expect = [
        (ModulationFormat::Qam4, -1.0, 1e-9),
        (ModulationFormat::Qam16, -0.68, 1e-9),
        (ModulationFormat::Qam64, -0.6190, 5e-5),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (f, want, tol) in expect {
        let c = sample_c42(Constellation::new(f).points(), 0.0).unwrap();
        pass &= (c - want).abs() <= tol;
        detail.push(format!("{f}={c:.9}"));
    }
    report("c42 enumeration", pass, &detail.join(" "));
    assert!(pass);
}

#[test]
fn pcc_versus_snr() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::PccVsSnr);
    cfg.seed = SEED;
    cfg.trials = 2000;
    cfg.n_samples = 100;
    cfg.methods = vec![Method::Ks, Method::Cumulant];
    let t = table(&experiments::run(&cfg).unwrap());

    let plateau: Vec<(f64, f64)> = t["cumulant"]
        .iter()
        .filter(|p| p.0 >= 15.0)
        .map(|p| (p.0, p.1))
        .collect();
    let plateau_ok = plateau.iter().all(|&(_, v)| (0.72..=0.88).contains(&v));

    let ks = &t["ks"];
    let mut monotone_ok = true;
    for i in 0..ks.len() {
        for j in i + 1..ks.len() {
            let se = (ks[i].2.powi(2) + ks[j].2.powi(2)).sqrt();
            if ks[j].1 < ks[i].1 - 2.0 * se {
                monotone_ok = false;
            }
        }
    }
    let gap = at(&t, "ks", 20.0).0 - at(&t, "cumulant", 20.0).0;
    let pass = plateau_ok && monotone_ok && gap >= 0.05;
    let cum: Vec<String> = plateau.iter().map(|(s, v)| format!("{s}:{v}")).collect();
    report(
        "pcc vs snr",
        pass,
        &format!(
            "cumulant(>=15dB)=[{}] ks monotone={monotone_ok} ks-cumulant@20dB={gap:.4}",
            cum.join(" ")
        ),
    );
    assert!(pass);
}

fn offset_sweep() -> BTreeMap<String, Vec<(f64, f64, f64)>> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::PccVsOffset);
    cfg.seed = SEED;
    cfg.trials = 2000;
    cfg.n_samples = 100;
    cfg.offset_snr_db = 15.0;
    cfg.offset_grid_db = (-6..=6).map(f64::from).collect();
    cfg.methods = vec![Method::Ks, Method::KsTable, Method::Cumulant];
    cfg.table_granularities_db = vec![5.0];
    table(&experiments::run(&cfg).unwrap())
}

#[test]
fn pcc_versus_snr_offset() {
    let t = offset_sweep();
    let (cum0, _) = at(&t, "cumulant", 0.0);
    let (ks0, se0) = at(&t, "ks", 0.0);
    let inner_ok = t["ks"]
        .iter()
        .filter(|p| p.0.abs() <= 3.0)
        .all(|p| p.1 > cum0);
    let mut degrade_ok = true;
    let mut detail = vec![format!("ks@0={ks0} cumulant@0={cum0}")];
    for off in [-6.0, 6.0] {
        let (v, se) = at(&t, "ks", off);
        let z = (ks0 - v) / (se0 * se0 + se * se).sqrt();
        degrade_ok &= z >= 3.0;
        detail.push(format!("ks@{off}={v} z={z:.1}"));
    }
    let pass = inner_ok && degrade_ok;
    detail.push(format!("ks>cumulant@0 on [-3,3]={inner_ok}"));
    report("pcc vs snr offset", pass, &detail.join(" "));
    assert!(pass);
}

#[test]
fn quantized_table_fidelity() {
    let grid = anchored_snr_grid(-5.0, 25.0, 1.0);
    let fine = build_cdf_table(&ModulationFormat::ALL, &grid, 1.0).unwrap();
    let trials = 2000u64;
    let point = SeedPath::new(SEED).child(0x7461626c65);
    let mut agree = 0u64;
    for t in 0..trials {
        let s = point.child(t);
        let truth = ModulationFormat::ALL[s.rng(Stream::Format).random_range(0..3)];
        let y = qam_samples(truth, 100, 15.0, s);
        let exact = classify_ks_exact(&y, snr_db_to_sigma_sq(15.0).sqrt(), &ModulationFormat::ALL).unwrap();
        let quant = classify_ks_table(&y, 15.0, &fine, &ModulationFormat::ALL).unwrap();
        agree += u64::from(exact.decided == quant.decided);
    }
    let rate = agree as f64 / trials as f64;

    let t = offset_sweep();
    let coarse = &t["ks-table-5db"];
    let beats: Vec<bool> = coarse
        .iter()
        .map(|p| p.1 > at(&t, "cumulant", p.0).0)
        .collect();
    let coarse_ok = beats.iter().all(|&b| b);
    let worst_margin = coarse
        .iter()
        .map(|p| p.1 - at(&t, "cumulant", p.0).0)
        .fold(f64::INFINITY, f64::min);
    let pass = rate >= 0.98 && coarse_ok;
    report(
        "quantized table",
        pass,
        &format!("1dB agreement={rate:.4} 5dB-table minus cumulant over offsets min={worst_margin:.4}"),
    );
    assert!(pass);
}

/// Sup-distance by direct counting at every sample (value and left limit)
/// and on a dense grid between them.
fn brute_force_ks(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let m = values.len() as f64;
    let le = |t: f64| values.iter().filter(|&&v| v <= t).count() as f64 / m;
    let lt = |t: f64| values.iter().filter(|&&v| v < t).count() as f64 / m;
    let mut d: f64 = 0.0;
    for &x in values {
        d = d.max((le(x) - cdf(x)).abs()).max((lt(x) - cdf(x)).abs());
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for k in 0..=2000 {
        let t = lo + (hi - lo) * k as f64 / 2000.0;
        d = d.max((le(t) - cdf(t)).abs());
    }
    d
}

#[test]
fn ks_statistic_matches_brute_force() {
    let logistic = |x: f64| 1.0 / (1.0 + (-x).exp());
    let mut r = SeedPath::new(SEED).child(6).rng(Stream::Symbols);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let m = r.random_range(1..=20);
        let values: Vec<f64> = (0..m)
            .map(|_| {
                let v: f64 = r.random_range(-4.0..4.0);
                // every fourth set is coarsely rounded to force ties
                if k % 4 == 0 {
                    (v * 2.0).round() / 2.0
                } else {
                    v
                }
            })
            .collect();
        let set = SampleSet::new(values.clone()).unwrap();
        let d = ks_statistic(&set, logistic).unwrap();
        worst = worst.max((d - brute_force_ks(&values, logistic)).abs());
    }
    let pass = worst <= 1e-12;
    report("ks statistic oracle", pass, &format!("max |diff| over 1000 sets={worst:.2e}"));
    assert!(pass);
}

type Draw = ([Complex64; 2], [Complex64; 2], f64, MmseFilter);

/// Measured `E|γ' - X'|²` over `n` transmissions divided by the predicted residual variance.
fn residual_ratio((h, g, sigma_sq, f): &Draw, n: usize, r: &mut SimRng) -> f64 {
    let desired = Constellation::new(ModulationFormat::Qam16);
    let interferer = Constellation::new(ModulationFormat::Qam64);
    let mut acc = 0.0;
    for _ in 0..n {
        let x = desired.points()[r.random_range(0..16)];
        let xp = interferer.points()[r.random_range(0..64)];
        let w = [complex_gaussian(r, *sigma_sq), complex_gaussian(r, *sigma_sq)];
        let y = [h[0] * x + g[0] * xp + w[0], h[1] * x + g[1] * xp + w[1]];
        acc += (mmse_output(f, &y) - xp).norm_sqr();
    }
    acc / n as f64 / f.residual_var
}

#[test]
fn mmse_filter_algebra() {
    let mut r = SeedPath::new(SEED).child(7).rng(Stream::Channels);
    let mut worst_gain: f64 = 0.0;
    let mut filters: Vec<Draw> = Vec::new();
    for _ in 0..10_000 {
        let h = [complex_gaussian(&mut r, 1.0), complex_gaussian(&mut r, 1.0)];
        let g = [complex_gaussian(&mut r, 1.0), complex_gaussian(&mut r, 1.0)];
        let sigma_sq = 10f64.powf(r.random_range(-3.0..0.5));
        let f = mmse_design(&h, &g, sigma_sq).unwrap();
        let gain = f.m[0].conj() * g[0] + f.m[1].conj() * g[1];
        worst_gain = worst_gain.max((gain - 1.0).norm());
        filters.push((h, g, sigma_sq, f));
    }

    // Monte Carlo residual variance: pooled over all draws, and per draw on a subset
    let mut r = SeedPath::new(SEED).child(7).rng(Stream::Noise);
    let pooled = filters.iter().map(|d| residual_ratio(d, 100, &mut r)).sum::<f64>() / filters.len() as f64;
    let worst_single = filters
        .iter()
        .step_by(500)
        .map(|d| (residual_ratio(d, 40_000, &mut r) - 1.0).abs())
        .fold(0.0, f64::max);

    let pass = worst_gain <= 1e-9 && (pooled - 1.0).abs() <= 0.03 && worst_single <= 0.03;
    report(
        "mmse algebra",
        pass,
        &format!(
            "max |m^H g - 1|={worst_gain:.2e} pooled var ratio={pooled:.4} worst single-draw ratio error={worst_single:.4}"
        ),
    );
    assert!(pass);
}

#[test]
fn sdma_receiver_ber() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (desired, gain_db) in [(ModulationFormat::Qam16, 2.0), (ModulationFormat::Qam64, 3.0)] {
        let mut cfg = ExperimentConfig::new(ExperimentKind::BerSweep);
        cfg.seed = SEED;
        cfg.snr_grid_db = (0..=13).map(|k| 10.0 + 2.0 * f64::from(k)).collect();
        cfg.sdma.subcarriers = 512;
        cfg.sdma.desired = desired;
        cfg.sdma.frames = 1000;
        let rows = experiments::run(&cfg).unwrap();
        let t = table(&rows);

        let mut violations = Vec::new();
        for &(snr, mmse, _) in &t["mmse-only"] {
            if mmse > 0.05 {
                continue;
            }
            let ideal = at(&t, "ideal", snr).0;
            let ks = at(&t, "ic-ks", snr).0;
            let cum = at(&t, "ic-cumulant", snr).0;
            if !(ideal <= ks && ks <= mmse && mmse <= cum) {
                violations.push(format!("{snr}dB(ideal={ideal:.5} ic-ks={ks:.5} mmse={mmse:.5} ic-cum={cum:.5})"));
            }
        }
        let gain = match (snr_at_ber(&rows, "mmse-only", 0.01), snr_at_ber(&rows, "ic-ks", 0.01)) {
            (Some(a), Some(b)) => a - b,
            _ => f64::NAN,
        };
        let gain_ok = (gain - gain_db).abs() <= 1.5;
        let order_ok = violations.is_empty();
        pass &= gain_ok && order_ok;
        detail.push(format!(
            "{desired}: gain@1e-2={gain:.2}dB (want {gain_db}+-1.5) ordering {}",
            if order_ok {
                "ok".to_string()
            } else {
                format!("violated at {}", violations.join(" "))
            }
        ));
    }
    report("sdma ber", pass, &detail.join("; "));
    assert!(pass);
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let mut out = Vec::new();
    experiments::write_csv(&experiments::run(cfg).unwrap(), &mut out).unwrap();
    out
}

#[test]
fn reruns_are_byte_identical() {
    let mut configs = Vec::new();
    for kind in [ExperimentKind::PccVsSnr, ExperimentKind::PccVsOffset, ExperimentKind::PccVsSamples] {
        let mut c = ExperimentConfig::new(kind);
        c.trials = 200;
        c.snr_grid_db = vec![0.0, 10.0, 20.0];
        c.offset_grid_db = vec![-3.0, 0.0, 3.0];
        c.sample_size_grid = vec![20, 100];
        configs.push(c);
    }
    let mut ber = ExperimentConfig::new(ExperimentKind::BerSweep);
    ber.snr_grid_db = vec![10.0, 20.0];
    ber.sdma.subcarriers = 128;
    ber.sdma.frames = 16;
    configs.push(ber);

    let mut pass = true;
    let mut detail = Vec::new();
    for c in &configs {
        let mut single = c.clone();
        single.workers = 1;
        let mut multi = c.clone();
        multi.workers = 4;
        let a = csv_bytes(&single);
        let same = a == csv_bytes(&single) && a == csv_bytes(&multi);
        pass &= same;
        detail.push(format!("{}={}", c.experiment.name(), if same { "identical" } else { "differs" }));
    }
    let mut tc = ExperimentConfig::new(ExperimentKind::BuildTable);
    tc.granularity_db = 5.0;
    let table_same = experiments::build_table_from_config(&tc).unwrap().to_bytes()
        == experiments::build_table_from_config(&tc).unwrap().to_bytes();
    pass &= table_same;
    detail.push(format!("build-table={}", if table_same { "identical" } else { "differs" }));
    report("determinism", pass, &detail.join(" "));
    assert!(pass);
}
