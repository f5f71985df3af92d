//! `ksamc`: K-S modulation classification experiments.
//!
//! Exit codes: 0 on success, 1 on configuration or input errors, 2 on I/O
//! errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ksamc::cdf::QuantizedCdfTable;
use ksamc::channel::snr_db_to_sigma_sq;
use ksamc::classify::{classify_ks_exact_with, classify_ks_table, nearest_cumulant, sample_c42};
use ksamc::experiments::{self, ExperimentConfig, ExperimentKind, Method};
use ksamc::Error;

#[derive(Debug, Parser)]
#[command(name = "ksamc", version, about = "K-S modulation classification simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pcc versus SNR for each classifier
    PccVsSnr(Common),
    /// Pcc versus mismatch between true and assumed SNR
    PccVsOffset(Common),
    /// Pcc versus number of received samples
    PccVsSamples(Common),
    /// BER of the OFDM-SDMA receivers versus SNR
    BerSweep(Common),
    /// Write a quantized CDF table file
    BuildTable(Common),
    /// Classify an IQ sample file
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (CSV, or the table for build-table); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials per sweep point
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Any other config key, e.g. `--set snr_grid_db=0:5:25` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    /// IQ file: `.csv` of `re,im` rows or raw interleaved little-endian f64
    #[arg(long)]
    input: Option<PathBuf>,
    /// ks | ks-table | cumulant
    #[arg(long)]
    method: Option<String>,
    /// SNR (dB) assumed for the reference CDFs and the cumulant normalization
    #[arg(long)]
    snr_db: Option<f64>,
    /// Quantized CDF table for ks-table
    #[arg(long)]
    table: Option<PathBuf>,
    /// Candidate formats, e.g. QAM4,QAM16,QAM64
    #[arg(long)]
    candidates: Option<String>,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Csv(ref c) if c.is_io_error() => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load_config(kind: ExperimentKind, common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(kind, &text)?
        }
        None => ExperimentConfig::new(kind),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_sweep(kind: ExperimentKind, common: &Common) -> Result<(), Failure> {
    let cfg = load_config(kind, common)?;
    let rows = experiments::run(&cfg)?;
    let mut out = open_out(common.out.as_deref())?;
    experiments::write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn build_table(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(ExperimentKind::BuildTable, common)?;
    let table = experiments::build_table_from_config(&cfg)?;
    let mut out = open_out(common.out.as_deref())?;
    table.write_to(&mut out)?;
    out.flush()?;
    Ok(())
}

fn classify(args: &ClassifyArgs) -> Result<(), Failure> {
    let mut cfg = load_config(ExperimentKind::Classify, &args.common)?;
    if let Some(p) = &args.input {
        cfg.input = Some(p.clone());
    }
    if let Some(m) = &args.method {
        cfg.method = m.parse()?;
    }
    if let Some(s) = args.snr_db {
        cfg.snr_db = Some(s);
    }
    if let Some(t) = &args.table {
        cfg.table = Some(t.clone());
    }
    if let Some(c) = &args.candidates {
        cfg.set("candidates", c)?;
    }
    cfg.validate()?;

    let input = cfg.input.as_deref().expect("validated");
    let samples = experiments::read_iq_file(input)?;
    let snr_db = cfg.snr_db.expect("validated");
    let sigma_sq = snr_db_to_sigma_sq(snr_db);

    let mut out = open_out(args.common.out.as_deref())?;
    match cfg.method {
        Method::Cumulant => {
            let c = sample_c42(&samples, sigma_sq)?;
            let decided = nearest_cumulant(c, &cfg.candidates)?;
            writeln!(out, "decided,c42")?;
            writeln!(out, "{decided},{c}")?;
        }
        Method::Ks | Method::KsTable => {
            let result = if cfg.method == Method::Ks {
                classify_ks_exact_with(&samples, sigma_sq.sqrt(), &cfg.candidates, cfg.ks_sides)?
            } else {
                let path = cfg.table.as_deref().expect("validated");
                let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                let table = QuantizedCdfTable::read_from(BufReader::new(file))?;
                classify_ks_table(&samples, snr_db, &table, &cfg.candidates)?
            };
            writeln!(out, "format,d_hat,alpha_hat,q,decided")?;
            for (f, d) in &result.d_hat {
                writeln!(
                    out,
                    "{f},{d},{},{},{}",
                    result.alpha_hat[f],
                    result.soft[f],
                    u8::from(*f == result.decided)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::PccVsSnr(c) => run_sweep(ExperimentKind::PccVsSnr, c),
        Command::PccVsOffset(c) => run_sweep(ExperimentKind::PccVsOffset, c),
        Command::PccVsSamples(c) => run_sweep(ExperimentKind::PccVsSamples, c),
        Command::BerSweep(c) => run_sweep(ExperimentKind::BerSweep, c),
        Command::BuildTable(c) => build_table(c),
        Command::Classify(a) => classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("ksamc: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("ksamc: {m}");
            ExitCode::from(2)
        }
    }
}
