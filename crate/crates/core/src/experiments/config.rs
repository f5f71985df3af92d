//! Experiment configuration.
//!
//! Config files are flat `key = value` text. `#` starts a comment. List
//! values are comma separated; numeric lists also accept `start:step:stop`
//! ranges, e.g. `snr_grid_db = -5:1:25`.

use std::path::PathBuf;
use std::str::FromStr;

use crate::constellation::{parse_format_list, ModulationFormat};
use crate::error::{Error, Result};
use crate::ks::JumpSides;
use crate::sdma::ReceiverMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    PccVsSnr,
    PccVsOffset,
    PccVsSamples,
    BerSweep,
    BuildTable,
    Classify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::PccVsSnr,
        Self::PccVsOffset,
        Self::PccVsSamples,
        Self::BerSweep,
        Self::BuildTable,
        Self::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PccVsSnr => "pcc-vs-snr",
            Self::PccVsOffset => "pcc-vs-offset",
            Self::PccVsSamples => "pcc-vs-samples",
            Self::BerSweep => "ber-sweep",
            Self::BuildTable => "build-table",
            Self::Classify => "classify",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Classifier families swept by the Pcc experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Ks,
    KsTable,
    Cumulant,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ks => "ks",
            Self::KsTable => "ks-table",
            Self::Cumulant => "cumulant",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ks" => Ok(Self::Ks),
            "ks-table" => Ok(Self::KsTable),
            "cumulant" => Ok(Self::Cumulant),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// Parameters of the OFDM-SDMA BER sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SdmaSweepConfig {
    pub subcarriers: usize,
    pub symbols_per_frame: usize,
    pub desired: ModulationFormat,
    /// `None` draws the interferer's format uniformly per frame.
    pub interferer: Option<ModulationFormat>,
    /// `None` means one group per OFDM symbol.
    pub group_size: Option<usize>,
    pub modes: Vec<ReceiverMode>,
    pub interferer_power: f64,
    /// Frames simulated per SNR point.
    pub frames: usize,
}

impl Default for SdmaSweepConfig {
    fn default() -> Self {
        Self {
            subcarriers: 512,
            symbols_per_frame: 1,
            desired: ModulationFormat::Qam16,
            interferer: None,
            group_size: None,
            modes: ReceiverMode::ALL.to_vec(),
            interferer_power: 1.0,
            frames: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    pub n_samples: usize,
    pub snr_grid_db: Vec<f64>,
    pub offset_grid_db: Vec<f64>,
    /// True SNR of the offset sweep.
    pub offset_snr_db: f64,
    /// SNR of the sample-size sweep.
    pub samples_snr_db: f64,
    pub sample_size_grid: Vec<usize>,
    pub methods: Vec<Method>,
    pub table_granularities_db: Vec<f64>,
    pub candidates: Vec<ModulationFormat>,
    /// Prebuilt table used by `ks-table` instead of building one per granularity.
    pub table: Option<PathBuf>,
    pub ks_sides: JumpSides,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub sdma: SdmaSweepConfig,
    /// SNR step of the table written by `build-table`.
    pub granularity_db: f64,
    /// IQ file read by `classify`.
    pub input: Option<PathBuf>,
    /// Method used by `classify`.
    pub method: Method,
    /// SNR assumed by `classify`.
    pub snr_db: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 2011,
            trials: 2000,
            n_samples: 100,
            snr_grid_db: (-5..=25).map(f64::from).collect(),
            offset_grid_db: (-6..=6).map(f64::from).collect(),
            offset_snr_db: 15.0,
            samples_snr_db: 14.0,
            sample_size_grid: vec![20, 50, 100, 200, 500, 1000],
            methods: vec![Method::Ks, Method::KsTable, Method::Cumulant],
            table_granularities_db: vec![1.0, 3.0, 5.0],
            candidates: ModulationFormat::ALL.to_vec(),
            table: None,
            ks_sides: JumpSides::Both,
            workers: 0,
            sdma: SdmaSweepConfig::default(),
            granularity_db: 1.0,
            input: None,
            method: Method::Ks,
            snr_db: None,
        }
    }

    /// Defaults overlaid with the `key = value` lines of `text`.
    pub fn parse(experiment: ExperimentKind, text: &str) -> Result<Self> {
        let mut c = Self::new(experiment);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, found {raw:?}", lineno + 1))
            })?;
            c.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(c)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                let k: ExperimentKind = value.parse()?;
                if k != self.experiment {
                    return Err(Error::Config(format!(
                        "config is for {}, running {}",
                        k.name(),
                        self.experiment.name()
                    )));
                }
            }
            "seed" => self.seed = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "n_samples" => self.n_samples = parse_num(key, value)?,
            "snr_grid_db" => self.snr_grid_db = parse_f64_list(key, value)?,
            "offset_grid_db" => self.offset_grid_db = parse_f64_list(key, value)?,
            "offset_snr_db" => self.offset_snr_db = parse_num(key, value)?,
            "samples_snr_db" => self.samples_snr_db = parse_num(key, value)?,
            "sample_size_grid" => {
                self.sample_size_grid = parse_f64_list(key, value)?
                    .into_iter()
                    .map(|v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(Error::Config(format!("{key}: {v} is not a positive integer")))
                        }
                    })
                    .collect::<Result<_>>()?
            }
            "methods" => self.methods = parse_list(value)?,
            "table_granularities_db" => self.table_granularities_db = parse_f64_list(key, value)?,
            "candidates" => self.candidates = parse_format_list(value)?,
            "table" => self.table = non_empty_path(value),
            "ks_sides" => {
                self.ks_sides = match value {
                    "both" => JumpSides::Both,
                    "upper" => JumpSides::UpperOnly,
                    _ => return Err(Error::Config(format!("ks_sides must be both|upper, got {value:?}"))),
                }
            }
            "workers" => self.workers = parse_num(key, value)?,
            "subcarriers" => self.sdma.subcarriers = parse_num(key, value)?,
            "symbols_per_frame" => self.sdma.symbols_per_frame = parse_num(key, value)?,
            "desired" => self.sdma.desired = value.parse()?,
            "interferer" => {
                self.sdma.interferer = match value {
                    "" | "uniform" => None,
                    v => Some(v.parse()?),
                }
            }
            "group_size" => {
                self.sdma.group_size = match value {
                    "" | "all" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "modes" => self.sdma.modes = parse_list(value)?,
            "interferer_power" => self.sdma.interferer_power = parse_num(key, value)?,
            "frames" => self.sdma.frames = parse_num(key, value)?,
            "granularity_db" => self.granularity_db = parse_num(key, value)?,
            "input" => self.input = non_empty_path(value),
            "method" => self.method = value.parse()?,
            "snr_db" => self.snr_db = Some(parse_num(key, value)?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Checks the settings the selected experiment depends on.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.candidates.is_empty() {
            return bad("candidates is empty".into());
        }
        let pcc = matches!(
            self.experiment,
            ExperimentKind::PccVsSnr | ExperimentKind::PccVsOffset | ExperimentKind::PccVsSamples
        );
        if pcc {
            if self.methods.is_empty() {
                return bad("methods is empty".into());
            }
            if self.methods.contains(&Method::KsTable)
                && self.table.is_none()
                && self.table_granularities_db.is_empty()
            {
                return bad("ks-table needs table_granularities_db or table".into());
            }
            if self.table_granularities_db.iter().any(|g| !(*g > 0.0)) {
                return bad("table granularities must be positive".into());
            }
        }
        let need_nonempty = |name: &str, empty: bool| {
            if empty {
                Err(Error::Config(format!("{name} is empty")))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            ExperimentKind::PccVsSnr | ExperimentKind::BerSweep => {
                need_nonempty("snr_grid_db", self.snr_grid_db.is_empty())?
            }
            ExperimentKind::PccVsOffset => need_nonempty("offset_grid_db", self.offset_grid_db.is_empty())?,
            ExperimentKind::PccVsSamples => {
                need_nonempty("sample_size_grid", self.sample_size_grid.is_empty())?
            }
            ExperimentKind::BuildTable => {
                need_nonempty("snr_grid_db", self.snr_grid_db.is_empty())?;
                if !(self.granularity_db > 0.0) {
                    return bad("granularity_db must be positive".into());
                }
            }
            ExperimentKind::Classify => {
                if self.input.is_none() {
                    return bad("classify needs an input file".into());
                }
                if self.snr_db.is_none() {
                    return bad("classify needs snr_db".into());
                }
                if self.method == Method::KsTable && self.table.is_none() {
                    return bad("ks-table classification needs a table file".into());
                }
            }
        }
        if pcc && self.n_samples == 0 && self.experiment != ExperimentKind::PccVsSamples {
            return bad("n_samples must be at least 1".into());
        }
        if self.experiment == ExperimentKind::BerSweep {
            let s = &self.sdma;
            if s.subcarriers == 0 || s.symbols_per_frame == 0 || s.frames == 0 {
                return bad("subcarriers, symbols_per_frame and frames must be at least 1".into());
            }
            if s.group_size == Some(0) {
                return bad("group_size must be at least 1".into());
            }
            if s.modes.is_empty() {
                return bad("modes is empty".into());
            }
            if !(s.interferer_power > 0.0) {
                return bad("interferer_power must be positive".into());
            }
        }
        if let Some(t) = &self.table {
            let used = match self.experiment {
                ExperimentKind::Classify => self.method == Method::KsTable,
                ExperimentKind::BuildTable => false,
                _ => pcc && self.methods.contains(&Method::KsTable),
            };
            if used && !t.exists() {
                return bad(format!("table file {} does not exist", t.display()));
            }
        }
        Ok(())
    }
}

fn non_empty_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr<Err = Error>>(v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// Comma separated numbers, each item optionally a `start:step:stop` range.
pub fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_num(key, x)?),
            [a, step, b] => {
                let (a, step, b): (f64, f64, f64) =
                    (parse_num(key, a)?, parse_num(key, step)?, parse_num(key, b)?);
                if !(step > 0.0) || b < a {
                    return Err(Error::Config(format!("{key}: bad range {item:?}")));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|k| a + k as f64 * step));
            }
            _ => return Err(Error::Config(format!("{key}: bad list item {item:?}"))),
        }
    }
    Ok(out)
}
