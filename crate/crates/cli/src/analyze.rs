//! Statistics of a sample file or a built-in reference signal.
//!
//! Two streaming passes over the envelope: the first fixes threshold grids
//! and the power range, the second accumulates crossings and the power
//! histogram. Memory use does not grow with the file.
//!
//! Outputs, written to the output directory:
//!
//! - `crossings_envelope.csv`: APD/LCD/ACD of the voltage envelope.
//! - `crossings_power.csv`: the same for per-sample power in dB above kT0B.
//! - `power_pdf.csv`: histogram of per-sample power in dB above kT0B.
//!
//! Samples with no signal at all (power at the dBm floor) count towards
//! APD and crossings but are left out of the power thresholds and the
//! histogram, which would otherwise be dominated by a spike at the floor.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hfsim_core::stats::{
    impulsive_reference, kt0b_dbm, sinusoid_reference, CrossingAccumulator, LevelSummary, PdfAccumulator, PowerPdf,
    RfEnvelope, DBM_FLOOR, IMPULSIVE_DURATION, IMPULSIVE_SAMPLE_RATE, REFERENCE_PEAK_V, SINUSOID_DURATION,
    SINUSOID_OFFSET_HZ, SINUSOID_SAMPLE_RATE,
};
use hfsim_core::{CrossingStats, OutputMode, SampleBlock, Samples};

use crate::error::CliError;
use crate::format::SampleReader;

pub const ENVELOPE_CSV: &str = "crossings_envelope.csv";
pub const POWER_CSV: &str = "crossings_power.csv";
pub const POWER_PDF_CSV: &str = "power_pdf.csv";
pub const DEFAULT_THRESHOLDS: usize = 200;
pub const DEFAULT_BINS: usize = 100;
const READ_BLOCK: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Sinusoid,
    Impulsive,
}

impl Reference {
    pub fn block(self) -> SampleBlock {
        match self {
            Reference::Sinusoid => {
                sinusoid_reference(REFERENCE_PEAK_V, SINUSOID_OFFSET_HZ, SINUSOID_SAMPLE_RATE, SINUSOID_DURATION)
            }
            Reference::Impulsive => impulsive_reference(REFERENCE_PEAK_V, IMPULSIVE_SAMPLE_RATE, IMPULSIVE_DURATION),
        }
    }
}

impl FromStr for Reference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sinusoid" => Ok(Reference::Sinusoid),
            "impulsive" => Ok(Reference::Impulsive),
            other => Err(format!("unknown reference `{other}` (expected sinusoid or impulsive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub load_ohms: f64,
    pub thresholds: usize,
    /// kT0B reference bandwidth, Hz.
    pub bandwidth_hz: f64,
    pub bins: usize,
}

impl AnalysisOptions {
    pub fn new(load_ohms: f64) -> Self {
        Self {
            load_ohms,
            thresholds: DEFAULT_THRESHOLDS,
            bandwidth_hz: hfsim_core::stats::KT0B_BANDWIDTH_HZ,
            bins: DEFAULT_BINS,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.load_ohms > 0.0 && self.load_ohms.is_finite()) {
            return Err(CliError::usage(format!("--r {} must be a positive resistance", self.load_ohms)));
        }
        if self.thresholds == 0 {
            return Err(CliError::usage("--thresholds must be at least 1"));
        }
        if self.bins == 0 {
            return Err(CliError::usage("--bins must be at least 1"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(CliError::usage(format!("--bandwidth {} must be positive", self.bandwidth_hz)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub samples: u64,
    pub sample_rate: f64,
    pub envelope: CrossingStats,
    pub power: CrossingStats,
    /// Absent when no sample carries any signal.
    pub power_pdf: Option<PowerPdf>,
    pub files: Vec<PathBuf>,
}

/// Source of sample blocks that can be replayed from the start.
trait BlockSource {
    fn blocks(&self) -> Result<Box<dyn Iterator<Item = Result<SampleBlock, CliError>> + '_>, CliError>;
}

struct FileSource(PathBuf);

impl BlockSource for FileSource {
    fn blocks(&self) -> Result<Box<dyn Iterator<Item = Result<SampleBlock, CliError>> + '_>, CliError> {
        let mut reader = SampleReader::open(&self.0)?;
        Ok(Box::new(std::iter::from_fn(move || reader.read_block(READ_BLOCK).transpose())))
    }
}

struct MemorySource(SampleBlock);

impl BlockSource for MemorySource {
    fn blocks(&self) -> Result<Box<dyn Iterator<Item = Result<SampleBlock, CliError>> + '_>, CliError> {
        Ok(Box::new(std::iter::once(Ok(self.0.clone()))))
    }
}

/// Feed the voltage envelope of every block to `f`, in order.
fn for_each_envelope(
    source: &dyn BlockSource,
    mut f: impl FnMut(&[f64]) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut rf: Option<RfEnvelope> = None;
    for block in source.blocks()? {
        let block = block?;
        match &block.samples {
            Samples::Complex(z) => {
                let env: Vec<f64> = z.iter().map(|v| v.norm()).collect();
                f(&env)?;
            }
            Samples::Real(x) => {
                let env = rf.get_or_insert_with(|| RfEnvelope::new(RfEnvelope::DEFAULT_CORE, RfEnvelope::DEFAULT_GUARD));
                f(&env.push(x))?;
            }
        }
    }
    if let Some(env) = rf {
        f(&env.finish())?;
    }
    Ok(())
}

fn check_finite(values: &[f64], offset: u64) -> Result<(), CliError> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(CliError::data(format!("sample {} is not finite", offset + i as u64)));
    }
    Ok(())
}

/// Power in dB above kT0B for envelope magnitudes; floor samples map to
/// `DBM_FLOOR − kT0B`.
fn power_db(env: &[f64], r: f64, kt0b: f64) -> Vec<f64> {
    env.iter()
        .map(|&a| {
            let p = if a > 0.0 { (10.0 * (a * a / (2.0 * r) / 1e-3).log10()).max(DBM_FLOOR) } else { DBM_FLOOR };
            p - kt0b
        })
        .collect()
}

fn analyze_source(
    source: &dyn BlockSource,
    total: u64,
    sample_rate: f64,
    fixed_thresholds: Option<Vec<f64>>,
    opts: &AnalysisOptions,
    out_dir: &Path,
) -> Result<Analysis, CliError> {
    opts.validate()?;
    if total == 0 {
        return Err(CliError::data("sample file holds no samples"));
    }
    let kt0b = kt0b_dbm(opts.bandwidth_hz);
    let floor = DBM_FLOOR - kt0b;

    // pass 1: threshold grids and power range
    let mut env_summary = LevelSummary::new(total);
    let mut pow_summary = LevelSummary::new(total);
    let (mut pmin, mut pmax, mut psum, mut pcount) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0u64);
    let mut seen = 0u64;
    for_each_envelope(source, |env| {
        check_finite(env, seen)?;
        seen += env.len() as u64;
        env_summary.push(env);
        let live: Vec<f64> = power_db(env, opts.load_ohms, kt0b).into_iter().filter(|&p| p > floor).collect();
        for &p in &live {
            pmin = pmin.min(p);
            pmax = pmax.max(p);
            psum += p;
        }
        pcount += live.len() as u64;
        pow_summary.push(&live);
        Ok(())
    })?;

    let env_thresholds = match fixed_thresholds {
        Some(t) => t,
        None => env_summary.log_thresholds(opts.thresholds)?,
    };
    let pow_thresholds = if pcount > 0 { pow_summary.linear_thresholds(opts.thresholds)? } else { vec![floor] };

    // pass 2: crossings and histogram
    let mut env_acc = CrossingAccumulator::new(env_thresholds, sample_rate)?;
    let mut pow_acc = CrossingAccumulator::new(pow_thresholds, sample_rate)?;
    let mut pdf = (pcount > 0).then(|| PdfAccumulator::new(pmin, pmax, psum / pcount as f64, opts.bins));
    for_each_envelope(source, |env| {
        env_acc.push(env)?;
        let p = power_db(env, opts.load_ohms, kt0b);
        pow_acc.push(&p)?;
        if let Some(pdf) = pdf.as_mut() {
            let live: Vec<f64> = p.into_iter().filter(|&v| v > floor).collect();
            pdf.push(&live);
        }
        Ok(())
    })?;
    let envelope = env_acc.finish()?;
    let power = pow_acc.finish()?;
    let power_pdf = pdf.map(|p| p.finish()).transpose()?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    let path = out_dir.join(ENVELOPE_CSV);
    envelope.write_csv(create(&path)?)?;
    files.push(path);
    let path = out_dir.join(POWER_CSV);
    power.write_csv(create(&path)?)?;
    files.push(path);
    if let Some(pdf) = &power_pdf {
        let path = out_dir.join(POWER_PDF_CSV);
        pdf.write_csv(create(&path)?)?;
        files.push(path);
    } else {
        log::warn!("no sample carries signal; skipping {POWER_PDF_CSV}");
    }
    Ok(Analysis { samples: total, sample_rate, envelope, power, power_pdf, files })
}

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))
}

/// Analyze a sample file written by `simulate`.
pub fn analyze_file(path: &Path, opts: &AnalysisOptions, out_dir: &Path) -> Result<Analysis, CliError> {
    let reader = SampleReader::open(path)?;
    let header = reader.header().clone();
    drop(reader);
    if header.mode == OutputMode::Rf {
        log::info!("rf file: using the analytic-signal envelope");
    }
    analyze_source(&FileSource(path.to_path_buf()), header.samples, header.sample_rate, None, opts, out_dir)
}

/// Log-spaced envelope thresholds for the reference signals: from a
/// thousandth of the peak to twice the peak.
pub fn reference_thresholds(n: usize) -> Vec<f64> {
    let (lo, hi) = (REFERENCE_PEAK_V / 1000.0, 2.0 * REFERENCE_PEAK_V);
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Generate a reference signal and analyze it.
pub fn analyze_reference(reference: Reference, opts: &AnalysisOptions, out_dir: &Path) -> Result<Analysis, CliError> {
    let block = reference.block();
    let (total, fs) = (block.len() as u64, block.sample_rate);
    analyze_source(&MemorySource(block), total, fs, Some(reference_thresholds(opts.thresholds)), opts, out_dir)
}
