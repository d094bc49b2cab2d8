//! Waveform synthesis of the summed interference.
//!
//! Real RF output is `v(t) = Σ I_l·m_l(t)·cos(2π f_l t + φ_l)`; complex
//! baseband output around a centre `f_0` replaces the carrier with
//! `exp(j(2π(f_l − f_0)t + φ_l))`. Time is referenced to the window start,
//! so `φ_l` is every carrier's phase at `t = 0`.
//!
//! Samples are addressed by their integer index on the sample-rate grid,
//! `t = n / fs`. Every sample is computed from its index alone, which makes
//! blocks of any size concatenate bit-exactly and keeps output independent
//! of how work is split across threads.

mod ddc;
mod fir;

pub use ddc::{rf_then_ddc, AliasKind, AliasWarning, Ddc, DdcStream, DdcWindow};
pub use fir::{design_lowpass, frequency_response, meets_spec, LowpassSpec};

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocations::{AllocationError, AllocationTable};
use crate::morse::{paris_pattern, Keyer};
use crate::scenario::InterferenceParams;

/// Mid-band centre used for baseband output.
pub const DEFAULT_CENTER_FREQUENCY: f64 = 15.803e6;
pub const DEFAULT_RF_SAMPLE_RATE: f64 = 80.0e6;
pub const DEFAULT_DECIMATION: usize = 2;
/// Guard factor applied to the spanned bandwidth when picking a baseband rate.
pub const BASEBAND_GUARD: f64 = 1.25;

/// Samples per parallel work unit.
const CHUNK: usize = 8192;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(
        "interferer {index} at {frequency_hz} Hz needs a sample rate above {required_hz} Hz ({mode} output at {sample_rate} Hz)"
    )]
    Nyquist { index: u32, frequency_hz: f64, sample_rate: f64, required_hz: f64, mode: OutputMode },
    #[error("invalid synthesis setup: {0}")]
    Config(String),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    Rf,
    Baseband,
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputMode::Rf => "rf",
            OutputMode::Baseband => "baseband",
        })
    }
}

impl FromStr for OutputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rf" => Ok(OutputMode::Rf),
            "baseband" | "iq" => Ok(OutputMode::Baseband),
            other => Err(format!("unknown output mode `{other}` (expected rf or baseband)")),
        }
    }
}

/// Modulation applied to an allocation's interferers.
///
/// Only CW-Morse exists; further amplitude, frequency or phase modulators
/// would be added as variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[non_exhaustive]
pub enum ModulationKind {
    #[serde(rename = "cw-morse")]
    CwMorse,
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulationKind::CwMorse => f.write_str("cw-morse"),
        }
    }
}

impl FromStr for ModulationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cw-morse" => Ok(ModulationKind::CwMorse),
            other => Err(format!("unsupported modulation `{other}` (only cw-morse is available)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Contiguous run of samples starting at grid index `start_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub start_index: i64,
    pub sample_rate: f64,
    pub samples: Samples,
    pub mode: OutputMode,
    /// `f_0` for baseband blocks; zero for RF.
    pub center_frequency: f64,
}

impl SampleBlock {
    pub fn start_time(&self) -> f64 {
        self.start_index as f64 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn real(&self) -> Option<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn complex(&self) -> Option<&[Complex64]> {
        match &self.samples {
            Samples::Complex(v) => Some(v),
            Samples::Real(_) => None,
        }
    }
}

/// Fractional part of `n·r` cycles, accurate for very large `n`.
pub(crate) fn frac_cycles(n: i64, r: f64) -> f64 {
    const SPLIT: i64 = 1 << 20;
    let hi = n.div_euclid(SPLIT);
    let lo = n.rem_euclid(SPLIT);
    let r_hi = (r * SPLIT as f64).fract();
    let x = (r_hi * hi as f64).fract() + (r * lo as f64).fract();
    x - x.floor()
}

/// Fail on the first interferer the sample rate cannot represent: RF needs
/// `fs > 2·f_l`, baseband `fs > 2·|f_l − f_0|`.
pub fn check_nyquist<'a>(
    params: impl IntoIterator<Item = &'a InterferenceParams>,
    mode: OutputMode,
    f0: f64,
    fs: f64,
) -> Result<(), SynthError> {
    for p in params {
        let offset = match mode {
            OutputMode::Rf => p.frequency_hz,
            OutputMode::Baseband => (p.frequency_hz - f0).abs(),
        };
        if fs <= 2.0 * offset {
            return Err(SynthError::Nyquist {
                index: p.index,
                frequency_hz: p.frequency_hz,
                sample_rate: fs,
                required_hz: 2.0 * offset,
                mode,
            });
        }
    }
    Ok(())
}

/// Baseband rate covering the selected allocations around `f0` with guard.
pub fn default_baseband_rate(table: &AllocationTable, filter: &[u32], f0: f64) -> Result<f64, SynthError> {
    let mut span: f64 = 0.0;
    for &k in filter {
        let a = table.get(k)?;
        span = span.max((a.f_low_hz - f0).abs()).max((a.f_high_hz - f0).abs());
    }
    if span == 0.0 {
        return Err(SynthError::Config("allocation filter is empty".into()));
    }
    Ok(BASEBAND_GUARD * 2.0 * span)
}

/// Interferer population ready for synthesis.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    params: Vec<InterferenceParams>,
    keyer: Keyer,
}

impl Synthesizer {
    /// Interferers are summed in `index` order whatever the input order.
    pub fn new(params: &[InterferenceParams]) -> Self {
        let mut params = params.to_vec();
        params.sort_by_key(|p| p.index);
        Self { params, keyer: Keyer::new(&paris_pattern()) }
    }

    pub fn params(&self) -> &[InterferenceParams] {
        &self.params
    }

    /// Interferers keyed at some point in `[t_a, t_b]`.
    fn active(&self, t_a: f64, t_b: f64) -> Vec<&InterferenceParams> {
        self.params.iter().filter(|p| p.t_start <= t_b && p.t_end() >= t_a).collect()
    }

    /// `n` samples starting at grid index `start_index`.
    pub fn block(
        &self,
        mode: OutputMode,
        f0: f64,
        fs: f64,
        start_index: i64,
        n: usize,
    ) -> Result<SampleBlock, SynthError> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(SynthError::Config(format!("sample rate {fs} must be positive")));
        }
        let t_a = start_index as f64 / fs;
        let t_b = (start_index + n as i64) as f64 / fs;
        let active = if n == 0 { Vec::new() } else { self.active(t_a, t_b) };
        check_nyquist(active.iter().copied(), mode, f0, fs)?;
        let center_frequency = match mode {
            OutputMode::Rf => 0.0,
            OutputMode::Baseband => f0,
        };
        let samples = match mode {
            OutputMode::Rf => {
                let mut out = vec![0.0; n];
                out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                    let first = start_index + (c * CHUNK) as i64;
                    self.fill_rf(&active, fs, first, chunk);
                });
                Samples::Real(out)
            }
            OutputMode::Baseband => {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                    let first = start_index + (c * CHUNK) as i64;
                    self.fill_baseband(&active, f0, fs, first, chunk);
                });
                Samples::Complex(out)
            }
        };
        Ok(SampleBlock { start_index, sample_rate: fs, samples, mode, center_frequency })
    }

    fn chunk_active<'a>(
        &self,
        active: &[&'a InterferenceParams],
        fs: f64,
        first: i64,
        len: usize,
    ) -> Vec<&'a InterferenceParams> {
        let t_a = first as f64 / fs;
        let t_b = (first + len as i64) as f64 / fs;
        active.iter().copied().filter(|p| p.t_start <= t_b && p.t_end() >= t_a).collect()
    }

    fn fill_rf(&self, active: &[&InterferenceParams], fs: f64, first: i64, out: &mut [f64]) {
        let local = self.chunk_active(active, fs, first, out.len());
        for p in local {
            let r = p.frequency_hz / fs;
            for (k, slot) in out.iter_mut().enumerate() {
                let idx = first + k as i64;
                let env = self.keyer.value(idx as f64 / fs, p);
                if env == 0.0 {
                    continue;
                }
                let theta = TAU * frac_cycles(idx, r) + p.phase;
                *slot += p.amplitude_v * env * theta.cos();
            }
        }
    }

    fn fill_baseband(&self, active: &[&InterferenceParams], f0: f64, fs: f64, first: i64, out: &mut [Complex64]) {
        let local = self.chunk_active(active, fs, first, out.len());
        for p in local {
            let r = (p.frequency_hz - f0) / fs;
            for (k, slot) in out.iter_mut().enumerate() {
                let idx = first + k as i64;
                let env = self.keyer.value(idx as f64 / fs, p);
                if env == 0.0 {
                    continue;
                }
                let theta = TAU * frac_cycles(idx, r) + p.phase;
                let (s, c) = theta.sin_cos();
                let a = p.amplitude_v * env;
                *slot += Complex64::new(a * c, a * s);
            }
        }
    }

    /// Stream of blocks covering grid indices `0..total_samples`.
    pub fn stream(&self, mode: OutputMode, f0: f64, fs: f64, total_samples: u64, block_size: usize) -> BlockStream<'_> {
        BlockStream { synth: self, mode, f0, fs, next: 0, end: total_samples as i64, block_size: block_size.max(1) }
    }
}

/// Samples in a window of `duration` seconds at `fs`.
pub fn window_samples(duration: f64, fs: f64) -> u64 {
    (duration * fs).round().max(0.0) as u64
}

/// One block of summed interference; see [`Synthesizer::block`].
pub fn synthesize_block(
    params: &[InterferenceParams],
    mode: OutputMode,
    f0: f64,
    fs: f64,
    start_index: i64,
    n: usize,
) -> Result<SampleBlock, SynthError> {
    Synthesizer::new(params).block(mode, f0, fs, start_index, n)
}

/// Complex baseband for a `duration`-second window, in blocks of `block_size`.
pub fn synthesize_direct_baseband(
    params: &[InterferenceParams],
    f0: f64,
    fs: f64,
    duration: f64,
    block_size: usize,
) -> Result<Vec<SampleBlock>, SynthError> {
    let synth = Synthesizer::new(params);
    synth.stream(OutputMode::Baseband, f0, fs, window_samples(duration, fs), block_size).collect()
}

/// Lazily synthesized consecutive blocks.
#[derive(Debug)]
pub struct BlockStream<'a> {
    synth: &'a Synthesizer,
    mode: OutputMode,
    f0: f64,
    fs: f64,
    next: i64,
    end: i64,
    block_size: usize,
}

impl Iterator for BlockStream<'_> {
    type Item = Result<SampleBlock, SynthError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let n = (self.end - self.next).min(self.block_size as i64) as usize;
        let block = self.synth.block(self.mode, self.f0, self.fs, self.next, n);
        self.next += n as i64;
        Some(block)
    }
}
