//! Digital down-conversion of real RF blocks to complex baseband.
//!
//! Each input sample is mixed by `2·exp(−j2π f_0 t)`, low-pass filtered and
//! kept every `decimation`-th sample. Filtering happens before the rate
//! change. The factor 2 restores the amplitude lost when the negative
//! frequency image is filtered out, so a tone of peak `I` at `f_0 + Δ`
//! leaves as `I·exp(j2πΔt)`.
//!
//! Output sample `m` is aligned with input time `m / fs_out`: the filter
//! delay of `(N−1)/2` input samples is a whole number `K` of output samples
//! and is taken out of the output indices. Input before the first block is
//! treated as silence.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fir::{design_lowpass, LowpassSpec};
use super::{frac_cycles, window_samples, BlockStream, OutputMode, SampleBlock, Samples, SynthError, Synthesizer};
use crate::scenario::InterferenceParams;

/// Passband edge as a fraction of the output Nyquist frequency.
pub const PASSBAND_FRACTION: f64 = 0.8;
pub const PASSBAND_RIPPLE_DB: f64 = 0.1;
pub const STOPBAND_ATTENUATION_DB: f64 = 60.0;

/// How an interferer leaks into the decimated output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliasKind {
    /// Offset from `f_0` lies beyond the passband edge.
    BeyondPassband,
    /// The mixed negative-frequency image falls short of the stopband.
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasWarning {
    pub index: u32,
    pub frequency_hz: f64,
    pub kind: AliasKind,
    /// Where the component lands in the output band, Hz.
    pub output_hz: f64,
}

/// Fold `f` into `[-fs/2, fs/2)`.
fn fold(f: f64, fs: f64) -> f64 {
    (f + fs / 2.0).rem_euclid(fs) - fs / 2.0
}

/// Streaming down-converter state.
#[derive(Debug, Clone)]
pub struct Ddc {
    fs_in: f64,
    f0: f64,
    decimation: usize,
    taps: Vec<f64>,
    /// Last `N − 1` mixed samples.
    history: Vec<Complex64>,
    next_index: Option<i64>,
}

impl Ddc {
    pub fn new(fs_in: f64, f0: f64, decimation: usize) -> Result<Self, SynthError> {
        if decimation == 0 {
            return Err(SynthError::Config("decimation must be at least 1".into()));
        }
        if !(fs_in > 0.0 && fs_in.is_finite()) {
            return Err(SynthError::Config(format!("input sample rate {fs_in} must be positive")));
        }
        let nyq_out = fs_in / decimation as f64 / 2.0;
        let spec = LowpassSpec {
            sample_rate: fs_in,
            passband_hz: PASSBAND_FRACTION * nyq_out,
            stopband_hz: nyq_out,
            ripple_db: PASSBAND_RIPPLE_DB,
            attenuation_db: STOPBAND_ATTENUATION_DB,
        };
        let taps = design_lowpass(&spec, decimation).map_err(SynthError::Config)?;
        Ok(Self { fs_in, f0, decimation, taps, history: Vec::new(), next_index: None })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn output_rate(&self) -> f64 {
        self.fs_in / self.decimation as f64
    }

    pub fn passband_hz(&self) -> f64 {
        PASSBAND_FRACTION * self.output_rate() / 2.0
    }

    /// Filter delay in output samples.
    pub fn delay(&self) -> i64 {
        ((self.taps.len() - 1) / (2 * self.decimation)) as i64
    }

    /// Interferers that will not come through cleanly.
    pub fn alias_warnings(&self, params: &[InterferenceParams]) -> Vec<AliasWarning> {
        let fs_out = self.output_rate();
        let stop = fs_out / 2.0;
        let mut out = Vec::new();
        for p in params {
            let delta = p.frequency_hz - self.f0;
            if delta.abs() > self.passband_hz() {
                out.push(AliasWarning {
                    index: p.index,
                    frequency_hz: p.frequency_hz,
                    kind: AliasKind::BeyondPassband,
                    output_hz: fold(delta, fs_out),
                });
            }
            let image = fold(-(p.frequency_hz + self.f0), self.fs_in);
            if image.abs() < stop {
                out.push(AliasWarning {
                    index: p.index,
                    frequency_hz: p.frequency_hz,
                    kind: AliasKind::Image,
                    output_hz: fold(image, fs_out),
                });
            }
        }
        out
    }

    /// Down-convert the next RF block. Blocks must be contiguous.
    pub fn process(&mut self, block: &SampleBlock) -> Result<SampleBlock, SynthError> {
        let Samples::Real(x) = &block.samples else {
            return Err(SynthError::Config("down-conversion needs an RF block".into()));
        };
        if block.mode != OutputMode::Rf || block.sample_rate != self.fs_in {
            return Err(SynthError::Config(format!(
                "block at {} Hz ({}) does not match the {} Hz RF input",
                block.sample_rate, block.mode, self.fs_in
            )));
        }
        if let Some(expected) = self.next_index {
            if block.start_index != expected {
                return Err(SynthError::Config(format!(
                    "block starts at sample {} but sample {expected} was expected",
                    block.start_index
                )));
            }
        }
        let n_taps = self.taps.len();
        if self.next_index.is_none() {
            self.history = vec![Complex64::new(0.0, 0.0); n_taps - 1];
        }
        let start = block.start_index;
        self.next_index = Some(start + x.len() as i64);

        let r = self.f0 / self.fs_in;
        let mut buf = std::mem::take(&mut self.history);
        let offset = buf.len();
        buf.extend(x.iter().enumerate().map(|(k, &v)| {
            let n = start + k as i64;
            let (s, c) = (-TAU * frac_cycles(n, r)).sin_cos();
            Complex64::new(2.0 * v * c, 2.0 * v * s)
        }));

        let d = self.decimation as i64;
        let first = start.div_euclid(d) + i64::from(start.rem_euclid(d) != 0);
        let end = start + x.len() as i64;
        let count = if end > first * d { ((end - 1).div_euclid(d) - first + 1) as usize } else { 0 };
        let taps = &self.taps;
        let out: Vec<Complex64> = (0..count)
            .into_par_iter()
            .map(|j| {
                let n = (first + j as i64) * d;
                let pos = offset + (n - start) as usize;
                let window = &buf[pos + 1 - n_taps..=pos];
                window.iter().rev().zip(taps).map(|(&z, &h)| z * h).sum()
            })
            .collect();

        self.history = buf.split_off(buf.len() - (n_taps - 1));
        Ok(SampleBlock {
            start_index: first - self.delay(),
            sample_rate: self.output_rate(),
            samples: Samples::Complex(out),
            mode: OutputMode::Baseband,
            center_frequency: self.f0,
        })
    }
}

/// Adapter down-converting a stream of RF blocks.
#[derive(Debug)]
pub struct DdcStream<I> {
    inner: I,
    ddc: Ddc,
}

impl<I> DdcStream<I>
where
    I: Iterator<Item = Result<SampleBlock, SynthError>>,
{
    pub fn new(inner: I, ddc: Ddc) -> Self {
        Self { inner, ddc }
    }

    pub fn ddc(&self) -> &Ddc {
        &self.ddc
    }
}

impl<I> Iterator for DdcStream<I>
where
    I: Iterator<Item = Result<SampleBlock, SynthError>>,
{
    type Item = Result<SampleBlock, SynthError>;

    fn next(&mut self) -> Option<Self::Item> {
        let block = self.inner.next()?;
        Some(block.and_then(|b| self.ddc.process(&b)))
    }
}

/// Baseband blocks on the grid `0..window_samples(duration, fs_rf / decimation)`,
/// produced by synthesizing RF and down-converting it.
///
/// RF is synthesized past the window end by the filter delay so the last
/// output samples see a full filter span; output before index 0 is dropped.
#[derive(Debug)]
pub struct DdcWindow<'a> {
    stream: DdcStream<BlockStream<'a>>,
    end: i64,
}

impl<'a> DdcWindow<'a> {
    pub fn new(
        synth: &'a Synthesizer,
        f0: f64,
        fs_rf: f64,
        decimation: usize,
        duration: f64,
        block_size: usize,
    ) -> Result<Self, SynthError> {
        let ddc = Ddc::new(fs_rf, f0, decimation)?;
        let end = window_samples(duration, ddc.output_rate()) as i64;
        let rf_samples = (end + ddc.delay()) as u64 * decimation as u64;
        let stream = DdcStream::new(synth.stream(OutputMode::Rf, 0.0, fs_rf, rf_samples, block_size), ddc);
        Ok(Self { stream, end })
    }

    pub fn ddc(&self) -> &Ddc {
        self.stream.ddc()
    }

    /// Output samples the window will yield.
    pub fn len(&self) -> u64 {
        self.end as u64
    }

    pub fn is_empty(&self) -> bool {
        self.end == 0
    }
}

impl Iterator for DdcWindow<'_> {
    type Item = Result<SampleBlock, SynthError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let block = match self.stream.next()? {
                Ok(b) => b,
                Err(e) => return Some(Err(e)),
            };
            let Samples::Complex(z) = block.samples else { unreachable!("ddc emits complex blocks") };
            let s = block.start_index;
            let lo = (-s).clamp(0, z.len() as i64) as usize;
            let hi = (self.end - s).clamp(lo as i64, z.len() as i64) as usize;
            if lo == hi {
                if s + z.len() as i64 >= self.end {
                    return None;
                }
                continue;
            }
            return Some(Ok(SampleBlock {
                start_index: s + lo as i64,
                samples: Samples::Complex(z[lo..hi].to_vec()),
                ..block
            }));
        }
    }
}

/// Collect [`DdcWindow`] for a fresh population.
pub fn rf_then_ddc(
    params: &[InterferenceParams],
    f0: f64,
    fs_rf: f64,
    decimation: usize,
    duration: f64,
    block_size: usize,
) -> Result<Vec<SampleBlock>, SynthError> {
    let synth = Synthesizer::new(params);
    DdcWindow::new(&synth, f0, fs_rf, decimation, duration, block_size)?.collect()
}
