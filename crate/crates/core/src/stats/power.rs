//! Envelopes, power series and power histograms.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{fmt_f64, EnvelopeSeries, StatsError};
use crate::synth::{SampleBlock, Samples};

/// Floor applied to zero-power samples, dBm.
pub const DBM_FLOOR: f64 = -300.0;
pub const BOLTZMANN: f64 = 1.380649e-23;
pub const T0_KELVIN: f64 = 290.0;
/// Reference bandwidth of the thermal noise level.
pub const KT0B_BANDWIDTH_HZ: f64 = 100.0;

/// Thermal noise power `k·T0·B` in dBm.
pub fn kt0b_dbm(bandwidth_hz: f64) -> f64 {
    10.0 * (BOLTZMANN * T0_KELVIN * bandwidth_hz / 1e-3).log10()
}

fn dbm(mag_sq: f64, r_ohms: f64) -> f64 {
    if mag_sq > 0.0 {
        (10.0 * (mag_sq / (2.0 * r_ohms) / 1e-3).log10()).max(DBM_FLOOR)
    } else {
        DBM_FLOOR
    }
}

/// Per-sample power `10·log10(|z|²/(2r)/1 mW)` of a baseband block, dBm.
pub fn power_envelope(block: &SampleBlock, r_ohms: f64) -> Result<EnvelopeSeries, StatsError> {
    let Samples::Complex(z) = &block.samples else {
        return Err(StatsError::Mode("power envelope needs a baseband (IQ) block".into()));
    };
    EnvelopeSeries::time(z.iter().map(|z| dbm(z.norm_sqr(), r_ohms)).collect(), block.sample_rate)
}

/// [`power_envelope`] in dB above kT0B for `bandwidth_hz`.
pub fn power_envelope_above_kt0b(
    block: &SampleBlock,
    r_ohms: f64,
    bandwidth_hz: f64,
) -> Result<EnvelopeSeries, StatsError> {
    Ok(power_envelope(block, r_ohms)?.shifted(kt0b_dbm(bandwidth_hz)))
}

/// Voltage envelope: `|z|` for baseband, analytic-signal magnitude for RF.
pub fn magnitude_envelope(block: &SampleBlock) -> Result<EnvelopeSeries, StatsError> {
    let values = match &block.samples {
        Samples::Complex(z) => z.iter().map(|z| z.norm()).collect(),
        Samples::Real(x) => analytic_magnitude(x),
    };
    EnvelopeSeries::time(values, block.sample_rate)
}

/// `|x + j·H{x}|` via the FFT: zero negative frequencies, double positive.
fn analytic_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n.div_ceil(2);
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            continue;
        } else if k < half {
            *z *= 2.0;
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.norm() / n as f64).collect()
}

/// Streaming analytic-signal envelope of a long real series.
///
/// The series is cut into segments of `core_len` values, each transformed
/// together with `guard` neighbours on both sides that are then discarded.
/// Segment positions depend only on the global sample index, so output does
/// not depend on how input is split across calls.
#[derive(Debug, Clone)]
pub struct RfEnvelope {
    core_len: usize,
    guard: usize,
    buf: Vec<f64>,
    /// Global index of `buf[0]`.
    buf_start: usize,
    emitted: usize,
}

impl RfEnvelope {
    pub const DEFAULT_CORE: usize = 1 << 20;
    pub const DEFAULT_GUARD: usize = 1 << 12;

    pub fn new(core_len: usize, guard: usize) -> Self {
        Self { core_len: core_len.max(1), guard, buf: Vec::new(), buf_start: 0, emitted: 0 }
    }

    fn segment(&mut self, end: usize) -> Vec<f64> {
        let from = self.emitted.saturating_sub(self.guard).max(self.buf_start);
        let to = (end + self.guard).min(self.buf_start + self.buf.len());
        let mag = analytic_magnitude(&self.buf[from - self.buf_start..to - self.buf_start]);
        let out = mag[self.emitted - from..end - from].to_vec();
        self.emitted = end;
        let keep_from = self.emitted.saturating_sub(self.guard).max(self.buf_start);
        self.buf.drain(..keep_from - self.buf_start);
        self.buf_start = keep_from;
        out
    }

    /// Feed samples; returns the envelope values that became final.
    pub fn push(&mut self, x: &[f64]) -> Vec<f64> {
        self.buf.extend_from_slice(x);
        let mut out = Vec::new();
        while self.buf_start + self.buf.len() >= self.emitted + self.core_len + self.guard {
            let end = self.emitted + self.core_len;
            out.extend(self.segment(end));
        }
        out
    }

    /// Envelope of everything not yet returned.
    pub fn finish(mut self) -> Vec<f64> {
        let mut out = Vec::new();
        let total = self.buf_start + self.buf.len();
        while self.emitted < total {
            let end = (self.emitted + self.core_len).min(total);
            out.extend(self.segment(end));
        }
        out
    }
}

/// Sample skewness `m3 / m2^(3/2)`; zero for constant input.
pub fn skewness(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Normalized histogram of powers with its skewness.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPdf {
    /// `(bin_low, bin_high, density)`; densities integrate to 1.
    pub bins: Vec<(f64, f64, f64)>,
    pub skewness: f64,
    pub count: usize,
}

impl PowerPdf {
    /// Bin holding the sample median (by cumulative mass).
    pub fn median_bin(&self) -> (f64, f64) {
        let mut mass = 0.0;
        for &(lo, hi, d) in &self.bins {
            mass += d * (hi - lo);
            if mass >= 0.5 - 1e-12 {
                return (lo, hi);
            }
        }
        let &(lo, hi, _) = self.bins.last().expect("at least one bin");
        (lo, hi)
    }

    /// CSV with header `bin_low,bin_high,density`.
    pub fn write_csv(&self, writer: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["bin_low", "bin_high", "density"])?;
        for (lo, hi, d) in &self.bins {
            out.write_record([fmt_f64(*lo), fmt_f64(*hi), fmt_f64(*d)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Histogram and central moments built up over a stream whose range and
/// mean are already known.
#[derive(Debug, Clone)]
pub struct PdfAccumulator {
    lo: f64,
    hi: f64,
    mean: f64,
    counts: Vec<u64>,
    m2: f64,
    m3: f64,
    n: usize,
}

impl PdfAccumulator {
    /// `bins` equal bins over `[lo, hi]`. Equal `lo` and `hi` give one
    /// unit-width bin centred on the value.
    pub fn new(lo: f64, hi: f64, mean: f64, bins: usize) -> Self {
        let bins = if hi > lo { bins.max(1) } else { 1 };
        Self { lo, hi, mean, counts: vec![0; bins], m2: 0.0, m3: 0.0, n: 0 }
    }

    pub fn push(&mut self, values: &[f64]) {
        let bins = self.counts.len();
        let width = (self.hi - self.lo) / bins as f64;
        for &v in values {
            let i = if bins == 1 { 0 } else { (((v - self.lo) / width) as usize).min(bins - 1) };
            self.counts[i] += 1;
            let d = v - self.mean;
            self.m2 += d * d;
            self.m3 += d * d * d;
            self.n += 1;
        }
    }

    pub fn finish(self) -> Result<PowerPdf, StatsError> {
        if self.n == 0 {
            return Err(StatsError::Empty);
        }
        let n = self.n as f64;
        let (m2, m3) = (self.m2 / n, self.m3 / n);
        let skewness = if m2 == 0.0 { 0.0 } else { m3 / m2.powf(1.5) };
        let bins = self.counts.len();
        let (lo, hi) = if self.hi > self.lo { (self.lo, self.hi) } else { (self.lo - 0.5, self.lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
        let out = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (edges[i], edges[i + 1], c as f64 / n / (edges[i + 1] - edges[i])))
            .collect();
        Ok(PowerPdf { bins: out, skewness, count: self.n })
    }
}

/// Histogram of `samples` over `bins` equal bins spanning their range.
/// Identical samples share one unit-width bin centred on their value.
pub fn power_pdf(samples: &[f64], bins: usize) -> Result<PowerPdf, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index });
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut acc = PdfAccumulator::new(lo, hi, mean, bins);
    acc.push(samples);
    acc.finish()
}
