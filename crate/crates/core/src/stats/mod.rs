//! Statistics of envelope series: APD, level crossings and average cross
//! duration, plus power conversion and histograms.
//!
//! - APD at threshold τ: fraction of samples strictly above τ.
//! - LCD at τ: number of upward crossings, sample pairs with
//!   `values[k−1] ≤ τ < values[k]`. A value equal to τ counts as below.
//! - ACD at τ: mean interval between consecutive upward crossings, in
//!   seconds (or Hz for spectra); absent with fewer than two crossings.
//!
//! The same operations serve time series and magnitude spectra; only the
//! [`Domain`] tag and the meaning of `sample_rate` differ.
//!
//! For plotting on a Rayleigh probability graph the exceedance axis is
//! usually warped by [`rayleigh_axis`], `x = 10·log10(−ln p)`, which turns
//! a Rayleigh-distributed envelope into a straight line.

mod crossings;
mod power;
mod reference;
mod spectrum;

pub use crossings::{
    acd, apd, crossing_stats, lcd, linear_thresholds, log_thresholds, percentile, CrossingAccumulator,
    LevelSummary,
};
pub use power::{
    kt0b_dbm, magnitude_envelope, power_envelope, power_envelope_above_kt0b, power_pdf, skewness, PdfAccumulator, PowerPdf,
    RfEnvelope,
    BOLTZMANN, DBM_FLOOR, KT0B_BANDWIDTH_HZ, T0_KELVIN,
};
pub use reference::{
    impulsive_reference, sinusoid_reference, IMPULSIVE_DURATION, IMPULSIVE_SAMPLE_RATE, REFERENCE_PEAK_V,
    SINUSOID_DURATION, SINUSOID_OFFSET_HZ, SINUSOID_SAMPLE_RATE,
};
pub use spectrum::{magnitude_spectrum, rayleigh_axis};

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("series is empty")]
    Empty,
    #[error("thresholds must be finite and strictly ascending: {0}")]
    Thresholds(String),
    #[error("series value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("sample rate {0} must be positive")]
    SampleRate(f64),
    #[error("{0}")]
    Mode(String),
}

/// Whether a series runs over time or over frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

/// Envelope magnitudes (volts) or powers (dB) on a uniform grid.
///
/// `sample_rate` is samples per second for time series and samples per Hz
/// for spectra, so crossing durations come out in seconds or Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    values: Vec<f64>,
    sample_rate: f64,
    domain: Domain,
}

impl EnvelopeSeries {
    pub fn new(values: Vec<f64>, sample_rate: f64, domain: Domain) -> Result<Self, StatsError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(StatsError::SampleRate(sample_rate));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        Ok(Self { values, sample_rate, domain })
    }

    pub fn time(values: Vec<f64>, sample_rate: f64) -> Result<Self, StatsError> {
        Self::new(values, sample_rate, Domain::Time)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Series with `offset` subtracted from every value.
    pub fn shifted(&self, offset: f64) -> Self {
        Self { values: self.values.iter().map(|v| v - offset).collect(), ..self.clone() }
    }
}

/// Per-threshold APD, LCD and ACD.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingStats {
    pub thresholds: Vec<f64>,
    pub apd: Vec<f64>,
    pub lcd: Vec<u64>,
    pub acd: Vec<Option<f64>>,
}

impl CrossingStats {
    /// CSV with header `threshold,apd,lcd,acd`; absent ACD is an empty field.
    pub fn write_csv(&self, writer: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["threshold", "apd", "lcd", "acd"])?;
        for i in 0..self.thresholds.len() {
            let acd = self.acd[i].map(fmt_f64).unwrap_or_default();
            out.write_record([
                fmt_f64(self.thresholds[i]),
                fmt_f64(self.apd[i]),
                self.lcd[i].to_string(),
                acd,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip text for CSV output; scientific notation for very
/// small or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn check_thresholds(thresholds: &[f64]) -> Result<(), StatsError> {
    if let Some(i) = thresholds.iter().position(|t| !t.is_finite()) {
        return Err(StatsError::Thresholds(format!("threshold {i} is {}", thresholds[i])));
    }
    if let Some(i) = thresholds.windows(2).position(|w| w[0] >= w[1]) {
        return Err(StatsError::Thresholds(format!(
            "threshold {} ({}) is not above threshold {} ({})",
            i + 1,
            thresholds[i + 1],
            i,
            thresholds[i]
        )));
    }
    Ok(())
}
