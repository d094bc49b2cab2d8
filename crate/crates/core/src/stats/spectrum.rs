//! Magnitude spectra as envelope series, and the Rayleigh-graph warp.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Domain, EnvelopeSeries, StatsError};
use crate::synth::{SampleBlock, Samples};

/// Peak-amplitude spectrum of a block.
///
/// Baseband blocks give the two-sided spectrum from `−fs/2` upwards,
/// `|X[k]|/N`; RF blocks give the one-sided spectrum from 0 Hz, `2|X[k]|/N`
/// away from DC. A bin-centred tone of peak amplitude `A` reads `A` either
/// way. The series advances in frequency with `N/fs` samples per Hz.
pub fn magnitude_spectrum(block: &SampleBlock) -> Result<EnvelopeSeries, StatsError> {
    let n = block.len();
    if n == 0 {
        return Err(StatsError::Empty);
    }
    let mut buf: Vec<Complex64> = match &block.samples {
        Samples::Complex(z) => z.clone(),
        Samples::Real(x) => x.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = match &block.samples {
        Samples::Complex(_) => {
            buf.rotate_right(n / 2);
            buf.iter().map(|z| z.norm() * scale).collect()
        }
        Samples::Real(_) => buf[..n / 2 + 1]
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
                z.norm() * scale * if edge { 1.0 } else { 2.0 }
            })
            .collect(),
    };
    EnvelopeSeries::new(values, n as f64 / block.sample_rate, Domain::Frequency)
}

/// Rayleigh-graph abscissa for exceedance probability `p`: `10·log10(−ln p)`.
pub fn rayleigh_axis(p: f64) -> f64 {
    10.0 * (-p.ln()).log10()
}
