//! Linear-phase low-pass FIR design by the Kaiser window method.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Design contract for a low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowpassSpec {
    pub sample_rate: f64,
    /// Upper edge of the passband, Hz.
    pub passband_hz: f64,
    /// Lower edge of the stopband, Hz.
    pub stopband_hz: f64,
    /// Peak-to-peak passband ripple bound, dB.
    pub ripple_db: f64,
    /// Minimum stopband attenuation, dB.
    pub attenuation_db: f64,
}

const GRID_POINTS: usize = 1024;
const MAX_TAPS: usize = 1 << 16;

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn kaiser_beta(a: f64) -> f64 {
    if a > 50.0 {
        0.1102 * (a - 8.7)
    } else if a >= 21.0 {
        0.5842 * (a - 21.0).powf(0.4) + 0.07886 * (a - 21.0)
    } else {
        0.0
    }
}

/// `|H(f)|` of taps `h` at frequency `f` for sample rate `fs`.
pub fn frequency_response(h: &[f64], f: f64, fs: f64) -> f64 {
    let w = -2.0 * PI * f / fs;
    h.iter()
        .enumerate()
        .map(|(n, &c)| Complex64::from_polar(c, w * n as f64))
        .sum::<Complex64>()
        .norm()
}

fn windowed_sinc(taps: usize, cutoff: f64, beta: f64) -> Vec<f64> {
    let m = (taps - 1) as f64 / 2.0;
    let i0_beta = bessel_i0(beta);
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let x = i as f64 - m;
            let sinc = if x == 0.0 { 2.0 * cutoff } else { (2.0 * PI * cutoff * x).sin() / (PI * x) };
            let r = if m == 0.0 { 0.0 } else { x / m };
            sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|c| *c /= dc);
    h
}

/// Whether `h` meets `spec` on a dense frequency grid.
pub fn meets_spec(h: &[f64], spec: &LowpassSpec) -> bool {
    let fs = spec.sample_rate;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=GRID_POINTS {
        let g = frequency_response(h, spec.passband_hz * i as f64 / GRID_POINTS as f64, fs);
        lo = lo.min(g);
        hi = hi.max(g);
    }
    if 20.0 * (hi / lo).log10() > spec.ripple_db {
        return false;
    }
    let limit = 10f64.powf(-spec.attenuation_db / 20.0);
    (0..=GRID_POINTS).all(|i| {
        let f = spec.stopband_hz + (fs / 2.0 - spec.stopband_hz) * i as f64 / GRID_POINTS as f64;
        frequency_response(h, f, fs) <= limit
    })
}

/// Odd-length taps meeting `spec`, with length `≡ 1 (mod 2·multiple)` so the
/// delay `(N−1)/2` is a whole number of samples after decimating by `multiple`.
pub fn design_lowpass(spec: &LowpassSpec, multiple: usize) -> Result<Vec<f64>, String> {
    let fs = spec.sample_rate;
    if !(0.0 < spec.passband_hz && spec.passband_hz < spec.stopband_hz && spec.stopband_hz <= fs / 2.0) {
        return Err(format!(
            "need 0 < passband {} < stopband {} <= fs/2 = {}",
            spec.passband_hz,
            spec.stopband_hz,
            fs / 2.0
        ));
    }
    let ripple_delta = 10f64.powf(spec.ripple_db / 20.0) - 1.0;
    let stop_delta = 10f64.powf(-spec.attenuation_db / 20.0);
    // aim a few dB beyond the contract so the estimate usually suffices
    let a = -20.0 * ripple_delta.min(stop_delta).log10() + 5.0;
    let beta = kaiser_beta(a);
    let width = 2.0 * PI * (spec.stopband_hz - spec.passband_hz) / fs;
    let estimate = ((a - 7.95) / (2.285 * width)).ceil() as usize + 1;
    let step = 2 * multiple.max(1);
    let mut taps = estimate.div_ceil(step) * step + 1;
    let cutoff = (spec.passband_hz + spec.stopband_hz) / 2.0 / fs;
    while taps <= MAX_TAPS {
        let h = windowed_sinc(taps, cutoff, beta);
        if meets_spec(&h, spec) {
            return Ok(h);
        }
        taps += step;
    }
    Err(format!("no filter up to {MAX_TAPS} taps meets the requested response"))
}
