//! Reference signals for checking the APD machinery.
//!
//! Both are complex baseband blocks so their envelope is exact:
//!
//! - a constant-amplitude tone of 400 µV peak lasting 16 s;
//! - an "impulsive" burst: 2 µs silent, 1 µs carrier, 3 µs silent, 1 µs
//!   carrier, then silence for the rest of the window. Each pulse rises and
//!   falls over 0.1 µs raised-cosine edges inside its 1 µs.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::morse::raised_cosine;
use crate::synth::{OutputMode, SampleBlock, Samples};

pub const REFERENCE_PEAK_V: f64 = 400e-6;
pub const SINUSOID_DURATION: f64 = 16.0;
pub const SINUSOID_SAMPLE_RATE: f64 = 20e3;
pub const SINUSOID_OFFSET_HZ: f64 = 1e3;
pub const IMPULSIVE_SAMPLE_RATE: f64 = 20e6;
pub const IMPULSIVE_DURATION: f64 = 10e-3;

const PULSES: [(f64, f64); 2] = [(2e-6, 3e-6), (6e-6, 7e-6)];
const PULSE_RAMP: f64 = 0.1e-6;

fn block(z: Vec<Complex64>, fs: f64) -> SampleBlock {
    SampleBlock { start_index: 0, sample_rate: fs, samples: Samples::Complex(z), mode: OutputMode::Baseband, center_frequency: 0.0 }
}

/// Tone of peak `peak_v` at `offset_hz` from the centre.
pub fn sinusoid_reference(peak_v: f64, offset_hz: f64, fs: f64, duration: f64) -> SampleBlock {
    let n = (duration * fs).round() as usize;
    let r = offset_hz / fs;
    let z = (0..n).map(|i| Complex64::from_polar(peak_v, TAU * (i as f64 * r).fract())).collect();
    block(z, fs)
}

fn pulse_envelope(t: f64) -> f64 {
    for (a, b) in PULSES {
        if (a..=b).contains(&t) {
            let x = t - a;
            let rest = b - t;
            return if x < PULSE_RAMP {
                raised_cosine(x, PULSE_RAMP)
            } else if rest < PULSE_RAMP {
                raised_cosine(rest, PULSE_RAMP)
            } else {
                1.0
            };
        }
    }
    0.0
}

/// Two short carrier bursts of peak `peak_v` followed by silence.
pub fn impulsive_reference(peak_v: f64, fs: f64, duration: f64) -> SampleBlock {
    let n = (duration * fs).round() as usize;
    let z = (0..n).map(|i| Complex64::new(peak_v * pulse_envelope(i as f64 / fs), 0.0)).collect();
    block(z, fs)
}
