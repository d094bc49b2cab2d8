use hfsim_core::stats::{magnitude_envelope, magnitude_spectrum};
use hfsim_core::synth::{synthesize_block, Synthesizer};
use hfsim_core::{InterferenceParams, OutputMode};

/// Keyed over a 1 s dot; `[0, 0.4)` s lies on the first dot's plateau.
fn steady(index: u32, f: f64, amp: f64) -> InterferenceParams {
    InterferenceParams::keyed(index, -0.5, 331.0).with_carrier(f, 0.7).with_amplitude(amp, 50.0)
}

fn peak_hz(values: &[f64], first_hz: f64, bin_hz: f64) -> f64 {
    let k = (0..values.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    first_hz + k as f64 * bin_hz
}

#[test]
fn rf_tone_lands_on_its_carrier() {
    let (fs, n, f) = (64e6, 1 << 16, 14.2144e6);
    let block = synthesize_block(&[steady(1, f, 1e-3)], OutputMode::Rf, 0.0, fs, 0, n).unwrap();
    let spec = magnitude_spectrum(&block).unwrap();
    let bin = fs / n as f64;
    assert!((peak_hz(spec.values(), 0.0, bin) - f).abs() <= bin);
}

#[test]
fn baseband_peaks_at_each_offset() {
    let (f0, fs, n) = (15.803e6, 34.0e6, 1 << 15);
    let bin = fs / n as f64;
    for f in [1.85e6, 7.05e6, 14.2144e6, 21.2e6, 29.5e6] {
        let block = synthesize_block(&[steady(1, f, 1e-3)], OutputMode::Baseband, f0, fs, 0, n).unwrap();
        let spec = magnitude_spectrum(&block).unwrap();
        let got = peak_hz(spec.values(), -fs / 2.0, bin);
        assert!((got - (f - f0)).abs() <= bin, "{f}: peak {got}, offset {}", f - f0);
    }
}

#[test]
fn rf_and_baseband_envelopes_agree_on_the_plateau() {
    let params = [steady(1, 7.05e6, 2e-3), steady(2, 7.09e6, 1e-3)];
    let synth = Synthesizer::new(&params);
    let n = 1 << 14;
    let rf = synth.block(OutputMode::Rf, 0.0, 32e6, 0, n).unwrap();
    let bb = synth.block(OutputMode::Baseband, 7.07e6, 32e6, 0, n).unwrap();
    let (a, b) = (magnitude_envelope(&rf).unwrap(), magnitude_envelope(&bb).unwrap());
    // skip the analytic-signal edge effects
    let err = a.values()[1024..n - 1024]
        .iter()
        .zip(&b.values()[1024..n - 1024])
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(err < 3e-5, "max envelope difference {err}");
}
