//! CW-Morse keying envelope.
//!
//! Each interferer sends the 50-unit word "PARIS" back to back for its whole
//! lifetime. One unit lasts `dot` seconds; every key-down run opens with a
//! raised-cosine rise of `t_rise` and closes with a mirrored fall of `t_fall`,
//! both contained inside the run so the unit bookkeeping stays exact.

use thiserror::Error;

use crate::scenario::InterferenceParams;

/// Units in one "PARIS" word including the trailing word gap.
pub const PATTERN_UNITS: usize = 50;

const PARIS: [&str; 5] = [".--.", ".-", ".-.", "..", "..."];
const INTRA_CHAR_GAP: usize = 1;
const INTER_CHAR_GAP: usize = 3;
const WORD_GAP: usize = 7;

#[derive(Debug, Error, PartialEq)]
pub enum MorseError {
    #[error("sample rate {fs} Hz cannot resolve a {dot} s dot; need at least {min_fs} Hz")]
    SampleRateTooLow { fs: f64, dot: f64, min_fs: f64 },
}

/// Key-down/key-up state of each unit of one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorsePattern {
    units: [bool; PATTERN_UNITS],
}

/// A maximal key-down run, in units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnRun {
    pub start: usize,
    pub len: usize,
}

/// The standard "PARIS" timing word.
pub fn paris_pattern() -> MorsePattern {
    let mut units = Vec::with_capacity(PATTERN_UNITS);
    for (c, code) in PARIS.iter().enumerate() {
        if c > 0 {
            units.extend(std::iter::repeat_n(false, INTER_CHAR_GAP));
        }
        for (e, element) in code.chars().enumerate() {
            if e > 0 {
                units.extend(std::iter::repeat_n(false, INTRA_CHAR_GAP));
            }
            let len = if element == '-' { 3 } else { 1 };
            units.extend(std::iter::repeat_n(true, len));
        }
    }
    units.extend(std::iter::repeat_n(false, WORD_GAP));
    MorsePattern { units: units.try_into().expect("PARIS spans 50 units") }
}

impl MorsePattern {
    pub fn units(&self) -> &[bool; PATTERN_UNITS] {
        &self.units
    }

    pub fn on_units(&self) -> usize {
        self.units.iter().filter(|&&u| u).count()
    }

    /// Fraction of units with the key up.
    pub fn off_fraction(&self) -> f64 {
        (PATTERN_UNITS - self.on_units()) as f64 / PATTERN_UNITS as f64
    }

    pub fn on_runs(&self) -> Vec<OnRun> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < PATTERN_UNITS {
            if self.units[i] {
                let start = i;
                while i < PATTERN_UNITS && self.units[i] {
                    i += 1;
                }
                runs.push(OnRun { start, len: i - start });
            } else {
                i += 1;
            }
        }
        runs
    }

    /// Mean of the shaped envelope over one word when ramps last `ramp_units`
    /// of a unit: each ramp loses half its length.
    pub fn mean_level(&self, ramp_units: f64) -> f64 {
        let runs = self.on_runs().len() as f64;
        (self.on_units() as f64 - runs * ramp_units) / PATTERN_UNITS as f64
    }

    /// Mean of the squared envelope over one word: a raised-cosine ramp of
    /// length `T` holds `3T/8` of energy.
    pub fn mean_power(&self, ramp_units: f64) -> f64 {
        let runs = self.on_runs().len() as f64;
        (self.on_units() as f64 - runs * 2.0 * ramp_units * 5.0 / 8.0) / PATTERN_UNITS as f64
    }
}

/// Raised-cosine ramp from 0 at `x = 0` to 1 at `x = width`.
pub fn raised_cosine(x: f64, width: f64) -> f64 {
    (1.0 - (std::f64::consts::PI * x / width).cos()) / 2.0
}

/// Envelope evaluator with a unit-to-run lookup for one pattern.
#[derive(Debug, Clone)]
pub struct Keyer {
    /// Run covering each unit, if keyed.
    run_of_unit: [Option<OnRun>; PATTERN_UNITS],
}

impl Keyer {
    pub fn new(pattern: &MorsePattern) -> Self {
        let mut run_of_unit = [None; PATTERN_UNITS];
        for run in pattern.on_runs() {
            for slot in &mut run_of_unit[run.start..run.start + run.len] {
                *slot = Some(run);
            }
        }
        Self { run_of_unit }
    }

    /// Envelope at absolute time `t` for an interferer with the given timing.
    pub fn value(&self, t: f64, p: &InterferenceParams) -> f64 {
        let tau = t - p.t_start;
        if !(0.0..=p.t_dur).contains(&tau) {
            return 0.0;
        }
        let pos = (tau / p.dot).rem_euclid(PATTERN_UNITS as f64);
        let unit = (pos as usize).min(PATTERN_UNITS - 1);
        let Some(run) = self.run_of_unit[unit] else {
            return 0.0;
        };
        let x = (pos - run.start as f64) * p.dot;
        let remaining = run.len as f64 * p.dot - x;
        if x < p.t_rise {
            raised_cosine(x, p.t_rise)
        } else if remaining < p.t_fall {
            raised_cosine(remaining.max(0.0), p.t_fall)
        } else {
            1.0
        }
    }
}

/// Envelope of interferer `params` at time `t`.
pub fn envelope_value(t: f64, params: &InterferenceParams, pattern: &MorsePattern) -> f64 {
    Keyer::new(pattern).value(t, params)
}

/// `n` envelope samples at times `(start_index + k) / fs`.
///
/// Samples are addressed by their index on the `fs` grid rather than by a
/// start time, so adjacent blocks concatenate bit-exactly.
pub fn render_envelope(
    params: &InterferenceParams,
    pattern: &MorsePattern,
    start_index: i64,
    n: usize,
    fs: f64,
) -> Result<Vec<f64>, MorseError> {
    let min_fs = 20.0 / params.dot;
    if fs < min_fs {
        return Err(MorseError::SampleRateTooLow { fs, dot: params.dot, min_fs });
    }
    let keyer = Keyer::new(pattern);
    Ok((0..n).map(|k| keyer.value((start_index + k as i64) as f64 / fs, params)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::derive_timing;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(t_start: f64, t_dur: f64) -> InterferenceParams {
        InterferenceParams::keyed(1, t_start, t_dur)
    }

    #[test]
    fn paris_bookkeeping() {
        let p = paris_pattern();
        assert_eq!(p.units().len(), 50);
        assert_eq!(p.on_units(), 22);
        assert_eq!(p.off_fraction(), 0.56);
        assert_eq!(&p.units()[..5], &[true, false, true, true, true]);
        assert_eq!(p.on_runs().len(), 14);
        assert!(p.units()[43..].iter().all(|u| !u));
    }

    #[test]
    fn envelope_examples() {
        let pat = paris_pattern();
        let p = params(2.0, 10.0);
        assert_eq!(envelope_value(1.9, &p, &pat), 0.0);
        assert_eq!(envelope_value(12.5, &p, &pat), 0.0);
        // centre of the first dash (units 2..5)
        assert_eq!(envelope_value(2.0 + 3.5 * p.dot, &p, &pat), 1.0);
        // half-way up the first rise
        assert_relative_eq!(envelope_value(2.0 + p.t_rise / 2.0, &p, &pat), 0.5, epsilon = 1e-9);
        // inside the word gap
        assert_eq!(envelope_value(2.0 + 46.0 * p.dot, &p, &pat), 0.0);
    }

    #[test]
    fn ramps_are_mirror_images() {
        let pat = paris_pattern();
        let p = params(0.0, 10.0);
        // first dash occupies units 2..5
        let run_start = 2.0 * p.dot;
        let run_end = 5.0 * p.dot;
        for i in 0..=20 {
            let x = p.t_rise * i as f64 / 20.0;
            let up = envelope_value(run_start + x, &p, &pat);
            let down = envelope_value(run_end - x, &p, &pat);
            assert_relative_eq!(up, down, epsilon = 1e-9);
        }
    }

    #[test]
    fn render_rejects_low_rate() {
        let p = params(0.0, 10.0);
        let err = render_envelope(&p, &paris_pattern(), 0, 10, 100.0).unwrap_err();
        match err {
            MorseError::SampleRateTooLow { min_fs, .. } => assert_relative_eq!(min_fs, 20.0 / p.dot),
        }
    }

    #[test]
    fn render_blocks_concatenate() {
        let p = params(0.01, 1.0);
        let pat = paris_pattern();
        let fs = 48_000.0;
        assert!(render_envelope(&p, &pat, 0, 0, fs).unwrap().is_empty());
        let whole = render_envelope(&p, &pat, 0, 30_000, fs).unwrap();
        let mut parts = render_envelope(&p, &pat, 0, 7_001, fs).unwrap();
        parts.extend(render_envelope(&p, &pat, 7_001, 12_345, fs).unwrap());
        parts.extend(render_envelope(&p, &pat, 19_346, 10_654, fs).unwrap());
        assert_eq!(whole, parts);
    }

    #[test]
    fn mean_over_one_word_matches_ramp_bookkeeping() {
        let pat = paris_pattern();
        let p = params(0.0, 331.0);
        // dot = 1 s; integrate one word at 1e5 samples per unit
        let fs = 1e5;
        let n = (50.0 * p.dot * fs) as usize;
        let env = render_envelope(&p, &pat, 0, n, fs).unwrap();
        let mean = env.iter().sum::<f64>() / n as f64;
        let power = env.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert_relative_eq!(mean, pat.mean_level(0.1), epsilon = 1e-4);
        assert_relative_eq!(mean, (22.0 - 1.4) / 50.0, epsilon = 1e-4);
        assert_relative_eq!(power, pat.mean_power(0.1), epsilon = 1e-4);
    }

    #[test]
    fn off_runs_are_exactly_zero() {
        let pat = paris_pattern();
        let p = params(0.0, 50.0);
        let keyer = Keyer::new(&pat);
        for (u, &on) in pat.units().iter().enumerate() {
            if !on {
                for frac in [0.01, 0.3, 0.5, 0.99] {
                    assert_eq!(keyer.value((u as f64 + frac) * p.dot, &p), 0.0, "unit {u}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn envelope_in_unit_interval(t in -1.0f64..20.0, dur in 0.5f64..15.0) {
            let p = params(0.0, dur);
            let v = envelope_value(t, &p, &paris_pattern());
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn envelope_is_periodic(offset in 0.0f64..1.0, dur in 5.0f64..40.0) {
            let p = params(1.0, dur);
            let period = 50.0 * p.dot;
            let span = dur - 3.0 * period;
            prop_assume!(span > 0.0);
            let t = 1.0 + period + offset * span;
            let pat = paris_pattern();
            let a = envelope_value(t, &p, &pat);
            let b = envelope_value(t + period, &p, &pat);
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn timing_used_by_fixtures_is_consistent() {
        let p = params(0.0, 10.0);
        let t = derive_timing(10.0);
        assert_eq!((p.dot, p.t_rise, p.t_fall), (t.dot, t.t_rise, t.t_fall));
    }
}
