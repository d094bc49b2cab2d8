use hfsim_core::stats::{crossing_stats, magnitude_spectrum, CrossingAccumulator, Domain};
use hfsim_core::{EnvelopeSeries, OutputMode, SampleBlock, Samples};
use num_complex::Complex64;
use proptest::prelude::*;

fn series_and_thresholds() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (
        prop::collection::vec(prop_oneof![Just(0.0), 0.0..5.0f64, (0u8..8).prop_map(|k| k as f64 * 0.5)], 1..400),
        prop::collection::vec(-1.0..6.0f64, 1..20),
        1.0..1e5f64,
    )
        .prop_map(|(v, mut t, fs)| {
            t.sort_by(f64::total_cmp);
            t.dedup();
            (v, t, fs)
        })
}

proptest! {
    #[test]
    fn apd_never_increases((values, thresholds, fs) in series_and_thresholds()) {
        let s = crossing_stats(&EnvelopeSeries::time(values, fs).unwrap(), &thresholds).unwrap();
        for w in s.apd.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn acd_fits_inside_the_series((values, thresholds, fs) in series_and_thresholds()) {
        let n = values.len();
        let s = crossing_stats(&EnvelopeSeries::time(values, fs).unwrap(), &thresholds).unwrap();
        let span = n as f64 / fs;
        for (c, acd) in s.lcd.iter().zip(&s.acd) {
            match acd {
                Some(a) => prop_assert!(a * (*c - 1) as f64 <= span * (1.0 + 1e-12)),
                None => prop_assert!(*c < 2),
            }
        }
    }

    #[test]
    fn streaming_matches_whole_series((values, thresholds, fs) in series_and_thresholds(), cut in 0usize..400) {
        let whole = crossing_stats(&EnvelopeSeries::time(values.clone(), fs).unwrap(), &thresholds).unwrap();
        let cut = cut.min(values.len());
        let mut acc = CrossingAccumulator::new(thresholds, fs).unwrap();
        acc.push(&values[..cut]).unwrap();
        acc.push(&values[cut..]).unwrap();
        prop_assert_eq!(acc.finish().unwrap(), whole);
    }
}

#[test]
fn constant_series_never_crosses() {
    let s = crossing_stats(&EnvelopeSeries::time(vec![2.0; 100], 10.0).unwrap(), &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(s.lcd, vec![0, 0, 0]);
    assert_eq!(s.apd, vec![1.0, 0.0, 0.0]);
}

#[test]
fn spectra_use_the_same_measures_in_hertz() {
    // three bin-centred tones 250 Hz apart on a 1 Hz grid
    let (fs, n) = (1024.0, 1024usize);
    let tones = [(-250.0, 1e-3), (0.0, 2e-3), (250.0, 1e-3)];
    let z: Vec<Complex64> = (0..n)
        .map(|i| {
            tones.iter().map(|&(f, a)| Complex64::from_polar(a, std::f64::consts::TAU * f * i as f64 / fs)).sum()
        })
        .collect();
    let block = SampleBlock {
        start_index: 0,
        sample_rate: fs,
        samples: Samples::Complex(z),
        mode: OutputMode::Baseband,
        center_frequency: 0.0,
    };
    let spec = magnitude_spectrum(&block).unwrap();
    assert_eq!(spec.domain(), Domain::Frequency);
    let s = crossing_stats(&spec, &[0.5e-3, 1.5e-3]).unwrap();
    assert_eq!(s.lcd, vec![3, 1]);
    assert!((s.acd[0].unwrap() - 250.0).abs() < 1e-9, "{:?}", s.acd);
    assert_eq!(s.apd[0], 3.0 / n as f64);
}
