//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails or overruns its time budget.
//!
//! Run: cargo test -p hfsim-cli --test acceptance

mod common;

use std::time::{Duration, Instant};

use hfsim_cli::analyze::{analyze_reference, AnalysisOptions, Reference};
use hfsim_core::congestion::{congestion, field_from_prob, median_field, power_from_field};
use hfsim_core::morse::{paris_pattern, PATTERN_UNITS};
use hfsim_core::rng::{substream, ARRIVAL_STREAM};
use hfsim_core::scenario::{derive_timing, sample_amplitude, sample_arrivals};
use hfsim_core::stats::{
    crossing_stats, magnitude_envelope, magnitude_spectrum, skewness, IMPULSIVE_DURATION, IMPULSIVE_SAMPLE_RATE,
    REFERENCE_PEAK_V,
};
use hfsim_core::synth::{rf_then_ddc, synthesize_block, synthesize_direct_baseband};
use hfsim_core::{EnvelopeSeries, InterferenceParams, OutputMode};
use rand::Rng;

/// Published mean interferer power for the reference (α, B), dBm.
const QUOTED_MEAN_POWER_DBM: f64 = -107.3391;

type Outcome = Result<String, String>;

/// Criterion number, name, time budget and check.
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn paris_bookkeeping() -> Outcome {
    let p = paris_pattern();
    let on = p.on_units();
    let off = p.off_fraction();
    check(
        PATTERN_UNITS == 50 && p.units().len() == 50 && on == 22 && PATTERN_UNITS - on == 28 && off == 0.56,
        format!("units {}, on {on}, off {}, non-signal {:.2}%", p.units().len(), PATTERN_UNITS - on, off * 100.0),
    )
}

fn morse_timing() -> Outcome {
    let t = derive_timing(10.0);
    let dot_ok = t.dot == 10.0 / 331.0;
    let wpm_ok = t.wpm == 1.2 / t.dot;
    let near = (t.wpm - 40.0).abs() < 0.5;
    let ramps = t.t_rise == t.dot / 10.0 && t.t_fall == t.t_rise;
    check(
        dot_ok && wpm_ok && near && ramps,
        format!("dot {:.6} s, wpm {:.4} (|wpm - 40| = {:.3})", t.dot, t.wpm, (t.wpm - 40.0).abs()),
    )
}

fn arrival_rate() -> Outcome {
    let (lambda, horizon, seeds) = (6.68, 3600.0, 100u64);
    let mut gaps = Vec::new();
    let mut total = 0usize;
    for seed in 0..seeds {
        let starts = sample_arrivals(&mut substream(seed, ARRIVAL_STREAM), lambda, horizon);
        total += starts.len();
        let mut prev = 0.0;
        for &t in &starts {
            gaps.push(t - prev);
            prev = t;
        }
    }
    let mean = total as f64 / seeds as f64;
    let rel = (mean - lambda * horizon).abs() / (lambda * horizon);
    let (d, p) = common::ks_test(&gaps, |x| 1.0 - (-lambda * x).exp());
    check(
        rel < 0.01 && p > 0.01,
        format!("mean count {mean:.1} vs {:.0} ({:.3}% off), KS D {d:.5} p {p:.3}", lambda * horizon, rel * 100.0),
    )
}

fn congestion_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    let n = 10_000;
    for (alpha, b) in [(-10.8077, -0.084873), (-2.0, -0.3), (-20.0, -0.05), (5.0, -0.2), (0.0, -1.0)] {
        for i in 0..n {
            // log-uniform over (1e-6, 1 - 1e-6), mirrored so both tails are dense
            let x = i as f64 / (n - 1) as f64;
            let q = 1e-6 * (0.5f64 / 1e-6).powf(x);
            for p in [q, 1.0 - q] {
                let e = field_from_prob(p, alpha, b).map_err(|e| e.to_string())?;
                worst = worst.max(((1.0 - congestion(e, alpha, b)) - p).abs());
            }
        }
    }
    check(worst < 1e-9, format!("max |(1 - Q(E(p))) - p| = {worst:.3e}"))
}

fn amplitude_median() -> Outcome {
    let (alpha, b, af, r) = (-10.8077, -0.084873, 10.0, 50.0);
    let mut rng = substream(20110625, 1);
    let mut p: Vec<f64> = (0..100_000).map(|_| sample_amplitude(&mut rng, alpha, b, af, r).0).collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let skew = skewness(&p);
    p.sort_by(f64::total_cmp);
    let median = (p[49_999] + p[50_000]) / 2.0;
    let expected = power_from_field(median_field(alpha, b), af, r);
    let off = median - expected;
    check(
        off.abs() < 0.5 && skew.abs() < 0.05,
        format!(
            "median {median:.4} dBm vs {expected:.4} ({off:+.4} dB), skewness {skew:+.4}; \
             E[P] {mean:.4} dBm, offset from the quoted {QUOTED_MEAN_POWER_DBM} dBm: {:+.4} dB",
            mean - QUOTED_MEAN_POWER_DBM
        ),
    )
}

fn spectral_placement() -> Outcome {
    let (f_l, f0, fs, n) = (14.2144e6, 16.5e6, 8.192e6, 8192usize);
    // dot of 1 s; the window sits on the plateau of the first dot
    let p = InterferenceParams::keyed(1, -0.5, 331.0).with_carrier(f_l, 0.3).with_amplitude(1e-3, 50.0);
    let block = synthesize_block(&[p], OutputMode::Baseband, f0, fs, 0, n).map_err(|e| e.to_string())?;
    let spec = magnitude_spectrum(&block).map_err(|e| e.to_string())?;
    let values = spec.values();
    let peak = (0..values.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let bin = fs / n as f64;
    let f_peak = -fs / 2.0 + peak as f64 * bin;
    let delta = f_l - f0;
    check(
        (f_peak - delta).abs() <= bin,
        format!("peak at {:.4} MHz, expected {:.4} MHz (bin {bin} Hz)", f_peak / 1e6, delta / 1e6),
    )
}

fn chain_equivalence() -> Outcome {
    let (f0, fs_rf, d, duration, bs) = (2.0e6, 8.0e6, 2usize, 0.05, 1 << 16);
    let params = [
        InterferenceParams::keyed(1, 0.001, 3.31).with_carrier(1.3e6, 0.4).with_amplitude(2e-3, 50.0),
        InterferenceParams::keyed(2, 0.004, 2.0).with_carrier(2.45e6, 2.1).with_amplitude(1e-3, 50.0),
        InterferenceParams::keyed(3, 0.0, 1.5).with_carrier(3.1e6, 5.0).with_amplitude(5e-4, 50.0),
    ];
    let direct = synthesize_direct_baseband(&params, f0, fs_rf / d as f64, duration, bs).map_err(|e| e.to_string())?;
    let ddc = rf_then_ddc(&params, f0, fs_rf, d, duration, bs).map_err(|e| e.to_string())?;
    let flat = |blocks: &[hfsim_core::SampleBlock]| -> Vec<num_complex::Complex64> {
        blocks.iter().flat_map(|b| b.complex().unwrap().to_vec()).collect()
    };
    let (x, y) = (flat(&direct), flat(&ddc));
    if x.len() != y.len() {
        return Err(format!("lengths differ: direct {} vs ddc {}", x.len(), y.len()));
    }
    let sig: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum();
    let rel = (err / sig).sqrt();
    check(rel < 0.01, format!("{} samples, RMS difference {:.4}% of signal RMS", x.len(), rel * 100.0))
}

fn apd_references() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = AnalysisOptions::new(50.0);
    let sin = analyze_reference(Reference::Sinusoid, &opts, dir.path()).map_err(|e| e.to_string())?;
    let mut step = true;
    for (t, a) in sin.envelope.thresholds.iter().zip(&sin.envelope.apd) {
        let expect = if *t < REFERENCE_PEAK_V * (1.0 - 1e-9) {
            1.0
        } else if *t > REFERENCE_PEAK_V * (1.0 + 1e-9) {
            0.0
        } else {
            *a
        };
        step &= *a == expect;
    }
    let imp = Reference::Impulsive.block();
    let env = magnitude_envelope(&imp).map_err(|e| e.to_string())?;
    let s = crossing_stats(&env, &[0.0, 0.99 * REFERENCE_PEAK_V]).map_err(|e| e.to_string())?;
    let (any, peak) = (s.apd[0], s.apd[1]);
    let imp_ok = any > 0.0 && any < 1e-3 && peak > 0.0 && peak < 1e-3;
    let samples = (IMPULSIVE_DURATION * IMPULSIVE_SAMPLE_RATE).round();
    check(
        step && imp_ok,
        format!(
            "sinusoid step APD {}; impulsive exceedance {any:.2e} above 0, {peak:.2e} above 0.99 peak ({samples} samples)",
            if step { "exact" } else { "broken" }
        ),
    )
}

/// Direct transcription of the definitions, no shared code with the library.
fn brute_force(values: &[f64], thresholds: &[f64], fs: f64) -> (Vec<f64>, Vec<u64>, Vec<Option<f64>>) {
    let n = values.len();
    let mut apd = Vec::new();
    let mut lcd = Vec::new();
    let mut acd = Vec::new();
    for &t in thresholds {
        apd.push(values.iter().filter(|&&v| v > t).count() as f64 / n as f64);
        let ups: Vec<usize> = (1..n).filter(|&k| values[k - 1] <= t && t < values[k]).collect();
        lcd.push(ups.len() as u64);
        acd.push(if ups.len() < 2 {
            None
        } else {
            let total: usize = ups.windows(2).map(|w| w[1] - w[0]).sum();
            Some(total as f64 / (ups.len() - 1) as f64 / fs)
        });
    }
    (apd, lcd, acd)
}

fn stats_oracle() -> Outcome {
    let mut rng = substream(99, 0);
    for case in 0..100 {
        let n = rng.random_range(1..=1000usize);
        let fs = rng.random_range(1.0..1e6);
        // coarse levels make ties with thresholds common
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..20u32) as f64 * 0.25).collect();
        let mut thresholds: Vec<f64> = (0..rng.random_range(1..=30usize))
            .map(|_| if rng.random_bool(0.5) { values[rng.random_range(0..n)] } else { rng.random_range(-1.0..6.0) })
            .collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let series = EnvelopeSeries::time(values.clone(), fs).map_err(|e| e.to_string())?;
        let got = crossing_stats(&series, &thresholds).map_err(|e| e.to_string())?;
        let (apd, lcd, acd) = brute_force(&values, &thresholds, fs);
        if got.apd != apd || got.lcd != lcd || got.acd != acd {
            return Err(format!("case {case} (n = {n}) differs from the brute-force oracle"));
        }
    }
    Ok("100 random series match exactly".into())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = common::small_config(dir.path(), "");
    let mut files = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = common::run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        if !o.status.success() {
            return Err(format!("simulate --workers {workers} failed: {}", common::stderr(&o)));
        }
        files.push(std::fs::read(out.join("samples.iq")).map_err(|e| e.to_string())?);
    }
    check(
        files[0] == files[1] && !files[0].is_empty(),
        format!("{} bytes, 1 worker vs 4 workers {}", files[0].len(), if files[0] == files[1] { "identical" } else { "differ" }),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "PARIS bookkeeping", Duration::from_secs(1), paris_bookkeeping),
        (2, "Morse timing identities", Duration::from_secs(1), morse_timing),
        (3, "arrival rate", Duration::from_secs(30), arrival_rate),
        (4, "congestion inversion round trip", Duration::from_secs(5), congestion_round_trip),
        (5, "amplitude-chain median", Duration::from_secs(30), amplitude_median),
        (6, "spectral placement", Duration::from_secs(10), spectral_placement),
        (7, "chain equivalence", Duration::from_secs(60), chain_equivalence),
        (8, "APD reference shapes", Duration::from_secs(10), apd_references),
        (9, "stats oracle equivalence", Duration::from_secs(10), stats_oracle),
        (10, "determinism across worker counts", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if took <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {} s budget", budget.as_secs())),
            Err(d) => ("FAIL", d),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {id:>2} {verdict} {name}: {detail} [{:.2} s]", took.as_secs_f64());
    }
    println!("criterion 11 not reproducible: single random realizations at unstated sample rates");
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
