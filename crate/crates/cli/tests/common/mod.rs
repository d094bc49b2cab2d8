#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Site and season shared by the test configs.
pub const FIELD_DAY: &str = "location.latitude = 28.0\nlocation.longitude = -15.35\n\
    time.year = 2011\ntime.month = 6\ntime.week = 25\ntime.regime = \"day\"\n";

pub fn hfsim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hfsim"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    hfsim().args(args).output().expect("hfsim runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Config in `dir` simulating allocation 50 around 14.175 MHz at 500 kHz.
/// Lines of `extra` replace defaults with the same key.
pub fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let base = format!(
        "{FIELD_DAY}scenario.allocations = [50]\nscenario.total_time = 2.0\nscenario.seed = 7\n\
         scenario.lambda = 3.0\noutput.center_frequency = 14.175e6\noutput.sample_rate = 500e3\n\
         output.block_size = 65536\n"
    );
    let key = |line: &str| line.split('=').next().unwrap_or("").trim().to_string();
    let overridden: Vec<String> = extra.lines().map(key).collect();
    let mut text: String =
        base.lines().filter(|l| !overridden.contains(&key(l))).map(|l| format!("{l}\n")).collect();
    text.push_str(extra);
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^(k−1) exp(−2k²λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic and asymptotic p-value against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}
