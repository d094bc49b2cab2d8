#![allow(dead_code)]

use hfsim_core::congestion::{Regime, ScenarioConditions, SsnTable};
use hfsim_core::ScenarioConfig;

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

/// One-sample KS p-value (asymptotic) of `samples` against `cdf`.
pub fn ks_p(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

/// Field Day daytime conditions with the shipped tables.
pub fn field_day(filter: Vec<u32>, seed: u64, total_time: f64) -> ScenarioConfig {
    let conditions = ScenarioConditions {
        latitude_deg: 28.0,
        longitude_deg: -15.35,
        week: 25,
        ssn: SsnTable::shipped().lookup(2011, 6).unwrap(),
        bandwidth_hz: 100.0,
        regime: Regime::Day,
    };
    let mut c = ScenarioConfig::new(conditions, filter, seed);
    c.total_time = total_time;
    c
}
