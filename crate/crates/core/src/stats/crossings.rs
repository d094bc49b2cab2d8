//! APD, LCD and ACD in one streaming pass.

use super::{check_thresholds, CrossingStats, EnvelopeSeries, StatsError};

/// Largest subsample used for percentile estimates.
const PERCENTILE_SAMPLES: usize = 1_000_000;
const LOW_PERCENTILE: f64 = 0.1;
const HIGH_PERCENTILE: f64 = 99.9;

/// Single-pass crossing statistics over a series fed in pieces.
#[derive(Debug, Clone)]
pub struct CrossingAccumulator {
    thresholds: Vec<f64>,
    sample_rate: f64,
    /// `above[j]`: samples lying above exactly `j` thresholds.
    above: Vec<u64>,
    crossings: Vec<u64>,
    first: Vec<u64>,
    last: Vec<u64>,
    prev: Option<f64>,
    count: u64,
}

impl CrossingAccumulator {
    pub fn new(thresholds: Vec<f64>, sample_rate: f64) -> Result<Self, StatsError> {
        check_thresholds(&thresholds)?;
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(StatsError::SampleRate(sample_rate));
        }
        let t = thresholds.len();
        Ok(Self {
            thresholds,
            sample_rate,
            above: vec![0; t + 1],
            crossings: vec![0; t],
            first: vec![0; t],
            last: vec![0; t],
            prev: None,
            count: 0,
        })
    }

    pub fn push(&mut self, values: &[f64]) -> Result<(), StatsError> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(StatsError::NonFinite { index: self.count as usize + i });
            }
        }
        for &v in values {
            let below_v = self.thresholds.partition_point(|&t| t < v);
            self.above[below_v] += 1;
            if let Some(p) = self.prev {
                // thresholds τ with p <= τ < v
                let from = self.thresholds.partition_point(|&t| t < p);
                for i in from..below_v {
                    if self.crossings[i] == 0 {
                        self.first[i] = self.count;
                    }
                    self.last[i] = self.count;
                    self.crossings[i] += 1;
                }
            }
            self.prev = Some(v);
            self.count += 1;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<CrossingStats, StatsError> {
        if self.count == 0 {
            return Err(StatsError::Empty);
        }
        let n = self.count as f64;
        let t = self.thresholds.len();
        let mut apd = vec![0.0; t];
        let mut exceed = 0u64;
        for i in (0..t).rev() {
            exceed += self.above[i + 1];
            apd[i] = exceed as f64 / n;
        }
        let acd = (0..t)
            .map(|i| {
                let c = self.crossings[i];
                (c >= 2).then(|| (self.last[i] - self.first[i]) as f64 / (c - 1) as f64 / self.sample_rate)
            })
            .collect();
        Ok(CrossingStats { thresholds: self.thresholds, apd, lcd: self.crossings, acd })
    }
}

/// APD, LCD and ACD of `series` at `thresholds`.
pub fn crossing_stats(series: &EnvelopeSeries, thresholds: &[f64]) -> Result<CrossingStats, StatsError> {
    let mut acc = CrossingAccumulator::new(thresholds.to_vec(), series.sample_rate())?;
    acc.push(series.values())?;
    acc.finish()
}

/// Fraction of samples strictly above each threshold.
pub fn apd(series: &EnvelopeSeries, thresholds: &[f64]) -> Result<Vec<f64>, StatsError> {
    Ok(crossing_stats(series, thresholds)?.apd)
}

/// Upward crossings of each threshold.
pub fn lcd(series: &EnvelopeSeries, thresholds: &[f64]) -> Result<Vec<u64>, StatsError> {
    Ok(crossing_stats(series, thresholds)?.lcd)
}

/// Mean interval between consecutive upward crossings of each threshold.
pub fn acd(series: &EnvelopeSeries, thresholds: &[f64]) -> Result<Vec<Option<f64>>, StatsError> {
    Ok(crossing_stats(series, thresholds)?.acd)
}

/// Streaming summary from which threshold grids are drawn: a deterministic
/// strided subsample of at most a million values plus the exact smallest
/// positive value and maximum.
#[derive(Debug, Clone)]
pub struct LevelSummary {
    stride: u64,
    seen: u64,
    sample: Vec<f64>,
    min_positive: f64,
    max: f64,
}

impl LevelSummary {
    /// Summary for a series of `total` values.
    pub fn new(total: u64) -> Self {
        let stride = total.div_ceil(PERCENTILE_SAMPLES as u64).max(1);
        Self { stride, seen: 0, sample: Vec::new(), min_positive: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut s = Self::new(values.len() as u64);
        s.push(values);
        s
    }

    pub fn push(&mut self, values: &[f64]) {
        for &v in values {
            if self.seen.is_multiple_of(self.stride) {
                self.sample.push(v);
            }
            if v > 0.0 {
                self.min_positive = self.min_positive.min(v);
            }
            self.max = self.max.max(v);
            self.seen += 1;
        }
    }

    /// `p`-th percentile (0–100) of the subsample, nearest-rank rule.
    pub fn percentile(&self, p: f64) -> Result<f64, StatsError> {
        if self.sample.is_empty() {
            return Err(StatsError::Empty);
        }
        let mut s = self.sample.clone();
        let k = ((p / 100.0).clamp(0.0, 1.0) * (s.len() - 1) as f64).round() as usize;
        let (_, v, _) = s.select_nth_unstable_by(k, f64::total_cmp);
        Ok(*v)
    }

    fn range(&self, positive: bool) -> Result<(f64, f64), StatsError> {
        let mut lo = self.percentile(LOW_PERCENTILE)?;
        let mut hi = self.percentile(HIGH_PERCENTILE)?;
        if positive && lo <= 0.0 {
            lo = self.min_positive;
        }
        if hi <= lo {
            hi = self.max;
        }
        Ok((lo, hi))
    }

    /// `n` log-spaced thresholds between the 0.1st and 99.9th percentiles.
    ///
    /// A non-positive lower percentile falls back to the smallest positive
    /// value; a collapsed range falls back to the exact maximum. A series
    /// with no positive value yields the single threshold 0.
    pub fn log_thresholds(&self, n: usize) -> Result<Vec<f64>, StatsError> {
        let (lo, hi) = self.range(true)?;
        if !lo.is_finite() {
            return Ok(vec![0.0]);
        }
        Ok(spaced(lo, hi, n, |a, b, x| a * (b / a).powf(x)))
    }

    /// `n` evenly spaced thresholds between the 0.1st and 99.9th
    /// percentiles, for series already in dB.
    pub fn linear_thresholds(&self, n: usize) -> Result<Vec<f64>, StatsError> {
        let (lo, hi) = self.range(false)?;
        Ok(spaced(lo, hi, n, |a, b, x| a + (b - a) * x))
    }
}

/// See [`LevelSummary::percentile`].
pub fn percentile(values: &[f64], p: f64) -> Result<f64, StatsError> {
    LevelSummary::from_values(values).percentile(p)
}

/// See [`LevelSummary::log_thresholds`].
pub fn log_thresholds(values: &[f64], n: usize) -> Result<Vec<f64>, StatsError> {
    LevelSummary::from_values(values).log_thresholds(n)
}

/// See [`LevelSummary::linear_thresholds`].
pub fn linear_thresholds(values: &[f64], n: usize) -> Result<Vec<f64>, StatsError> {
    LevelSummary::from_values(values).linear_thresholds(n)
}

fn spaced(lo: f64, hi: f64, n: usize, at: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    let mut out: Vec<f64> = (0..n).map(|i| at(lo, hi, i as f64 / (n - 1) as f64)).collect();
    out[n - 1] = hi;
    out.dedup_by(|b, a| *b <= *a);
    out
}
