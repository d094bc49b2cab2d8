//! Random parameter sets for every interferer in a simulation window.
//!
//! Arrivals form a Poisson process of rate λ; each interferer then gets an
//! exponential lifetime, a carrier drawn uniformly over the selected
//! allocations, a uniform phase, and a power obtained by pushing a uniform
//! probability through the congestion model of its allocation. Morse timing
//! follows from the lifetime: 331 dots per interferer, ramps of a tenth of a
//! dot.

use rand::Rng;
use rand_distr::{Distribution, Exp, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocations::{AllocationError, AllocationTable};
use crate::congestion::{
    self, CoefficientTable, CongestionError, ScenarioConditions, DEFAULT_ANTENNA_FACTOR_DB, DEFAULT_LOAD_OHMS,
};
use crate::rng;
use crate::synth::OutputMode;

pub const DEFAULT_LAMBDA: f64 = 6.68;
pub const DEFAULT_MEAN_DURATION: f64 = 10.0;
/// Dots per interferer lifetime.
pub const DOTS_PER_INTERFERENCE: f64 = 331.0;
/// Rise and fall each last one dot divided by this.
pub const RAMP_DIVISOR: f64 = 10.0;
/// Words per minute × dot length, for the "PARIS" standard word.
pub const WPM_DOT_PRODUCT: f64 = 1.2;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Congestion(#[from] CongestionError),
}

/// Everything the user chooses for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub conditions: ScenarioConditions,
    pub allocation_filter: Vec<u32>,
    /// Interferences per second.
    pub lambda: f64,
    /// Mean interference lifetime, seconds.
    pub mean_duration: f64,
    /// Window length, seconds.
    pub total_time: f64,
    pub seed: u64,
    pub antenna_factor_db: f64,
    pub load_ohms: f64,
    pub sample_rate: f64,
    pub center_frequency: f64,
    pub output_mode: OutputMode,
}

impl ScenarioConfig {
    /// Config with the Field Day defaults for rate, duration and receiver
    /// constants; window 16 s, baseband output centred on the band.
    pub fn new(conditions: ScenarioConditions, allocation_filter: Vec<u32>, seed: u64) -> Self {
        Self {
            conditions,
            allocation_filter,
            lambda: DEFAULT_LAMBDA,
            mean_duration: DEFAULT_MEAN_DURATION,
            total_time: 16.0,
            seed,
            antenna_factor_db: DEFAULT_ANTENNA_FACTOR_DB,
            load_ohms: DEFAULT_LOAD_OHMS,
            sample_rate: 35.0e6,
            center_frequency: crate::synth::DEFAULT_CENTER_FREQUENCY,
            output_mode: OutputMode::Baseband,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.conditions.validate()?;
        let positive = [
            ("lambda", self.lambda),
            ("mean_duration", self.mean_duration),
            ("total_time", self.total_time),
            ("sample_rate", self.sample_rate),
            ("load_ohms", self.load_ohms),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.antenna_factor_db.is_finite() {
            return Err(ScenarioError::Config("antenna factor must be finite".into()));
        }
        if self.allocation_filter.is_empty() {
            return Err(ScenarioError::Config("allocation filter is empty".into()));
        }
        Ok(())
    }
}

/// One interferer's sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    /// 1-based interferer number; also its RNG stream.
    pub index: u32,
    pub allocation: u32,
    pub frequency_hz: f64,
    /// Carrier phase at t = 0, radians in [0, 2π).
    pub phase: f64,
    /// Carrier-on average power, dBm.
    pub power_dbm: f64,
    /// Peak carrier amplitude, volts.
    pub amplitude_v: f64,
    pub t_start: f64,
    pub t_dur: f64,
    pub dot: f64,
    pub wpm: f64,
    pub t_rise: f64,
    pub t_fall: f64,
}

impl InterferenceParams {
    /// Hand-built interferer keyed over `[t_start, t_start + t_dur]`: 1 V peak
    /// into 50 Ω at 0 Hz, zero phase, allocation 0. Timing follows
    /// [`derive_timing`].
    pub fn keyed(index: u32, t_start: f64, t_dur: f64) -> Self {
        let timing = derive_timing(t_dur);
        Self {
            index,
            allocation: 0,
            frequency_hz: 0.0,
            phase: 0.0,
            power_dbm: power_of_amplitude(1.0, DEFAULT_LOAD_OHMS),
            amplitude_v: 1.0,
            t_start,
            t_dur,
            dot: timing.dot,
            wpm: timing.wpm,
            t_rise: timing.t_rise,
            t_fall: timing.t_fall,
        }
    }

    pub fn with_carrier(mut self, frequency_hz: f64, phase: f64) -> Self {
        self.frequency_hz = frequency_hz;
        self.phase = phase;
        self
    }

    pub fn with_amplitude(mut self, amplitude_v: f64, load_ohms: f64) -> Self {
        self.amplitude_v = amplitude_v;
        self.power_dbm = power_of_amplitude(amplitude_v, load_ohms);
        self
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.t_dur
    }
}

/// Morse timing implied by one interferer lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseTiming {
    pub dot: f64,
    pub wpm: f64,
    pub t_rise: f64,
    pub t_fall: f64,
}

pub fn derive_timing(t_dur: f64) -> MorseTiming {
    let dot = t_dur / DOTS_PER_INTERFERENCE;
    MorseTiming { dot, wpm: WPM_DOT_PRODUCT / dot, t_rise: dot / RAMP_DIVISOR, t_fall: dot / RAMP_DIVISOR }
}

/// Start times of a Poisson process on `[0, total_time)`.
pub fn sample_arrivals<R: Rng + ?Sized>(rng: &mut R, lambda: f64, total_time: f64) -> Vec<f64> {
    let wait = Exp::new(lambda).expect("lambda must be positive");
    let mut starts = Vec::with_capacity((lambda * total_time * 1.05) as usize + 8);
    let mut t = 0.0;
    loop {
        t += wait.sample(rng);
        if t >= total_time {
            return starts;
        }
        starts.push(t);
    }
}

/// Exponentially distributed lifetime; never zero.
pub fn sample_duration<R: Rng + ?Sized>(rng: &mut R, mean_duration: f64) -> f64 {
    let dist = Exp::new(1.0 / mean_duration).expect("mean duration must be positive");
    loop {
        let d = dist.sample(rng);
        if d > 0.0 {
            return d;
        }
    }
}

/// Uniform sampler over the union of a set of allocations.
#[derive(Debug, Clone)]
pub struct FrequencySampler {
    /// `(k, f_low, f_high)` in filter order.
    bands: Vec<(u32, f64, f64)>,
    /// Running total of bandwidths.
    cumulative: Vec<f64>,
}

impl FrequencySampler {
    pub fn new(table: &AllocationTable, filter: &[u32]) -> Result<Self, ScenarioError> {
        if filter.is_empty() {
            return Err(ScenarioError::Config("allocation filter is empty".into()));
        }
        let mut bands = Vec::with_capacity(filter.len());
        for &k in filter {
            if bands.iter().any(|&(seen, _, _)| seen == k) {
                continue;
            }
            let a = table.get(k)?;
            bands.push((k, a.f_low_hz, a.f_high_hz));
        }
        let cumulative = bands
            .iter()
            .scan(0.0, |acc, &(_, lo, hi)| {
                *acc += hi - lo;
                Some(*acc)
            })
            .collect();
        Ok(Self { bands, cumulative })
    }

    pub fn total_bandwidth(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn bands(&self) -> &[(u32, f64, f64)] {
        &self.bands
    }

    /// Draw `(frequency, allocation)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u32) {
        loop {
            let x = rng.random::<f64>() * self.total_bandwidth();
            let i = self.cumulative.partition_point(|&c| c <= x).min(self.bands.len() - 1);
            let (k, lo, hi) = self.bands[i];
            let before = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
            let f = lo + (x - before);
            if (lo..hi).contains(&f) {
                return (f, k);
            }
        }
    }
}

/// Carrier frequency uniform over the union of `filter`'s allocations.
pub fn sample_frequency<R: Rng + ?Sized>(
    rng: &mut R,
    table: &AllocationTable,
    filter: &[u32],
) -> Result<f64, ScenarioError> {
    Ok(FrequencySampler::new(table, filter)?.sample(rng).0)
}

/// Peak amplitude of a sinusoid whose average power into `r_ohms` is `power_dbm`.
pub fn amplitude_of_power(power_dbm: f64, r_ohms: f64) -> f64 {
    (2.0 * r_ohms * 10f64.powf((power_dbm - 30.0) / 10.0)).sqrt()
}

pub fn power_of_amplitude(amplitude_v: f64, r_ohms: f64) -> f64 {
    10.0 * (amplitude_v * amplitude_v / (2.0 * r_ohms)).log10() + 30.0
}

/// `(P_l dBm, I_l volts)` for a given cumulative probability `u`.
pub fn amplitude_from_uniform(u: f64, alpha: f64, b: f64, af_db: f64, r_ohms: f64) -> Result<(f64, f64), ScenarioError> {
    let e = congestion::field_from_prob(u, alpha, b)?;
    let p = congestion::power_from_field(e, af_db, r_ohms);
    Ok((p, amplitude_of_power(p, r_ohms)))
}

/// Draw `(P_l dBm, I_l volts)` with the cumulative probability uniform on (0, 1).
pub fn sample_amplitude<R: Rng + ?Sized>(rng: &mut R, alpha: f64, b: f64, af_db: f64, r_ohms: f64) -> (f64, f64) {
    let u: f64 = Open01.sample(rng);
    amplitude_from_uniform(u, alpha, b, af_db, r_ohms).expect("open-interval probability")
}

/// Congestion parameters of one allocation under the scenario conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationModel {
    pub allocation: u32,
    pub center_hz: f64,
    pub alpha: f64,
    pub b: f64,
}

/// α_k and B_k for every allocation in the filter.
pub fn allocation_models(
    config: &ScenarioConfig,
    coeffs: &CoefficientTable,
    table: &AllocationTable,
) -> Result<Vec<AllocationModel>, ScenarioError> {
    let set = coeffs.for_regime(config.conditions.regime)?;
    let sampler = FrequencySampler::new(table, &config.allocation_filter)?;
    sampler
        .bands()
        .iter()
        .map(|&(k, lo, hi)| {
            let center_hz = (lo + hi) / 2.0;
            Ok(AllocationModel {
                allocation: k,
                center_hz,
                alpha: congestion::alpha_k(&config.conditions, center_hz, set)?,
                b: congestion::b_k(center_hz, set)?,
            })
        })
        .collect()
}

/// Sample the full interferer population of one run.
///
/// Per-interferer draws run in parallel on the current rayon pool; each uses
/// its own substream, so the result does not depend on the worker count.
pub fn sample_scenario(
    config: &ScenarioConfig,
    coeffs: &CoefficientTable,
    table: &AllocationTable,
) -> Result<Vec<InterferenceParams>, ScenarioError> {
    config.validate()?;
    let models = allocation_models(config, coeffs, table)?;
    let sampler = FrequencySampler::new(table, &config.allocation_filter)?;
    let starts = sample_arrivals(&mut rng::substream(config.seed, rng::ARRIVAL_STREAM), config.lambda, config.total_time);

    let params = starts
        .par_iter()
        .enumerate()
        .map(|(i, &t_start)| {
            let index = i as u32 + 1;
            let mut r = rng::substream(config.seed, index as u64);
            let t_dur = sample_duration(&mut r, config.mean_duration);
            let (frequency_hz, allocation) = sampler.sample(&mut r);
            let phase = r.random::<f64>() * std::f64::consts::TAU;
            let model = models.iter().find(|m| m.allocation == allocation).expect("model for every band");
            let (power_dbm, amplitude_v) =
                sample_amplitude(&mut r, model.alpha, model.b, config.antenna_factor_db, config.load_ohms);
            let timing = derive_timing(t_dur);
            InterferenceParams {
                index,
                allocation,
                frequency_hz,
                phase,
                power_dbm,
                amplitude_v,
                t_start,
                t_dur,
                dot: timing.dot,
                wpm: timing.wpm,
                t_rise: timing.t_rise,
                t_fall: timing.t_fall,
            }
        })
        .collect();
    Ok(params)
}
