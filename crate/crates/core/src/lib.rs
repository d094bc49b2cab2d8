//! Interference simulator for the whole HF band (1.606–30 MHz).
//!
//! The crate turns a location, a week, a solar-activity level and a set of
//! frequency allocations into a population of CW-Morse interferers whose
//! amplitudes follow a logistic spectral-congestion model, and synthesizes
//! their summed waveform either as real RF samples or as complex baseband.
//!
//! Module map:
//!
//! - [`allocations`]: the 95-allocation partition of the band.
//! - [`congestion`]: congestion model, its inversion to field strength, power
//!   conversion and sunspot-number tables.
//! - [`scenario`]: sampling of every interferer's random parameters.
//! - [`morse`]: the "PARIS" keying envelope with raised-cosine edges.
//! - [`synth`]: RF and baseband synthesis, plus the down-conversion chain.
//! - [`stats`]: APD, level-crossing and average-cross-duration statistics.
//!
//! All randomness is drawn from per-interferer ChaCha substreams (see
//! [`rng`]), so results depend only on the seed and the data files.

pub mod allocations;
pub mod congestion;
pub mod morse;
pub mod rng;
pub mod scenario;
pub mod stats;
pub mod synth;

pub use allocations::{AllocationTable, FrequencyAllocation};
pub use congestion::{CoefficientTable, CongestionCoefficients, Regime, ScenarioConditions, SsnTable};
pub use morse::MorsePattern;
pub use scenario::{InterferenceParams, ScenarioConfig};
pub use stats::{CrossingStats, EnvelopeSeries};
pub use synth::{OutputMode, SampleBlock, Samples};
