//! Logistic spectral-congestion model and its inversion.
//!
//! For allocation `k`, congestion is the probability that a channel exceeds a
//! field-strength threshold `E` (dBµV/m):
//!
//! ```text
//! Q_k(E) = 1 / (1 + exp(-(α_k + B_k·E)))
//! B_k    = b0 + b1·f + b2·f²            (f in MHz)
//! ```
//!
//! `1 - Q_k` is the cumulative distribution of the field strength seen in the
//! allocation, so drawing a uniform probability and inverting it yields a
//! field-strength sample; [`power_from_field`] turns that into receiver power.
//!
//! # α_k expansion
//!
//! α_k is a linear combination of named basis functions, one coefficient
//! vector per regime, loaded from a `regime,term,value` CSV:
//!
//! | term          | basis function                    |
//! |---------------|-----------------------------------|
//! | `const`       | 1                                 |
//! | `f_mhz`       | f                                 |
//! | `f_mhz2`      | f²                                |
//! | `ssn`         | SSN                               |
//! | `ssn_f_mhz`   | SSN·f                             |
//! | `sin_week`    | sin(θ_w), θ_w = 2π·week/52        |
//! | `cos_week`    | cos(θ_w)                          |
//! | `lat_deg`     | latitude in degrees               |
//! | `long_deg`    | longitude in degrees              |
//! | `log10_bw_hz` | log10(receiver bandwidth in Hz)   |
//!
//! `b0`, `b1`, `b2` in the same file give the slope polynomial. `const`, `b0`,
//! `b1` and `b2` are required for every regime present; other terms default
//! to zero.

mod ssn;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocations::AllocationTable;

pub use ssn::{ImportReport, SsnError, SsnTable};

pub const DEFAULT_ANTENNA_FACTOR_DB: f64 = 10.0;
pub const DEFAULT_LOAD_OHMS: f64 = 50.0;

const SHIPPED_COEFFICIENTS: &str = include_str!("../../data/congestion_coefficients.csv");

#[derive(Debug, Error)]
pub enum CongestionError {
    #[error("cannot read coefficient file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("coefficient file row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("no coefficients for the {0} regime")]
    MissingRegime(Regime),
    #[error("{regime} coefficients lack required term `{term}`")]
    MissingTerm { regime: Regime, term: &'static str },
    #[error("coefficients are for the {coefficients} regime but conditions ask for {conditions}")]
    RegimeMismatch { coefficients: Regime, conditions: Regime },
    #[error("slope B_k = {value} at {f_mhz} MHz is not negative; congestion must fall as the threshold rises")]
    NonNegativeSlope { f_mhz: f64, value: f64 },
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityDomain(f64),
    #[error("invalid scenario conditions: {0}")]
    Conditions(String),
}

/// Stable-day or stable-night ionospheric regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Day,
    Night,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Day => "day",
            Regime::Night => "night",
        })
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" => Ok(Regime::Day),
            "night" => Ok(Regime::Night),
            other => Err(format!("unknown regime `{other}` (expected day or night)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConditions {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Week of the year, 1..=52.
    pub week: u32,
    pub ssn: f64,
    pub bandwidth_hz: f64,
    pub regime: Regime,
}

impl ScenarioConditions {
    pub fn validate(&self) -> Result<(), CongestionError> {
        let bad = |m: String| Err(CongestionError::Conditions(m));
        if !(1..=52).contains(&self.week) {
            return bad(format!("week {} not in 1..=52", self.week));
        }
        if !(self.ssn >= 0.0 && self.ssn.is_finite()) {
            return bad(format!("ssn {} must be a finite non-negative number", self.ssn));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad(format!("bandwidth {} Hz must be positive", self.bandwidth_hz));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return bad(format!("latitude {} not in [-90, 90]", self.latitude_deg));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return bad(format!("longitude {} not in [-180, 180]", self.longitude_deg));
        }
        Ok(())
    }

    /// Week angle θ_w = 2π·week/52.
    pub fn week_angle(&self) -> f64 {
        std::f64::consts::TAU * self.week as f64 / 52.0
    }
}

/// Coefficients of the α_k expansion. Field names follow the CSV term names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaTerms {
    pub constant: f64,
    pub f_mhz: f64,
    pub f_mhz2: f64,
    pub ssn: f64,
    pub ssn_f_mhz: f64,
    pub sin_week: f64,
    pub cos_week: f64,
    pub lat_deg: f64,
    pub long_deg: f64,
    pub log10_bw_hz: f64,
}

/// One regime's α_k expansion and B_k polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongestionCoefficients {
    pub regime: Regime,
    pub b0: f64,
    /// Per MHz.
    pub b1: f64,
    /// Per MHz².
    pub b2: f64,
    pub alpha: AlphaTerms,
}

impl CongestionCoefficients {
    /// Check that B_k < 0 at every listed frequency.
    pub fn check_slopes(&self, centers_hz: impl IntoIterator<Item = f64>) -> Result<(), CongestionError> {
        centers_hz.into_iter().try_for_each(|f| b_k(f, self).map(drop))
    }
}

/// Day and night coefficient sets as loaded from a coefficient file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientTable {
    sets: BTreeMap<Regime, CongestionCoefficients>,
}

const TERMS: [&str; 13] = [
    "const", "f_mhz", "f_mhz2", "ssn", "ssn_f_mhz", "sin_week", "cos_week", "lat_deg", "long_deg",
    "log10_bw_hz", "b0", "b1", "b2",
];
const REQUIRED: [&str; 4] = ["const", "b0", "b1", "b2"];

#[derive(Deserialize)]
struct CoefficientRow {
    regime: String,
    term: String,
    value: f64,
}

impl CoefficientTable {
    /// The synthetic default set compiled into the crate.
    pub fn shipped() -> Self {
        Self::from_reader(SHIPPED_COEFFICIENTS.as_bytes()).expect("shipped coefficients are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CongestionError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|source| CongestionError::Io { path: path.to_path_buf(), source })?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, CongestionError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut raw: BTreeMap<Regime, BTreeMap<&'static str, f64>> = BTreeMap::new();
        for (i, rec) in csv.deserialize::<CoefficientRow>().enumerate() {
            let row = i + 1;
            let parse_err = |message: String| CongestionError::Parse { row, message };
            let r = rec.map_err(|e| parse_err(e.to_string()))?;
            let regime: Regime = r.regime.parse().map_err(parse_err)?;
            let term = TERMS
                .iter()
                .copied()
                .find(|t| *t == r.term)
                .ok_or_else(|| parse_err(format!("unknown term `{}`", r.term)))?;
            if !r.value.is_finite() {
                return Err(parse_err(format!("value for `{term}` is not finite")));
            }
            if raw.entry(regime).or_default().insert(term, r.value).is_some() {
                return Err(parse_err(format!("duplicate {regime} term `{term}`")));
            }
        }

        let mut sets = BTreeMap::new();
        for (regime, terms) in raw {
            if let Some(term) = REQUIRED.iter().find(|t| !terms.contains_key(**t)) {
                return Err(CongestionError::MissingTerm { regime, term });
            }
            let get = |t: &str| terms.get(t).copied().unwrap_or(0.0);
            sets.insert(
                regime,
                CongestionCoefficients {
                    regime,
                    b0: get("b0"),
                    b1: get("b1"),
                    b2: get("b2"),
                    alpha: AlphaTerms {
                        constant: get("const"),
                        f_mhz: get("f_mhz"),
                        f_mhz2: get("f_mhz2"),
                        ssn: get("ssn"),
                        ssn_f_mhz: get("ssn_f_mhz"),
                        sin_week: get("sin_week"),
                        cos_week: get("cos_week"),
                        lat_deg: get("lat_deg"),
                        long_deg: get("long_deg"),
                        log10_bw_hz: get("log10_bw_hz"),
                    },
                },
            );
        }
        Ok(Self { sets })
    }

    pub fn insert(&mut self, coefficients: CongestionCoefficients) {
        self.sets.insert(coefficients.regime, coefficients);
    }

    pub fn for_regime(&self, regime: Regime) -> Result<&CongestionCoefficients, CongestionError> {
        self.sets.get(&regime).ok_or(CongestionError::MissingRegime(regime))
    }

    /// Check the slope sign at the amateur allocations of `table` for every regime.
    pub fn validate_against(&self, table: &AllocationTable) -> Result<(), CongestionError> {
        for set in self.sets.values() {
            let centers = table
                .amateur_indices()
                .iter()
                .filter_map(|&k| table.get(k).ok())
                .map(|a| a.center_hz());
            set.check_slopes(centers)?;
        }
        Ok(())
    }
}

/// α_k for allocation center `f_k_hz` under `cond`.
pub fn alpha_k(
    cond: &ScenarioConditions,
    f_k_hz: f64,
    coeffs: &CongestionCoefficients,
) -> Result<f64, CongestionError> {
    if coeffs.regime != cond.regime {
        return Err(CongestionError::RegimeMismatch { coefficients: coeffs.regime, conditions: cond.regime });
    }
    let a = &coeffs.alpha;
    let f = f_k_hz / 1e6;
    let theta = cond.week_angle();
    Ok(a.constant
        + a.f_mhz * f
        + a.f_mhz2 * f * f
        + a.ssn * cond.ssn
        + a.ssn_f_mhz * cond.ssn * f
        + a.sin_week * theta.sin()
        + a.cos_week * theta.cos()
        + a.lat_deg * cond.latitude_deg
        + a.long_deg * cond.longitude_deg
        + a.log10_bw_hz * cond.bandwidth_hz.log10())
}

/// Slope B_k = b0 + b1·f + b2·f² (f in MHz); must be negative.
pub fn b_k(f_k_hz: f64, coeffs: &CongestionCoefficients) -> Result<f64, CongestionError> {
    let f = f_k_hz / 1e6;
    let value = coeffs.b0 + coeffs.b1 * f + coeffs.b2 * f * f;
    if value < 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CongestionError::NonNegativeSlope { f_mhz: f, value })
    }
}

/// Congestion Q_k: probability of exceeding threshold `e_dbuv` (dBµV/m).
pub fn congestion(e_dbuv: f64, alpha: f64, b: f64) -> f64 {
    1.0 / (1.0 + (-(alpha + b * e_dbuv)).exp())
}

/// Field strength (dBµV/m) whose cumulative probability `1 - Q_k` equals `prob`.
pub fn field_from_prob(prob: f64, alpha: f64, b: f64) -> Result<f64, CongestionError> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(CongestionError::ProbabilityDomain(prob));
    }
    Ok((((1.0 - prob) / prob).ln() - alpha) / b)
}

/// Median field strength, `-α/B`.
pub fn median_field(alpha: f64, b: f64) -> f64 {
    -alpha / b
}

/// Average power (dBm) delivered into `r_ohms` by an antenna with factor
/// `af_db` (dB/m) in a field of `e_dbuv` (dBµV/m).
pub fn power_from_field(e_dbuv: f64, af_db: f64, r_ohms: f64) -> f64 {
    e_dbuv - af_db - 10.0 * r_ohms.log10() - 90.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::AMATEUR_INDICES;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FIG3_ALPHA: f64 = -10.8077;
    const FIG3_B: f64 = -0.084873;

    pub(crate) fn field_day_conditions(ssn: f64) -> ScenarioConditions {
        ScenarioConditions {
            latitude_deg: 28.0,
            longitude_deg: -15.35,
            week: 25,
            ssn,
            bandwidth_hz: 100.0,
            regime: Regime::Day,
        }
    }

    fn day() -> CongestionCoefficients {
        *CoefficientTable::shipped().for_regime(Regime::Day).unwrap()
    }

    #[test]
    fn shipped_set_reproduces_reference_point() {
        let table = AllocationTable::shipped();
        let ssn = SsnTable::shipped().lookup(2011, 6).unwrap();
        let f50 = table.get(50).unwrap().center_hz();
        let alpha = alpha_k(&field_day_conditions(ssn), f50, &day()).unwrap();
        assert_relative_eq!(alpha, FIG3_ALPHA, epsilon = 1e-9);
        assert_relative_eq!(b_k(f50, &day()).unwrap(), FIG3_B, epsilon = 1e-12);
    }

    #[test]
    fn shipped_alpha_in_typical_range() {
        let table = AllocationTable::shipped();
        let coeffs = CoefficientTable::shipped();
        for regime in [Regime::Day, Regime::Night] {
            let c = coeffs.for_regime(regime).unwrap();
            for &k in &AMATEUR_INDICES {
                let f = table.get(k).unwrap().center_hz();
                for ssn in (0..=200).step_by(5) {
                    for week in 1..=52 {
                        let mut cond = field_day_conditions(ssn as f64);
                        cond.week = week;
                        cond.regime = regime;
                        let a = alpha_k(&cond, f, c).unwrap();
                        assert!((-16.0..=-9.0).contains(&a), "{regime} k={k} ssn={ssn} week={week}: {a}");
                    }
                }
            }
        }
        coeffs.validate_against(&table).unwrap();
    }

    #[test]
    fn alpha_regime_mismatch_is_an_error() {
        let mut cond = field_day_conditions(50.0);
        cond.regime = Regime::Night;
        assert!(matches!(alpha_k(&cond, 14e6, &day()), Err(CongestionError::RegimeMismatch { .. })));
        let only_day = CoefficientTable::from_reader(
            "regime,term,value\nday,const,-11\nday,b0,-0.1\nday,b1,0\nday,b2,0\n".as_bytes(),
        )
        .unwrap();
        assert!(matches!(only_day.for_regime(Regime::Night), Err(CongestionError::MissingRegime(Regime::Night))));
    }

    #[test]
    fn coefficient_file_errors() {
        let unknown = "regime,term,value\nday,const,-11\nday,zeta,1\n";
        assert!(matches!(
            CoefficientTable::from_reader(unknown.as_bytes()),
            Err(CongestionError::Parse { row: 2, .. })
        ));
        let missing = "regime,term,value\nday,const,-11\nday,b0,-0.1\nday,b1,0\n";
        assert!(matches!(
            CoefficientTable::from_reader(missing.as_bytes()),
            Err(CongestionError::MissingTerm { term: "b2", .. })
        ));
    }

    #[test]
    fn slope_examples() {
        let mut c = day();
        c.b0 = -0.1;
        c.b1 = 0.0;
        c.b2 = 0.0;
        for f in [1.7e6, 14e6, 29e6] {
            assert_eq!(b_k(f, &c).unwrap(), -0.1);
        }
        let d = day();
        assert!(b_k(28e6, &d).unwrap().abs() > b_k(3.5e6, &d).unwrap().abs());
        c.b0 = 0.01;
        assert!(matches!(b_k(14e6, &c), Err(CongestionError::NonNegativeSlope { .. })));
    }

    #[test]
    fn congestion_examples() {
        let (a, b) = (FIG3_ALPHA, FIG3_B);
        assert_relative_eq!(congestion(-a / b, a, b), 0.5, epsilon = 1e-15);
        assert!(congestion(1e6, a, b) < 1e-300);
        assert_eq!(congestion(0.0, a, b), 1.0 / (1.0 + 10.8077f64.exp()));
    }

    #[test]
    fn inversion_examples() {
        let (a, b) = (FIG3_ALPHA, FIG3_B);
        assert_eq!(field_from_prob(0.5, a, b).unwrap(), -a / b);
        // -(-10.8077)/(-0.084873)
        assert_relative_eq!(field_from_prob(0.5, a, b).unwrap(), -127.33967, epsilon = 1e-4);
        let hi = field_from_prob(0.9, a, b).unwrap();
        let lo = field_from_prob(0.1, a, b).unwrap();
        assert_relative_eq!((hi + lo) / 2.0, median_field(a, b), epsilon = 1e-9);
        assert!(matches!(field_from_prob(0.0, a, b), Err(CongestionError::ProbabilityDomain(_))));
        assert!(matches!(field_from_prob(1.0, a, b), Err(CongestionError::ProbabilityDomain(_))));
    }

    #[test]
    fn power_examples() {
        assert_relative_eq!(power_from_field(0.0, 10.0, 50.0), -116.98970004336019, epsilon = 1e-12);
        assert_eq!(power_from_field(0.0, 0.0, 1.0), -90.0);
        assert_eq!(DEFAULT_ANTENNA_FACTOR_DB, 10.0);
    }

    #[test]
    fn congestion_strictly_decreasing_on_grid() {
        for (a, b) in [(FIG3_ALPHA, FIG3_B), (-9.0, -0.2), (-16.0, -0.05)] {
            let mid = -a / b;
            let qs: Vec<f64> = (0..1000).map(|i| congestion(mid - 100.0 + 0.2 * i as f64, a, b)).collect();
            assert!(qs.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn conditions_validation() {
        let mut c = field_day_conditions(10.0);
        c.validate().unwrap();
        c.week = 53;
        assert!(c.validate().is_err());
        c.week = 1;
        c.ssn = -1.0;
        assert!(c.validate().is_err());
        c.ssn = 0.0;
        c.bandwidth_hz = 0.0;
        assert!(c.validate().is_err());
        c.bandwidth_hz = 1.0;
        c.longitude_deg = 181.0;
        assert!(c.validate().is_err());
    }

    proptest! {
        #[test]
        fn inversion_round_trip(p in 1e-6f64..(1.0 - 1e-6), a in -16.0f64..-9.0, b in -0.2f64..-0.01) {
            let e = field_from_prob(p, a, b).unwrap();
            prop_assert!(((1.0 - congestion(e, a, b)) - p).abs() < 1e-9);
        }

        #[test]
        fn power_is_unit_slope_affine(e in -300.0f64..300.0, d in -50.0f64..50.0) {
            let p0 = power_from_field(e, 10.0, 50.0);
            let p1 = power_from_field(e + d, 10.0, 50.0);
            prop_assert!(((p1 - p0) - d).abs() < 1e-9);
        }
    }
}
