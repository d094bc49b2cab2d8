//! Frequency allocations of the modeled spectrum.
//!
//! The band 1.606–30 MHz is split into 95 contiguous allocations, numbered
//! 1..=95 in increasing frequency. Membership is half-open, `[f_low, f_high)`,
//! so a frequency on a shared edge belongs to the upper allocation.
//!
//! The shipped table (see `data/allocations.csv`) places the amateur bands at
//! indices 11, 26, 37, 50, 62, 71, 82, 92, 93 and 94 and fills the rest with
//! ITU service boundaries. Any table in the same CSV schema can replace it.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BAND_LOW_HZ: f64 = 1.606e6;
pub const BAND_HIGH_HZ: f64 = 30.0e6;
pub const ALLOCATION_COUNT: usize = 95;

/// Amateur allocations used by the Field Day scenario.
pub const AMATEUR_INDICES: [u32; 10] = [11, 26, 37, 50, 62, 71, 82, 92, 93, 94];

const SHIPPED_TABLE: &str = include_str!("../data/allocations.csv");

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error("cannot read allocation table {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("allocation table row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("allocation table row {row} (k={k}): {message}")]
    Validation { row: usize, k: u32, message: String },
    #[error("allocation table has {found} rows, expected {ALLOCATION_COUNT}")]
    Count { found: usize },
    #[error("allocation index {0} is not in 1..=95")]
    UnknownIndex(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAllocation {
    pub index: u32,
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub service: String,
}

impl FrequencyAllocation {
    /// Central frequency `f_k` used by the congestion model.
    pub fn center_hz(&self) -> f64 {
        (self.f_low_hz + self.f_high_hz) / 2.0
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.f_high_hz - self.f_low_hz
    }

    pub fn contains(&self, f_hz: f64) -> bool {
        self.f_low_hz <= f_hz && f_hz < self.f_high_hz
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    k: u32,
    f_low_hz: f64,
    f_high_hz: f64,
    service: String,
}

/// Validated, immutable allocation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTable {
    allocations: Vec<FrequencyAllocation>,
    amateur_indices: Vec<u32>,
}

impl AllocationTable {
    /// The table compiled into the crate.
    pub fn shipped() -> Self {
        Self::from_reader(SHIPPED_TABLE.as_bytes()).expect("shipped allocation table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AllocationError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| AllocationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, AllocationError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut allocations: Vec<FrequencyAllocation> = Vec::with_capacity(ALLOCATION_COUNT);
        for (i, record) in csv.deserialize::<Row>().enumerate() {
            let row = i + 1;
            let r = record.map_err(|e| AllocationError::Parse { row, message: e.to_string() })?;
            let invalid = |message: String| AllocationError::Validation { row, k: r.k, message };

            if r.k as usize != row {
                return Err(invalid(format!("expected index {row}, indices must run 1..=95 in order")));
            }
            if !(r.f_low_hz.is_finite() && r.f_high_hz.is_finite()) || r.f_low_hz >= r.f_high_hz {
                return Err(invalid(format!("f_low {} must be below f_high {}", r.f_low_hz, r.f_high_hz)));
            }
            if r.f_low_hz < BAND_LOW_HZ || r.f_high_hz > BAND_HIGH_HZ {
                return Err(invalid(format!(
                    "edges [{}, {}) fall outside {BAND_LOW_HZ}..{BAND_HIGH_HZ} Hz",
                    r.f_low_hz, r.f_high_hz
                )));
            }
            if let Some(prev) = allocations.last() {
                if r.f_low_hz < prev.f_high_hz {
                    return Err(invalid(format!(
                        "overlaps allocation {} (starts at {} Hz, previous ends at {} Hz)",
                        prev.index, r.f_low_hz, prev.f_high_hz
                    )));
                }
            }
            allocations.push(FrequencyAllocation {
                index: r.k,
                f_low_hz: r.f_low_hz,
                f_high_hz: r.f_high_hz,
                service: r.service,
            });
        }
        if allocations.len() != ALLOCATION_COUNT {
            return Err(AllocationError::Count { found: allocations.len() });
        }
        Ok(Self { allocations, amateur_indices: AMATEUR_INDICES.to_vec() })
    }

    /// Replace the amateur index set.
    pub fn with_amateur_indices(mut self, indices: Vec<u32>) -> Result<Self, AllocationError> {
        if let Some(&bad) = indices.iter().find(|&&k| k == 0 || k as usize > ALLOCATION_COUNT) {
            return Err(AllocationError::UnknownIndex(bad));
        }
        self.amateur_indices = indices;
        Ok(self)
    }

    pub fn allocations(&self) -> &[FrequencyAllocation] {
        &self.allocations
    }

    pub fn amateur_indices(&self) -> &[u32] {
        &self.amateur_indices
    }

    pub fn get(&self, k: u32) -> Result<&FrequencyAllocation, AllocationError> {
        k.checked_sub(1)
            .and_then(|i| self.allocations.get(i as usize))
            .ok_or(AllocationError::UnknownIndex(k))
    }

    /// Index of the allocation holding `f_hz`, or `None` when it lies in no allocation.
    pub fn allocation_of(&self, f_hz: f64) -> Option<u32> {
        let pos = self.allocations.partition_point(|a| a.f_low_hz <= f_hz);
        let candidate = self.allocations.get(pos.checked_sub(1)?)?;
        candidate.contains(f_hz).then_some(candidate.index)
    }

    pub fn write_csv(&self, writer: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for a in &self.allocations {
            out.serialize(Row {
                k: a.index,
                f_low_hz: a.f_low_hz,
                f_high_hz: a.f_high_hz,
                service: a.service.clone(),
            })?;
        }
        out.flush()?;
        Ok(())
    }
}
