//! Monthly sunspot-number tables.
//!
//! The canonical schema is a CSV with header `year,month,ssn`. Observed
//! (WDC/SILSO) and predicted (SWPC) tables share it; [`SsnTable::import`]
//! converts the common upstream text layouts into it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SHIPPED_SSN: &str = include_str!("../../data/ssn_monthly.csv");

#[derive(Debug, Error)]
pub enum SsnError {
    #[error("cannot read sunspot table {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sunspot table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no sunspot number for {year}-{month:02}{}", describe_nearest(nearest))]
    NotFound { year: i32, month: u32, nearest: Vec<(i32, u32)> },
}

fn describe_nearest(nearest: &[(i32, u32)]) -> String {
    if nearest.is_empty() {
        return " (table is empty)".into();
    }
    let mut s = String::from(" (nearest available:");
    for (y, m) in nearest {
        let _ = write!(s, " {y}-{m:02}");
    }
    s.push(')');
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    year: i32,
    month: u32,
    ssn: f64,
}

/// Rows accepted and rejected by a lenient import.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportReport {
    pub table: SsnTable,
    /// `(line number, reason)` for every rejected data line.
    pub rejected: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SsnTable {
    entries: BTreeMap<(i32, u32), f64>,
}

impl SsnTable {
    /// Synthetic 1984–2019 table compiled into the crate (see `data/README.md`).
    pub fn shipped() -> Self {
        Self::from_reader(SHIPPED_SSN.as_bytes()).expect("shipped sunspot table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SsnError> {
        let path = path.as_ref();
        let file =
            std::fs::File::open(path).map_err(|source| SsnError::Io { path: path.to_path_buf(), source })?;
        Self::from_reader(file)
    }

    /// Strict reader for the canonical schema.
    pub fn from_reader(reader: impl Read) -> Result<Self, SsnError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = Self::default();
        for (i, rec) in csv.deserialize::<Row>().enumerate() {
            // header is line 1
            let line = i + 2;
            let r = rec.map_err(|e| SsnError::Parse { line, message: e.to_string() })?;
            table.insert(r.year, r.month, r.ssn).map_err(|message| SsnError::Parse { line, message })?;
        }
        Ok(table)
    }

    /// Lenient reader for upstream layouts.
    ///
    /// Accepted per line, with `,` `;` tab or space separators:
    /// - `year,month,ssn` (canonical, header optional)
    /// - `year;month;decimal_year;ssn;...` (WDC/SILSO monthly files)
    /// - `YYYY-MM,ssn` (SWPC time-tag tables)
    ///
    /// Blank lines and lines starting with `#` or `:` are skipped, as is a
    /// leading header line. Bad lines are reported, not fatal.
    pub fn import(reader: impl Read) -> Result<ImportReport, SsnError> {
        let mut text = String::new();
        let mut reader = reader;
        reader
            .read_to_string(&mut text)
            .map_err(|e| SsnError::Parse { line: 0, message: e.to_string() })?;

        let mut table = Self::default();
        let mut rejected = Vec::new();
        let mut seen_data = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(':') {
                continue;
            }
            let tokens: Vec<&str> =
                trimmed.split(|c: char| c == ',' || c == ';' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
            let looks_numeric = tokens.first().is_some_and(|t| t.starts_with(|c: char| c.is_ascii_digit() || c == '-'));
            if !seen_data && !looks_numeric {
                // header
                seen_data = true;
                continue;
            }
            seen_data = true;
            match parse_tokens(&tokens).and_then(|(y, m, v)| table.insert(y, m, v)) {
                Ok(()) => {}
                Err(reason) => rejected.push((line, reason)),
            }
        }
        Ok(ImportReport { table, rejected })
    }

    /// Insert one month, rejecting invalid or duplicate entries.
    pub fn insert(&mut self, year: i32, month: u32, ssn: f64) -> Result<(), String> {
        if !(1..=12).contains(&month) {
            return Err(format!("month {month} not in 1..=12"));
        }
        if !(ssn.is_finite() && ssn >= 0.0) {
            return Err(format!("sunspot number {ssn} for {year}-{month:02} must be finite and non-negative"));
        }
        if self.entries.insert((year, month), ssn).is_some() {
            return Err(format!("duplicate entry for {year}-{month:02}"));
        }
        Ok(())
    }

    pub fn lookup(&self, year: i32, month: u32) -> Result<f64, SsnError> {
        if let Some(&v) = self.entries.get(&(year, month)) {
            return Ok(v);
        }
        let key = (year, month);
        let before = self.entries.range(..key).next_back().map(|(k, _)| *k);
        let after = self.entries.range(key..).next().map(|(k, _)| *k);
        Err(SsnError::NotFound { year, month, nearest: before.into_iter().chain(after).collect() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(year, month, ssn)` in chronological order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, u32, f64)> + '_ {
        self.entries.iter().map(|(&(y, m), &v)| (y, m, v))
    }

    /// Entries between two months, inclusive.
    pub fn range(&self, from: (i32, u32), to: (i32, u32)) -> impl Iterator<Item = (i32, u32, f64)> + '_ {
        self.entries.range(from..=to).map(|(&(y, m), &v)| (y, m, v))
    }

    pub fn write_csv(&self, writer: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for (year, month, ssn) in self.iter() {
            out.serialize(Row { year, month, ssn })?;
        }
        out.flush()?;
        Ok(())
    }
}

fn parse_tokens(tokens: &[&str]) -> Result<(i32, u32, f64), String> {
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    let int = |s: &str| s.parse::<i64>().map_err(|_| format!("`{s}` is not an integer"));

    if let Some((y, m)) = tokens.first().and_then(|t| t.split_once('-')).filter(|(y, _)| !y.is_empty()) {
        let ssn = tokens.get(1).ok_or("missing sunspot value after time tag")?;
        return Ok((int(y)? as i32, int(m)? as u32, num(ssn)?));
    }
    match tokens {
        [y, m, frac, ssn, ..] if frac.contains('.') => Ok((int(y)? as i32, int(m)? as u32, num(ssn)?)),
        [y, m, ssn, ..] => Ok((int(y)? as i32, int(m)? as u32, num(ssn)?)),
        _ => Err(format!("expected at least 3 fields, found {}", tokens.len())),
    }
}
