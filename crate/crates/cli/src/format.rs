//! Sample files.
//!
//! Baseband samples are little-endian 32-bit float pairs `(I, Q)`,
//! interleaved (`cf32le`); RF samples are single little-endian 32-bit floats
//! (`f32le`). A text header sits next to the data in `<file>.hdr`, one
//! `key=value` per line:
//!
//! ```text
//! format=cf32le
//! mode=baseband
//! sample_rate=34757500
//! center_frequency=15803000
//! start_index=0
//! start_time=0
//! samples=556120000
//! ```
//!
//! Sample `k` of the file sits at time `(start_index + k) / sample_rate`.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hfsim_core::{OutputMode, SampleBlock, Samples};
use num_complex::Complex64;

use crate::error::CliError;

pub const IQ_FILE: &str = "samples.iq";
pub const RF_FILE: &str = "samples.rf";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Cf32Le,
    F32Le,
}

impl SampleFormat {
    pub fn for_mode(mode: OutputMode) -> Self {
        match mode {
            OutputMode::Rf => SampleFormat::F32Le,
            OutputMode::Baseband => SampleFormat::Cf32Le,
        }
    }

    pub fn bytes_per_sample(self) -> u64 {
        match self {
            SampleFormat::Cf32Le => 8,
            SampleFormat::F32Le => 4,
        }
    }
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::Cf32Le => "cf32le",
            SampleFormat::F32Le => "f32le",
        })
    }
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cf32le" => Ok(SampleFormat::Cf32Le),
            "f32le" => Ok(SampleFormat::F32Le),
            other => Err(format!("unknown sample format `{other}`")),
        }
    }
}

pub fn default_file_name(mode: OutputMode) -> &'static str {
    match mode {
        OutputMode::Rf => RF_FILE,
        OutputMode::Baseband => IQ_FILE,
    }
}

pub fn header_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".hdr");
    PathBuf::from(name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleHeader {
    pub format: SampleFormat,
    pub mode: OutputMode,
    pub sample_rate: f64,
    pub center_frequency: f64,
    pub start_index: i64,
    pub samples: u64,
}

impl SampleHeader {
    pub fn start_time(&self) -> f64 {
        self.start_index as f64 / self.sample_rate
    }

    pub fn to_text(&self) -> String {
        format!(
            "format={}\nmode={}\nsample_rate={}\ncenter_frequency={}\nstart_index={}\nstart_time={}\nsamples={}\n",
            self.format,
            self.mode,
            self.sample_rate,
            self.center_frequency,
            self.start_index,
            self.start_time(),
            self.samples
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut fields = std::collections::HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(format!("header line {}: expected key=value", i + 1))?;
            fields.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        fn get<T: FromStr>(f: &std::collections::HashMap<String, String>, key: &str) -> Result<T, String> {
            let raw = f.get(key).ok_or(format!("header lacks `{key}`"))?;
            raw.parse().map_err(|_| format!("header `{key}` has invalid value `{raw}`"))
        }
        let format: SampleFormat = get(&fields, "format")?;
        let mode: OutputMode = get(&fields, "mode")?;
        if format != SampleFormat::for_mode(mode) {
            return Err(format!("format {format} does not match mode {mode}"));
        }
        let sample_rate: f64 = get(&fields, "sample_rate")?;
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(format!("header sample_rate {sample_rate} must be positive"));
        }
        Ok(Self {
            format,
            mode,
            sample_rate,
            center_frequency: get(&fields, "center_frequency")?,
            start_index: get(&fields, "start_index")?,
            samples: get(&fields, "samples")?,
        })
    }

    pub fn read(data: &Path) -> Result<Self, CliError> {
        let hdr = header_path(data);
        let text = std::fs::read_to_string(&hdr)
            .map_err(|e| CliError::data(format!("cannot read sample header {}: {e}", hdr.display())))?;
        Self::parse(&text).map_err(|e| CliError::data(format!("{}: {e}", hdr.display())))
    }
}

/// Streams contiguous blocks into a sample file and its header.
#[derive(Debug)]
pub struct SampleWriter {
    path: PathBuf,
    out: BufWriter<File>,
    header: Option<SampleHeader>,
}

impl SampleWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::with_capacity(1 << 20, file), header: None })
    }

    pub fn write_block(&mut self, block: &SampleBlock) -> Result<(), CliError> {
        let header = self.header.get_or_insert_with(|| SampleHeader {
            format: SampleFormat::for_mode(block.mode),
            mode: block.mode,
            sample_rate: block.sample_rate,
            center_frequency: block.center_frequency,
            start_index: block.start_index,
            samples: 0,
        });
        if block.mode != header.mode || block.sample_rate != header.sample_rate {
            return Err(CliError::runtime("block does not match the file's mode or sample rate"));
        }
        if block.start_index != header.start_index + header.samples as i64 {
            return Err(CliError::runtime(format!(
                "block starting at sample {} leaves a gap in {}",
                block.start_index,
                self.path.display()
            )));
        }
        match &block.samples {
            Samples::Real(x) => {
                for &v in x {
                    self.out.write_all(&(v as f32).to_le_bytes())?;
                }
            }
            Samples::Complex(z) => {
                for v in z {
                    self.out.write_all(&(v.re as f32).to_le_bytes())?;
                    self.out.write_all(&(v.im as f32).to_le_bytes())?;
                }
            }
        }
        header.samples += block.len() as u64;
        Ok(())
    }

    /// Flush data and write the header. `fallback` describes an empty file.
    pub fn finish(mut self, fallback: SampleHeader) -> Result<SampleHeader, CliError> {
        self.out.flush()?;
        let header = self.header.unwrap_or(fallback);
        std::fs::write(header_path(&self.path), header.to_text())?;
        Ok(header)
    }
}

/// Reads a sample file back in blocks.
#[derive(Debug)]
pub struct SampleReader {
    header: SampleHeader,
    input: BufReader<File>,
    next_index: i64,
    remaining: u64,
}

impl SampleReader {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let header = SampleHeader::read(path)?;
        let file =
            File::open(path).map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
        let len = file.metadata()?.len();
        let expected = header.samples * header.format.bytes_per_sample();
        if len != expected {
            return Err(CliError::data(format!(
                "{} holds {len} bytes but its header promises {} {} samples ({expected} bytes)",
                path.display(),
                header.samples,
                header.format
            )));
        }
        Ok(Self {
            next_index: header.start_index,
            remaining: header.samples,
            header,
            input: BufReader::with_capacity(1 << 20, file),
        })
    }

    pub fn header(&self) -> &SampleHeader {
        &self.header
    }

    /// Next block of at most `max` samples.
    pub fn read_block(&mut self, max: usize) -> Result<Option<SampleBlock>, CliError> {
        if self.remaining == 0 {
            return Ok(None);
        }
        let n = self.remaining.min(max.max(1) as u64) as usize;
        let mut bytes = vec![0u8; n * self.header.format.bytes_per_sample() as usize];
        self.input.read_exact(&mut bytes)?;
        let floats = bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64);
        let samples = match self.header.format {
            SampleFormat::F32Le => Samples::Real(floats.collect()),
            SampleFormat::Cf32Le => {
                let v: Vec<f64> = floats.collect();
                Samples::Complex(v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
            }
        };
        let block = SampleBlock {
            start_index: self.next_index,
            sample_rate: self.header.sample_rate,
            samples,
            mode: self.header.mode,
            center_frequency: self.header.center_frequency,
        };
        self.next_index += n as i64;
        self.remaining -= n as u64;
        Ok(Some(block))
    }
}

impl Iterator for SampleReader {
    type Item = Result<SampleBlock, CliError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_block(1 << 20).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = SampleHeader {
            format: SampleFormat::Cf32Le,
            mode: OutputMode::Baseband,
            sample_rate: 34_757_500.0,
            center_frequency: 15.803e6,
            start_index: 0,
            samples: 12,
        };
        assert_eq!(SampleHeader::parse(&h.to_text()).unwrap(), h);
        let bad = h.to_text().replace("cf32le", "f32le");
        assert!(SampleHeader::parse(&bad).is_err());
        assert!(SampleHeader::parse("format=cf32le\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(IQ_FILE);
        let mut w = SampleWriter::create(&path).unwrap();
        let block = |start: i64, n: usize| SampleBlock {
            start_index: start,
            sample_rate: 1e3,
            samples: Samples::Complex((0..n).map(|i| Complex64::new(i as f64 * 0.5, -(i as f64))).collect()),
            mode: OutputMode::Baseband,
            center_frequency: 7e6,
        };
        w.write_block(&block(0, 5)).unwrap();
        assert!(w.write_block(&block(6, 2)).is_err());
        w.write_block(&block(5, 3)).unwrap();
        let fallback = SampleHeader {
            format: SampleFormat::Cf32Le,
            mode: OutputMode::Baseband,
            sample_rate: 1e3,
            center_frequency: 7e6,
            start_index: 0,
            samples: 0,
        };
        let h = w.finish(fallback).unwrap();
        assert_eq!(h.samples, 8);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 64);
        let mut r = SampleReader::open(&path).unwrap();
        let b = r.read_block(100).unwrap().unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b.complex().unwrap()[6], Complex64::new(0.5, -1.0));
        assert!(r.read_block(100).unwrap().is_none());
    }
}
