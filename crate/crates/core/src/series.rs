//! Sampled `(time, current, voltage)` records.
//!
//! A series is split into segments, one per protocol run. Each segment
//! starts from the fully charged state of whatever parameter set drives
//! it, which is what lets composite datasets be replayed (and scored)
//! segment by segment.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "time_s,current_a,voltage_v";

/// One protocol run inside a series. `start..end` indexes the sample rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub start: usize,
    pub end: usize,
    /// Time at which the segment's initial state applies; the first row of
    /// the segment lies one sample step later.
    pub t0: f64,
    /// Bulk stoichiometry `[negative, positive]` at segment start.
    pub start_soc: [f64; 2],
    /// Bulk stoichiometry `[negative, positive]` at segment end.
    pub end_soc: [f64; 2],
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Column-oriented time series. Current is positive on discharge.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time_s: Vec<f64>,
    pub current_a: Vec<f64>,
    pub voltage_v: Vec<f64>,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Sidecar metadata written next to a series CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesMeta {
    segments: Vec<Segment>,
    #[serde(default)]
    warnings: Vec<String>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }

    pub fn push(&mut self, t: f64, i: f64, v: f64) {
        self.time_s.push(t);
        self.current_a.push(i);
        self.voltage_v.push(v);
    }

    /// Elapsed time from the first segment's origin to the last sample.
    pub fn duration_s(&self) -> f64 {
        match (self.segments.first(), self.time_s.last()) {
            (Some(seg), Some(&t)) => t - seg.t0,
            (None, Some(&t)) => t,
            _ => 0.0,
        }
    }

    pub fn duration_h(&self) -> f64 {
        self.duration_s() / 3600.0
    }

    pub fn segment_labels(&self) -> Vec<&str> {
        self.segments.iter().map(|s| s.label.as_str()).collect()
    }

    /// Checks strictly increasing time and segment coverage.
    pub fn validate(&self) -> Result<()> {
        let n = self.time_s.len();
        if self.current_a.len() != n || self.voltage_v.len() != n {
            return Err(Error::InvalidSeries("column lengths differ".into()));
        }
        if let Some(k) = self.time_s.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries(format!(
                "time not strictly increasing at row {}",
                k + 1
            )));
        }
        let mut expect = 0;
        for seg in &self.segments {
            if seg.start != expect || seg.end < seg.start || seg.end > n {
                return Err(Error::InvalidSeries(format!(
                    "segment `{}` does not tile the rows",
                    seg.label
                )));
            }
            if seg.start < seg.end && !(self.time_s[seg.start] > seg.t0) {
                return Err(Error::InvalidSeries(format!(
                    "segment `{}` origin is not before its first sample",
                    seg.label
                )));
            }
            expect = seg.end;
        }
        if !self.segments.is_empty() && expect != n {
            return Err(Error::InvalidSeries("segments do not cover all rows".into()));
        }
        Ok(())
    }

    /// Segments to replay; a series without marks is one segment from t = 0.
    pub fn replay_segments(&self) -> Vec<Segment> {
        if self.segments.is_empty() {
            vec![Segment {
                label: String::new(),
                start: 0,
                end: self.len(),
                t0: 0.0,
                start_soc: [f64::NAN; 2],
                end_soc: [f64::NAN; 2],
            }]
        } else {
            self.segments.clone()
        }
    }

    /// Copy of the rows of one segment, re-based so that it is standalone.
    pub fn segment_series(&self, seg: &Segment) -> TimeSeries {
        TimeSeries {
            time_s: self.time_s[seg.start..seg.end].to_vec(),
            current_a: self.current_a[seg.start..seg.end].to_vec(),
            voltage_v: self.voltage_v[seg.start..seg.end].to_vec(),
            segments: vec![Segment {
                start: 0,
                end: seg.len(),
                ..seg.clone()
            }],
            warnings: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 48 + 32);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for k in 0..self.len() {
            // shortest round-trip representation: lossless
            let _ = writeln!(
                out,
                "{:?},{:?},{:?}",
                self.time_s[k], self.current_a[k], self.voltage_v[k]
            );
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn from_csv_reader(rdr: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        let headers = reader.headers()?.iter().collect::<Vec<_>>().join(",");
        if headers != CSV_HEADER {
            return Err(Error::InvalidSeries(format!(
                "expected header `{CSV_HEADER}`, got `{headers}`"
            )));
        }
        let mut ts = TimeSeries::default();
        for rec in reader.deserialize() {
            let (t, i, v): (f64, f64, f64) = rec?;
            ts.push(t, i, v);
        }
        ts.validate()?;
        Ok(ts)
    }

    fn meta_path(csv_path: &Path) -> std::path::PathBuf {
        csv_path.with_extension("segments.json")
    }

    /// Writes `<path>` (CSV rows) and `<stem>.segments.json` (segment marks).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))?;
        let meta = SeriesMeta {
            segments: self.segments.clone(),
            warnings: self.warnings.clone(),
        };
        let mp = Self::meta_path(path);
        std::fs::write(&mp, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&mp, e))?;
        Ok(())
    }

    /// Reads a CSV and, if present, its segment sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut ts = Self::from_csv_reader(file)?;
        let mp = Self::meta_path(path);
        if mp.exists() {
            let text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
            let meta: SeriesMeta = serde_json::from_str(&text)?;
            ts.segments = meta.segments;
            ts.warnings = meta.warnings;
            ts.validate()?;
        }
        Ok(ts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimeSeries {
        let mut ts = TimeSeries::default();
        for k in 1..=5 {
            ts.push(k as f64, 0.1 * k as f64, 4.0 - 0.01 * k as f64);
        }
        ts.segments.push(Segment {
            label: "x".into(),
            start: 0,
            end: 5,
            t0: 0.0,
            start_soc: [0.9, 0.1],
            end_soc: [0.8, 0.2],
        });
        ts
    }

    #[test]
    fn csv_is_lossless() {
        let mut ts = sample();
        ts.voltage_v[2] = 3.141592653589793;
        ts.current_a[1] = 1.0 / 3.0;
        let back = TimeSeries::from_csv_reader(ts.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.time_s, ts.time_s);
        assert_eq!(back.current_a, ts.current_a);
        assert_eq!(back.voltage_v, ts.voltage_v);
    }

    #[test]
    fn header_is_exact() {
        let s = sample().to_csv_string();
        assert!(s.starts_with("time_s,current_a,voltage_v\n"));
        assert!(TimeSeries::from_csv_reader("t,i,v\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_non_increasing_time() {
        let mut ts = sample();
        ts.time_s[3] = ts.time_s[2];
        assert!(ts.validate().is_err());
    }

    #[test]
    fn save_and_load_keep_segments() {
        let dir = std::env::temp_dir().join(format!("spmid-series-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("s.csv");
        let ts = sample();
        ts.save(&p).unwrap();
        let back = TimeSeries::load(&p).unwrap();
        assert_eq!(back, ts);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn duration_counts_from_origin() {
        assert_eq!(sample().duration_s(), 5.0);
    }
}
