//! Plain-text interchange: CSV series, classical trajectories, key=value
//! manifests and parameter files.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit for bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::semiclassical::{ClassicalState, Trajectory};

pub const TIMESERIES_HEADER: [&str; 3] = ["t", "value", "label"];
pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "q1", "p1", "q2", "p2", "q3", "p3", "energy"];

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::parse(
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn field_f64(rec: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let raw = rec.get(i).ok_or_else(|| Error::parse(line, format!("missing column {i}")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(line, format!("column {i}: {e}: {raw:?}")))
}

fn line_of(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

pub fn write_timeseries<W: Write>(out: W, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER)?;
    for (t, v) in series.times.iter().zip(&series.values) {
        w.write_record([t.to_string(), v.to_string(), series.label.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read one `t,value,label` series. All rows must share the label.
pub fn read_timeseries<R: Read>(input: R) -> Result<TimeSeries> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(r.headers()?, &TIMESERIES_HEADER)?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    let mut label: Option<String> = None;
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, k + 2);
        if rec.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 columns, found {}", rec.len())));
        }
        times.push(field_f64(&rec, 0, line)?);
        values.push(field_f64(&rec, 1, line)?);
        let l = &rec[2];
        match &label {
            None => label = Some(l.to_string()),
            Some(prev) if prev != l => {
                return Err(Error::parse(line, format!("label changes from {prev:?} to {l:?}")))
            }
            _ => {}
        }
    }
    let label = label.ok_or_else(|| Error::parse(1, "series has no rows"))?;
    TimeSeries::new(times, values, label).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for ((t, s), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        let mut row = vec![t.to_string()];
        row.extend(s.to_array().iter().map(f64::to_string));
        row.push(e.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a trajectory CSV. The truncation flag is not part of the format and
/// comes back unset.
pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(r.headers()?, &TRAJECTORY_HEADER)?;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
        truncated_at: None,
    };
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, k + 2);
        if rec.len() != 8 {
            return Err(Error::parse(line, format!("expected 8 columns, found {}", rec.len())));
        }
        let mut v = [0.0; 8];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = field_f64(&rec, i, line)?;
        }
        if let Some(&prev) = traj.times.last() {
            if !(v[0] > prev) {
                return Err(Error::parse(line, "times must be strictly ascending"));
            }
        }
        traj.times.push(v[0]);
        traj.states.push(ClassicalState::from_array([v[1], v[2], v[3], v[4], v[5], v[6]]));
        traj.energies.push(v[7]);
    }
    if traj.times.is_empty() {
        return Err(Error::parse(1, "trajectory has no rows"));
    }
    Ok(traj)
}

/// Generic CSV table with a header row.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch(format!(
                "table row has {} cells, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Ordered flat key=value record of a run.
///
/// Keys are unique; values are single-line (embedded line breaks are escaped
/// as `\n` on insertion).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or overwrite `key`. Panics on a malformed key, which is a
    /// programming error rather than bad input.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        assert!(valid_key(key), "malformed manifest key {key:?}");
        let value = value.to_string().replace('\r', "\\r").replace('\n', "\\n");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append every parameter under a `param.` prefix.
    pub fn set_params(&mut self, p: &ModelParams) {
        for line in p.to_kv_string().lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.set(&format!("param.{}", k.trim()), v.trim());
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, found {line:?}")))?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(Error::parse(i + 1, format!("malformed key {k:?}")));
            }
            if m.get(k).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate key {k:?}")));
            }
            m.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(m)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl std::fmt::Display for Manifest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Load a parameter file on top of the defaults.
pub fn load_params(path: &Path) -> Result<ModelParams> {
    ModelParams::from_kv_str(&fs::read_to_string(path)?)
}

pub fn save_params(path: &Path, p: &ModelParams) -> Result<()> {
    fs::write(path, p.to_kv_string())?;
    Ok(())
}
