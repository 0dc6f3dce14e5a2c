//! Trial CSV format: header `timestamp_us,antenna,s0,...,s51`, one row per
//! (timestamp, antenna), reals as decimal text. Scenario metadata lives in a
//! `<stem>.meta.json` sidecar. Synthetic trials may carry their per-person
//! sources in `<stem>.truth.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CsiTrial, GroundTruth, ANTENNAS, RAW_SUBCARRIERS, SUBCARRIERS};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Tensor3};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub scenario_id: String,
    pub person_ids: Vec<u32>,
    pub sample_rate_hz: f64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn truth_path(path: &Path) -> PathBuf {
    path.with_extension("truth.csv")
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse { line, msg: format!("{other:?}") },
    }
}

fn parse_field<X: std::str::FromStr>(field: &str, line: u64, what: &str) -> Result<X> {
    field.trim().parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse {what} from {field:?}") })
}

pub fn load_trial<T: Real>(path: impl AsRef<Path>) -> Result<CsiTrial<T>> {
    let path = path.as_ref();
    let meta_path = sidecar_path(path);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: TrialMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::Format(format!("{}: {e}", meta_path.display())))?;

    let mut reader =
        csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let m = header.len().saturating_sub(2);
    let header_ok = header.get(0) == Some("timestamp_us")
        && header.get(1) == Some("antenna")
        && (m == SUBCARRIERS || m == RAW_SUBCARRIERS)
        && (0..m).all(|j| header.get(j + 2) == Some(format!("s{j}").as_str()));
    if !header_ok {
        return Err(Error::Format(format!(
            "{}: header must be timestamp_us,antenna,s0..s{} (52 or 64 subcarriers)",
            path.display(),
            SUBCARRIERS - 1
        )));
    }

    let mut timestamps: Vec<u64> = Vec::new();
    let mut rows: Vec<[Option<Vec<T>>; ANTENNAS]> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != m + 2 {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", m + 2, record.len()) });
        }
        let ts: u64 = parse_field(&record[0], line, "timestamp")?;
        let antenna: usize = parse_field(&record[1], line, "antenna")?;
        if antenna >= ANTENNAS {
            return Err(Error::Parse { line, msg: format!("antenna index {antenna} out of range") });
        }
        let mut values = Vec::with_capacity(m);
        for field in record.iter().skip(2) {
            let v: T = parse_field(field, line, "amplitude")?;
            if !v.is_finite() || v < T::zero() {
                return Err(Error::Format(format!("line {line}: amplitude {v} is not finite and nonnegative")));
            }
            values.push(v);
        }
        match timestamps.last() {
            Some(&last) if ts == last => {}
            Some(&last) if ts < last => {
                return Err(Error::Format(format!("line {line}: timestamp {ts} after {last} is not monotone")));
            }
            _ => {
                timestamps.push(ts);
                rows.push(Default::default());
            }
        }
        let slot = &mut rows.last_mut().expect("row pushed")[antenna];
        if slot.is_some() {
            return Err(Error::Format(format!("line {line}: duplicate antenna {antenna} at timestamp {ts}")));
        }
        *slot = Some(values);
    }
    if timestamps.is_empty() {
        return Err(Error::Format(format!("{}: trial has no samples", path.display())));
    }

    let n = timestamps.len();
    let mut amplitudes = Tensor3::zeros(n, m, ANTENNAS);
    let mut missing = vec![false; n * ANTENNAS];
    for (t, row) in rows.iter().enumerate() {
        for (k, slot) in row.iter().enumerate() {
            match slot {
                Some(values) => {
                    for (j, &v) in values.iter().enumerate() {
                        amplitudes.set(t, j, k, v);
                    }
                }
                None => missing[t * ANTENNAS + k] = true,
            }
        }
    }
    let mut person_ids = meta.person_ids;
    person_ids.sort_unstable();
    person_ids.dedup();
    let trial = CsiTrial {
        timestamps_us: timestamps,
        amplitudes,
        missing,
        person_ids,
        scenario_id: meta.scenario_id,
        sample_rate_hz: meta.sample_rate_hz,
    };
    trial.validate()?;
    Ok(trial)
}

pub fn save_trial<T: Real>(trial: &CsiTrial<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if trial.is_empty() {
        return Err(Error::Format("cannot save an empty trial".into()));
    }
    trial.validate()?;
    let [n, m, k] = trial.amplitudes.dims();

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write_err = |e| Error::io(path, e);
    let mut header = String::from("timestamp_us,antenna");
    for j in 0..m {
        header.push_str(&format!(",s{j}"));
    }
    writeln!(out, "{header}").map_err(write_err)?;
    let mut line = String::new();
    for t in 0..n {
        for a in 0..k {
            if trial.is_missing(t, a) {
                continue;
            }
            line.clear();
            line.push_str(&format!("{},{a}", trial.timestamps_us[t]));
            for j in 0..m {
                line.push(',');
                line.push_str(&trial.amplitudes.get(t, j, a).to_exact_string());
            }
            writeln!(out, "{line}").map_err(write_err)?;
        }
    }
    out.flush().map_err(write_err)?;

    let meta = TrialMeta {
        scenario_id: trial.scenario_id.clone(),
        person_ids: trial.person_ids.clone(),
        sample_rate_hz: trial.sample_rate_hz,
    };
    let meta_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    std::fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
}

/// Writes `<stem>.truth.csv` next to the trial file at `trial_path`.
pub fn save_ground_truth<T: Real>(
    truth: &GroundTruth<T>,
    timestamps_us: &[u64],
    trial_path: impl AsRef<Path>,
) -> Result<()> {
    let path = &truth_path(trial_path.as_ref());
    if truth.sources.rows() != timestamps_us.len() || truth.sources.cols() != truth.person_ids.len() {
        return Err(Error::invalid("ground truth shape does not match timestamps and person ids"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write_err = |e| Error::io(path, e);
    let cols: Vec<String> = truth.person_ids.iter().map(|id| format!("p{id}")).collect();
    writeln!(out, "timestamp_us,{}", cols.join(",")).map_err(write_err)?;
    for (t, ts) in timestamps_us.iter().enumerate() {
        let vals: Vec<String> = truth.sources.row(t).iter().map(|v| v.to_exact_string()).collect();
        writeln!(out, "{ts},{}", vals.join(",")).map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

/// Reads `<stem>.truth.csv` next to a trial file, if present.
pub fn load_ground_truth<T: Real>(trial_path: impl AsRef<Path>) -> Result<Option<GroundTruth<T>>> {
    let path = truth_path(trial_path.as_ref());
    if !path.exists() {
        return Ok(None);
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&path).map_err(|e| csv_error(&path, e))?;
    let header = reader.headers().map_err(|e| csv_error(&path, e))?.clone();
    if header.get(0) != Some("timestamp_us") {
        return Err(Error::Format(format!("{}: missing timestamp_us column", path.display())));
    }
    let person_ids: Vec<u32> = header
        .iter()
        .skip(1)
        .map(|h| {
            h.strip_prefix('p')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad ground-truth column {h:?}")))
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for field in record.iter().skip(1) {
            data.push(parse_field::<T>(field, line, "source value")?);
        }
        rows += 1;
    }
    let sources = Matrix::from_vec(rows, person_ids.len(), data)?;
    Ok(Some(GroundTruth { person_ids, sources }))
}
