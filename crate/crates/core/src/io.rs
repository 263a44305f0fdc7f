//! File formats: run-log CSV, sorted-key JSON.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::features::Normalizer;
use crate::law::{RunRecord, TrainingConfig, DIVERGED_LOSS};
use crate::schedule::{CooldownShape, Schedule};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).expect("value serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value prints");
    s.push('\n');
    s
}

pub const RUN_COLUMNS: [&str; 9] = ["model_B", "tokens_B", "eta1", "eta2", "a1_B", "a2_B", "a3_B", "loss", "diverged"];
pub const RAW_RUN_COLUMNS: [&str; 9] = ["model_B", "S_steps", "eta1", "eta2", "a1", "a2", "a3", "loss", "diverged"];

/// Raw-unit conversion for step-count run logs.
#[derive(Debug, Clone, Copy)]
pub struct StepUnits {
    pub token_length: u64,
    pub batch: u64,
    pub normalizer: Normalizer,
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        let index = headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
        Self { index }
    }

    fn require(&self, names: &[&'static str]) -> Result<Vec<usize>, IoError> {
        names.iter().map(|n| self.index.get(*n).copied().ok_or(IoError::MissingColumn(n))).collect()
    }
}

fn row_error(line: u64, message: impl Into<String>) -> IoError {
    IoError::Row { line, message: message.into() }
}

fn number(rec: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<f64, IoError> {
    let raw = rec.get(idx).ok_or_else(|| row_error(line, format!("missing field {name}")))?.trim();
    let v: f64 = raw.parse().map_err(|_| row_error(line, format!("{name}: cannot parse {raw:?} as a number")))?;
    if !v.is_finite() {
        return Err(row_error(line, format!("{name}: value {raw:?} is not finite")));
    }
    Ok(v)
}

fn flag(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<bool, IoError> {
    match rec.get(idx).map(str::trim) {
        Some("0") | Some("false") | Some("False") => Ok(false),
        Some("1") | Some("true") | Some("True") => Ok(true),
        other => Err(row_error(line, format!("diverged: expected 0 or 1, got {:?}", other.unwrap_or("")))),
    }
}

fn read_generic<R: Read>(
    reader: R,
    names: &[&'static str; 9],
    convert: impl Fn([f64; 7]) -> [f64; 7],
) -> Result<Vec<RunRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(&headers);
    let idx = cols.require(names)?;
    let cooldown_idx = cols.index.get("cooldown").copied();
    let label_idx = cols.index.get("label").copied();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            row_error(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut v = [0.0; 7];
        for k in 0..7 {
            v[k] = number(&rec, idx[k], names[k], line)?;
        }
        let [model, tokens, eta1, eta2, a1, a2, a3] = convert(v);
        let loss = number(&rec, idx[7], "loss", line)?;
        let diverged = flag(&rec, idx[8], line)?;
        if !diverged && loss <= 0.0 {
            return Err(row_error(line, format!("loss must be positive, got {loss}")));
        }
        let cooldown = match cooldown_idx.and_then(|i| rec.get(i)).map(str::trim) {
            None | Some("") | Some("linear") => CooldownShape::Linear,
            Some("cosine") => CooldownShape::Cosine,
            Some(other) => return Err(row_error(line, format!("cooldown: unknown shape {other:?}"))),
        };
        let label = label_idx.and_then(|i| rec.get(i)).map(str::to_string).filter(|s| !s.is_empty());
        let config = TrainingConfig { label, cooldown, ..TrainingConfig::new(model, tokens, eta1, eta2, a1, a2, a3) };
        if eta1 < 0.0 || eta2 < 0.0 {
            return Err(row_error(line, "learning rates must be nonnegative"));
        }
        Schedule::general_with(eta1, eta2, a1, a2, a3, tokens, cooldown).map_err(|e| row_error(line, e.to_string()))?;
        out.push(RunRecord { config, loss: if diverged { DIVERGED_LOSS } else { loss }, diverged });
    }
    Ok(out)
}

/// Reads a run log whose sizes are already in billions of tokens.
pub fn read_runs_csv<R: Read>(reader: R) -> Result<Vec<RunRecord>, IoError> {
    read_generic(reader, &RUN_COLUMNS, |v| v)
}

/// Reads a run log with step counts, converting steps to billions of tokens.
pub fn read_runs_csv_steps<R: Read>(reader: R, units: StepUnits) -> Result<Vec<RunRecord>, IoError> {
    let conv = move |s: f64| units.normalizer.tokens_from_steps(s, units.token_length, units.batch);
    read_generic(reader, &RAW_RUN_COLUMNS, move |v| [v[0], conv(v[1]), v[2], v[3], conv(v[4]), conv(v[5]), conv(v[6])])
}

/// Writes records in the billions-of-tokens layout.
pub fn write_runs_csv<W: Write>(writer: W, records: &[RunRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RUN_COLUMNS)?;
    for r in records {
        let c = &r.config;
        w.write_record([
            c.model.to_string(),
            c.tokens.to_string(),
            c.eta1.to_string(),
            c.eta2.to_string(),
            c.a1.to_string(),
            c.a2.to_string(),
            c.a3.to_string(),
            r.loss.to_string(),
            (r.diverged as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
