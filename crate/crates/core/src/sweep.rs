//! Peak-rate × warmup grids for contour plots.

use std::io::Write;

use serde::Serialize;

use crate::divergence::{DivergenceParams, Verdict};
use crate::law::{FittedLaw, LawError, TrainingConfig, DIVERGED_LOSS};
use crate::schedule::CooldownShape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn single(v: f64) -> Self {
        Self { min: v, max: v, steps: 1 }
    }

    /// Evenly spaced values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        let d = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + d * i as f64 }).collect()
    }

    fn check(&self, name: &'static str) -> Result<(), SweepError> {
        let ok = self.steps >= 1 && self.min.is_finite() && self.max.is_finite() && self.min > 0.0 && self.max >= self.min;
        if ok {
            Ok(())
        } else {
            Err(SweepError::BadRange { name, min: self.min, max: self.max, steps: self.steps })
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("{name} range must be positive and nonempty, got [{min}, {max}] with {steps} steps")]
    BadRange { name: &'static str, min: f64, max: f64, steps: usize },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Grid inputs. Peak rates are normalized; warmups and tokens are in billions.
#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub eta: Range,
    pub warmup: Range,
    pub model: f64,
    pub tokens: f64,
    pub cooldown: CooldownShape,
    pub sentinel: f64,
}

impl SweepSpec {
    pub fn new(eta: Range, warmup: Range, model: f64, tokens: f64) -> Self {
        Self { eta, warmup, model, tokens, cooldown: CooldownShape::Linear, sentinel: DIVERGED_LOSS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub warmup: f64,
    pub eta_max: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub eta_l: f64,
    pub diverged: bool,
    pub predicted_loss: f64,
}

/// Evaluates the grid, warmup-major. Gated cells carry the sentinel loss.
pub fn sweep_grid(law: &FittedLaw, gate: &DivergenceParams, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.eta.check("eta")?;
    spec.warmup.check("warmup")?;
    let lr_scale = law.lr_scale;
    let mut rows = Vec::with_capacity(spec.eta.steps * spec.warmup.steps);
    for w in spec.warmup.values() {
        for eta in spec.eta.values() {
            let raw = eta * lr_scale;
            let config = TrainingConfig { cooldown: spec.cooldown, ..TrainingConfig::new(spec.model, spec.tokens, raw, raw, w, w, w) };
            let g = gate.criterion(eta, w, spec.model, spec.tokens).map_err(LawError::from)?;
            let diverged = g.verdict == Verdict::Diverge;
            let predicted_loss = if diverged { spec.sentinel } else { law.predict(&config)?.loss };
            rows.push(SweepRow { warmup: w, eta_max: eta, r: g.r, eta_l: g.eta_l, diverged, predicted_loss });
        }
    }
    Ok(rows)
}

pub fn write_grid_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["warmup_B", "eta_max", "R", "eta_L", "diverged", "predicted_loss"])?;
    for r in rows {
        w.write_record([
            r.warmup.to_string(),
            r.eta_max.to_string(),
            r.r.to_string(),
            r.eta_l.to_string(),
            (r.diverged as u8).to_string(),
            r.predicted_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
