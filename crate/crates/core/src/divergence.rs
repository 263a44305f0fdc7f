//! Warmup divergence gate.
//!
//! With `S = Ŝ²` and `a1 = â1²` (the inputs are squared here and only here):
//!
//! ```text
//! η_L = min(η_max, ĉ1 S^α̂1 / (ĉ2 N^α̂2))
//! R   = S (η_max − η_L)² / (ĉ3 a1 η_L²)
//! ```
//!
//! A configuration is flagged as divergent when `R > 1`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GateError {
    #[error("gate parameter {name} must be positive and finite, got {value}")]
    BadParam { name: &'static str, value: f64 },
    #[error("input {name} must be positive and finite, got {value}")]
    BadInput { name: &'static str, value: f64 },
    #[error("critical rate is zero")]
    ZeroCriticalRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceParams {
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub c3_hat: f64,
    pub alpha1_hat: f64,
    pub alpha2_hat: f64,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self { c1_hat: 1.76, c2_hat: 33.21, c3_hat: 292.03, alpha1_hat: 0.218, alpha2_hat: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Diverge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    #[serde(rename = "R")]
    pub r: f64,
    pub eta_l: f64,
    pub verdict: Verdict,
}

fn positive(name: &'static str, value: f64) -> Result<f64, GateError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GateError::BadInput { name, value })
    }
}

impl DivergenceParams {
    pub fn validate(&self) -> Result<(), GateError> {
        for (name, value) in [
            ("c1_hat", self.c1_hat),
            ("c2_hat", self.c2_hat),
            ("c3_hat", self.c3_hat),
            ("alpha1_hat", self.alpha1_hat),
            ("alpha2_hat", self.alpha2_hat),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(GateError::BadParam { name, value });
            }
        }
        Ok(())
    }

    /// Critical rate `ĉ1 S^α̂1 / (ĉ2 N^α̂2)` before clipping, with `S = Ŝ²`.
    pub fn critical_rate(&self, model: f64, tokens: f64) -> f64 {
        let s = tokens * tokens;
        self.c1_hat * s.powf(self.alpha1_hat) / (self.c2_hat * model.powf(self.alpha2_hat))
    }

    /// Evaluates the gate. All arguments are normalized values before squaring.
    pub fn criterion(&self, eta_max: f64, a1: f64, model: f64, tokens: f64) -> Result<GateResult, GateError> {
        self.validate()?;
        let eta_max = positive("eta_max", eta_max)?;
        let a1 = positive("a1", a1)?;
        let model = positive("model", model)?;
        let tokens = positive("tokens", tokens)?;
        let s = tokens * tokens;
        let a1 = a1 * a1;
        let eta_l = eta_max.min(self.critical_rate(model, tokens));
        if eta_l <= 0.0 {
            return Err(GateError::ZeroCriticalRate);
        }
        let gap = eta_max - eta_l;
        let r = s * gap * gap / (self.c3_hat * a1 * eta_l * eta_l);
        let verdict = if r > 1.0 { Verdict::Diverge } else { Verdict::Stable };
        Ok(GateResult { r, eta_l, verdict })
    }
}
