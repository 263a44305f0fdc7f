//! Trapping and escape bounds from Gaussian anti-concentration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linalg::sym_eigenvalues;
use super::SdeError;
use crate::schedule::{Functional, Schedule};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeBounds {
    /// `1 − √(eε / Tr P)`, floored at 0.
    pub escape_lower: f64,
    /// `√(eε / Tr P)`, clipped to 1.
    pub trapped_upper: f64,
    /// Set when `ε ≥ Tr P / e`.
    pub vacuous: bool,
    /// `√(ε ∫η′² / (η_max⁴ Tr Σ_g))`, for schedules that start at their peak and end at zero.
    pub asymptotic_order: Option<f64>,
}

/// Bounds for `P[‖X − x*‖² ≤ ε]` given the trace of the position covariance.
pub fn escape_bounds(trace_p: f64, eps: f64, schedule: &Schedule, noise_trace: f64) -> Result<EscapeBounds, SdeError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(SdeError::BadEpsilon(eps));
    }
    if !(trace_p > 0.0 && trace_p.is_finite()) {
        return Err(SdeError::ZeroTrace(trace_p));
    }
    let ratio = (std::f64::consts::E * eps / trace_p).sqrt();
    let s = schedule.horizon();
    let peak = schedule.eta_max();
    let starts_at_peak = schedule.value_clamped(0.0) == peak;
    let ends_at_zero = schedule.value_clamped(s) == 0.0;
    let asymptotic_order = if starts_at_peak && ends_at_zero && peak > 0.0 && noise_trace > 0.0 {
        let energy = schedule.integral(0.0, s, Functional::DetaSq)?;
        Some((eps * energy / (peak.powi(4) * noise_trace)).sqrt())
    } else {
        None
    };
    Ok(EscapeBounds {
        escape_lower: (1.0 - ratio).max(0.0),
        trapped_upper: ratio.min(1.0),
        vacuous: ratio >= 1.0,
        asymptotic_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiConcentrationRow {
    pub eps: f64,
    pub frequency: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Monte-Carlo frequency of `‖x − μ‖² ≤ ε` for `x ~ N(μ, C)`.
///
/// `‖x − μ‖²` has the law of `Σ λ_i ξ_i²` with `λ_i` the eigenvalues of `C`
/// and `ξ ~ N(0, I)`, so one set of draws serves every `ε`.
pub fn anti_concentration_check(cov: &DMatrix<f64>, eps: &[f64], samples: usize, seed: u64) -> Result<Vec<AntiConcentrationRow>, SdeError> {
    let lam: Vec<f64> = sym_eigenvalues(&super::linalg::symmetrize(cov));
    if let Some(&bad) = lam.iter().find(|l| **l < -1e-12) {
        return Err(SdeError::NotPsd { min_eigenvalue: bad });
    }
    let trace: f64 = cov.trace();
    if !(trace > 0.0) {
        return Err(SdeError::ZeroTrace(trace));
    }
    if let Some(&e) = eps.iter().find(|e| !(**e >= 0.0)) {
        return Err(SdeError::BadEpsilon(e));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; eps.len()];
    for _ in 0..samples {
        let mut r = 0.0;
        for &l in &lam {
            let xi: f64 = rng.sample(StandardNormal);
            r += l.max(0.0) * xi * xi;
        }
        for (c, &e) in counts.iter_mut().zip(eps) {
            if r <= e {
                *c += 1;
            }
        }
    }
    Ok(eps
        .iter()
        .zip(counts)
        .map(|(&e, c)| {
            let frequency = c as f64 / samples as f64;
            let bound = (std::f64::consts::E * e / trace).sqrt();
            AntiConcentrationRow { eps: e, frequency, bound, holds: frequency <= bound }
        })
        .collect())
}
