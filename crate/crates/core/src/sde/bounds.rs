//! Right-hand sides of the SGD and Adam convergence bounds.

use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::objective::Objective;
use super::{AdamConstants, Algorithm, SdeError};
use crate::schedule::{Functional, Schedule};

/// Objective-side constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub f0: f64,
    pub f_min: f64,
    pub smoothness: f64,
    pub value_lipschitz: Option<f64>,
    pub dim: usize,
}

impl ProblemConstants {
    pub fn from_objective(obj: &dyn Objective, x0: &[f64]) -> Result<Self, SdeError> {
        Ok(Self {
            f0: obj.value(x0),
            f_min: obj.min_value().ok_or(SdeError::MissingConstant("f_min"))?,
            smoothness: obj.smoothness(),
            value_lipschitz: obj.value_lipschitz(),
            dim: obj.dim(),
        })
    }
}

fn eta_integrals(schedule: &Schedule, t: f64) -> Result<(f64, f64), SdeError> {
    let i1 = schedule.integral(0.0, t, Functional::Eta)?;
    let i2 = schedule.integral(0.0, t, Functional::EtaSq)?;
    if !(i1 > 0.0) {
        return Err(SdeError::ZeroEtaIntegral { t });
    }
    Ok((i1, i2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdBound {
    pub value: f64,
    pub optimization_term: f64,
    pub noise_term: f64,
    pub sigma0_sq: f64,
}

/// `(f0 − f_min)/∫η + η0 L σ0² N ∫η² / (2∫η)` over `[0, t]`.
pub fn sgd_bound(schedule: &Schedule, t: f64, eta0: f64, problem: &ProblemConstants, noise: &NoiseModel) -> Result<SgdBound, SdeError> {
    let (i1, i2) = eta_integrals(schedule, t)?;
    let sigma0_sq = noise.sigma0_sq();
    let optimization_term = (problem.f0 - problem.f_min) / i1;
    let noise_term = eta0 * problem.smoothness * sigma0_sq * problem.dim as f64 * i2 / (2.0 * i1);
    Ok(SgdBound { value: optimization_term + noise_term, optimization_term, noise_term, sigma0_sq })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamBoundInputs {
    pub problem: ProblemConstants,
    /// `σ̄ ≥ λmax(Σ(x))`.
    pub sigma_bar: f64,
    /// `V ≥ sup ‖v_t‖∞`.
    pub v_bound: f64,
    /// `M` with `sup E‖m_t‖² ≤ M² N`; needed only for the gradient bound.
    pub m_bound: Option<f64>,
    pub adam: AdamConstants,
    pub m0: Vec<f64>,
    pub v0: Vec<f64>,
    pub grad0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamBounds {
    pub momentum: f64,
    /// Absent when `ℓ` or `M` is unknown.
    pub gradient: Option<f64>,
}

pub fn adam_bounds(schedule: &Schedule, t: f64, inputs: &AdamBoundInputs) -> Result<AdamBounds, SdeError> {
    let a = inputs.adam;
    a.validate()?;
    let damping = 1.0 - a.c2 / (4.0 * a.c1);
    if !(damping > 0.0) {
        return Err(SdeError::AdamConstants { c1: a.c1, c2: a.c2 });
    }
    let (i1, i2) = eta_integrals(schedule, t)?;
    let p = &inputs.problem;
    let eps = a.eps;
    let root_v = (inputs.v_bound + eps).sqrt();
    let m_scaled: f64 = inputs.m0.iter().zip(&inputs.v0).map(|(m, v)| m * m / (v + eps).sqrt()).sum();
    let momentum = root_v * (p.f0 + m_scaled / (2.0 * a.c1) - p.f_min) / (damping * i1)
        + (a.c1_prime * a.c1_prime / (2.0 * a.c1)) * inputs.sigma_bar * root_v * i2 / (damping * eps.sqrt() * i1);

    let gradient = match (p.value_lipschitz, inputs.m_bound) {
        (Some(ell), Some(m)) => {
            let cross: f64 = inputs.grad0.iter().zip(inputs.m0.iter().zip(&inputs.v0)).map(|(g, (m, v))| g * m / (v + eps).sqrt()).sum();
            let head = 2.0 * root_v * (p.f0 - cross / a.c1 - p.f_min + ell * m * (p.dim as f64).sqrt() / (a.c1 * eps.sqrt())) / i1;
            let factor = 2.0 * p.smoothness * root_v / (a.c1 * eps)
                + (1.0 + inputs.sigma_bar * inputs.sigma_bar / (eps * eps)) * a.c2 * a.c2 * (inputs.v_bound + eps) / (2.0 * a.c1 * a.c1 * eps);
            Some(head + factor * momentum)
        }
        _ => None,
    };
    Ok(AdamBounds { momentum, gradient })
}

/// Bound value for either algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceBound {
    pub algorithm: Algorithm,
    /// SGD: bound on the weighted `‖∇f‖²` average. Adam: bound on the weighted `‖m‖²` average.
    pub value: f64,
    /// Adam gradient bound, when `ℓ` and `M` are known.
    pub gradient: Option<f64>,
}

/// Evaluates the bound for a run started at `x0` with `m0`, `v0`.
/// For Adam, `V` defaults to `max(max v0, max diag Σ)`, which bounds `v`
/// along the deterministic `v` dynamics without resampling.
#[allow(clippy::too_many_arguments)]
pub fn convergence_bound(
    algorithm: Algorithm,
    obj: &dyn Objective,
    noise: &NoiseModel,
    schedule: &Schedule,
    t: f64,
    eta0: f64,
    x0: &[f64],
    adam: AdamConstants,
    m0: Option<&[f64]>,
    v0: Option<&[f64]>,
    v_bound: Option<f64>,
    m_bound: Option<f64>,
) -> Result<ConvergenceBound, SdeError> {
    let problem = ProblemConstants::from_objective(obj, x0)?;
    match algorithm {
        Algorithm::Sgd => {
            let b = sgd_bound(schedule, t, eta0, &problem, noise)?;
            Ok(ConvergenceBound { algorithm, value: b.value, gradient: None })
        }
        Algorithm::Adam => {
            let n = obj.dim();
            let m0 = m0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
            let v0 = v0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
            let v_default = v0.iter().chain(noise.diag().iter()).copied().fold(0.0, f64::max);
            let mut grad0 = vec![0.0; n];
            obj.gradient(x0, &mut grad0);
            let inputs = AdamBoundInputs {
                problem,
                sigma_bar: noise.sigma_bar(),
                v_bound: v_bound.unwrap_or(v_default),
                m_bound,
                adam,
                m0,
                v0,
                grad0,
            };
            let b = adam_bounds(schedule, t, &inputs)?;
            Ok(ConvergenceBound { algorithm, value: b.momentum, gradient: b.gradient })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> ProblemConstants {
        ProblemConstants { f0: 3.0, f_min: 1.0, smoothness: 2.0, value_lipschitz: None, dim: 4 }
    }

    #[test]
    fn constant_schedule_form() {
        let (eta, t, eta0) = (0.5, 8.0, 0.01);
        let s = Schedule::constant(eta, t).unwrap();
        let noise = NoiseModel::isotropic(4, 0.3, 16).unwrap();
        let b = sgd_bound(&s, t, eta0, &problem(), &noise).unwrap();
        let s0 = noise.sigma0_sq();
        let expect = 2.0 / (eta * t) + eta0 * 2.0 * s0 * 4.0 * eta / 2.0;
        assert!((b.value - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn noiseless_reduces() {
        let s = Schedule::general(1.0, 1.0, 1.0, 2.0, 3.0, 5.0).unwrap();
        let noise = NoiseModel::isotropic(4, 0.0, 1).unwrap();
        let b = sgd_bound(&s, 5.0, 0.1, &problem(), &noise).unwrap();
        let i1 = s.integral(0.0, 5.0, Functional::Eta).unwrap();
        assert_eq!(b.noise_term, 0.0);
        assert!((b.value - 2.0 / i1).abs() < 1e-15);
    }

    #[test]
    fn zero_integral_is_an_error() {
        let s = Schedule::constant(0.0, 1.0).unwrap();
        let noise = NoiseModel::isotropic(4, 1.0, 1).unwrap();
        assert!(matches!(sgd_bound(&s, 1.0, 0.1, &problem(), &noise), Err(SdeError::ZeroEtaIntegral { .. })));
    }

    #[test]
    fn adam_needs_c2_below_4c1() {
        let s = Schedule::constant(1.0, 1.0).unwrap();
        let inputs = AdamBoundInputs {
            problem: problem(),
            sigma_bar: 1.0,
            v_bound: 1.0,
            m_bound: None,
            adam: AdamConstants { c2: 4.0, ..AdamConstants::default() },
            m0: vec![0.0; 4],
            v0: vec![0.0; 4],
            grad0: vec![0.0; 4],
        };
        assert!(matches!(adam_bounds(&s, 1.0, &inputs), Err(SdeError::AdamConstants { .. })));
        let ok = AdamBoundInputs { adam: AdamConstants::default(), ..inputs };
        let b = adam_bounds(&s, 1.0, &ok).unwrap();
        assert!(b.momentum > 0.0 && b.gradient.is_none());
    }
}
