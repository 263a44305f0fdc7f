//! Stochastic-optimization lab: objectives, gradient-noise models,
//! Euler–Maruyama simulation of the SGD and Adam diffusions, Gaussian
//! covariance approximations and the bounds derived from them.

pub mod bounds;
pub mod escape;
pub mod gaussian;
pub mod linalg;
pub mod noise;
pub mod objective;
pub mod random_matrix;
pub mod simulate;

use serde::{Deserialize, Serialize};

use crate::quadrature::QuadratureError;
use crate::schedule::ScheduleError;

pub use bounds::{adam_bounds, sgd_bound, AdamBoundInputs, AdamBounds, SgdBound};
pub use escape::{anti_concentration_check, escape_bounds, EscapeBounds};
pub use gaussian::{gaussian_approx, CovarianceOde, GaussianApprox};
pub use noise::NoiseModel;
pub use objective::{DoubleWell, LogCosh, Objective, ObjectiveSpec, Quadratic, Rosenbrock};
pub use random_matrix::{random_matrix_checks, RandomMatrixReport};
pub use simulate::{simulate, SdeConfig, SimulationReport, Stat};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    #[error("path {path} produced a non-finite state at step {step}")]
    DivergedPath { path: usize, step: usize },
    #[error("radius eps must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("x* is not stationary: |grad f(x*)| = {grad_norm:e}")]
    NotStationary { grad_norm: f64 },
    #[error("matrix is not symmetric positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("missing constant {0}")]
    MissingConstant(&'static str),
    #[error("Adam constants need c2 < 4 c1, got c1 = {c1}, c2 = {c2}")]
    AdamConstants { c1: f64, c2: f64 },
    #[error("integral of eta over [0, {t}] is zero")]
    ZeroEtaIntegral { t: f64 },
    #[error("covariance trace must be positive, got {0}")]
    ZeroTrace(f64),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Sgd,
    Adam,
}

/// Constants of the Adam diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConstants {
    pub c1: f64,
    pub c1_prime: f64,
    pub c2: f64,
    pub eps: f64,
}

impl Default for AdamConstants {
    fn default() -> Self {
        Self::from_discrete(1.0, 1.0, 0.1, 1e-8)
    }
}

impl AdamConstants {
    /// `c1' = sqrt(c1 * c1_hat)` where `c1_hat` is the discrete momentum rate.
    pub fn from_discrete(c1: f64, c2: f64, c1_hat: f64, eps: f64) -> Self {
        Self { c1, c1_prime: (c1 * c1_hat).sqrt(), c2, eps }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        for (name, v) in [("c1", self.c1), ("c1_prime", self.c1_prime), ("c2", self.c2), ("eps", self.eps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SdeError::BadConfig(format!("Adam constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
