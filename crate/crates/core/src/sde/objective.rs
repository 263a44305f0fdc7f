//! Test objectives with known smoothness constants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{is_symmetric, lambda_max, lambda_min};
use super::SdeError;

pub trait Objective: Send + Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    fn hessian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Gradient Lipschitz constant `L` (on the stated domain).
    fn smoothness(&self) -> f64;
    /// Value Lipschitz constant `ℓ`, when globally finite.
    fn value_lipschitz(&self) -> Option<f64> {
        None
    }
    fn min_value(&self) -> Option<f64>;
    fn minimizer(&self) -> Option<Vec<f64>>;
}

/// `½ (x − c)ᵀ H (x − c)`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    h: DMatrix<f64>,
    center: Vec<f64>,
    l: f64,
    psd: bool,
}

impl Quadratic {
    pub fn new(h: DMatrix<f64>) -> Result<Self, SdeError> {
        let n = h.nrows();
        Self::centered(h, vec![0.0; n])
    }

    pub fn centered(h: DMatrix<f64>, center: Vec<f64>) -> Result<Self, SdeError> {
        if !is_symmetric(&h, 1e-12) {
            return Err(SdeError::BadConfig("quadratic Hessian must be symmetric".into()));
        }
        if center.len() != h.nrows() {
            return Err(SdeError::DimensionMismatch { expected: h.nrows(), got: center.len() });
        }
        let l = lambda_max(&h).abs().max(lambda_min(&h).abs());
        let psd = lambda_min(&h) >= 0.0;
        Ok(Self { h, center, l, psd })
    }

    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self, SdeError> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }
}

impl Objective for Quadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let di = x[i] - self.center[i];
            let mut row = 0.0;
            for j in 0..n {
                row += self.h[(i, j)] * (x[j] - self.center[j]);
            }
            acc += di * row;
        }
        0.5 * acc
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut row = 0.0;
            for j in 0..n {
                row += self.h[(i, j)] * (x[j] - self.center[j]);
            }
            *o = row;
        }
    }

    fn hessian(&self, _x: &[f64]) -> DMatrix<f64> {
        self.h.clone()
    }

    fn smoothness(&self) -> f64 {
        self.l
    }

    fn min_value(&self) -> Option<f64> {
        self.psd.then_some(0.0)
    }

    fn minimizer(&self) -> Option<Vec<f64>> {
        self.psd.then(|| self.center.clone())
    }
}

/// `Σ (x_i² − 1)²`, with `L = 12R² − 4` on the box `|x_i| ≤ R`.
#[derive(Debug, Clone, Copy)]
pub struct DoubleWell {
    pub dim: usize,
    pub radius: f64,
}

impl Objective for DoubleWell {
    fn name(&self) -> &'static str {
        "double_well"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| (v * v - 1.0).powi(2)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = 4.0 * v * (v * v - 1.0);
        }
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| if i == j { 12.0 * x[i] * x[i] - 4.0 } else { 0.0 })
    }

    fn smoothness(&self) -> f64 {
        (12.0 * self.radius * self.radius - 4.0).max(4.0)
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![1.0; self.dim])
    }
}

/// Chained Rosenbrock. `L` is a Gershgorin bound on the box `|x_i| ≤ R`.
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock {
    pub dim: usize,
    pub radius: f64,
}

impl Objective for Rosenbrock {
    fn name(&self) -> &'static str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..x.len().saturating_sub(1) {
            let r = x[i + 1] - x[i] * x[i];
            out[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
            out[i + 1] += 200.0 * r;
        }
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            h[(i, i)] += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
            h[(i + 1, i + 1)] += 200.0;
            h[(i, i + 1)] += -400.0 * x[i];
            h[(i + 1, i)] += -400.0 * x[i];
        }
        h
    }

    fn smoothness(&self) -> f64 {
        let r = self.radius;
        1200.0 * r * r + 400.0 * r + 202.0 + 800.0 * r
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![1.0; self.dim])
    }
}

/// `Σ log cosh(x_i)`: bounded gradient with `ℓ = √N` and `L = 1`.
#[derive(Debug, Clone, Copy)]
pub struct LogCosh {
    pub dim: usize,
}

fn log_cosh(v: f64) -> f64 {
    let a = v.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Objective for LogCosh {
    fn name(&self) -> &'static str {
        "log_cosh"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| log_cosh(v)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.tanh();
        }
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| if i == j { 1.0 / x[i].cosh().powi(2) } else { 0.0 })
    }

    fn smoothness(&self) -> f64 {
        1.0
    }

    fn value_lipschitz(&self) -> Option<f64> {
        Some((self.dim as f64).sqrt())
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
}

/// Serializable objective description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Quadratic {
        /// Diagonal Hessian entries; ignored when `matrix` is present.
        #[serde(default)]
        eigenvalues: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    DoubleWell {
        dim: usize,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    Rosenbrock {
        dim: usize,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    LogCosh {
        dim: usize,
    },
}

fn default_radius() -> f64 {
    2.0
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Box<dyn Objective>, SdeError> {
        let bad = |m: &str| SdeError::BadConfig(m.to_string());
        Ok(match self {
            ObjectiveSpec::Quadratic { matrix: Some(rows), .. } => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(bad("quadratic matrix must be square and nonempty"));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Box::new(Quadratic::new(DMatrix::from_row_slice(n, n, &flat))?)
            }
            ObjectiveSpec::Quadratic { eigenvalues, .. } => {
                if eigenvalues.is_empty() {
                    return Err(bad("quadratic needs eigenvalues or matrix"));
                }
                Box::new(Quadratic::diagonal(eigenvalues)?)
            }
            ObjectiveSpec::DoubleWell { dim, radius } => {
                if *dim == 0 || !(*radius >= 1.0) {
                    return Err(bad("double_well needs dim >= 1 and radius >= 1"));
                }
                Box::new(DoubleWell { dim: *dim, radius: *radius })
            }
            ObjectiveSpec::Rosenbrock { dim, radius } => {
                if *dim < 2 || !(*radius > 0.0) {
                    return Err(bad("rosenbrock needs dim >= 2 and radius > 0"));
                }
                Box::new(Rosenbrock { dim: *dim, radius: *radius })
            }
            ObjectiveSpec::LogCosh { dim } => {
                if *dim == 0 {
                    return Err(bad("log_cosh needs dim >= 1"));
                }
                Box::new(LogCosh { dim: *dim })
            }
        })
    }
}
