//! Gaussian gradient-noise models.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{is_symmetric, lambda_max, psd_sqrt};
use super::SdeError;

#[derive(Debug, Clone)]
enum Factor {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

/// Noise `z ~ N(0, Σ_g)`, or with resampling, `z ~ N(0, Σ̂)` where `Σ̂` is
/// the empirical covariance of `samples` fresh draws at every step.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    sigma: DMatrix<f64>,
    factor: Factor,
    samples: usize,
    resample: bool,
    c_const: f64,
    sigma_g_sq: f64,
}

impl NoiseModel {
    pub fn new(sigma: DMatrix<f64>, samples: usize) -> Result<Self, SdeError> {
        if !is_symmetric(&sigma, 1e-12) {
            return Err(SdeError::NotPsd { min_eigenvalue: f64::NAN });
        }
        if samples == 0 {
            return Err(SdeError::BadConfig("sample count D must be at least 1".into()));
        }
        let n = sigma.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || sigma[(i, j)] == 0.0));
        let factor = if diagonal {
            let d: Vec<f64> = sigma.diagonal().iter().copied().collect();
            if let Some(&bad) = d.iter().find(|v| !(**v >= 0.0)) {
                return Err(SdeError::NotPsd { min_eigenvalue: bad });
            }
            Factor::Diagonal(d.iter().map(|v| v.sqrt()).collect())
        } else {
            Factor::Dense(psd_sqrt(&sigma)?)
        };
        let sigma_g_sq = lambda_max(&sigma).max(0.0);
        Ok(Self { sigma, factor, samples, resample: false, c_const: 1.0, sigma_g_sq })
    }

    pub fn isotropic(dim: usize, variance: f64, samples: usize) -> Result<Self, SdeError> {
        Self::new(DMatrix::identity(dim, dim) * variance, samples)
    }

    pub fn diagonal(variances: &[f64], samples: usize) -> Result<Self, SdeError> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(variances)), samples)
    }

    pub fn with_resampling(mut self, on: bool) -> Self {
        self.resample = on;
        self
    }

    /// Sets the unspecified constant `C` used in `σ0` (default 1).
    pub fn with_c_const(mut self, c: f64) -> Self {
        self.c_const = c;
        self
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn resampling(&self) -> bool {
        self.resample
    }

    pub fn c_const(&self) -> f64 {
        self.c_const
    }

    /// `σ_g = λmax(Σ_g^{1/2})`.
    pub fn sigma_g(&self) -> f64 {
        self.sigma_g_sq.sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.sigma.trace()
    }

    pub fn trace_sq(&self) -> f64 {
        (&self.sigma * &self.sigma).trace()
    }

    pub fn diag(&self) -> Vec<f64> {
        self.sigma.diagonal().iter().copied().collect()
    }

    /// `σ0² = σ_g² ((1 + √(D/N)) + C / N^{2/3})`.
    pub fn sigma0_sq(&self) -> f64 {
        let n = self.dim() as f64;
        let d = self.samples as f64;
        self.sigma_g_sq * ((1.0 + (d / n).sqrt()) + self.c_const / n.powf(2.0 / 3.0))
    }

    /// Bound on `λmax` of the covariance actually used by the simulator.
    pub fn sigma_bar(&self) -> f64 {
        if self.resample {
            self.sigma0_sq()
        } else {
            self.sigma_g_sq
        }
    }

    /// One draw from `N(0, Σ_g)`.
    pub fn sample_base<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], scratch: &mut [f64]) {
        match &self.factor {
            Factor::Diagonal(s) => {
                for (o, &si) in out.iter_mut().zip(s) {
                    let xi: f64 = rng.sample(StandardNormal);
                    *o = si * xi;
                }
            }
            Factor::Dense(l) => {
                let n = out.len();
                for s in scratch.iter_mut().take(n) {
                    *s = rng.sample(StandardNormal);
                }
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += l[(i, j)] * scratch[j];
                    }
                    out[i] = acc;
                }
            }
        }
    }

    /// Empirical covariance `(1/D) Σ z_i z_iᵀ` of `D` fresh draws.
    pub fn empirical<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        let n = self.dim();
        let mut z = DMatrix::zeros(n, self.samples);
        let mut col = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        for k in 0..self.samples {
            self.sample_base(rng, &mut col, &mut scratch);
            z.column_mut(k).copy_from_slice(&col);
        }
        (&z * z.transpose()) / self.samples as f64
    }

    /// One noise draw for the simulator. Returns the covariance diagonal
    /// that the draw was taken with.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], scratch: &mut [f64], diag: &mut [f64]) {
        if !self.resample {
            self.sample_base(rng, out, scratch);
            for (d, i) in diag.iter_mut().zip(0..) {
                *d = self.sigma[(i, i)];
            }
            return;
        }
        let emp = self.empirical(rng);
        // symmetric PSD by construction; eigen-clipping guards round-off
        let root = psd_sqrt(&super::linalg::symmetrize(&emp)).expect("empirical covariance is PSD");
        let n = out.len();
        for s in scratch.iter_mut().take(n) {
            *s = rng.sample(StandardNormal);
        }
        for i in 0..n {
            out[i] = (0..n).map(|j| root[(i, j)] * scratch[j]).sum();
            diag[i] = emp[(i, i)];
        }
    }
}
