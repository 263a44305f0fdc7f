//! Empirical checks on the sample gradient covariance `Σ̂ = (1/D) Σ z_i z_iᵀ`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::lambda_max;
use super::noise::NoiseModel;
use super::simulate::Stat;
use super::SdeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceDeviationRow {
    pub t: f64,
    /// Fraction of trials with `|Tr Σ̂ − Tr Σ_g| ≥ t`.
    pub frequency: f64,
    /// `2 exp(−D t² / (4 Tr(Σ_g²) + 2 t σ_g²))`.
    pub bernstein: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomMatrixReport {
    pub dim: usize,
    pub samples: usize,
    pub trials: usize,
    pub trace: f64,
    pub sigma_g_sq: f64,
    pub trace_deviation: Vec<TraceDeviationRow>,
    pub lambda_max: Stat,
    /// `(1 + √(D/N)) σ_g²`.
    pub candidate_sqrt_d_over_n: f64,
    /// `(1 + √(N/D))² σ_g²`.
    pub candidate_edge: f64,
    /// Empirical mean minus each candidate.
    pub residual_sqrt_d_over_n: f64,
    pub residual_edge: f64,
    /// Residual scaled as `C σ_g² / N^{2/3}`, i.e. the implied `C`.
    pub implied_c: f64,
}

/// Ten evenly spaced deviations up to five standard deviations of `Tr Σ̂`.
pub fn default_t_grid(sigma: &DMatrix<f64>, samples: usize) -> Vec<f64> {
    let sd = (2.0 * (sigma * sigma).trace() / samples as f64).sqrt();
    (1..=10).map(|k| 0.5 * k as f64 * sd).collect()
}

pub fn random_matrix_checks(sigma: &DMatrix<f64>, samples: usize, trials: usize, t_grid: &[f64], seed: u64) -> Result<RandomMatrixReport, SdeError> {
    if samples == 0 || trials == 0 {
        return Err(SdeError::BadConfig("D and the trial count must be at least 1".into()));
    }
    let noise = NoiseModel::new(sigma.clone(), samples)?;
    let n = noise.dim();
    let trace = noise.trace();
    let trace_sq = noise.trace_sq();
    let sg2 = noise.sigma_g() * noise.sigma_g();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = vec![0usize; t_grid.len()];
    let mut lmax = Vec::with_capacity(trials);
    for _ in 0..trials {
        let emp = noise.empirical(&mut rng);
        let dev = (emp.trace() - trace).abs();
        for (c, &t) in exceed.iter_mut().zip(t_grid) {
            if dev >= t {
                *c += 1;
            }
        }
        lmax.push(lambda_max(&emp));
    }
    let d = samples as f64;
    let nf = n as f64;
    let trace_deviation = t_grid
        .iter()
        .zip(exceed)
        .map(|(&t, c)| {
            let frequency = c as f64 / trials as f64;
            let denom = 4.0 * trace_sq + 2.0 * t * sg2;
            let bernstein = if denom > 0.0 { 2.0 * (-d * t * t / denom).exp() } else { 0.0 };
            TraceDeviationRow { t, frequency, bernstein, holds: frequency <= bernstein }
        })
        .collect();
    let lambda_max = Stat::from_values(lmax.iter().copied());
    let candidate_sqrt_d_over_n = (1.0 + (d / nf).sqrt()) * sg2;
    let candidate_edge = (1.0 + (nf / d).sqrt()).powi(2) * sg2;
    let residual_sqrt_d_over_n = lambda_max.mean - candidate_sqrt_d_over_n;
    let implied_c = if sg2 > 0.0 { residual_sqrt_d_over_n * nf.powf(2.0 / 3.0) / sg2 } else { 0.0 };
    Ok(RandomMatrixReport {
        dim: n,
        samples,
        trials,
        trace,
        sigma_g_sq: sg2,
        trace_deviation,
        lambda_max,
        candidate_sqrt_d_over_n,
        candidate_edge,
        residual_sqrt_d_over_n,
        residual_edge: lambda_max.mean - candidate_edge,
        implied_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_noise() {
        let r = random_matrix_checks(&DMatrix::zeros(3, 3), 4, 50, &[0.1, 1.0], 0).unwrap();
        assert!(r.trace_deviation.iter().all(|row| row.frequency == 0.0));
        assert_eq!(r.lambda_max.mean, 0.0);
    }

    #[test]
    fn bernstein_tightens_with_d() {
        let sigma = DMatrix::identity(8, 8);
        let rhs = |d: usize| random_matrix_checks(&sigma, d, 1, &[2.0], 0).unwrap().trace_deviation[0].bernstein;
        assert!(rhs(32) < rhs(8) && rhs(128) < rhs(32));
    }

    #[test]
    fn small_identity_run() {
        let sigma = DMatrix::identity(8, 8);
        let grid = default_t_grid(&sigma, 8);
        let r = random_matrix_checks(&sigma, 8, 2000, &grid, 1).unwrap();
        assert!(r.trace_deviation.iter().all(|row| row.holds));
        assert!(r.lambda_max.mean > 1.0);
    }
}
