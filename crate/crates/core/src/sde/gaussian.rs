//! Gaussian approximation of the SGD/Adam diffusions around a minimum.
//!
//! The covariance obeys `dP/dt = −η(G P + P Gᵀ) + κ η² Q` with `P_0 = 0`,
//! solved two ways: the closed form
//! `P_t = ∫_0^t κ η(s)² e^{−G(τ_t−τ_s)} Q e^{−Gᵀ(τ_t−τ_s)} ds`, `τ_t = ∫_0^t η`,
//! and classical RK4 on the matrix ODE.

use nalgebra::DMatrix;
use serde::Serialize;

use super::linalg::{is_symmetric, lambda_min, max_abs_diff, symmetrize};
use super::noise::NoiseModel;
use super::objective::Objective;
use super::{AdamConstants, Algorithm, SdeError};
use crate::quadrature::GaussKronrod;
use crate::schedule::{Functional, Schedule};

/// Linear covariance ODE with generator `G`, noise `Q` and scale `κ`.
#[derive(Debug, Clone)]
pub struct CovarianceOde {
    pub generator: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub kappa: f64,
}

fn check_times(schedule: &Schedule, times: &[f64]) -> Result<(), SdeError> {
    let s = schedule.horizon();
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev && t <= s) {
            return Err(SdeError::BadConfig(format!("time grid must be sorted within [0, {s}], got {t}")));
        }
        prev = t;
    }
    Ok(())
}

/// Breakpoints of `[0, t]`: schedule joints below `t`, plus both ends.
fn pieces(schedule: &Schedule, t: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(schedule.joints().into_iter().filter(|&j| j > 0.0 && j < t));
    b.push(t);
    b
}

impl CovarianceOde {
    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    fn rhs(&self, eta: f64, p: &DMatrix<f64>) -> DMatrix<f64> {
        let gp = &self.generator * p;
        let sym = &gp + gp.transpose();
        &self.noise * (self.kappa * eta * eta) - sym * eta
    }

    /// RK4 with at most `h` per step, restarting at every joint and stored time.
    pub fn rk4(&self, schedule: &Schedule, times: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>, SdeError> {
        check_times(schedule, times)?;
        let n = self.dim();
        let mut p = DMatrix::zeros(n, n);
        let mut out = Vec::with_capacity(times.len());
        let mut knots: Vec<f64> = schedule.joints();
        knots.extend_from_slice(times);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut t = 0.0;
        let mut ti = 0;
        while ti < times.len() && times[ti] == 0.0 {
            out.push(p.clone());
            ti += 1;
        }
        for &k in knots.iter().filter(|&&k| k > 0.0) {
            if ti == times.len() {
                break;
            }
            let steps = ((k - t) / h).ceil().max(1.0) as usize;
            let dt = (k - t) / steps as f64;
            for j in 0..steps {
                let t0 = t + j as f64 * dt;
                let e0 = schedule.value_clamped(t0);
                let em = schedule.value_clamped(t0 + 0.5 * dt);
                let e1 = schedule.value_clamped(t0 + dt);
                let k1 = self.rhs(e0, &p);
                let k2 = self.rhs(em, &(&p + &k1 * (0.5 * dt)));
                let k3 = self.rhs(em, &(&p + &k2 * (0.5 * dt)));
                let k4 = self.rhs(e1, &(&p + &k3 * dt));
                p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            t = k;
            while ti < times.len() && times[ti] == k {
                out.push(symmetrize(&p));
                ti += 1;
            }
        }
        Ok(out)
    }

    /// RK4 starting at step `S/2000`, halved until two successive solutions
    /// agree to `1e-8` (relative to `max(1, |P|)`). Returns the finer solution
    /// and its step.
    pub fn integrate(&self, schedule: &Schedule, times: &[f64]) -> Result<(Vec<DMatrix<f64>>, f64, bool), SdeError> {
        let mut h = schedule.horizon() / 2000.0;
        let mut coarse = self.rk4(schedule, times, h)?;
        for _ in 0..10 {
            h *= 0.5;
            let fine = self.rk4(schedule, times, h)?;
            let worst = coarse.iter().zip(&fine).map(|(a, b)| max_abs_diff(a, b) / b.amax().max(1.0)).fold(0.0, f64::max);
            if worst <= 1e-8 {
                return Ok((fine, h, true));
            }
            coarse = fine;
        }
        Ok((coarse, h, false))
    }

    /// Closed form, by quadrature over each smooth piece of the schedule.
    pub fn closed_form(&self, schedule: &Schedule, times: &[f64]) -> Result<Vec<DMatrix<f64>>, SdeError> {
        check_times(schedule, times)?;
        if is_symmetric(&self.generator, 0.0) {
            self.closed_form_symmetric(schedule, times)
        } else {
            self.closed_form_general(schedule, times)
        }
    }

    fn closed_form_symmetric(&self, schedule: &Schedule, times: &[f64]) -> Result<Vec<DMatrix<f64>>, SdeError> {
        let n = self.dim();
        let eig = self.generator.clone().symmetric_eigen();
        let v = &eig.eigenvectors;
        let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let q = v.transpose() * &self.noise * v;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let gk = GaussKronrod::default();
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let tau_t = schedule.integral(0.0, t, Functional::Eta)?;
            let mut acc = vec![0.0; pairs.len()];
            let b = pieces(schedule, t);
            for w in b.windows(2) {
                let part = gk.integrate_vec(
                    pairs.len(),
                    |s, o| {
                        let eta = schedule.value_clamped(s);
                        let tau_s = schedule.integral(0.0, s.min(t), Functional::Eta).unwrap_or(tau_t);
                        let d = tau_t - tau_s;
                        for (k, &(i, j)) in pairs.iter().enumerate() {
                            o[k] = eta * eta * (-(lam[i] + lam[j]) * d).exp();
                        }
                    },
                    w[0],
                    w[1],
                )?;
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            let mut pe = DMatrix::zeros(n, n);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                pe[(i, j)] = self.kappa * q[(i, j)] * acc[k];
                pe[(j, i)] = pe[(i, j)];
            }
            out.push(symmetrize(&(v * pe * v.transpose())));
        }
        Ok(out)
    }

    fn closed_form_general(&self, schedule: &Schedule, times: &[f64]) -> Result<Vec<DMatrix<f64>>, SdeError> {
        let n = self.dim();
        let gk = GaussKronrod::default();
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let tau_t = schedule.integral(0.0, t, Functional::Eta)?;
            let mut acc = vec![0.0; n * n];
            for w in pieces(schedule, t).windows(2) {
                let part = gk.integrate_vec(
                    n * n,
                    |s, o| {
                        let eta = schedule.value_clamped(s);
                        let tau_s = schedule.integral(0.0, s.min(t), Functional::Eta).unwrap_or(tau_t);
                        let e = (&self.generator * (-(tau_t - tau_s))).exp();
                        let m = &e * &self.noise * e.transpose() * (eta * eta);
                        o.copy_from_slice(m.as_slice());
                    },
                    w[0],
                    w[1],
                )?;
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            out.push(symmetrize(&(DMatrix::from_column_slice(n, n, &acc) * self.kappa)));
        }
        Ok(out)
    }
}

/// Both covariance solutions on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianApprox {
    pub algorithm: Algorithm,
    pub times: Vec<f64>,
    /// Stationary mean: `x*` for SGD, `[x*; 0; diag Σ]` for Adam.
    pub mean: Vec<f64>,
    #[serde(skip)]
    pub ode: CovarianceOde,
    #[serde(skip)]
    pub closed_form: Vec<DMatrix<f64>>,
    #[serde(skip)]
    pub integrated: Vec<DMatrix<f64>>,
    pub ode_step: f64,
    pub ode_converged: bool,
    /// `max_t ‖P_closed − P_ode‖_max / (1 + ‖P‖_max)`.
    pub max_discrepancy: f64,
    pub min_eigenvalue: f64,
}

impl GaussianApprox {
    /// Dimension of the position block.
    pub fn position_dim(&self) -> usize {
        match self.algorithm {
            Algorithm::Sgd => self.ode.dim(),
            Algorithm::Adam => self.ode.dim() / 3,
        }
    }

    /// Trace of the position block of the closed-form covariance at `times[k]`.
    pub fn position_trace(&self, k: usize) -> f64 {
        let n = self.position_dim();
        (0..n).map(|i| self.closed_form[k][(i, i)]).sum()
    }
}

/// Adam generator `Ĥ` for state-independent noise.
pub fn adam_generator(hessian: &DMatrix<f64>, sigma_diag: &[f64], adam: &AdamConstants) -> DMatrix<f64> {
    let n = hessian.nrows();
    let mut g = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        g[(i, n + i)] = 1.0 / (sigma_diag[i] + adam.eps).sqrt();
        g[(n + i, n + i)] = adam.c1;
        g[(2 * n + i, 2 * n + i)] = adam.c2;
        for j in 0..n {
            g[(n + i, j)] = -adam.c1 * hessian[(i, j)];
        }
    }
    g
}

#[allow(clippy::too_many_arguments)]
pub fn gaussian_approx(
    obj: &dyn Objective,
    noise: &NoiseModel,
    schedule: &Schedule,
    x_star: &[f64],
    algorithm: Algorithm,
    adam: &AdamConstants,
    eta0: f64,
    times: &[f64],
) -> Result<GaussianApprox, SdeError> {
    let n = obj.dim();
    if x_star.len() != n {
        return Err(SdeError::DimensionMismatch { expected: n, got: x_star.len() });
    }
    if noise.dim() != n {
        return Err(SdeError::DimensionMismatch { expected: n, got: noise.dim() });
    }
    let mut g = vec![0.0; n];
    obj.gradient(x_star, &mut g);
    let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if grad_norm > 1e-8 {
        return Err(SdeError::NotStationary { grad_norm });
    }
    let h = symmetrize(&obj.hessian(x_star));
    let sigma = noise.sigma().clone();
    let (ode, mean) = match algorithm {
        Algorithm::Sgd => {
            if !(eta0 > 0.0) {
                return Err(SdeError::BadConfig(format!("eta0 must be positive, got {eta0}")));
            }
            (CovarianceOde { generator: h, noise: sigma, kappa: eta0 }, x_star.to_vec())
        }
        Algorithm::Adam => {
            adam.validate()?;
            let d = noise.diag();
            let generator = adam_generator(&h, &d, adam);
            let mut q = DMatrix::zeros(3 * n, 3 * n);
            q.view_mut((n, n), (n, n)).copy_from(&sigma);
            let mut mean = x_star.to_vec();
            mean.extend(std::iter::repeat(0.0).take(n));
            mean.extend(d);
            (CovarianceOde { generator, noise: q, kappa: adam.c1_prime * adam.c1_prime }, mean)
        }
    };
    let closed_form = ode.closed_form(schedule, times)?;
    let (integrated, ode_step, ode_converged) = ode.integrate(schedule, times)?;
    let mut max_discrepancy: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    for (c, o) in closed_form.iter().zip(&integrated) {
        max_discrepancy = max_discrepancy.max(max_abs_diff(c, o) / (1.0 + c.amax()));
        min_eigenvalue = min_eigenvalue.min(lambda_min(c));
    }
    Ok(GaussianApprox {
        algorithm,
        times: times.to_vec(),
        mean,
        ode,
        closed_form,
        integrated,
        ode_step,
        ode_converged,
        max_discrepancy,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::objective::Quadratic;

    fn grid(s: f64, k: usize) -> Vec<f64> {
        (1..=k).map(|i| s * i as f64 / k as f64).collect()
    }

    #[test]
    fn scalar_ou() {
        let (lam, eta, eta0, s2) = (1.5, 0.3, 0.02, 0.7);
        let sched = Schedule::constant(eta, 10.0).unwrap();
        let obj = Quadratic::diagonal(&[lam]).unwrap();
        let noise = NoiseModel::isotropic(1, s2, 1).unwrap();
        let times = grid(10.0, 10);
        let ga = gaussian_approx(&obj, &noise, &sched, &[0.0], Algorithm::Sgd, &AdamConstants::default(), eta0, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let exact = eta0 * eta * eta * s2 * (1.0 - (-2.0 * lam * eta * t).exp()) / (2.0 * lam * eta);
            assert!((ga.closed_form[k][(0, 0)] - exact).abs() < 1e-12, "{t}");
            assert!((ga.integrated[k][(0, 0)] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_noise_and_frozen() {
        let obj = Quadratic::diagonal(&[1.0, 2.0]).unwrap();
        let times = grid(4.0, 4);
        let sched = Schedule::general(1.0, 1.0, 1.0, 2.0, 3.0, 4.0).unwrap();
        let quiet = NoiseModel::isotropic(2, 0.0, 1).unwrap();
        let ga = gaussian_approx(&obj, &quiet, &sched, &[0.0, 0.0], Algorithm::Sgd, &AdamConstants::default(), 0.1, &times).unwrap();
        assert!(ga.closed_form.iter().chain(&ga.integrated).all(|p| p.amax() == 0.0));
        let frozen = Schedule::constant(0.0, 4.0).unwrap();
        let loud = NoiseModel::isotropic(2, 1.0, 1).unwrap();
        let ga = gaussian_approx(&obj, &loud, &frozen, &[0.0, 0.0], Algorithm::Adam, &AdamConstants::default(), 0.1, &times).unwrap();
        assert!(ga.closed_form.iter().chain(&ga.integrated).all(|p| p.amax() == 0.0));
    }

    #[test]
    fn non_stationary_rejected() {
        let obj = Quadratic::diagonal(&[1.0]).unwrap();
        let noise = NoiseModel::isotropic(1, 1.0, 1).unwrap();
        let sched = Schedule::constant(1.0, 1.0).unwrap();
        let r = gaussian_approx(&obj, &noise, &sched, &[0.5], Algorithm::Sgd, &AdamConstants::default(), 0.1, &[1.0]);
        assert!(matches!(r, Err(SdeError::NotStationary { .. })));
    }

    #[test]
    fn adam_closed_form_matches_ode() {
        let obj = Quadratic::diagonal(&[1.0, 0.5]).unwrap();
        let noise = NoiseModel::diagonal(&[1.0, 0.4], 1).unwrap();
        let sched = Schedule::general(1.0, 0.5, 1.0, 3.0, 4.0, 6.0).unwrap();
        let times = grid(6.0, 6);
        let ga = gaussian_approx(&obj, &noise, &sched, &[0.0, 0.0], Algorithm::Adam, &AdamConstants::default(), 0.1, &times).unwrap();
        assert!(ga.max_discrepancy < 1e-6, "{}", ga.max_discrepancy);
        assert!(ga.min_eigenvalue > -1e-10);
        assert_eq!(ga.mean, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.4]);
    }
}
