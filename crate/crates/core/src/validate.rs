//! Reduced-size validation suite behind `optlaws validate`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divergence::{DivergenceParams, Verdict};
use crate::quadrature::AdaptiveSimpson;
use crate::schedule::{CooldownShape, Functional, Schedule};
use crate::sde::bounds::convergence_bound;
use crate::sde::linalg::random_spd;
use crate::sde::random_matrix::default_t_grid;
use crate::sde::{
    anti_concentration_check, escape_bounds, gaussian_approx, random_matrix_checks, simulate, AdamConstants, Algorithm,
    NoiseModel, Quadratic, SdeConfig, SdeError,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &'static str, observed: f64, threshold: f64, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult { name, passed, observed, threshold, detail: detail.into() }
}

/// Random member of the four-phase family on `[0, s]`.
pub fn random_general<R: Rng + ?Sized>(rng: &mut R, s: f64) -> Schedule {
    loop {
        let eta1 = rng.random_range(0.05..1.0);
        let eta2 = rng.random_range(0.0..eta1);
        let mut m = [rng.random_range(0.0..s), rng.random_range(0.0..s), rng.random_range(0.0..s)];
        m.sort_by(f64::total_cmp);
        let shape = if rng.random_bool(0.5) { CooldownShape::Linear } else { CooldownShape::Cosine };
        if let Ok(sch) = Schedule::general_with(eta1, eta2, m[0], m[1], m[2], s, shape) {
            return sch;
        }
    }
}

fn integral_check(rng: &mut ChaCha8Rng) -> Result<CheckResult, SdeError> {
    let quad = AdaptiveSimpson::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = rng.random_range(1.0..100.0);
        let sch = random_general(rng, s);
        for f in Functional::ALL {
            let exact = sch.integral(0.0, s, f)?;
            let numeric = sch.integral_numeric(0.0, s, f, &quad)?;
            worst = worst.max((exact - numeric).abs() / exact.abs().max(1e-300).max(1e-12));
        }
    }
    Ok(check("schedule_integrals", worst, 1e-9, worst <= 1e-9, "analytic vs adaptive Simpson, 20 schedules"))
}

fn ou_check() -> Result<CheckResult, SdeError> {
    let (lam, eta, eta0, s2) = (2.0, 0.5, 0.01, 1.3);
    let sch = Schedule::constant(eta, 8.0)?;
    let times: Vec<f64> = (1..=16).map(|k| k as f64 * 0.5).collect();
    let ga = gaussian_approx(
        &Quadratic::diagonal(&[lam])?,
        &NoiseModel::isotropic(1, s2, 1)?,
        &sch,
        &[0.0],
        Algorithm::Sgd,
        &AdamConstants::default(),
        eta0,
        &times,
    )?;
    let worst = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let exact = eta0 * eta * s2 * (1.0 - (-2.0 * lam * eta * t).exp()) / (2.0 * lam);
            (ga.closed_form[k][(0, 0)] - exact).abs()
        })
        .fold(0.0, f64::max);
    Ok(check("scalar_ou_closed_form", worst, 1e-10, worst <= 1e-10, "closed form vs analytic scalar solution"))
}

fn covariance_check(rng: &mut ChaCha8Rng, algorithm: Algorithm, n: usize) -> Result<CheckResult, SdeError> {
    let h = random_spd(n, 0.2, 2.0, rng);
    let obj = Quadratic::new(h)?;
    let noise = NoiseModel::new(random_spd(n, 0.1, 1.0, rng), 1)?;
    let sch = random_general(rng, 6.0);
    let times: Vec<f64> = (1..=10).map(|k| 0.6 * k as f64).collect();
    let ga = gaussian_approx(&obj, &noise, &sch, &vec![0.0; n], algorithm, &AdamConstants::default(), 0.05, &times)?;
    let name = match algorithm {
        Algorithm::Sgd => "sgd_covariance_closed_vs_ode",
        Algorithm::Adam => "adam_covariance_closed_vs_ode",
    };
    let ok = ga.max_discrepancy <= 1e-6 && ga.min_eigenvalue >= -1e-10;
    Ok(check(name, ga.max_discrepancy, 1e-6, ok, format!("N = {n}, min eigenvalue {:e}", ga.min_eigenvalue)))
}

fn anti_concentration(seed: u64) -> Result<CheckResult, SdeError> {
    let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 2.0, 0.25]));
    let tr = cov.trace();
    let eps: Vec<f64> = (1..=5).map(|k| k as f64 * 0.07 * tr / std::f64::consts::E).collect();
    let rows = anti_concentration_check(&cov, &eps, 100_000, seed)?;
    let worst = rows.iter().map(|r| r.frequency / r.bound).fold(0.0, f64::max);
    Ok(check("anti_concentration", worst, 1.0, rows.iter().all(|r| r.holds), "max frequency / bound over 5 radii"))
}

fn bound_checks(seed: u64) -> Result<Vec<CheckResult>, SdeError> {
    let n = 4;
    let obj = Quadratic::diagonal(&[0.5, 1.0, 1.5, 2.0])?;
    let noise = NoiseModel::isotropic(n, 0.5, n)?;
    let sch = Schedule::general(1.0, 1.0, 1.0, 1.0, 4.0, 8.0)?;
    let x0 = vec![1.0; n];
    let mut out = Vec::new();
    for algorithm in [Algorithm::Sgd, Algorithm::Adam] {
        let mut cfg = SdeConfig::new(sch.clone(), 0.02, 400, seed, algorithm);
        cfg.x0 = Some(x0.clone());
        let r = simulate(&obj, &noise, &cfg)?;
        let b = convergence_bound(algorithm, &obj, &noise, &sch, 8.0, 0.02, &x0, cfg.adam, None, None, None, None)?;
        let stat = match algorithm {
            Algorithm::Sgd => r.grad_sq_avg,
            Algorithm::Adam => r.momentum_sq_avg.expect("adam reports momentum"),
        };
        let name = match algorithm {
            Algorithm::Sgd => "sgd_bound_dominates",
            Algorithm::Adam => "adam_bound_dominates",
        };
        out.push(check(name, stat.mean, b.value, stat.within(b.value, 3.0), format!("std_err {:e}", stat.std_err)));
        if let Some(v) = r.min_v {
            out.push(check("adam_v_nonnegative", v, 0.0, v >= 0.0, "min v over all paths and steps"));
        }
    }
    Ok(out)
}

fn trapping_check(seed: u64) -> Result<CheckResult, SdeError> {
    let n = 2;
    let obj = Quadratic::diagonal(&[1.0, 2.0])?;
    let noise = NoiseModel::isotropic(n, 1.0, 1)?;
    let sch = Schedule::general(1.0, 1.0, 2.0, 2.0, 2.0, 10.0)?;
    let eta0 = 0.02;
    let ga = gaussian_approx(&obj, &noise, &sch, &[0.0, 0.0], Algorithm::Sgd, &AdamConstants::default(), eta0, &[10.0])?;
    let tr = ga.position_trace(0);
    let mut cfg = SdeConfig::new(sch.clone(), eta0, 2000, seed, Algorithm::Sgd);
    cfg.eps = [0.01, 0.1, 0.5].iter().map(|f| f * tr).collect();
    let r = simulate(&obj, &noise, &cfg)?;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for row in &r.trapping {
        let b = escape_bounds(tr, row.eps, &sch, noise.trace())?;
        ok &= row.frequency.within(b.trapped_upper, 3.0);
        worst = worst.max(row.frequency.mean / b.trapped_upper);
    }
    Ok(check("trapping_bound", worst, 1.0, ok, "empirical trapped frequency / bound"))
}

fn random_matrix(seed: u64) -> Result<CheckResult, SdeError> {
    let sigma = DMatrix::identity(16, 16);
    let grid = default_t_grid(&sigma, 16);
    let r = random_matrix_checks(&sigma, 16, 1000, &grid, seed)?;
    let worst = r.trace_deviation.iter().map(|row| row.frequency / row.bernstein).fold(0.0, f64::max);
    let ok = r.trace_deviation.iter().all(|row| row.holds);
    Ok(check("trace_concentration", worst, 1.0, ok, format!("mean lambda_max {:.4}", r.lambda_max.mean)))
}

fn gate_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let p = DivergenceParams::default();
    let mut ok = true;
    for _ in 0..50 {
        let (n, s) = (rng.random_range(0.1..10.0), rng.random_range(1.0..500.0));
        let crit = p.critical_rate(n, s);
        let g = p.criterion(crit * rng.random_range(0.1..1.0), rng.random_range(0.1..10.0), n, s);
        ok &= matches!(g, Ok(r) if r.r == 0.0 && r.verdict == Verdict::Stable);
    }
    check("gate_zero_below_critical", 0.0, 0.0, ok, "R = 0 whenever eta_max <= eta_L")
}

pub fn run_validation(seed: u64) -> Result<ValidationReport, SdeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        integral_check(&mut rng)?,
        ou_check()?,
        covariance_check(&mut rng, Algorithm::Sgd, 4)?,
        covariance_check(&mut rng, Algorithm::Adam, 2)?,
        anti_concentration(seed)?,
    ];
    checks.extend(bound_checks(seed)?);
    checks.push(trapping_check(seed)?);
    checks.push(random_matrix(seed)?);
    checks.push(gate_check(&mut rng));
    Ok(ValidationReport { seed, passed: checks.iter().all(|c| c.passed), checks })
}
