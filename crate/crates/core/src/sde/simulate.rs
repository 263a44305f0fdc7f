//! Euler–Maruyama ensembles with `Δt = η0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::objective::Objective;
use super::{AdamConstants, Algorithm, SdeError};
use crate::quadrature::neumaier_add;
use crate::schedule::Schedule;

fn default_paths() -> usize {
    1000
}

fn default_checkpoints() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub schedule: Schedule,
    pub eta0: f64,
    /// Simulated horizon `T`; defaults to the schedule horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub adam: AdamConstants,
    /// Start point; defaults to the objective's minimizer, else the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Reference point for trapping; defaults to the objective's minimizer, else `x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    /// Trapping radii `ε` for `‖X_T − x*‖² ≤ ε`.
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Paths whose checkpoint trajectory is kept for the trace CSV.
    #[serde(default)]
    pub trace_paths: usize,
}

impl SdeConfig {
    pub fn new(schedule: Schedule, eta0: f64, n_paths: usize, seed: u64, algorithm: Algorithm) -> Self {
        Self {
            schedule,
            eta0,
            horizon: None,
            n_paths,
            seed,
            algorithm,
            adam: AdamConstants::default(),
            x0: None,
            x_star: None,
            m0: None,
            v0: None,
            eps: Vec::new(),
            checkpoints: default_checkpoints(),
            trace_paths: 0,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(|| self.schedule.horizon())
    }

    pub fn steps(&self) -> usize {
        (self.horizon() / self.eta0).round() as usize
    }
}

/// Mean and standard error over paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl Stat {
    pub fn from_values(values: impl IntoIterator<Item = f64> + Clone) -> Self {
        let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
        for v in values.clone() {
            neumaier_add(&mut s, &mut c, v);
            n += 1;
        }
        if n == 0 {
            return Self { mean: 0.0, std_err: 0.0, n };
        }
        let mean = (s + c) / n as f64;
        let (mut q, mut qc) = (0.0, 0.0);
        for v in values {
            neumaier_add(&mut q, &mut qc, (v - mean) * (v - mean));
        }
        let var = if n > 1 { (q + qc) / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_err: (var / n as f64).sqrt(), n }
    }

    /// `mean ≤ bound + k·std_err`.
    pub fn within(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrappingRow {
    pub eps: f64,
    pub frequency: Stat,
}

/// Norm of the ensemble-mean momentum at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumRow {
    pub t: f64,
    pub mean_norm: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub path: usize,
    pub t: f64,
    pub x_norm: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub algorithm: Algorithm,
    pub n_paths: usize,
    pub steps: usize,
    pub eta0: f64,
    pub horizon: f64,
    pub seed: u64,
    /// η-weighted time average of `‖∇f(X)‖²`.
    pub grad_sq_avg: Stat,
    /// η-weighted time average of `‖m‖²` (Adam only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum_sq_avg: Option<Stat>,
    pub final_dist_sq: Stat,
    pub final_grad_sq: Stat,
    pub trapping: Vec<TrappingRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub momentum_mean: Vec<MomentumRow>,
    /// Smallest `v` component seen on any path (Adam only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_v: Option<f64>,
    /// True when every path's `‖∇f‖` was non-increasing.
    pub grad_monotone: bool,
    #[serde(skip)]
    pub traces: Vec<TraceRow>,
}

struct PathOutcome {
    grad_avg: f64,
    mom_avg: f64,
    final_dist_sq: f64,
    final_grad_sq: f64,
    trapped: Vec<bool>,
    momenta: Vec<f64>,
    min_v: f64,
    max_v: f64,
    monotone: bool,
    trace: Vec<TraceRow>,
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

struct Prepared<'a> {
    obj: &'a dyn Objective,
    noise: &'a NoiseModel,
    config: &'a SdeConfig,
    etas: Vec<f64>,
    x0: Vec<f64>,
    x_star: Vec<f64>,
    m0: Vec<f64>,
    v0: Vec<f64>,
    marks: Vec<usize>,
}

fn check_len(v: &[f64], n: usize) -> Result<(), SdeError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(SdeError::DimensionMismatch { expected: n, got: v.len() })
    }
}

fn prepare<'a>(obj: &'a dyn Objective, noise: &'a NoiseModel, config: &'a SdeConfig) -> Result<Prepared<'a>, SdeError> {
    let n = obj.dim();
    if noise.dim() != n {
        return Err(SdeError::DimensionMismatch { expected: n, got: noise.dim() });
    }
    if !(config.eta0.is_finite() && config.eta0 > 0.0) {
        return Err(SdeError::BadConfig(format!("eta0 must be positive, got {}", config.eta0)));
    }
    if config.n_paths == 0 {
        return Err(SdeError::BadConfig("n_paths must be at least 1".into()));
    }
    let t = config.horizon();
    if !(t.is_finite() && t > 0.0 && t <= config.schedule.horizon() * (1.0 + 1e-12)) {
        return Err(SdeError::BadConfig(format!("horizon T = {t} must lie in (0, S]")));
    }
    if let Some(&e) = config.eps.iter().find(|e| !(**e > 0.0)) {
        return Err(SdeError::BadEpsilon(e));
    }
    if config.algorithm == Algorithm::Adam {
        config.adam.validate()?;
    }
    let steps = config.steps().max(1);
    let etas: Vec<f64> = (0..steps).map(|k| config.schedule.value_clamped(k as f64 * config.eta0)).collect();
    let x0 = config.x0.clone().or_else(|| obj.minimizer()).unwrap_or_else(|| vec![0.0; n]);
    check_len(&x0, n)?;
    let x_star = config.x_star.clone().or_else(|| obj.minimizer()).unwrap_or_else(|| x0.clone());
    check_len(&x_star, n)?;
    let m0 = config.m0.clone().unwrap_or_else(|| vec![0.0; n]);
    check_len(&m0, n)?;
    let v0 = config.v0.clone().unwrap_or_else(|| vec![0.0; n]);
    check_len(&v0, n)?;
    if v0.iter().any(|v| !(*v >= 0.0)) {
        return Err(SdeError::BadConfig("v0 must be nonnegative".into()));
    }
    let k = config.checkpoints.max(1);
    let marks = (0..=k).map(|j| ((j as f64 / k as f64) * steps as f64).round() as usize).collect();
    Ok(Prepared { obj, noise, config, etas, x0, x_star, m0, v0, marks })
}

fn run_path(p: &Prepared, path: usize) -> Result<PathOutcome, SdeError> {
    let n = p.obj.dim();
    let cfg = p.config;
    let adam = cfg.algorithm == Algorithm::Adam;
    let eta0 = cfg.eta0;
    let sq_eta0 = eta0.sqrt();
    let a = cfg.adam;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path as u64);

    let mut x = p.x0.clone();
    let mut m = p.m0.clone();
    let mut v = p.v0.clone();
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut diag = vec![0.0; n];

    let (mut w_sum, mut w_c) = (0.0, 0.0);
    let (mut gs, mut gc) = (0.0, 0.0);
    let (mut ms, mut mc) = (0.0, 0.0);
    let mut min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut max_v = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut monotone = true;
    let mut prev_grad = f64::INFINITY;
    let mut momenta = Vec::new();
    let mut trace = Vec::new();
    let mut next_mark = 0usize;
    let steps = p.etas.len();
    let keep_trace = path < cfg.trace_paths;

    for k in 0..=steps {
        p.obj.gradient(&x, &mut g);
        let gsq = norm_sq(&g);
        if !gsq.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(SdeError::DivergedPath { path, step: k });
        }
        if gsq > prev_grad * (1.0 + 1e-12) {
            monotone = false;
        }
        prev_grad = gsq;
        while next_mark < p.marks.len() && p.marks[next_mark] == k {
            if adam {
                momenta.extend_from_slice(&m);
            }
            if keep_trace {
                trace.push(TraceRow { path, t: k as f64 * eta0, x_norm: norm_sq(&x).sqrt(), grad_norm: gsq.sqrt() });
            }
            next_mark += 1;
        }
        if k == steps {
            break;
        }
        let eta = p.etas[k];
        neumaier_add(&mut w_sum, &mut w_c, eta);
        neumaier_add(&mut gs, &mut gc, eta * gsq);
        if adam {
            neumaier_add(&mut ms, &mut mc, eta * norm_sq(&m));
        }
        p.noise.sample(&mut rng, &mut z, &mut scratch, &mut diag);
        if adam {
            let h = eta0 * eta;
            for i in 0..n {
                let step = m[i] / (v[i] + a.eps).sqrt();
                let m_new = m[i] - a.c1 * h * (m[i] - g[i]) + a.c1_prime * eta * sq_eta0 * z[i];
                let v_new = v[i] - a.c2 * h * (v[i] - diag[i]);
                x[i] -= h * step;
                m[i] = m_new;
                v[i] = v_new;
                min_v = min_v.min(v_new);
                max_v = max_v.max(v_new);
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(SdeError::DivergedPath { path, step: k + 1 });
            }
        } else {
            let h = eta0 * eta;
            for i in 0..n {
                x[i] -= h * (g[i] + z[i]);
            }
        }
    }

    let w = w_sum + w_c;
    let avg = |s: f64| if w > 0.0 { s / w } else { 0.0 };
    let dist_sq: f64 = x.iter().zip(&p.x_star).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(PathOutcome {
        grad_avg: avg(gs + gc),
        mom_avg: avg(ms + mc),
        final_dist_sq: dist_sq,
        final_grad_sq: prev_grad,
        trapped: cfg.eps.iter().map(|&e| dist_sq <= e).collect(),
        momenta,
        min_v,
        max_v,
        monotone,
        trace,
    })
}

/// Runs `n_paths` independent paths. Each path draws from its own stream of
/// a ChaCha8 generator keyed by `(seed, path)`; reductions run in path order,
/// so results do not depend on thread scheduling.
pub fn simulate(obj: &dyn Objective, noise: &NoiseModel, config: &SdeConfig) -> Result<SimulationReport, SdeError> {
    let p = prepare(obj, noise, config)?;
    let outcomes: Vec<Result<PathOutcome, SdeError>> = (0..config.n_paths).into_par_iter().map(|i| run_path(&p, i)).collect();
    let outcomes: Vec<PathOutcome> = outcomes.into_iter().collect::<Result<_, _>>()?;
    let adam = config.algorithm == Algorithm::Adam;
    let n = obj.dim();

    let stat = |f: &dyn Fn(&PathOutcome) -> f64| Stat::from_values(outcomes.iter().map(f));
    let trapping = config
        .eps
        .iter()
        .enumerate()
        .map(|(j, &eps)| TrappingRow {
            eps,
            frequency: Stat::from_values(outcomes.iter().map(move |o| o.trapped[j] as u8 as f64)),
        })
        .collect();

    let mut momentum_mean = Vec::new();
    if adam {
        for (c, &mark) in p.marks.iter().enumerate() {
            let mut norm_sq_mean = 0.0;
            let mut var_sum = 0.0;
            for i in 0..n {
                let s = Stat::from_values(outcomes.iter().map(move |o| o.momenta[c * n + i]));
                norm_sq_mean += s.mean * s.mean;
                var_sum += s.std_err * s.std_err;
            }
            momentum_mean.push(MomentumRow { t: mark as f64 * config.eta0, mean_norm: norm_sq_mean.sqrt(), std_err: var_sum.sqrt() });
        }
    }

    Ok(SimulationReport {
        algorithm: config.algorithm,
        n_paths: config.n_paths,
        steps: p.etas.len(),
        eta0: config.eta0,
        horizon: config.horizon(),
        seed: config.seed,
        grad_sq_avg: stat(&|o| o.grad_avg),
        momentum_sq_avg: adam.then(|| stat(&|o| o.mom_avg)),
        final_dist_sq: stat(&|o| o.final_dist_sq),
        final_grad_sq: stat(&|o| o.final_grad_sq),
        trapping,
        momentum_mean,
        min_v: adam.then(|| outcomes.iter().map(|o| o.min_v).fold(f64::INFINITY, f64::min)),
        max_v: adam.then(|| outcomes.iter().map(|o| o.max_v).fold(f64::NEG_INFINITY, f64::max)),
        grad_monotone: outcomes.iter().all(|o| o.monotone),
        traces: outcomes.into_iter().flat_map(|o| o.trace).collect(),
    })
}

/// Ensemble variance of `X_T` for a one-dimensional problem.
pub fn scalar_final_variance(obj: &dyn Objective, noise: &NoiseModel, config: &SdeConfig) -> Result<Stat, SdeError> {
    // E[(X−x*)²] with x* the stationary mean; the standard error is of the second moment
    let r = simulate(obj, noise, config)?;
    Ok(r.final_dist_sq)
}
