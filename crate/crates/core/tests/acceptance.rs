//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::{E, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use optlaws::cli;
use optlaws::divergence::DivergenceParams;
use optlaws::features::{compute_features, Powers};
use optlaws::law::{fit, cosine_constant_gap, FitOptions, RunRecord, REFERENCE_COEFFICIENTS};
use optlaws::schedule::CooldownShape;
use optlaws::sde::bounds::convergence_bound;
use optlaws::sde::random_matrix::default_t_grid;
use optlaws::sde::{
    anti_concentration_check, escape_bounds, gaussian_approx, random_matrix_checks, simulate, AdamConstants, Algorithm,
    DoubleWell, NoiseModel, Objective, Quadratic, SdeConfig,
};
use optlaws::{Functional, PolicyRule, Schedule, SimpleLaw, TrainingConfig};

type Outcome = (bool, String);

const POWERS: [f64; 16] =
    [-1.0, -1.0, 0.25, -0.23, 1.0, 0.25, 0.25, -0.25, 0.2, 0.15, 0.15, 0.15, -0.25, -0.25, 0.2, 1.0];
const LR_SCALE: f64 = 1.5e-2;

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(a.abs()).max(1e-300)
    }
}

// ---------- schedule oracle ----------

#[derive(Clone, Copy, Debug)]
struct FourPhase {
    e1: f64,
    e2: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    s: f64,
    cosine: bool,
}

impl FourPhase {
    fn build(&self) -> Schedule {
        let shape = if self.cosine { CooldownShape::Cosine } else { CooldownShape::Linear };
        Schedule::general_with(self.e1, self.e2, self.a1, self.a2, self.a3, self.s, shape).unwrap()
    }

    fn eta(&self, t: f64) -> f64 {
        if t < self.a1 {
            self.e1 * t / self.a1
        } else if t < self.a2 {
            self.e1 + (self.e2 - self.e1) * (t - self.a1) / (self.a2 - self.a1)
        } else if t < self.a3 {
            self.e2
        } else if self.cosine {
            0.5 * self.e2 * (1.0 + (PI * (t - self.a3) / (self.s - self.a3)).cos())
        } else {
            self.e2 * (self.s - t) / (self.s - self.a3)
        }
    }

    fn deta(&self, t: f64) -> f64 {
        if t < self.a1 {
            self.e1 / self.a1
        } else if t < self.a2 {
            (self.e2 - self.e1) / (self.a2 - self.a1)
        } else if t < self.a3 {
            0.0
        } else if self.cosine {
            let w = PI / (self.s - self.a3);
            -0.5 * self.e2 * w * (w * (t - self.a3)).sin()
        } else {
            -self.e2 / (self.s - self.a3)
        }
    }

    fn integrand(&self, f: Functional, t: f64) -> f64 {
        match f {
            Functional::Eta => self.eta(t),
            Functional::EtaSq => self.eta(t).powi(2),
            Functional::DetaSq => self.deta(t).powi(2),
        }
    }

    /// Adaptive Simpson on each smooth piece of `[u, v]`.
    fn quad(&self, f: Functional, u: f64, v: f64) -> f64 {
        let mut cuts = vec![u];
        cuts.extend([self.a1, self.a2, self.a3].into_iter().filter(|&m| m > u && m < v));
        cuts.push(v);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                // evaluate strictly inside the piece so the branch is fixed
                let g = |t: f64| self.integrand(f, t.clamp(a + (b - a) * 1e-15, b - (b - a) * 1e-15));
                simpson(&g, a, b, 1e-15 * (1.0 + (b - a)), 40)
            })
            .sum()
    }
}

fn simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(g, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn random_four_phase(rng: &mut ChaCha8Rng) -> FourPhase {
    let s = rng.random_range(1.0..100.0);
    let e1 = rng.random_range(0.05..1.0);
    let mut e2 = if rng.random_bool(0.2) { e1 } else { rng.random_range(0.0..e1) };
    let mut m = [rng.random_range(0.0..s), rng.random_range(0.0..s), rng.random_range(0.0..s)];
    m.sort_by(f64::total_cmp);
    // sometimes collapse a phase
    match rng.random_range(0..5) {
        0 => {
            m[1] = m[0];
            e2 = e1;
        }
        1 => m[2] = m[1],
        _ => {}
    }
    if m[0] <= 0.0 {
        m[0] = 0.01 * s;
        m[1] = m[1].max(m[0]);
        m[2] = m[2].max(m[1]);
    }
    FourPhase { e1, e2, a1: m[0], a2: m[1], a3: m[2], s, cosine: rng.random_bool(0.5) }
}

fn c1_integrals() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_quad, mut worst_add) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let p = random_four_phase(&mut rng);
        let sch = p.build();
        let mut intervals = vec![(0.0, p.s)];
        for _ in 0..3 {
            let (x, y) = (rng.random_range(0.0..p.s), rng.random_range(0.0..p.s));
            intervals.push((x.min(y), x.max(y)));
        }
        for f in Functional::ALL {
            for &(u, v) in &intervals {
                let exact = sch.integral(u, v, f).unwrap();
                let oracle = p.quad(f, u, v);
                let scale = oracle.abs().max(exact.abs());
                if scale > 1e-14 {
                    worst_quad = worst_quad.max(rel(exact, oracle));
                }
                let m = rng.random_range(u..=v);
                let split = sch.integral(u, m, f).unwrap() + sch.integral(m, v, f).unwrap();
                if scale > 0.0 {
                    worst_add = worst_add.max((split - exact).abs() / scale);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst_quad <= 1e-9 && worst_add <= 1e-12 && secs < 5.0;
    (ok, format!("max rel vs quadrature {worst_quad:.2e} (<= 1e-9), additivity {worst_add:.2e} (<= 1e-12), {secs:.2}s (< 5s)"))
}

// ---------- reference closed forms ----------

fn powered(bases: [f64; 16]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..16 {
        out[i] = bases[i].powf(POWERS[i]);
    }
    out
}

fn bases_warm_cool(h: f64, a: f64, s: f64, n: f64) -> [f64; 16] {
    [
        a * h / 2.0,
        (s - a) * h / 2.0,
        2.0 * n / ((s - a) * h),
        a * (s - a) * h * h / 4.0,
        h * h / (s - a),
        h * h / a,
        h * h / (s - a),
        s * n,
        2.0 * h / (a * (s - a)),
        2.0 * h / ((s - a) * (s - a)),
        2.0 * h * n / (a * (s - a)),
        2.0 * h * n / ((s - a) * (s - a)),
        n,
        s,
        h,
        1.0,
    ]
}

fn bases_const_cool(h: f64, a1: f64, a2: f64, s: f64, n: f64) -> [f64; 16] {
    let long = s + a2 - 2.0 * a1;
    [
        a1 * h / 2.0,
        long * h / 2.0,
        2.0 * n / (long * h),
        a1 * long * h * h / 4.0,
        h * h / (s - a2),
        h * h / a1,
        h * h / (s - a2),
        s * n,
        2.0 * h / (a1 * (s - a2)),
        2.0 * h / ((s - a2) * long),
        2.0 * h * n / (a1 * (s - a2)),
        2.0 * h * n / ((s - a2) * long),
        n,
        s,
        h,
        1.0,
    ]
}

fn c2_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let rule: PolicyRule = "a1/a1/a1".parse().unwrap();
    let powers = Powers::default();
    let powers_match = powers.0 == POWERS;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = rng.random_range(0.05..1.5);
        let n = rng.random_range(0.1..10.0);
        let s = rng.random_range(20.0..500.0);
        let a = rng.random_range(0.1..0.5 * s);
        let sch = Schedule::general(h, h, a, a, a, s).unwrap();
        let got = compute_features(&sch, &rule.apply(sch.markers()), n, &powers).unwrap().values();
        let want = powered(bases_warm_cool(h, a, s, n));
        for i in 0..16 {
            worst = worst.max(rel(got[i], want[i]));
        }

        let a1 = rng.random_range(0.1..0.3 * s);
        let a2 = rng.random_range(a1..0.95 * s);
        let sch = Schedule::general(h, h, a1, a1, a2, s).unwrap();
        let got = compute_features(&sch, &rule.apply(sch.markers()), n, &powers).unwrap().values();
        let want = powered(bases_const_cool(h, a1, a2, s, n));
        for i in 0..16 {
            worst = worst.max(rel(got[i], want[i]));
        }
    }
    (worst <= 1e-12 && powers_match, format!("2 families x 20 points x 16 entries, max rel {worst:.2e} (<= 1e-12), default powers match reference: {powers_match}"))
}

// ---------- planted-law corpus ----------

/// Log loss of a linear warmup / constant / linear cooldown run under the
/// default marker rule, from closed forms.
fn planted_log_loss(c: &[f64; 16], n: f64, s: f64, raw_eta: f64, a: f64, a_c: f64) -> f64 {
    let h = raw_eta / LR_SCALE;
    let iw = h * a / 2.0;
    let ic = h * (s - a_c) / 2.0;
    let ew = h * h / a;
    let ec = h * h / (s - a_c);
    let bases = [iw, ic, n / ic, iw * ic, ec, ew, ec, s * n, ec / iw, ec / ic, n * ec / iw, n * ec / ic, n, s, h, 1.0];
    powered(bases).iter().zip(c).map(|(f, k)| f * k).sum()
}

struct GridRun {
    config: TrainingConfig,
    log_loss: f64,
}

fn planted_grid(c: &[f64; 16]) -> Vec<GridRun> {
    let etas: Vec<f64> = (0..9).map(|i| 1e-3 * (12.0f64).powf(i as f64 / 8.0)).collect();
    let warmups: Vec<f64> = (0..8).map(|i| 0.05 * (60.0f64).powf(i as f64 / 7.0)).collect();
    let mut out = Vec::new();
    for &n in &[0.25, 0.5, 1.0, 2.0] {
        for &s in &[40.0, 160.0] {
            for &eta in &etas {
                for &w in &warmups {
                    let a_c = 0.8 * s;
                    let config = TrainingConfig::new(n, s, eta, eta, w, w, a_c);
                    out.push(GridRun { log_loss: planted_log_loss(c, n, s, eta, w, a_c), config });
                }
            }
        }
    }
    out
}

fn c3_fit_quality() -> Outcome {
    let start = Instant::now();
    let grid = planted_grid(&REFERENCE_COEFFICIENTS);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let observed: Vec<f64> = grid
        .iter()
        .map(|g| {
            let z: f64 = rng.sample(StandardNormal);
            g.log_loss.exp() * (1.0 + 1e-3 * z)
        })
        .collect();
    let (mut train, mut hold) = (Vec::new(), Vec::new());
    for (i, (g, &loss)) in grid.iter().zip(&observed).enumerate() {
        let rec = RunRecord { config: g.config.clone(), loss, diverged: false };
        if i % 3 == 2 {
            hold.push(rec);
        } else {
            train.push(rec);
        }
    }
    let law = fit(&train, FitOptions::default()).unwrap();
    let errs: Vec<f64> = hold.iter().map(|r| rel(law.predict(&r.config).unwrap().loss, r.loss)).collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    let max = errs.iter().cloned().fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let ok = mean <= 5e-3 && secs < 10.0;
    (
        ok,
        format!(
            "{} runs, train {} / holdout {}, mean rel error {:.3}% (<= 0.5%), max {:.3}%, cond {:.2e}, {secs:.2}s (< 10s)",
            grid.len(),
            train.len(),
            hold.len(),
            100.0 * mean,
            100.0 * max,
            law.condition_number
        ),
    )
}

fn c4_recovery() -> Outcome {
    let c = REFERENCE_COEFFICIENTS;
    let grid = planted_grid(&c);
    let recs: Vec<RunRecord> =
        grid.iter().map(|g| RunRecord { config: g.config.clone(), loss: g.log_loss.exp(), diverged: false }).collect();
    let law = fit(&recs, FitOptions::default()).unwrap();
    let max_abs = law.c.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rms = (grid.iter().map(|g| (law.predict(&g.config).unwrap().log_loss - g.log_loss).powi(2)).sum::<f64>()
        / grid.len() as f64)
        .sqrt();
    let ok = max_abs <= 1e-6 && rms <= 1e-10 && law.residual_rms <= 1e-10;
    (ok, format!("coefficient max-abs error {max_abs:.2e} (<= 1e-6), residual rms {rms:.2e} / reported {:.2e} (<= 1e-10)", law.residual_rms))
}

// ---------- cosine vs constant gap ----------

fn gap_oracle(r_a: f64, r_ac: f64, s: f64) -> f64 {
    let a = r_a * s;
    let a_c = r_ac * s;
    let cos = 2.0 / a + 2.0 / (s - a) + 1.0 / s + 1.0 / a + PI * PI / (8.0 * (s - a));
    let cst = 2.0 / a + 1.0 / ((a_c - a) + (s - a_c) / 2.0) + 1.0 / s + 1.0 / a + 1.0 / (s - a_c);
    (cos - cst).abs()
}

fn c5_gap() -> Outcome {
    let law = SimpleLaw::unit();
    let (r_a, r_ac) = (0.01, 0.85);
    let sizes = [1e2, 1e4, 1e6, 1e8];
    let gaps: Vec<f64> = sizes.iter().map(|&s| cosine_constant_gap(&law, 1.0, r_a, r_ac, s).unwrap()).collect();
    let oracle_err = sizes.iter().zip(&gaps).map(|(&s, &g)| rel(g, gap_oracle(r_a, r_ac, s))).fold(0.0, f64::max);
    // numeric evaluation on real schedules at the smallest size
    let s = 1e2;
    let cos = law.eval(&Schedule::warmup_cosine(1.0, r_a * s, s).unwrap(), r_a * s).unwrap();
    let cst = law.eval(&Schedule::warmup_constant_cooldown(1.0, r_a * s, r_ac * s, s).unwrap(), r_a * s).unwrap();
    let schedule_err = rel((cos - cst).abs(), gaps[0]);
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let ratio = gaps[3] / gaps[0];
    let ok = decreasing && ratio < 1e-2 && oracle_err <= 1e-12 && schedule_err <= 1e-9;
    (
        ok,
        format!(
            "gaps {:.3e} {:.3e} {:.3e} {:.3e}, strictly decreasing {decreasing}, ratio {ratio:.2e} (< 1e-2), oracle {oracle_err:.1e}, schedule eval {schedule_err:.1e}",
            gaps[0], gaps[1], gaps[2], gaps[3]
        ),
    )
}

// ---------- divergence gate ----------

fn gate_oracle(eta: f64, a1_hat: f64, n: f64, s_hat: f64) -> (f64, f64) {
    let s = s_hat.powi(2);
    let a = a1_hat.powi(2);
    let crit = (1.76 / 33.21) * (0.218 * s.ln()).exp() / n.sqrt();
    let eta_l = if eta < crit { eta } else { crit };
    let r = (s / (292.03 * a)) * (eta / eta_l - 1.0).powi(2);
    (r, eta_l)
}

fn c6_gate() -> Outcome {
    let p = DivergenceParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    let mut zero_ok = true;
    for _ in 0..100 {
        let eta = rng.random_range(0.01..2.0);
        let a1 = rng.random_range(0.05..20.0);
        let n = rng.random_range(0.1..10.0);
        let s = rng.random_range(1.0..500.0);
        let g = p.criterion(eta, a1, n, s).unwrap();
        let (r, eta_l) = gate_oracle(eta, a1, n, s);
        worst = worst.max((g.r - r).abs() / r.abs().max(1.0)).max(rel(g.eta_l, eta_l));
        if eta <= g.eta_l {
            zero_ok &= g.r == 0.0;
        }
        // a point below the critical rate
        let crit = p.critical_rate(n, s);
        let below = p.criterion(crit * rng.random_range(0.01..1.0), a1, n, s).unwrap();
        zero_ok &= below.r == 0.0;
    }
    let etas: Vec<f64> = (0..50).map(|i| 0.01 + 2.0 * i as f64 / 49.0).collect();
    let warmups: Vec<f64> = (0..50).map(|i| 0.1 + 20.0 * i as f64 / 49.0).collect();
    let r = |e: f64, w: f64| p.criterion(e, w, 1.0, 100.0).unwrap().r;
    let mut mono = true;
    for &w in &warmups {
        mono &= etas.windows(2).all(|e| r(e[1], w) >= r(e[0], w));
    }
    for &e in &etas {
        mono &= warmups.windows(2).all(|w| r(e, w[1]) <= r(e, w[0]));
    }
    let ok = worst <= 1e-12 && zero_ok && mono;
    (ok, format!("100 inputs max error {worst:.2e} (<= 1e-12), R = 0 below eta_L: {zero_ok}, monotone on 50x50: {mono}"))
}

// ---------- Gaussian approximation ----------

fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..hi));
    let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn three_schedules(s: f64) -> Vec<Schedule> {
    vec![
        Schedule::general(1.0, 1.0, 0.2 * s, 0.2 * s, 0.2 * s, s).unwrap(),
        Schedule::warmup_cosine(1.0, 0.1 * s, s).unwrap(),
        Schedule::general(1.0, 0.5, 0.1 * s, 0.4 * s, 0.8 * s, s).unwrap(),
    ]
}

fn c7_gaussian() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let times: Vec<f64> = (1..=10).map(|k| k as f64).collect();
    let adam = AdamConstants::default();
    let mut sgd_worst: f64 = 0.0;
    let mut adam_worst: f64 = 0.0;
    let mut converged = true;
    for sch in three_schedules(10.0) {
        let n = 8;
        let obj = Quadratic::new(random_spd(n, 0.1, 2.0, &mut rng)).unwrap();
        let noise = NoiseModel::new(random_spd(n, 0.1, 1.0, &mut rng), 1).unwrap();
        let ga = gaussian_approx(&obj, &noise, &sch, &vec![0.0; n], Algorithm::Sgd, &adam, 0.05, &times).unwrap();
        sgd_worst = sgd_worst.max(ga.max_discrepancy);
        converged &= ga.ode_converged;

        let n = 4;
        let obj = Quadratic::new(random_spd(n, 0.1, 2.0, &mut rng)).unwrap();
        let noise = NoiseModel::new(random_spd(n, 0.1, 1.0, &mut rng), 1).unwrap();
        let ga = gaussian_approx(&obj, &noise, &sch, &vec![0.0; n], Algorithm::Adam, &adam, 0.05, &times).unwrap();
        adam_worst = adam_worst.max(ga.max_discrepancy);
        converged &= ga.ode_converged;
    }
    // scalar OU, constant rate; eta = 1 matches the reference form, eta = 0.5 checks the rate scaling
    let (lam, eta0, s2) = (2.0, 0.01, 1.3);
    let mut ou_worst: f64 = 0.0;
    for eta in [1.0, 0.5] {
        let sch = Schedule::constant(eta, 8.0).unwrap();
        let t_grid: Vec<f64> = (1..=16).map(|k| 0.5 * k as f64).collect();
        let ga = gaussian_approx(
            &Quadratic::diagonal(&[lam]).unwrap(),
            &NoiseModel::isotropic(1, s2, 1).unwrap(),
            &sch,
            &[0.0],
            Algorithm::Sgd,
            &adam,
            eta0,
            &t_grid,
        )
        .unwrap();
        for (k, &t) in t_grid.iter().enumerate() {
            let exact = eta0 * eta * s2 * (1.0 - (-2.0 * lam * eta * t).exp()) / (2.0 * lam);
            ou_worst = ou_worst.max((ga.closed_form[k][(0, 0)] - exact).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = sgd_worst <= 1e-6 && adam_worst <= 1e-6 && ou_worst <= 1e-10 && converged && secs < 30.0;
    (
        ok,
        format!("SGD N=8 {sgd_worst:.2e}, Adam N=4 {adam_worst:.2e} (<= 1e-6), scalar OU {ou_worst:.2e} (<= 1e-10), ODE converged {converged}, {secs:.1}s (< 30s)"),
    )
}

// ---------- bound domination ----------

fn c8_bounds() -> Outcome {
    let start = Instant::now();
    let n = 16;
    let eta0 = 0.02;
    let t = 10.0;
    let eigs: Vec<f64> = (0..n).map(|i| 0.5 + 1.5 * i as f64 / (n - 1) as f64).collect();
    let quad = Quadratic::diagonal(&eigs).unwrap();
    let well = DoubleWell { dim: n, radius: 2.0 };
    let noise = NoiseModel::isotropic(n, 0.5, n).unwrap();
    let objectives: [(&str, &dyn Objective, Vec<f64>); 2] =
        [("quadratic", &quad, vec![1.0; n]), ("double_well", &well, vec![0.5; n])];
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for (name, obj, x0) in objectives {
        for (k, sch) in three_schedules(t).into_iter().enumerate() {
            for algorithm in [Algorithm::Sgd, Algorithm::Adam] {
                let mut cfg = SdeConfig::new(sch.clone(), eta0, 10_000, 800 + k as u64, algorithm);
                cfg.x0 = Some(x0.clone());
                cfg.checkpoints = 2;
                let r = simulate(obj, &noise, &cfg).unwrap();
                let b = convergence_bound(algorithm, obj, &noise, &sch, t, eta0, &x0, cfg.adam, None, None, r.max_v, None).unwrap();
                let stat = match algorithm {
                    Algorithm::Sgd => r.grad_sq_avg,
                    Algorithm::Adam => r.momentum_sq_avg.unwrap(),
                };
                let holds = stat.within(b.value, 3.0);
                ok &= holds && r.min_v.is_none_or(|v| v >= 0.0);
                worst_ratio = worst_ratio.max(stat.mean / b.value);
                lines.push(format!("{name}/s{k}/{algorithm:?}: {:.3e} vs {:.3e}", stat.mean, b.value));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    (ok, format!("12 runs x 1e4 paths, worst empirical/bound {worst_ratio:.3}, {secs:.1}s (< 120s); {}", lines.join("; ")))
}

// ---------- anti-concentration ----------

fn c9_anti_concentration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let samples = 1_000_000;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut combos = 0;
    for &n in &[1usize, 2, 4, 8, 16] {
        let cov = random_spd(n, 0.05, 2.0, &mut rng);
        let tr = cov.trace();
        let eps: Vec<f64> = [0.01, 0.1, 0.5, 0.95].iter().map(|f| f * tr / E).collect();
        let l = cov.clone().cholesky().unwrap().l();
        let mut hits = vec![0usize; eps.len()];
        let mut z = DVector::zeros(n);
        for _ in 0..samples {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            let d2 = (&l * &z).norm_squared();
            for (h, e) in hits.iter_mut().zip(&eps) {
                if d2 <= *e {
                    *h += 1;
                }
            }
        }
        let rows = anti_concentration_check(&cov, &eps, samples, 9090 + n as u64).unwrap();
        for ((row, &e), &h) in rows.iter().zip(&eps).zip(&hits) {
            let bound = (E * e / tr).sqrt();
            let direct = h as f64 / samples as f64;
            ok &= direct <= bound && row.frequency <= bound && rel(row.bound, bound) <= 1e-12;
            worst = worst.max(direct / bound).max(row.frequency / bound);
            combos += 1;
        }
    }
    (ok, format!("{combos} combinations x 1e6 samples, worst frequency/bound {worst:.3} (<= 1)"))
}

// ---------- trapping ----------

fn c10_trapping() -> Outcome {
    let n = 4;
    let obj = Quadratic::diagonal(&[0.5, 1.0, 1.5, 2.0]).unwrap();
    let noise = NoiseModel::isotropic(n, 1.0, 1).unwrap();
    let sch = Schedule::general(1.0, 1.0, 2.0, 2.0, 2.0, 10.0).unwrap();
    let eta0 = 0.02;
    let ga = gaussian_approx(&obj, &noise, &sch, &vec![0.0; n], Algorithm::Sgd, &AdamConstants::default(), eta0, &[10.0]).unwrap();
    let tr = ga.position_trace(0);
    let mut cfg = SdeConfig::new(sch.clone(), eta0, 10_000, 1010, Algorithm::Sgd);
    cfg.eps = [0.01, 0.1, 0.5].iter().map(|f| f * tr).collect();
    cfg.checkpoints = 2;
    let r = simulate(&obj, &noise, &cfg).unwrap();
    let mut ok = r.trapping.len() == 3;
    let mut parts = Vec::new();
    for row in &r.trapping {
        let b = escape_bounds(tr, row.eps, &sch, noise.trace()).unwrap();
        let bound = (E * row.eps / tr).sqrt().min(1.0);
        ok &= rel(b.trapped_upper, bound) <= 1e-12 && row.frequency.within(bound, 3.0);
        parts.push(format!("eps/TrP={:.2}: {:.4} <= {:.4}", row.eps / tr, row.frequency.mean, bound));
    }
    (ok, format!("Tr P_T {tr:.4e}; {}", parts.join(", ")))
}

// ---------- random matrices ----------

fn c11_random_matrix() -> Outcome {
    let start = Instant::now();
    let d = 64;
    let sigma = DMatrix::<f64>::identity(d, d);
    let grid = default_t_grid(&sigma, d);
    let r = random_matrix_checks(&sigma, d, 10_000, &grid, 1111).unwrap();
    let mut ok = r.trace_deviation.len() == 10;
    let mut worst: f64 = 0.0;
    for row in &r.trace_deviation {
        // Tr(Σ²) = 64 and σ_g² = 1 for the identity
        let rhs = 2.0 * (-(d as f64) * row.t * row.t / (4.0 * 64.0 + 2.0 * row.t)).exp();
        ok &= rel(row.bernstein, rhs) <= 1e-12 && row.frequency <= rhs;
        worst = worst.max(row.frequency / rhs);
    }
    let secs = start.elapsed().as_secs_f64();
    (
        ok,
        format!(
            "10-point grid worst frequency/RHS {worst:.3} (<= 1); E[lambda_max] {:.4} +- {:.1e}, candidates (1+sqrt(D/N)) {:.4}, (1+sqrt(N/D))^2 {:.4} (informational); {secs:.1}s",
            r.lambda_max.mean, r.lambda_max.std_err, r.candidate_sqrt_d_over_n, r.candidate_edge
        ),
    )
}

// ---------- CLI pipeline ----------

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["optlaws"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    (code, out)
}

fn pipeline(ws: &Path) -> Vec<(String, Vec<u8>)> {
    let fx = fixtures();
    let ws = ws.to_str().unwrap();
    let runs = fx.join("runs.csv");
    let configs = fx.join("configs.json");
    let (runs, configs) = (runs.to_str().unwrap(), configs.to_str().unwrap());
    let mut out = Vec::new();
    out.push(("fit".to_string(), run_cli(&["--workspace", ws, "fit", "--runs", runs, "--name", "fixture"]).1));
    for entry in ["laws/fixture.json", "reports/fixture_fit.json"] {
        out.push((entry.to_string(), std::fs::read(Path::new(ws).join(entry)).unwrap()));
    }
    out.push(("predict".to_string(), run_cli(&["--workspace", ws, "predict", "--config", configs]).1));
    out.push(("rank".to_string(), run_cli(&["--workspace", ws, "rank", "--configs", configs]).1));
    out.push(("rank_csv".to_string(), run_cli(&["--workspace", ws, "rank", "--configs", configs, "--format", "csv"]).1));
    out.push((
        "sweep".to_string(),
        run_cli(&[
            "--workspace", ws, "sweep", "--eta-min", "0.05", "--eta-max", "1.0", "--eta-steps", "20", "--warmup-min", "0.1",
            "--warmup-max", "10", "--warmup-steps", "20", "--model", "1", "--tokens", "50",
        ])
        .1,
    ));
    out
}

fn c12_cli() -> Outcome {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(d1.path());
    let second = pipeline(d2.path());
    let identical = first == second;

    let predicted: serde_json::Value = serde_json::from_slice(&first[3].1).unwrap();
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("expected_predictions.json")).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for (p, e) in predicted.as_array().unwrap().iter().zip(expected.as_array().unwrap()) {
        worst = worst.max((p["log_loss"].as_f64().unwrap() - e["log_loss"].as_f64().unwrap()).abs());
    }

    let rank: serde_json::Value = serde_json::from_slice(&first[4].1).unwrap();
    let last = rank.as_array().unwrap().last().unwrap();
    let gated_last = last["verdict"] == "diverge";

    let mut rdr = csv::Reader::from_reader(first[6].1.as_slice());
    let rows: Vec<(f64, f64, bool, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), &r[4] == "1", r[5].parse().unwrap())
        })
        .collect();
    let div = |w: usize, e: usize| rows[w * 20 + e].2;
    let mut corner = div(0, 19) && !div(19, 0);
    let mut straddle = (false, false);
    for w in 0..20 {
        for e in 0..20 {
            let d = div(w, e);
            straddle.0 |= d;
            straddle.1 |= !d;
            if d {
                // divergence persists toward higher rates and shorter warmups
                corner &= (e..20).all(|k| div(w, k)) && (0..=w).all(|k| div(k, e));
                corner &= rows[w * 20 + e].3 == 7.0;
            }
        }
    }
    let ok = identical && worst <= 1e-9 && gated_last && corner && straddle.0 && straddle.1;
    (
        ok,
        format!(
            "two runs byte-identical {identical} ({} outputs), predictions vs fixture oracle {worst:.1e}, divergent config ranked last {gated_last}, sweep corner {corner}",
            first.len()
        ),
    )
}

fn main() {
    let criteria: [(u8, &str, fn() -> Outcome); 12] = [
        (1, "schedule integral algebra", c1_integrals),
        (2, "reference feature closed forms", c2_closed_forms),
        (3, "fit quality on noisy planted grid", c3_fit_quality),
        (4, "noiseless coefficient recovery", c4_recovery),
        (5, "cosine vs constant gap shrinks", c5_gap),
        (6, "divergence gate", c6_gate),
        (7, "Gaussian covariance closed form vs ODE", c7_gaussian),
        (8, "convergence bounds dominate simulation", c8_bounds),
        (9, "anti-concentration", c9_anti_concentration),
        (10, "trapping bound", c10_trapping),
        (11, "random-matrix concentration", c11_random_matrix),
        (12, "CLI determinism and sweep corner", c12_cli),
    ];
    let only: Option<u8> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        if !ok {
            failed += 1;
        }
        println!("{} [{id:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
