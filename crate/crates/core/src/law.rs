//! Loss laws: the 16-term log-linear law, the fixed-size five-term law, and
//! the ranking of candidate training configurations.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceParams, GateError, GateResult, Verdict};
use crate::features::{
    FeatureError, FeatureSet, FeatureVector, MarkerPolicy, Normalizer, PolicyRule, Powers, ScheduleIntegrals,
    TERM_COUNT,
};
use crate::schedule::{CooldownShape, Functional, Schedule, ScheduleError};

/// Loss assigned to diverged runs.
pub const DIVERGED_LOSS: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LawError {
    #[error("no fittable rows: every record is divergent or the input is empty")]
    NoFittableRows,
    #[error("need more than {unknowns} non-divergent records to fit, got {rows}")]
    TooFewRows { rows: usize, unknowns: usize },
    #[error("design matrix is rank deficient (condition number {condition_number:e})")]
    RankDeficient { condition_number: f64 },
    #[error("record {index}: {source}")]
    Record { index: usize, source: FeatureError },
    #[error("record {index}: loss must be positive and finite, got {loss}")]
    BadLoss { index: usize, loss: f64 },
    #[error("configuration list is empty")]
    EmptyConfigs,
    #[error("simple-law constant {name} must be positive, got {value}")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("ratios must satisfy 0 < r_a <= r_ac < 1, got r_a = {r_a}, r_ac = {r_ac}")]
    BadRatios { r_a: f64, r_ac: f64 },
    #[error("warmup split {a} must lie strictly inside (0, S = {s})")]
    BadSplit { a: f64, s: f64 },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// Pre-training phase preceding a continual-training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainPhase {
    #[serde(rename = "tokens_B")]
    pub tokens: f64,
    pub eta1: f64,
    pub eta2: f64,
    #[serde(rename = "a1_B")]
    pub a1: f64,
    #[serde(rename = "a2_B")]
    pub a2: f64,
    #[serde(rename = "a3_B")]
    pub a3: f64,
    #[serde(default)]
    pub cooldown: CooldownShape,
}

impl PretrainPhase {
    pub fn schedule(&self, normalizer: &Normalizer) -> Result<Schedule, LawError> {
        Ok(Schedule::general_with(
            normalizer.normalize_lr(self.eta1)?,
            normalizer.normalize_lr(self.eta2)?,
            self.a1,
            self.a2,
            self.a3,
            self.tokens,
            self.cooldown,
        )?)
    }
}

/// One training configuration: model size, token budget and four-phase schedule.
/// Learning rates are raw; token quantities are in billions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "model_B")]
    pub model: f64,
    #[serde(rename = "tokens_B")]
    pub tokens: f64,
    pub eta1: f64,
    pub eta2: f64,
    #[serde(rename = "a1_B")]
    pub a1: f64,
    #[serde(rename = "a2_B")]
    pub a2: f64,
    #[serde(rename = "a3_B")]
    pub a3: f64,
    #[serde(default, skip_serializing_if = "is_linear")]
    pub cooldown: CooldownShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pretrain: Option<PretrainPhase>,
}

fn is_linear(c: &CooldownShape) -> bool {
    *c == CooldownShape::Linear
}

impl TrainingConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(model: f64, tokens: f64, eta1: f64, eta2: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self { label: None, model, tokens, eta1, eta2, a1, a2, a3, cooldown: CooldownShape::Linear, pretrain: None }
    }

    /// The normalized schedule.
    pub fn schedule(&self, normalizer: &Normalizer) -> Result<Schedule, LawError> {
        Ok(Schedule::general_with(
            normalizer.normalize_lr(self.eta1)?,
            normalizer.normalize_lr(self.eta2)?,
            self.a1,
            self.a2,
            self.a3,
            self.tokens,
            self.cooldown,
        )?)
    }

    /// Gate evaluation on this configuration's peak rate and warmup marker.
    pub fn gate(&self, normalizer: &Normalizer, params: &DivergenceParams) -> Result<GateResult, LawError> {
        let schedule = self.schedule(normalizer)?;
        Ok(params.criterion(schedule.eta_max(), self.a1, self.model, self.tokens)?)
    }
}

/// One training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: TrainingConfig,
    pub loss: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawMode {
    #[default]
    Pretrain,
    Continual,
}

/// Fitted coefficients plus everything needed to featurize new configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedLaw {
    pub c: [f64; TERM_COUNT],
    pub powers: Powers,
    pub lr_scale: f64,
    pub token_divisor: f64,
    pub policy: PolicyRule,
    pub mode: LawMode,
    pub feature_set: FeatureSet,
    pub residual_rms: f64,
    pub max_abs_residual: f64,
    pub condition_number: f64,
    pub rows: usize,
    #[serde(default)]
    pub reference_only: bool,
}

/// Reference coefficients paired with the default powers.
pub const REFERENCE_COEFFICIENTS: [f64; TERM_COUNT] = [
    -6.92e-4, -1.27e-3, -4.68e-2, 4.65e-2, 9.62e-3, 1.92e-2, -5.05e-2, -1.82e-1, -4.68e-2, -4.18e-2, -1.19e-1,
    2.18e-1, 3.1e-1, 6.98e-1, 5.26e-2, 3.14e-1,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub log_loss: f64,
    pub loss: f64,
}

/// Fit options; the defaults are the table powers, the `a1/a3/a2` rule and all 16 terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub powers: Powers,
    pub policy: PolicyRule,
    pub feature_set: FeatureSet,
    pub normalizer: Normalizer,
}

impl FittedLaw {
    /// The shipped preset with reference coefficients.
    pub fn reference() -> Self {
        let n = Normalizer::default();
        Self {
            c: REFERENCE_COEFFICIENTS,
            powers: Powers::default(),
            lr_scale: n.lr_scale,
            token_divisor: n.token_divisor,
            policy: PolicyRule::default(),
            mode: LawMode::Pretrain,
            feature_set: FeatureSet::Full,
            residual_rms: 0.0,
            max_abs_residual: 0.0,
            condition_number: 0.0,
            rows: 0,
            reference_only: true,
        }
    }

    /// A law with given coefficients and no fit statistics.
    pub fn from_coefficients(c: [f64; TERM_COUNT], options: FitOptions) -> Self {
        Self {
            c,
            powers: options.powers,
            lr_scale: options.normalizer.lr_scale,
            token_divisor: options.normalizer.token_divisor,
            policy: options.policy,
            mode: LawMode::Pretrain,
            feature_set: options.feature_set,
            residual_rms: 0.0,
            max_abs_residual: 0.0,
            condition_number: 0.0,
            rows: 0,
            reference_only: false,
        }
    }

    pub fn with_mode(mut self, mode: LawMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn normalizer(&self) -> Normalizer {
        Normalizer { lr_scale: self.lr_scale, token_divisor: self.token_divisor }
    }

    /// Feature vector of `config` according to this law's mode.
    pub fn features(&self, config: &TrainingConfig) -> Result<FeatureVector, LawError> {
        let normalizer = self.normalizer();
        let schedule = config.schedule(&normalizer)?;
        let policy = self.policy.apply(schedule.markers());
        let ints = match self.mode {
            LawMode::Pretrain => ScheduleIntegrals::measure(&schedule, &policy)?,
            LawMode::Continual => {
                let pre = match &config.pretrain {
                    Some(p) => Some((p.schedule(&normalizer)?, p.tokens)),
                    None => None,
                };
                ScheduleIntegrals::measure_continual(&schedule, &policy, pre.as_ref().map(|(s, t)| (s, *t)))?
            }
        };
        Ok(FeatureVector::from_integrals(&ints, schedule.horizon(), config.model, &self.powers)?)
    }

    /// `c · F`.
    pub fn log_loss_of(&self, features: &FeatureVector) -> f64 {
        let values = features.values();
        let mut acc = 0.0;
        for i in self.feature_set.active_indices() {
            acc += self.c[i] * values[i];
        }
        acc
    }

    pub fn predict(&self, config: &TrainingConfig) -> Result<Prediction, LawError> {
        let log_loss = self.log_loss_of(&self.features(config)?);
        Ok(Prediction { log_loss, loss: log_loss.exp() })
    }

    pub fn to_json(&self) -> String {
        crate::io::to_sorted_json(self)
    }
}

/// Continual-training feature vector with an explicit pre-training horizon.
pub fn continual_features(
    law: &FittedLaw,
    pre_schedule: Option<&Schedule>,
    pre_s: f64,
    schedule: &Schedule,
    model: f64,
) -> Result<FeatureVector, LawError> {
    let policy: MarkerPolicy = law.policy.apply(schedule.markers());
    let pre = pre_schedule.map(|s| (s, pre_s));
    let ints = ScheduleIntegrals::measure_continual(schedule, &policy, pre)?;
    Ok(FeatureVector::from_integrals(&ints, schedule.horizon(), model, &law.powers)?)
}

/// Ordinary least squares of natural-log loss on the feature vector.
/// Divergent records are skipped.
pub fn fit(records: &[RunRecord], options: FitOptions) -> Result<FittedLaw, LawError> {
    fit_with_mode(records, options, LawMode::Pretrain)
}

/// [`fit`] with continual-training features when `mode` is `Continual`.
pub fn fit_with_mode(records: &[RunRecord], options: FitOptions, mode: LawMode) -> Result<FittedLaw, LawError> {
    let template = FittedLaw::from_coefficients([0.0; TERM_COUNT], options).with_mode(mode);
    let active = options.feature_set.active_indices();
    let p = active.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets = Vec::new();
    for (index, rec) in records.iter().enumerate() {
        if rec.diverged {
            continue;
        }
        if !(rec.loss.is_finite() && rec.loss > 0.0) {
            return Err(LawError::BadLoss { index, loss: rec.loss });
        }
        let f = template.features(&rec.config).map_err(|e| match e {
            LawError::Feature(source) => LawError::Record { index, source },
            LawError::Schedule(s) => LawError::Record { index, source: FeatureError::Schedule(s) },
            other => other,
        })?;
        let values = f.values();
        rows.push(active.iter().map(|&i| values[i]).collect());
        targets.push(rec.loss.ln());
    }
    let n = rows.len();
    if n == 0 {
        return Err(LawError::NoFittableRows);
    }
    if n <= p {
        return Err(LawError::TooFewRows { rows: n, unknowns: p });
    }
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let y = DVector::from_vec(targets);
    let solution = least_squares(&x, &y)?;

    let mut c = [0.0; TERM_COUNT];
    for (k, &i) in active.iter().enumerate() {
        c[i] = solution.coefficients[k];
    }
    let residuals = &x * DVector::from_vec(solution.coefficients.clone()) - &y;
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(FittedLaw {
        c,
        residual_rms: (rss / n as f64).sqrt(),
        max_abs_residual: max_abs,
        condition_number: solution.condition_number,
        rows: n,
        ..template
    })
}

pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// 2-norm condition number of the unscaled design matrix.
    pub condition_number: f64,
}

/// Minimizes `|X c − y|` through an SVD of the column-equilibrated design matrix.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares, LawError> {
    let p = x.ncols();
    let raw_cond = condition_number(x);
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    if norms.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(LawError::RankDeficient { condition_number: f64::INFINITY });
    }
    let mut scaled = x.clone();
    for (j, &nrm) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / nrm);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-13 {
        return Err(LawError::RankDeficient { condition_number: raw_cond });
    }
    let z = svd.solve(y, 0.0).map_err(|_| LawError::RankDeficient { condition_number: raw_cond })?;
    let coefficients = (0..p).map(|j| z[j] / norms[j]).collect();
    Ok(LeastSquares { coefficients, condition_number: raw_cond })
}

pub fn condition_number(x: &DMatrix<f64>) -> f64 {
    let sv = x.clone().singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub eta_max: f64,
    pub a1: f64,
    pub log_loss: Option<f64>,
    pub loss: Option<f64>,
    #[serde(rename = "R")]
    pub r: f64,
    pub eta_l: f64,
    pub verdict: Verdict,
}

/// Orders configurations: gate survivors by predicted log-loss (ties by
/// smaller peak rate, then smaller warmup, then input order), divergent ones last
/// in input order.
pub fn rank(law: &FittedLaw, configs: &[TrainingConfig], gate: &DivergenceParams) -> Result<Vec<RankEntry>, LawError> {
    if configs.is_empty() {
        return Err(LawError::EmptyConfigs);
    }
    let normalizer = law.normalizer();
    let mut entries = Vec::with_capacity(configs.len());
    for (index, config) in configs.iter().enumerate() {
        let schedule = config.schedule(&normalizer)?;
        let g = gate.criterion(schedule.eta_max(), config.a1, config.model, config.tokens)?;
        let prediction = match g.verdict {
            Verdict::Stable => Some(law.predict(config)?),
            Verdict::Diverge => law.predict(config).ok(),
        };
        entries.push(RankEntry {
            rank: 0,
            index,
            label: config.label.clone(),
            eta_max: schedule.eta_max(),
            a1: config.a1,
            log_loss: prediction.map(|p| p.log_loss),
            loss: prediction.map(|p| p.loss),
            r: g.r,
            eta_l: g.eta_l,
            verdict: g.verdict,
        });
    }
    entries.sort_by(|a, b| compare_entries(a, b));
    for (k, e) in entries.iter_mut().enumerate() {
        e.rank = k + 1;
    }
    Ok(entries)
}

fn compare_entries(a: &RankEntry, b: &RankEntry) -> Ordering {
    match (a.verdict, b.verdict) {
        (Verdict::Stable, Verdict::Diverge) => Ordering::Less,
        (Verdict::Diverge, Verdict::Stable) => Ordering::Greater,
        (Verdict::Diverge, Verdict::Diverge) => a.index.cmp(&b.index),
        (Verdict::Stable, Verdict::Stable) => {
            let la = a.log_loss.unwrap_or(f64::INFINITY);
            let lb = b.log_loss.unwrap_or(f64::INFINITY);
            la.total_cmp(&lb)
                .then(a.eta_max.total_cmp(&b.eta_max))
                .then(a.a1.total_cmp(&b.a1))
                .then(a.index.cmp(&b.index))
        }
    }
}

/// Fixed-model-size law:
///
/// ```text
/// log L = c1 (∫_0^a η)^−α1 + c2 (∫_a^S η)^−α2 + c3_bias / S + b
///       + c4 (∫_0^a η′²)^α3 + c5 (∫_a^S η′²)^α4
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleLaw {
    pub c1: f64,
    pub c2: f64,
    pub c3_bias: f64,
    pub c4: f64,
    pub c5: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub b: f64,
}

impl SimpleLaw {
    /// All constants one, `b = 0`.
    pub fn unit() -> Self {
        Self { c1: 1.0, c2: 1.0, c3_bias: 1.0, c4: 1.0, c5: 1.0, alpha1: 1.0, alpha2: 1.0, alpha3: 1.0, alpha4: 1.0, b: 0.0 }
    }

    pub fn validate(&self) -> Result<(), LawError> {
        for (name, value) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3_bias", self.c3_bias),
            ("c4", self.c4),
            ("c5", self.c5),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
            ("alpha4", self.alpha4),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(LawError::NonPositiveConstant { name, value });
            }
        }
        Ok(())
    }

    fn combine(&self, warm: f64, cool: f64, s: f64, warm_energy: f64, cool_energy: f64) -> f64 {
        self.c1 * warm.powf(-self.alpha1)
            + self.c2 * cool.powf(-self.alpha2)
            + self.c3_bias / s
            + self.b
            + self.c4 * warm_energy.powf(self.alpha3)
            + self.c5 * cool_energy.powf(self.alpha4)
    }

    /// Evaluates the law on a schedule with warmup split `a`.
    pub fn eval(&self, schedule: &Schedule, a: f64) -> Result<f64, LawError> {
        self.validate()?;
        let s = schedule.horizon();
        if !(a > 0.0 && a < s) {
            return Err(LawError::BadSplit { a, s });
        }
        let warm = schedule.integral(0.0, a, Functional::Eta)?;
        let cool = schedule.integral(a, s, Functional::Eta)?;
        if warm <= 0.0 {
            return Err(FeatureError::ZeroIntegral { term: "int(eta,0,a)" }.into());
        }
        if cool <= 0.0 {
            return Err(FeatureError::ZeroIntegral { term: "int(eta,a,S)" }.into());
        }
        let we = schedule.integral(0.0, a, Functional::DetaSq)?;
        let ce = schedule.integral(a, s, Functional::DetaSq)?;
        Ok(self.combine(warm, cool, s, we, ce))
    }

    /// Closed form for linear warmup over `a` then cosine decay to zero at `s`.
    pub fn cosine_closed_form(&self, eta_max: f64, a: f64, s: f64) -> f64 {
        let h = eta_max;
        self.combine(h * a / 2.0, h * (s - a) / 2.0, s, h * h / a, std::f64::consts::PI.powi(2) * h * h / (8.0 * (s - a)))
    }

    /// Closed form for linear warmup over `a`, constant until `a_c`, linear cooldown to `s`.
    pub fn constant_closed_form(&self, eta_max: f64, a: f64, a_c: f64, s: f64) -> f64 {
        let h = eta_max;
        self.combine(h * a / 2.0, h * (a_c - a) + h * (s - a_c) / 2.0, s, h * h / a, h * h / (s - a_c))
    }
}

/// `|law(cosine) − law(constant)|` with `a = r_a S` and `a_c = r_ac S`.
pub fn cosine_constant_gap(law: &SimpleLaw, eta_max: f64, r_a: f64, r_ac: f64, s: f64) -> Result<f64, LawError> {
    law.validate()?;
    if !(r_a > 0.0 && r_a <= r_ac && r_ac < 1.0) {
        return Err(LawError::BadRatios { r_a, r_ac });
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(ScheduleError::BadHorizon(s).into());
    }
    let a = r_a * s;
    let a_c = r_ac * s;
    Ok((law.cosine_closed_form(eta_max, a, s) - law.constant_closed_form(eta_max, a, a_c, s)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_records(c: &[f64; TERM_COUNT]) -> Vec<RunRecord> {
        let law = FittedLaw::from_coefficients(*c, FitOptions::default());
        let mut out = Vec::new();
        for &model in &[0.5, 2.0, 4.0] {
            for &tokens in &[10.0, 30.0, 100.0] {
                for &eta in &[1.5e-3, 4.5e-3] {
                    for &(w, d, p) in &[(0.05, 0.05, 0.6), (0.1, 0.3, 0.7), (0.02, 0.02, 0.02)] {
                        let eta2 = if d > w { 0.5 * eta } else { eta };
                        let cfg = TrainingConfig::new(model, tokens, eta, eta2, w * tokens, d * tokens, p * tokens);
                        let loss = law.predict(&cfg).unwrap().loss;
                        out.push(RunRecord { config: cfg, loss, diverged: false });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constant_model_predicts_exp_v() {
        let mut c = [0.0; TERM_COUNT];
        c[15] = 0.7;
        let law = FittedLaw::from_coefficients(c, FitOptions::default());
        let cfg = TrainingConfig::new(1.0, 10.0, 3e-3, 3e-3, 1.0, 1.0, 1.0);
        let p = law.predict(&cfg).unwrap();
        assert!((p.loss - 0.7f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn all_divergent_has_no_rows() {
        let cfg = TrainingConfig::new(1.0, 10.0, 3e-3, 3e-3, 1.0, 1.0, 1.0);
        let recs = vec![RunRecord { config: cfg, loss: DIVERGED_LOSS, diverged: true }; 20];
        assert_eq!(fit(&recs, FitOptions::default()).unwrap_err(), LawError::NoFittableRows);
    }

    #[test]
    fn too_few_rows() {
        let recs: Vec<_> = grid_records(&REFERENCE_COEFFICIENTS).into_iter().take(10).collect();
        assert!(matches!(fit(&recs, FitOptions::default()), Err(LawError::TooFewRows { rows: 10, unknowns: 16 })));
    }

    #[test]
    fn twelve_term_mode_ignores_escape() {
        let recs = grid_records(&REFERENCE_COEFFICIENTS);
        let opts = FitOptions { feature_set: FeatureSet::NoEscape, ..FitOptions::default() };
        let law = fit(&recs, opts).unwrap();
        assert!(law.c[4..8].iter().all(|&v| v == 0.0));
        assert_eq!(law.feature_set.len(), 12);
    }

    #[test]
    fn simple_law_closed_forms_match_integrals() {
        let law = SimpleLaw { c1: 0.3, c2: 1.1, c3_bias: 0.2, c4: 0.5, c5: 0.7, alpha1: 0.4, alpha2: 0.6, alpha3: 0.3, alpha4: 0.8, b: 1.5 };
        let cos = Schedule::warmup_cosine(0.8, 2.0, 50.0).unwrap();
        let direct = law.eval(&cos, 2.0).unwrap();
        assert!((direct - law.cosine_closed_form(0.8, 2.0, 50.0)).abs() < 1e-12);
        let cst = Schedule::warmup_constant_cooldown(0.8, 2.0, 40.0, 50.0).unwrap();
        let direct = law.eval(&cst, 2.0).unwrap();
        assert!((direct - law.constant_closed_form(0.8, 2.0, 40.0, 50.0)).abs() < 1e-12);
    }

    #[test]
    fn no_plateau_means_cosine_is_worse() {
        let law = SimpleLaw::unit();
        for s in [10.0, 1e3, 1e5] {
            let a = 0.01 * s;
            assert!(law.cosine_closed_form(1.0, a, s) > law.constant_closed_form(1.0, a, a, s));
        }
    }

    #[test]
    fn simple_law_rejects_non_positive() {
        let law = SimpleLaw { c4: 0.0, ..SimpleLaw::unit() };
        assert!(matches!(cosine_constant_gap(&law, 1.0, 0.01, 0.85, 100.0), Err(LawError::NonPositiveConstant { name: "c4", .. })));
        assert!(matches!(cosine_constant_gap(&SimpleLaw::unit(), 1.0, 0.9, 0.85, 100.0), Err(LawError::BadRatios { .. })));
    }

    #[test]
    fn empty_rank_is_an_error() {
        let law = FittedLaw::reference();
        assert_eq!(rank(&law, &[], &DivergenceParams::default()).unwrap_err(), LawError::EmptyConfigs);
    }
}
