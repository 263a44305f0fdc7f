//! The 16-term optimization feature vector.
//!
//! Every entry is `base^power` where the bases are built from five schedule
//! integrals plus the model size `N` and horizon `S`:
//!
//! | family      | bases |
//! |-------------|-------|
//! | convergence | `Iw`, `Ic`, `N/Ic`, `Iw*Ic` |
//! | escape      | `Ec`, `Ew`, `Ec`, `S*N` |
//! | mixed       | `Ec/Iw`, `Ec/Ic`, `N*Ec/Iw`, `N*Ec/Ic` |
//! | bias        | `N`, `S`, `eta_max`, `1` |
//!
//! with `Iw = ∫_0^{a_c1} η`, `Ic = ∫_{a_c2}^S η`, `Ew = ∫_0^{a_e1} η′²` and
//! `Ec = ∫_{a_e2}^S η′²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::schedule::{Functional, Markers, Schedule, ScheduleError};

pub const TERM_COUNT: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("term {term} is zero, which puts the configuration outside the law's domain")]
    ZeroIntegral { term: &'static str },
    #[error("feature {name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("model size must be positive and finite, got {0}")]
    BadModelSize(f64),
    #[error("marker policy must satisfy 0 <= a_c1 <= a_c2 <= S and 0 <= a_e1 <= a_e2 <= S, got {0:?}")]
    BadPolicy(MarkerPolicy),
    #[error("unknown marker policy {0:?}; expected four of a1/a2/a3 separated by '/'")]
    BadPolicyRule(String),
    #[error("normalized learning rate {normalized} (raw {raw}) is outside (0, 1]")]
    RateOutOfRange { raw: f64, normalized: f64 },
    #[error("pre-training horizon {pre_s} exceeds the pre-training schedule length {s}")]
    BadPreHorizon { pre_s: f64, s: f64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Unit conventions for raw inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    /// Raw learning rates are divided by this.
    pub lr_scale: f64,
    /// Token counts are divided by this (billions).
    pub token_divisor: f64,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self { lr_scale: 1.5e-2, token_divisor: 1e9 }
    }
}

impl Normalizer {
    /// Raw learning rate to normalized; the result must land in `[0, 1]`.
    pub fn normalize_lr(&self, raw: f64) -> Result<f64, FeatureError> {
        let normalized = raw / self.lr_scale;
        if normalized.is_finite() && (0.0..=1.0).contains(&normalized) {
            Ok(normalized)
        } else {
            Err(FeatureError::RateOutOfRange { raw, normalized })
        }
    }

    /// Optimizer steps to billions of tokens.
    pub fn tokens_from_steps(&self, steps: f64, token_length: u64, batch: u64) -> f64 {
        steps * token_length as f64 * batch as f64 / self.token_divisor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermFamily {
    Convergence,
    Escape,
    Mixed,
    Bias,
}

pub struct TermSpec {
    pub name: &'static str,
    pub family: TermFamily,
    pub default_power: f64,
    /// Whether the base contains `N`.
    pub uses_model_size: bool,
}

const fn term(name: &'static str, family: TermFamily, default_power: f64, uses_model_size: bool) -> TermSpec {
    TermSpec { name, family, default_power, uses_model_size }
}

use TermFamily::*;

pub const TERMS: [TermSpec; TERM_COUNT] = [
    term("C1:int(eta,0,ac1)", Convergence, -1.0, false),
    term("C2:int(eta,ac2,S)", Convergence, -1.0, false),
    term("C3:N/int(eta,ac2,S)", Convergence, 0.25, true),
    term("C4:int(eta,0,ac1)*int(eta,ac2,S)", Convergence, -0.23, false),
    term("E1:int(deta^2,ae2,S)", Escape, 1.0, false),
    term("E2:int(deta^2,0,ae1)", Escape, 0.25, false),
    term("E3:int(deta^2,ae2,S)", Escape, 0.25, false),
    term("E4:S*N", Escape, -0.25, true),
    term("M1:int(deta^2,ae2,S)/int(eta,0,ac1)", Mixed, 0.2, false),
    term("M2:int(deta^2,ae2,S)/int(eta,ac2,S)", Mixed, 0.15, false),
    term("M3:N*int(deta^2,ae2,S)/int(eta,0,ac1)", Mixed, 0.15, true),
    term("M4:N*int(deta^2,ae2,S)/int(eta,ac2,S)", Mixed, 0.15, true),
    term("B1:N", Bias, -0.25, true),
    term("B2:S", Bias, -0.25, false),
    term("B3:eta_max", Bias, 0.2, false),
    term("B4:1", Bias, 1.0, false),
];

/// Per-term powers, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Powers(pub [f64; TERM_COUNT]);

impl Default for Powers {
    fn default() -> Self {
        let mut p = [0.0; TERM_COUNT];
        for (slot, t) in p.iter_mut().zip(TERMS.iter()) {
            *slot = t.default_power;
        }
        Powers(p)
    }
}

impl Powers {
    pub fn zeros() -> Self {
        Powers([0.0; TERM_COUNT])
    }
}

/// Whether the escape family takes part in the law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FeatureSet {
    #[default]
    #[serde(rename = "16-term")]
    Full,
    /// Drops the four escape entries, leaving 12 terms.
    #[serde(rename = "12-term")]
    NoEscape,
}

impl FeatureSet {
    pub fn includes(&self, index: usize) -> bool {
        match self {
            FeatureSet::Full => true,
            FeatureSet::NoEscape => TERMS[index].family != Escape,
        }
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..TERM_COUNT).filter(|&i| self.includes(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.active_indices().len()
    }
}

impl FromStr for FeatureSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "16" | "16-term" | "full" => Ok(FeatureSet::Full),
            "12" | "12-term" | "no-escape" => Ok(FeatureSet::NoEscape),
            other => Err(format!("unknown feature set {other:?}; use 16 or 12")),
        }
    }
}

/// Split points for the convergence and escape integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerPolicy {
    pub a_c1: f64,
    pub a_c2: f64,
    pub a_e1: f64,
    pub a_e2: f64,
}

impl MarkerPolicy {
    pub fn new(a_c1: f64, a_c2: f64, a_e1: f64, a_e2: f64) -> Self {
        Self { a_c1, a_c2, a_e1, a_e2 }
    }

    pub fn check(&self, s: f64) -> Result<(), FeatureError> {
        let ok = 0.0 <= self.a_c1 && self.a_c1 <= self.a_c2 && self.a_c2 <= s && 0.0 <= self.a_e1 && self.a_e1 <= self.a_e2 && self.a_e2 <= s;
        if ok {
            Ok(())
        } else {
            Err(FeatureError::BadPolicy(*self))
        }
    }
}

/// The default rule: `a_c1 = a1`, `a_c2 = a3`, `a_e1 = a_e2 = a2`.
pub fn default_markers(schedule: &Schedule) -> MarkerPolicy {
    PolicyRule::default().apply(schedule.markers())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerRef {
    A1,
    A2,
    A3,
}

impl MarkerRef {
    fn pick(&self, m: Markers) -> f64 {
        match self {
            MarkerRef::A1 => m.a1,
            MarkerRef::A2 => m.a2,
            MarkerRef::A3 => m.a3,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            MarkerRef::A1 => "a1",
            MarkerRef::A2 => "a2",
            MarkerRef::A3 => "a3",
        }
    }
}

/// Maps schedule markers to a [`MarkerPolicy`]. Written as `c1/c2/e` (shared
/// escape marker) or `c1/c2/e1/e2`, e.g. the default `a1/a3/a2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyRule {
    pub c1: MarkerRef,
    pub c2: MarkerRef,
    pub e1: MarkerRef,
    pub e2: MarkerRef,
}

impl Default for PolicyRule {
    fn default() -> Self {
        Self { c1: MarkerRef::A1, c2: MarkerRef::A3, e1: MarkerRef::A2, e2: MarkerRef::A2 }
    }
}

impl PolicyRule {
    pub fn apply(&self, m: Markers) -> MarkerPolicy {
        MarkerPolicy::new(self.c1.pick(m), self.c2.pick(m), self.e1.pick(m), self.e2.pick(m))
    }
}

impl fmt::Display for PolicyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e1 == self.e2 {
            write!(f, "{}/{}/{}", self.c1.label(), self.c2.label(), self.e1.label())
        } else {
            write!(f, "{}/{}/{}/{}", self.c1.label(), self.c2.label(), self.e1.label(), self.e2.label())
        }
    }
}

impl FromStr for PolicyRule {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FeatureError::BadPolicyRule(s.to_string());
        let refs = s
            .split('/')
            .map(|p| match p.trim() {
                "a1" => Ok(MarkerRef::A1),
                "a2" => Ok(MarkerRef::A2),
                "a3" => Ok(MarkerRef::A3),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        match refs.as_slice() {
            [c1, c2, e] => Ok(Self { c1: *c1, c2: *c2, e1: *e, e2: *e }),
            [c1, c2, e1, e2] => Ok(Self { c1: *c1, c2: *c2, e1: *e1, e2: *e2 }),
            _ => Err(bad()),
        }
    }
}

impl Serialize for PolicyRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PolicyRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The five schedule integrals the features are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleIntegrals {
    /// ∫_0^{a_c1} η
    pub warmup_eta: f64,
    /// ∫_{a_c2}^S η
    pub cooldown_eta: f64,
    /// ∫_0^{a_e1} η′²
    pub warmup_deta_sq: f64,
    /// ∫_{a_e2}^S η′²
    pub cooldown_deta_sq: f64,
    pub eta_max: f64,
}

impl ScheduleIntegrals {
    pub fn measure(schedule: &Schedule, policy: &MarkerPolicy) -> Result<Self, FeatureError> {
        let s = schedule.horizon();
        policy.check(s)?;
        Ok(Self {
            warmup_eta: schedule.integral(0.0, policy.a_c1, Functional::Eta)?,
            cooldown_eta: schedule.integral(policy.a_c2, s, Functional::Eta)?,
            warmup_deta_sq: schedule.integral(0.0, policy.a_e1, Functional::DetaSq)?,
            cooldown_deta_sq: schedule.integral(policy.a_e2, s, Functional::DetaSq)?,
            eta_max: schedule.eta_max(),
        })
    }

    /// Continual-training variant: the cooldown energy is divided by the fourth
    /// power of the peak rate on `[a_e2, S]`, and the warmup integral also
    /// counts the pre-training schedule up to `pre_s`.
    pub fn measure_continual(
        schedule: &Schedule,
        policy: &MarkerPolicy,
        pre: Option<(&Schedule, f64)>,
    ) -> Result<Self, FeatureError> {
        let mut base = Self::measure(schedule, policy)?;
        let peak = schedule.max_on(policy.a_e2, schedule.horizon())?;
        if peak <= 0.0 {
            return Err(FeatureError::ZeroIntegral { term: "max(eta,ae2,S)" });
        }
        base.cooldown_deta_sq /= peak.powi(4);
        if let Some((pre_schedule, pre_s)) = pre {
            if pre_s > pre_schedule.horizon() {
                return Err(FeatureError::BadPreHorizon { pre_s, s: pre_schedule.horizon() });
            }
            base.warmup_eta += pre_schedule.integral(0.0, pre_s, Functional::Eta)?;
        }
        Ok(base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureEntry {
    pub name: &'static str,
    pub power: f64,
    pub value: f64,
}

/// Feature values in table order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FeatureVector {
    entries: [FeatureEntry; TERM_COUNT],
}

impl FeatureVector {
    pub fn entries(&self) -> &[FeatureEntry; TERM_COUNT] {
        &self.entries
    }

    pub fn values(&self) -> [f64; TERM_COUNT] {
        let mut v = [0.0; TERM_COUNT];
        for (slot, e) in v.iter_mut().zip(self.entries.iter()) {
            *slot = e.value;
        }
        v
    }

    pub fn convergence(&self) -> &[FeatureEntry] {
        &self.entries[0..4]
    }

    pub fn escape(&self) -> &[FeatureEntry] {
        &self.entries[4..8]
    }

    pub fn mixed(&self) -> &[FeatureEntry] {
        &self.entries[8..12]
    }

    pub fn bias(&self) -> &[FeatureEntry] {
        &self.entries[12..16]
    }

    /// Builds the vector from precomputed integrals.
    pub fn from_integrals(ints: &ScheduleIntegrals, s: f64, n: f64, powers: &Powers) -> Result<Self, FeatureError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(FeatureError::BadModelSize(n));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(ScheduleError::BadHorizon(s).into());
        }
        let iw = ints.warmup_eta;
        let ic = ints.cooldown_eta;
        if iw <= 0.0 {
            return Err(FeatureError::ZeroIntegral { term: "int(eta,0,ac1)" });
        }
        if ic <= 0.0 {
            return Err(FeatureError::ZeroIntegral { term: "int(eta,ac2,S)" });
        }
        let ec = ints.cooldown_deta_sq;
        let ew = ints.warmup_deta_sq;
        let bases = [
            iw,
            ic,
            n / ic,
            iw * ic,
            ec,
            ew,
            ec,
            s * n,
            ec / iw,
            ec / ic,
            n * ec / iw,
            n * ec / ic,
            n,
            s,
            ints.eta_max,
            1.0,
        ];
        let mut entries = [FeatureEntry { name: "", power: 0.0, value: 0.0 }; TERM_COUNT];
        for i in 0..TERM_COUNT {
            let p = powers.0[i];
            let value = if p == 1.0 { bases[i] } else { bases[i].powf(p) };
            if !value.is_finite() {
                return Err(FeatureError::NonFinite { name: TERMS[i].name, value });
            }
            entries[i] = FeatureEntry { name: TERMS[i].name, power: p, value };
        }
        entries[15].value = 1.0;
        Ok(Self { entries })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("features serialize")
    }
}

/// Feature vector of `schedule` under `policy` with model size `n` (billions).
/// The horizon `S` is the schedule's own.
pub fn compute_features(
    schedule: &Schedule,
    policy: &MarkerPolicy,
    n: f64,
    powers: &Powers,
) -> Result<FeatureVector, FeatureError> {
    let ints = ScheduleIntegrals::measure(schedule, policy)?;
    FeatureVector::from_integrals(&ints, schedule.horizon(), n, powers)
}
