//! Piecewise learning-rate schedules.
//!
//! Time is measured in billions of tokens and rates are normalized (raw rate
//! divided by the normalizer's scale). A [`Schedule`] is an ordered list of
//! contiguous [`Segment`]s, each linear, constant, or a cosine half period,
//! together with the three phase markers `a1 <= a2 <= a3`.
//!
//! ```
//! use optlaws::schedule::{Functional, Schedule};
//!
//! // warmup to 0.4 over [0, 2], then linear cooldown to zero at 10
//! let s = Schedule::general(0.4, 0.4, 2.0, 2.0, 2.0, 10.0).unwrap();
//! assert!((s.eval(1.0).unwrap() - 0.2).abs() < 1e-15);
//! assert!((s.integral(0.0, 2.0, Functional::Eta).unwrap() - 0.4).abs() < 1e-15);
//! ```

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::quadrature::{AdaptiveSimpson, QuadratureError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("segment must satisfy t_start < t_end, got [{t_start}, {t_end}]")]
    EmptySegment { t_start: f64, t_end: f64 },
    #[error("learning rates must be finite and nonnegative, got {value}")]
    NegativeRate { value: f64 },
    #[error("constant segment needs eta_start == eta_end, got {eta_start} and {eta_end}")]
    ConstantMismatch { eta_start: f64, eta_end: f64 },
    #[error("schedule has no segments")]
    NoSegments,
    #[error("first segment must start at 0, starts at {0}")]
    BadStart(f64),
    #[error("segments are not contiguous at index {index}: {end} then {start}")]
    Gap { index: usize, end: f64, start: f64 },
    #[error("learning rate jumps at t = {t}: {left} vs {right}")]
    Discontinuous { t: f64, left: f64, right: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("markers must satisfy 0 <= a1 <= a2 <= a3 <= S, got ({a1}, {a2}, {a3}) with S = {s}")]
    MarkerOrder { a1: f64, a2: f64, a3: f64, s: f64 },
    #[error("time {t} is outside [0, {s}]")]
    OutOfRange { t: f64, s: f64 },
    #[error("integration bounds reversed: u = {u} > v = {v}")]
    ReversedBounds { u: f64, v: f64 },
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Linear,
    Constant,
    Cosine,
}

/// Which integral of the schedule to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// ∫ η
    Eta,
    /// ∫ η²
    EtaSq,
    /// ∫ η′²
    DetaSq,
}

impl Functional {
    pub const ALL: [Functional; 3] = [Functional::Eta, Functional::EtaSq, Functional::DetaSq];
}

/// Shape of the final decay phase produced by the schedule builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CooldownShape {
    #[default]
    Linear,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    #[serde(rename = "t0")]
    pub t_start: f64,
    #[serde(rename = "t1")]
    pub t_end: f64,
    #[serde(rename = "eta0")]
    pub eta_start: f64,
    #[serde(rename = "eta1")]
    pub eta_end: f64,
}

impl Segment {
    pub fn new(kind: SegmentKind, t_start: f64, t_end: f64, eta_start: f64, eta_end: f64) -> Result<Self, ScheduleError> {
        let s = Segment { kind, t_start, t_end, eta_start, eta_end };
        s.validate()?;
        Ok(s)
    }

    pub fn linear(t_start: f64, t_end: f64, eta_start: f64, eta_end: f64) -> Result<Self, ScheduleError> {
        Self::new(SegmentKind::Linear, t_start, t_end, eta_start, eta_end)
    }

    pub fn constant(t_start: f64, t_end: f64, eta: f64) -> Result<Self, ScheduleError> {
        Self::new(SegmentKind::Constant, t_start, t_end, eta, eta)
    }

    pub fn cosine(t_start: f64, t_end: f64, eta_start: f64, eta_end: f64) -> Result<Self, ScheduleError> {
        Self::new(SegmentKind::Cosine, t_start, t_end, eta_start, eta_end)
    }

    fn validate(&self) -> Result<(), ScheduleError> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(ScheduleError::EmptySegment { t_start: self.t_start, t_end: self.t_end });
        }
        for value in [self.eta_start, self.eta_end] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScheduleError::NegativeRate { value });
            }
        }
        if self.kind == SegmentKind::Constant && self.eta_start != self.eta_end {
            return Err(ScheduleError::ConstantMismatch { eta_start: self.eta_start, eta_end: self.eta_end });
        }
        Ok(())
    }

    pub fn len(&self) -> f64 {
        self.t_end - self.t_start
    }

    fn slope(&self) -> f64 {
        (self.eta_end - self.eta_start) / self.len()
    }

    // cosine helpers: eta = mid + amp * cos(theta)
    fn cos_parts(&self) -> (f64, f64, f64) {
        let mid = 0.5 * (self.eta_start + self.eta_end);
        let amp = 0.5 * (self.eta_start - self.eta_end);
        (mid, amp, PI / self.len())
    }

    /// Rate at absolute time `t` (assumed inside the segment).
    pub fn value(&self, t: f64) -> f64 {
        let x = t - self.t_start;
        match self.kind {
            SegmentKind::Constant => self.eta_start,
            SegmentKind::Linear => {
                if t >= self.t_end {
                    self.eta_end
                } else {
                    self.eta_start + self.slope() * x
                }
            }
            SegmentKind::Cosine => {
                if t >= self.t_end {
                    return self.eta_end;
                }
                let (mid, amp, k) = self.cos_parts();
                mid + amp * (k * x).cos()
            }
        }
    }

    /// Time derivative at absolute time `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Constant => 0.0,
            SegmentKind::Linear => self.slope(),
            SegmentKind::Cosine => {
                let (_, amp, k) = self.cos_parts();
                -amp * k * (k * (t - self.t_start)).sin()
            }
        }
    }

    /// Antiderivative from the segment start to local offset `x`.
    fn primitive(&self, functional: Functional, x: f64) -> f64 {
        let e0 = self.eta_start;
        match self.kind {
            SegmentKind::Constant => match functional {
                Functional::Eta => e0 * x,
                Functional::EtaSq => e0 * e0 * x,
                Functional::DetaSq => 0.0,
            },
            SegmentKind::Linear => {
                let m = self.slope();
                match functional {
                    Functional::Eta => e0 * x + 0.5 * m * x * x,
                    Functional::EtaSq => e0 * e0 * x + e0 * m * x * x + m * m * x * x * x / 3.0,
                    Functional::DetaSq => m * m * x,
                }
            }
            SegmentKind::Cosine => {
                let (mid, amp, k) = self.cos_parts();
                let th = k * x;
                match functional {
                    Functional::Eta => (mid * th + amp * th.sin()) / k,
                    Functional::EtaSq => {
                        (mid * mid * th
                            + 2.0 * mid * amp * th.sin()
                            + amp * amp * (0.5 * th + 0.25 * (2.0 * th).sin()))
                            / k
                    }
                    Functional::DetaSq => amp * amp * k * (0.5 * th - 0.25 * (2.0 * th).sin()),
                }
            }
        }
    }

    /// Exact integral over `[u, v]`, both inside the segment.
    pub fn integral(&self, u: f64, v: f64, functional: Functional) -> f64 {
        if v <= u {
            return 0.0;
        }
        let full = u <= self.t_start && v >= self.t_end;
        if full {
            return self.full_integral(functional);
        }
        let a = (u - self.t_start).max(0.0);
        let b = (v - self.t_start).min(self.len());
        self.primitive(functional, b) - self.primitive(functional, a)
    }

    fn full_integral(&self, functional: Functional) -> f64 {
        let l = self.len();
        let (e0, e1) = (self.eta_start, self.eta_end);
        match (self.kind, functional) {
            (SegmentKind::Linear, Functional::Eta) | (SegmentKind::Cosine, Functional::Eta) => 0.5 * (e0 + e1) * l,
            (SegmentKind::Linear, Functional::EtaSq) => (e0 * e0 + e0 * e1 + e1 * e1) * l / 3.0,
            (SegmentKind::Linear, Functional::DetaSq) => (e1 - e0) * (e1 - e0) / l,
            (SegmentKind::Cosine, Functional::DetaSq) => PI * PI * (e0 - e1) * (e0 - e1) / (8.0 * l),
            _ => self.primitive(functional, l),
        }
    }

    fn scaled(&self, k: f64) -> Segment {
        Segment { eta_start: self.eta_start * k, eta_end: self.eta_end * k, ..*self }
    }
}

/// Phase markers `a1 <= a2 <= a3` in token units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Markers {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Markers {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    fn check(&self, s: f64) -> Result<(), ScheduleError> {
        let Markers { a1, a2, a3 } = *self;
        let ok = [a1, a2, a3].iter().all(|v| v.is_finite()) && 0.0 <= a1 && a1 <= a2 && a2 <= a3 && a3 <= s;
        if ok {
            Ok(())
        } else {
            Err(ScheduleError::MarkerOrder { a1, a2, a3, s })
        }
    }
}

/// Immutable piecewise schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    segments: Vec<Segment>,
    horizon: f64,
    markers: Markers,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    #[serde(rename = "S")]
    horizon: f64,
    markers: [f64; 3],
    segments: Vec<Segment>,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = ScheduleError;
    fn try_from(r: ScheduleRepr) -> Result<Self, Self::Error> {
        let s = Schedule::new(r.segments, Markers::new(r.markers[0], r.markers[1], r.markers[2]))?;
        if s.horizon != r.horizon {
            return Err(ScheduleError::Gap { index: s.segments.len(), end: s.horizon, start: r.horizon });
        }
        Ok(s)
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr { horizon: s.horizon, markers: s.markers.as_array(), segments: s.segments }
    }
}

fn rate_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Schedule {
    /// Builds a schedule from contiguous segments; the horizon is the last `t_end`.
    pub fn new(segments: Vec<Segment>, markers: Markers) -> Result<Self, ScheduleError> {
        let first = segments.first().ok_or(ScheduleError::NoSegments)?;
        if first.t_start != 0.0 {
            return Err(ScheduleError::BadStart(first.t_start));
        }
        for seg in &segments {
            seg.validate()?;
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[0].t_end != w[1].t_start {
                return Err(ScheduleError::Gap { index: i + 1, end: w[0].t_end, start: w[1].t_start });
            }
            if !rate_close(w[0].eta_end, w[1].eta_start) {
                return Err(ScheduleError::Discontinuous { t: w[0].t_end, left: w[0].eta_end, right: w[1].eta_start });
            }
        }
        let horizon = segments.last().map(|s| s.t_end).unwrap_or(0.0);
        markers.check(horizon)?;
        Ok(Self { segments, horizon, markers })
    }

    /// Four-phase schedule: linear warmup `0 -> eta1` on `[0, a1]`, linear decay
    /// `eta1 -> eta2` on `[a1, a2]`, plateau at `eta2` on `[a2, a3]`, and a linear
    /// cooldown to zero on `[a3, s]`. Zero-length phases are dropped.
    pub fn general(eta1: f64, eta2: f64, a1: f64, a2: f64, a3: f64, s: f64) -> Result<Self, ScheduleError> {
        Self::general_with(eta1, eta2, a1, a2, a3, s, CooldownShape::Linear)
    }

    /// Same as [`Schedule::general`] with a choice of cooldown shape.
    pub fn general_with(
        eta1: f64,
        eta2: f64,
        a1: f64,
        a2: f64,
        a3: f64,
        s: f64,
        cooldown: CooldownShape,
    ) -> Result<Self, ScheduleError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(ScheduleError::BadHorizon(s));
        }
        for value in [eta1, eta2] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScheduleError::NegativeRate { value });
            }
        }
        let markers = Markers::new(a1, a2, a3);
        markers.check(s)?;
        let phases = [
            (SegmentKind::Linear, 0.0, a1, 0.0, eta1),
            (SegmentKind::Linear, a1, a2, eta1, eta2),
            (SegmentKind::Constant, a2, a3, eta2, eta2),
            (
                match cooldown {
                    CooldownShape::Linear => SegmentKind::Linear,
                    CooldownShape::Cosine => SegmentKind::Cosine,
                },
                a3,
                s,
                eta2,
                0.0,
            ),
        ];
        let mut segments = Vec::with_capacity(4);
        for (kind, t0, t1, e0, e1) in phases {
            if t1 > t0 {
                segments.push(Segment::new(kind, t0, t1, e0, e1)?);
            }
        }
        Self::new(segments, markers)
    }

    /// Linear warmup to `h` over `[0, a]` followed by a cosine decay to zero.
    pub fn warmup_cosine(h: f64, a: f64, s: f64) -> Result<Self, ScheduleError> {
        Self::general_with(h, h, a, a, a, s, CooldownShape::Cosine)
    }

    /// Linear warmup to `h` over `[0, a]`, constant until `a_c`, then linear cooldown.
    pub fn warmup_constant_cooldown(h: f64, a: f64, a_c: f64, s: f64) -> Result<Self, ScheduleError> {
        Self::general(h, h, a, a, a_c, s)
    }

    /// Constant rate over `[0, s]`.
    pub fn constant(eta: f64, s: f64) -> Result<Self, ScheduleError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(ScheduleError::BadHorizon(s));
        }
        Self::new(vec![Segment::constant(0.0, s, eta)?], Markers::new(0.0, 0.0, s))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn markers(&self) -> Markers {
        self.markers
    }

    /// Interior joints between segments.
    pub fn joints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.t_start).collect()
    }

    fn check_time(&self, t: f64) -> Result<(), ScheduleError> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(ScheduleError::OutOfRange { t, s: self.horizon })
        }
    }

    fn segment_at(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.t_end <= t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    /// η(t).
    pub fn eval(&self, t: f64) -> Result<f64, ScheduleError> {
        self.check_time(t)?;
        Ok(self.segment_at(t).value(t))
    }

    /// η′(t); right-hand limit at joints, left-hand limit at `S`.
    pub fn eval_derivative(&self, t: f64) -> Result<f64, ScheduleError> {
        self.check_time(t)?;
        Ok(self.segment_at(t).derivative(t))
    }

    /// η(t) without the range check; `t` is clamped to `[0, S]`.
    pub fn value_clamped(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        self.segment_at(t).value(t)
    }

    fn check_bounds(&self, u: f64, v: f64) -> Result<(), ScheduleError> {
        self.check_time(u)?;
        self.check_time(v)?;
        if u > v {
            return Err(ScheduleError::ReversedBounds { u, v });
        }
        Ok(())
    }

    /// Exact integral of `functional` over `[u, v]`.
    pub fn integral(&self, u: f64, v: f64, functional: Functional) -> Result<f64, ScheduleError> {
        self.check_bounds(u, v)?;
        let mut total = 0.0;
        for seg in &self.segments {
            if seg.t_end <= u {
                continue;
            }
            if seg.t_start >= v {
                break;
            }
            total += seg.integral(u.max(seg.t_start), v.min(seg.t_end), functional);
        }
        Ok(total.max(0.0))
    }

    /// Segment-wise adaptive Simpson estimate of the same integral.
    pub fn integral_numeric(
        &self,
        u: f64,
        v: f64,
        functional: Functional,
        rule: &AdaptiveSimpson,
    ) -> Result<f64, ScheduleError> {
        self.check_bounds(u, v)?;
        let mut total = 0.0;
        for seg in &self.segments {
            let lo = u.max(seg.t_start);
            let hi = v.min(seg.t_end);
            if hi <= lo {
                continue;
            }
            total += match functional {
                Functional::Eta => rule.integrate(|t| seg.value(t), lo, hi)?,
                Functional::EtaSq => rule.integrate(|t| seg.value(t).powi(2), lo, hi)?,
                Functional::DetaSq => rule.integrate(|t| seg.derivative(t).powi(2), lo, hi)?,
            };
        }
        Ok(total)
    }

    /// Supremum of η over `[0, S]`.
    pub fn eta_max(&self) -> f64 {
        self.segments.iter().fold(0.0, |m, s| m.max(s.eta_start).max(s.eta_end))
    }

    /// Supremum of η over `[u, v]`; every segment kind is monotone, so
    /// clipped endpoints suffice.
    pub fn max_on(&self, u: f64, v: f64) -> Result<f64, ScheduleError> {
        self.check_bounds(u, v)?;
        let mut m = self.segment_at(u).value(u);
        for seg in &self.segments {
            let lo = u.max(seg.t_start);
            let hi = v.min(seg.t_end);
            if hi < lo {
                continue;
            }
            m = m.max(seg.value(lo)).max(seg.value(hi));
        }
        Ok(m)
    }

    /// Copy with every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, ScheduleError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ScheduleError::BadScale(k));
        }
        Ok(Self {
            segments: self.segments.iter().map(|s| s.scaled(k)).collect(),
            horizon: self.horizon,
            markers: self.markers,
        })
    }

    /// Copy with one segment split at an interior time; the described function is unchanged.
    pub fn split_at(&self, t: f64) -> Result<Self, ScheduleError> {
        self.check_time(t)?;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        for seg in &self.segments {
            if seg.t_start < t && t < seg.t_end && seg.kind != SegmentKind::Cosine {
                let mid = seg.value(t);
                out.push(Segment::new(seg.kind, seg.t_start, t, seg.eta_start, mid)?);
                out.push(Segment::new(seg.kind, t, seg.t_end, mid, seg.eta_end)?);
            } else {
                out.push(*seg);
            }
        }
        Self::new(out, self.markers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serializes")
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S={} markers=({}, {}, {})", self.horizon, self.markers.a1, self.markers.a2, self.markers.a3)?;
        for s in &self.segments {
            write!(f, " [{:?} {}..{}: {}->{}]", s.kind, s.t_start, s.t_end, s.eta_start, s.eta_end)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn linear_warmup_values() {
        let s = Schedule::general(0.4, 0.4, 2.0, 2.0, 2.0, 10.0).unwrap();
        assert_eq!(s.segments().len(), 2);
        assert!((s.eval(1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((s.eval_derivative(1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((s.integral(0.0, 2.0, Functional::Eta).unwrap() - 0.4).abs() < 1e-15);
        assert!((s.integral(0.0, 2.0, Functional::DetaSq).unwrap() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_joint_is_right_limit() {
        let s = Schedule::general(0.4, 0.4, 2.0, 2.0, 2.0, 10.0).unwrap();
        assert!((s.eval_derivative(2.0).unwrap() + 0.05).abs() < 1e-15);
        assert!((s.eval_derivative(10.0).unwrap() + 0.05).abs() < 1e-15);
        assert!((s.eval_derivative(0.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cosine_cooldown_midpoint_and_energy() {
        let s = Schedule::warmup_cosine(0.4, 2.0, 10.0).unwrap();
        assert!((s.eval(6.0).unwrap() - 0.2).abs() < 1e-15);
        let e = s.integral(2.0, 10.0, Functional::DetaSq).unwrap();
        let expect = PI * PI * 0.16 / 64.0;
        assert!(close(e, expect, 1e-14));
        let numeric = s.integral_numeric(2.0, 10.0, Functional::DetaSq, &AdaptiveSimpson::default()).unwrap();
        assert!(close(numeric, expect, 1e-10));
    }

    #[test]
    fn pure_decay_is_single_segment() {
        let s = Schedule::general(0.3, 0.3, 0.0, 0.0, 0.0, 5.0).unwrap();
        assert_eq!(s.segments().len(), 1);
        assert_eq!(s.segments()[0].kind, SegmentKind::Linear);
        assert_eq!(s.eval(0.0).unwrap(), 0.3);
    }

    #[test]
    fn four_phases_present() {
        let s = Schedule::general(0.5, 0.25, 1.0, 3.0, 6.0, 10.0).unwrap();
        let kinds: Vec<_> = s.segments().iter().map(|g| g.kind).collect();
        assert_eq!(kinds, [SegmentKind::Linear, SegmentKind::Linear, SegmentKind::Constant, SegmentKind::Linear]);
        assert_eq!(s.eval(4.0).unwrap(), 0.25);
        assert_eq!(s.eval(10.0).unwrap(), 0.0);
        assert_eq!(s.eta_max(), 0.5);
        assert_eq!(s.max_on(3.0, 10.0).unwrap(), 0.25);
    }

    #[test]
    fn const_then_cooldown_shape() {
        let s = Schedule::general(0.4, 0.4, 2.0, 2.0, 8.0, 10.0).unwrap();
        let ic = s.integral(2.0, 10.0, Functional::Eta).unwrap();
        assert!(close(ic, 0.4 * 6.0 + 0.4 * 2.0 / 2.0, 1e-14));
    }

    #[test]
    fn errors() {
        assert!(matches!(Schedule::general(0.4, 0.4, 3.0, 2.0, 4.0, 10.0), Err(ScheduleError::MarkerOrder { .. })));
        assert!(matches!(Schedule::general(-0.1, 0.4, 1.0, 2.0, 4.0, 10.0), Err(ScheduleError::NegativeRate { .. })));
        assert!(matches!(Schedule::general(0.4, 0.4, 0.0, 0.0, 0.0, 0.0), Err(ScheduleError::BadHorizon(_))));
        let s = Schedule::constant(1.0, 2.0).unwrap();
        assert!(matches!(s.eval(2.5), Err(ScheduleError::OutOfRange { .. })));
        assert!(matches!(s.integral(1.0, 0.5, Functional::Eta), Err(ScheduleError::ReversedBounds { .. })));
        assert!(Segment::new(SegmentKind::Constant, 0.0, 1.0, 0.1, 0.2).is_err());
        assert!(Segment::linear(1.0, 1.0, 0.1, 0.2).is_err());
    }

    #[test]
    fn discontinuous_segments_rejected() {
        let segs = vec![Segment::linear(0.0, 1.0, 0.0, 0.5).unwrap(), Segment::constant(1.0, 2.0, 0.4).unwrap()];
        assert!(matches!(Schedule::new(segs, Markers::new(1.0, 1.0, 2.0)), Err(ScheduleError::Discontinuous { .. })));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = Schedule::general(0.1 + 0.2, 1.0 / 3.0, 0.7, 1.9, 5.3, 9.1).unwrap();
        let text = s.to_json();
        assert!(text.starts_with("{\"S\":"));
        let back: Schedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn split_preserves_function() {
        let s = Schedule::general(0.5, 0.25, 1.0, 3.0, 6.0, 10.0).unwrap();
        let t = s.split_at(7.3).unwrap();
        assert_eq!(t.segments().len(), 5);
        for f in Functional::ALL {
            let a = s.integral(0.0, 10.0, f).unwrap();
            let b = t.integral(0.0, 10.0, f).unwrap();
            assert!(close(b, a, 1e-13));
        }
    }
}
