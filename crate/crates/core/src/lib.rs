//! Schedule-aware loss laws and the stochastic-optimization lab behind them.
//!
//! The crate is layered bottom-up:
//!
//! * [`schedule`] piecewise learning-rate schedules with exact integral functionals
//! * [`features`] the 16-term feature vector built from those functionals
//! * [`law`] least-squares fitting, prediction and ranking
//! * [`divergence`] the warmup divergence gate
//! * [`sde`] Euler–Maruyama simulation, covariance ODEs and probability bounds
//! * [`cli`] the `optlaws` command-line front end

pub mod cli;
pub mod divergence;
pub mod features;
pub mod io;
pub mod law;
pub mod quadrature;
pub mod schedule;
pub mod sde;
pub mod sweep;
pub mod validate;

pub use divergence::{DivergenceParams, GateResult, Verdict};
pub use features::{FeatureSet, FeatureVector, MarkerPolicy, Normalizer, PolicyRule, Powers};
pub use law::{FittedLaw, LawMode, RunRecord, SimpleLaw, TrainingConfig};
pub use schedule::{Functional, Schedule, Segment, SegmentKind};
