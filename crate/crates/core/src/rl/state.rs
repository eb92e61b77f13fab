//! The two-part progress state computed from the best-so-far curve.
//!
//! With f(k) the best objective value after k univariate iterations and
//! decisions taken every 10 iterations:
//!
//! ```text
//! s¹(1) = (log f(0)       − log f(10t)) / |log f(0)|
//! s¹(t) = (log f(10(t−2)) − log f(10t)) / |log f(10(t−2))|   for t ≥ 2
//! s²(t) = (log f(0)       − log f(10t)) / |log f(0)|
//! ```
//!
//! Both components are ratios of log differences, so they do not depend on
//! the logarithm base. Values are clamped below at 1e-12 before taking
//! logs, denominators at 1e-12 in magnitude, and the results floored at 0;
//! this keeps the state defined when an objective crosses 1 or reaches 0.

use super::{BinMetadata, StateIndex, DECISION_INTERVAL};
use crate::error::{Error, Result};

const LOG_CLAMP: f64 = 1e-12;

/// Raw (undiscretized) progress state; both components are ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RawState {
    /// Relative log-improvement over the two most recent decision steps.
    pub s1: f64,
    /// Cumulative relative log-descent since the initial population.
    pub s2: f64,
}

/// Computes the state at decision step `t` from a per-iteration
/// best-so-far curve (`curve[k]` = best objective after iteration k).
pub fn compute_state(curve: &[f64], t: usize) -> Result<RawState> {
    if t < 1 {
        return Err(Error::contract("state is defined for steps t >= 1"));
    }
    if curve.len() <= DECISION_INTERVAL * t {
        return Err(Error::contract(format!(
            "curve has {} entries, step {t} needs index {}",
            curve.len(),
            DECISION_INTERVAL * t
        )));
    }
    let checkpoints: Vec<f64> = (0..=t).map(|j| curve[DECISION_INTERVAL * j]).collect();
    compute_state_from_checkpoints(&checkpoints, t)
}

/// Same computation on a pre-extracted checkpoint array
/// (`checkpoints[j]` = best objective after 10·j iterations).
pub fn compute_state_from_checkpoints(checkpoints: &[f64], t: usize) -> Result<RawState> {
    if t < 1 {
        return Err(Error::contract("state is defined for steps t >= 1"));
    }
    if checkpoints.len() <= t {
        return Err(Error::contract(format!(
            "checkpoint array has {} entries, step {t} needs {}",
            checkpoints.len(),
            t + 1
        )));
    }
    let log_at = |j: usize| checkpoints[j].max(LOG_CLAMP).ln();
    let denom = |x: f64| x.abs().max(LOG_CLAMP);

    let s1_ref = if t == 1 { 0 } else { t - 2 };
    let s1 = (log_at(s1_ref) - log_at(t)) / denom(log_at(s1_ref));
    let s2 = (log_at(0) - log_at(t)) / denom(log_at(0));
    Ok(RawState {
        s1: s1.max(0.0),
        s2: s2.max(0.0),
    })
}

/// Discretizes a raw state with the canonical edges for `dimension`.
pub fn discretize(raw: &RawState, dimension: usize) -> StateIndex {
    BinMetadata::for_dimension(dimension).discretize(raw)
}
