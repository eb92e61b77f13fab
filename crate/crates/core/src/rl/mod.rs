//! Tabular Q-learning machinery: the two-part progress state, its 6×6
//! discretization with dimension rescaling, the 36×2 action-value table,
//! and the frozen vote-based policy.

mod policy;
mod qtable;
mod state;

pub use policy::{select_action, MetaVotes, Policy, Preference, TrainingMeta};
pub use qtable::{epsilon_greedy, q_change_rate, q_update, QTable};
pub use state::{compute_state, compute_state_from_checkpoints, discretize, RawState};

use crate::error::{Error, Result};

/// Number of discretized progress cells (6 bins per state component).
pub const STATE_CELLS: usize = 36;

/// Serde shim for `[T; STATE_CELLS]` fields (serde's built-in array support
/// stops at length 32): serialized as a plain sequence, length-checked on
/// the way back in.
pub(crate) mod serde_cells {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::STATE_CELLS;

    pub fn serialize<S: Serializer, T: Serialize>(
        value: &[T; STATE_CELLS],
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        value[..].serialize(serializer)
    }

    pub fn deserialize<'de, D, T>(deserializer: D) -> Result<[T; STATE_CELLS], D::Error>
    where
        D: Deserializer<'de>,
        T: Deserialize<'de>,
    {
        let values: Vec<T> = Vec::deserialize(deserializer)?;
        let len = values.len();
        values.try_into().map_err(|_| {
            serde::de::Error::custom(format!("expected {STATE_CELLS} cells, got {len}"))
        })
    }
}

/// Univariate-sampling iterations per decision step (the `10` in the state
/// formula: progress is checked every ten iterations, not every one).
pub const DECISION_INTERVAL: usize = 10;

/// Default decision horizon: after this many steps the switch is forced.
pub const DEFAULT_HORIZON: usize = 20;

/// Upper edges of the first five (right-closed) bins for the recent
/// log-improvement component; the sixth bin is unbounded.
pub const S1_EDGES: [f64; 5] = [0.005, 0.05, 0.09, 0.5, 1.0];

/// Upper edges for the cumulative log-descent component before dimension
/// scaling.
pub const S2_BASE_EDGES: [f64; 5] = [0.2, 0.5, 0.8, 1.2, 3.0];

/// Dimension scaling applied to the cumulative-descent edges: harder
/// high-dimensional problems descend less, so the edges move inward.
pub fn scale_factor(dimension: usize) -> f64 {
    if dimension < 50 {
        1.0
    } else if dimension < 100 {
        0.05
    } else {
        0.025
    }
}

/// The two available decisions at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Keep running univariate sampling.
    Stay,
    /// Hand over to CMA-ES.
    Switch,
}

impl Action {
    pub fn index(self) -> usize {
        match self {
            Action::Stay => 0,
            Action::Switch => 1,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            0 => Ok(Action::Stay),
            1 => Ok(Action::Switch),
            _ => Err(Error::contract(format!("action index {index} out of range"))),
        }
    }
}

/// A discretized state: one of the 36 progress cells, or the terminal
/// absorbing state entered on switching (or at the horizon).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateIndex {
    Cell { bin1: usize, bin2: usize },
    Terminal,
}

impl StateIndex {
    pub fn cell(bin1: usize, bin2: usize) -> Self {
        debug_assert!(bin1 < 6 && bin2 < 6);
        StateIndex::Cell { bin1, bin2 }
    }

    /// Flat index `6·bin1 + bin2`; `None` for the terminal state.
    pub fn flat(&self) -> Option<usize> {
        match self {
            StateIndex::Cell { bin1, bin2 } => Some(6 * bin1 + bin2),
            StateIndex::Terminal => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, StateIndex::Terminal)
    }

    pub(crate) fn require_flat(&self) -> Result<usize> {
        self.flat()
            .ok_or_else(|| Error::contract("terminal state has no action values"))
    }
}

/// Bin edges plus the dimension-scale factor; tables and policies are only
/// interoperable when these match exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BinMetadata {
    pub s1_edges: [f64; 5],
    pub s2_edges: [f64; 5],
    pub dim_scale: f64,
}

impl BinMetadata {
    pub fn for_dimension(dimension: usize) -> Self {
        BinMetadata {
            s1_edges: S1_EDGES,
            s2_edges: S2_BASE_EDGES,
            dim_scale: scale_factor(dimension),
        }
    }

    /// Maps a raw state into its cell. Intervals are right-closed, so a
    /// value exactly on an edge lands in the lower bin; the last bin is
    /// unbounded, making the map total for finite nonnegative inputs.
    pub fn discretize(&self, raw: &RawState) -> StateIndex {
        let bin1 = self.s1_edges.iter().filter(|e| **e < raw.s1).count();
        let bin2 = self
            .s2_edges
            .iter()
            .filter(|e| **e * self.dim_scale < raw.s2)
            .count();
        StateIndex::cell(bin1, bin2)
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::MetadataMismatch(format!(
                "expected {self:?}, got {other:?}"
            )))
        }
    }
}

/// One learning step: acting in `state` yielded `reward` and `next`.
/// Rewards are zero except on transitions into the terminal state.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Transition {
    pub state: StateIndex,
    pub action: Action,
    pub reward: f64,
    pub next: StateIndex,
}
