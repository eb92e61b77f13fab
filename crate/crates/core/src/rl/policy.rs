//! Frozen switch policies extracted from meta-Q vote tallies.

use rand::Rng;

use super::{Action, BinMetadata, StateIndex, STATE_CELLS};
use crate::error::Result;

/// Per-state action preference; `Tie` means the vote tally gave no evidence
/// either way and the action is drawn uniformly at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Stay,
    Switch,
    Tie,
}

/// Provenance of a training run, carried inside serialized tables and
/// policies so results stay attributable.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct TrainingMeta {
    pub gamma: f64,
    pub alpha: f64,
    pub max_epochs: usize,
    pub replications: usize,
    pub functions: Vec<String>,
}

/// Per-state vote tallies across training functions: for each cell, how
/// many functions preferred staying (column 0) versus switching (column 1).
/// Comparing only the sign of per-function value differences makes the
/// tally independent of objective scales.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetaVotes {
    pub meta: BinMetadata,
    #[serde(with = "super::serde_cells")]
    pub votes: [[u32; 2]; STATE_CELLS],
    /// Ids of the contributing training functions.
    pub functions: Vec<String>,
}

/// An immutable switch policy: one preference per progress cell, plus the
/// meta-Q vote counts it was derived from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Policy {
    meta: BinMetadata,
    #[serde(with = "super::serde_cells")]
    preferences: [Preference; STATE_CELLS],
    #[serde(with = "super::serde_cells")]
    votes: [[u32; 2]; STATE_CELLS],
    training: TrainingMeta,
}

impl Policy {
    pub fn new(
        meta: BinMetadata,
        preferences: [Preference; STATE_CELLS],
        votes: [[u32; 2]; STATE_CELLS],
        training: TrainingMeta,
    ) -> Self {
        Policy {
            meta,
            preferences,
            votes,
            training,
        }
    }

    /// A policy with the same preference in every cell (useful as a probe:
    /// always-switch degenerates to the earliest switch, never-switch to
    /// the horizon).
    pub fn constant(meta: BinMetadata, preference: Preference) -> Self {
        Policy {
            meta,
            preferences: [preference; STATE_CELLS],
            votes: [[0; 2]; STATE_CELLS],
            training: TrainingMeta::default(),
        }
    }

    pub fn meta(&self) -> &BinMetadata {
        &self.meta
    }

    pub fn preferences(&self) -> &[Preference; STATE_CELLS] {
        &self.preferences
    }

    pub fn votes(&self) -> &[[u32; 2]; STATE_CELLS] {
        &self.votes
    }

    pub fn training(&self) -> &TrainingMeta {
        &self.training
    }

    pub fn preference(&self, state: &StateIndex) -> Result<Preference> {
        Ok(self.preferences[state.require_flat()?])
    }
}

/// Returns the stored preference for the state; ties are resolved by a
/// uniform coin flip.
pub fn select_action(policy: &Policy, state: &StateIndex, rng: &mut impl Rng) -> Result<Action> {
    Ok(match policy.preference(state)? {
        Preference::Stay => Action::Stay,
        Preference::Switch => Action::Switch,
        Preference::Tie => {
            if rng.random::<bool>() {
                Action::Switch
            } else {
                Action::Stay
            }
        }
    })
}
