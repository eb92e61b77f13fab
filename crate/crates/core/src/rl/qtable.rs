//! The 36×2 action-value table and its update rules.

use rand::Rng;

use super::{Action, BinMetadata, StateIndex, Transition, STATE_CELLS};
use crate::error::{Error, Result};

/// Action-value table over the 36 progress cells, zero-initialized, with
/// per-(state, action) visit counts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QTable {
    meta: BinMetadata,
    #[serde(with = "super::serde_cells")]
    values: [[f64; 2]; STATE_CELLS],
    #[serde(with = "super::serde_cells")]
    visits: [[u64; 2]; STATE_CELLS],
}

impl QTable {
    pub fn new(meta: BinMetadata) -> Self {
        QTable {
            meta,
            values: [[0.0; 2]; STATE_CELLS],
            visits: [[0; 2]; STATE_CELLS],
        }
    }

    pub fn for_dimension(dimension: usize) -> Self {
        Self::new(BinMetadata::for_dimension(dimension))
    }

    pub fn meta(&self) -> &BinMetadata {
        &self.meta
    }

    pub fn values(&self) -> &[[f64; 2]; STATE_CELLS] {
        &self.values
    }

    pub fn value(&self, state: &StateIndex, action: Action) -> Result<f64> {
        Ok(self.values[state.require_flat()?][action.index()])
    }

    pub fn visit_count(&self, state: &StateIndex, action: Action) -> Result<u64> {
        Ok(self.visits[state.require_flat()?][action.index()])
    }

    /// Largest action value in a cell (0 for the terminal state, which has
    /// no actions).
    pub fn max_value(&self, state: &StateIndex) -> f64 {
        match state.flat() {
            Some(flat) => self.values[flat][0].max(self.values[flat][1]),
            None => 0.0,
        }
    }

    /// Greedy action and whether it was an exact tie.
    pub fn greedy(&self, state: &StateIndex) -> Result<(Action, bool)> {
        let flat = state.require_flat()?;
        let [q0, q1] = self.values[flat];
        if q0 == q1 {
            Ok((Action::Stay, true))
        } else if q1 > q0 {
            Ok((Action::Switch, false))
        } else {
            Ok((Action::Stay, false))
        }
    }
}

/// Applies one Q-learning backup:
/// `Q(s,a) ← (1−α)·Q(s,a) + α·(γ·max_a' Q(s',a') + r)`.
///
/// A terminal successor contributes a zero bootstrap term. The visit count
/// of (s, a) is incremented.
pub fn q_update(
    table: &mut QTable,
    transition: &Transition,
    alpha: f64,
    gamma: f64,
) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::contract(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::contract(format!("gamma must be in [0, 1], got {gamma}")));
    }
    let flat = transition.state.require_flat()?;
    let a = transition.action.index();
    let bootstrap = table.max_value(&transition.next);
    let q = table.values[flat][a];
    table.values[flat][a] = (1.0 - alpha) * q + alpha * (gamma * bootstrap + transition.reward);
    table.visits[flat][a] += 1;
    Ok(())
}

/// ε-greedy action selection: with probability ε a uniformly random action,
/// otherwise the greedy one (exact ties broken uniformly at random).
pub fn epsilon_greedy(
    table: &QTable,
    state: &StateIndex,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<Action> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::contract(format!("epsilon must be in [0, 1], got {epsilon}")));
    }
    let (greedy, tie) = table.greedy(state)?;
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(random_action(rng));
    }
    if tie {
        return Ok(random_action(rng));
    }
    Ok(greedy)
}

fn random_action(rng: &mut impl Rng) -> Action {
    if rng.random::<bool>() {
        Action::Switch
    } else {
        Action::Stay
    }
}

/// Rate of action-value change between two training epochs: the squared
/// Frobenius norm of the elementwise table difference.
pub fn q_change_rate(previous: &QTable, current: &QTable) -> Result<f64> {
    previous.meta.ensure_compatible(&current.meta)?;
    let mut sum = 0.0;
    for s in 0..STATE_CELLS {
        for a in 0..2 {
            let d = previous.values[s][a] - current.values[s][a];
            sum += d * d;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table() -> QTable {
        QTable::for_dimension(10)
    }

    fn cell(flat: usize) -> StateIndex {
        StateIndex::cell(flat / 6, flat % 6)
    }

    #[test]
    fn zero_reward_zero_table_is_a_fixed_point() {
        let mut t = table();
        for flat in 0..STATE_CELLS {
            let tr = Transition {
                state: cell(flat),
                action: Action::Stay,
                reward: 0.0,
                next: cell((flat + 1) % STATE_CELLS),
            };
            q_update(&mut t, &tr, 0.5, 1.0).unwrap();
        }
        assert!(t.values().iter().all(|row| row == &[0.0, 0.0]));
        assert_eq!(t.visit_count(&cell(0), Action::Stay).unwrap(), 1);
    }

    #[test]
    fn update_arithmetic_matches_hand_computation() {
        let mut t = table();
        // Prime the successor cell so max_a' Q(s', a') = 4.
        let prime = Transition {
            state: cell(5),
            action: Action::Switch,
            reward: 4.0,
            next: StateIndex::Terminal,
        };
        q_update(&mut t, &prime, 1.0, 1.0).unwrap();
        assert_eq!(t.value(&cell(5), Action::Switch).unwrap(), 4.0);

        let tr = Transition {
            state: cell(0),
            action: Action::Stay,
            reward: 2.0,
            next: cell(5),
        };
        q_update(&mut t, &tr, 0.5, 1.0).unwrap();
        assert_eq!(t.value(&cell(0), Action::Stay).unwrap(), 3.0);
    }

    #[test]
    fn terminal_successor_contributes_no_bootstrap() {
        let mut t = table();
        let tr = Transition {
            state: cell(3),
            action: Action::Switch,
            reward: -2.5,
            next: StateIndex::Terminal,
        };
        q_update(&mut t, &tr, 1.0, 1.0).unwrap();
        assert_eq!(t.value(&cell(3), Action::Switch).unwrap(), -2.5);
    }

    #[test]
    fn invalid_rates_are_contract_errors() {
        let mut t = table();
        let tr = Transition {
            state: cell(0),
            action: Action::Stay,
            reward: 0.0,
            next: StateIndex::Terminal,
        };
        assert!(q_update(&mut t, &tr, 0.0, 1.0).is_err());
        assert!(q_update(&mut t, &tr, 0.5, 1.5).is_err());
    }

    #[test]
    fn greedy_when_epsilon_is_zero() {
        let mut t = table();
        let tr = Transition {
            state: cell(7),
            action: Action::Stay,
            reward: 1.0,
            next: StateIndex::Terminal,
        };
        q_update(&mut t, &tr, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(
                epsilon_greedy(&t, &cell(7), 0.0, &mut rng).unwrap(),
                Action::Stay
            );
        }
    }

    #[test]
    fn full_exploration_is_near_uniform() {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000;
        let switches: usize = (0..draws)
            .filter(|_| {
                epsilon_greedy(&t, &cell(0), 1.0, &mut rng).unwrap() == Action::Switch
            })
            .count();
        let freq = switches as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "switch frequency {freq}");
    }

    #[test]
    fn exact_ties_reach_both_actions() {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = [false, false];
        for _ in 0..100 {
            let a = epsilon_greedy(&t, &cell(1), 0.0, &mut rng).unwrap();
            seen[a.index()] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn greedy_choice_is_invariant_under_constant_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let q0: f64 = rng.random_range(-5.0..5.0);
            let q1: f64 = rng.random_range(-5.0..5.0);
            if q0 == q1 {
                continue;
            }
            let shift: f64 = rng.random_range(-100.0..100.0);
            let mut a = table();
            let mut b = table();
            for (t, (v0, v1)) in [(&mut a, (q0, q1)), (&mut b, (q0 + shift, q1 + shift))] {
                q_update(
                    t,
                    &Transition {
                        state: cell(0),
                        action: Action::Stay,
                        reward: v0,
                        next: StateIndex::Terminal,
                    },
                    1.0,
                    1.0,
                )
                .unwrap();
                q_update(
                    t,
                    &Transition {
                        state: cell(0),
                        action: Action::Switch,
                        reward: v1,
                        next: StateIndex::Terminal,
                    },
                    1.0,
                    1.0,
                )
                .unwrap();
            }
            assert_eq!(
                a.greedy(&cell(0)).unwrap().0,
                b.greedy(&cell(0)).unwrap().0
            );
        }
    }

    #[test]
    fn change_rate_examples() {
        let a = table();
        let mut b = table();
        assert_eq!(q_change_rate(&a, &b).unwrap(), 0.0);

        q_update(
            &mut b,
            &Transition {
                state: cell(11),
                action: Action::Switch,
                reward: 1.0,
                next: StateIndex::Terminal,
            },
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(q_change_rate(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn change_rate_matches_brute_force_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = table();
        let mut b = table();
        for t in [&mut a, &mut b] {
            for flat in 0..STATE_CELLS {
                for action in [Action::Stay, Action::Switch] {
                    q_update(
                        t,
                        &Transition {
                            state: cell(flat),
                            action,
                            reward: rng.random_range(-10.0..10.0),
                            next: StateIndex::Terminal,
                        },
                        1.0,
                        1.0,
                    )
                    .unwrap();
                }
            }
        }
        let mut expected = 0.0;
        for s in 0..STATE_CELLS {
            for act in 0..2 {
                let d = a.values()[s][act] - b.values()[s][act];
                expected += d * d;
            }
        }
        let got = q_change_rate(&a, &b).unwrap();
        assert!((got - expected).abs() <= 1e-12);
    }

    #[test]
    fn metadata_mismatch_is_rejected() {
        let a = QTable::for_dimension(10);
        let b = QTable::for_dimension(50);
        assert!(q_change_rate(&a, &b).is_err());
    }

    #[test]
    fn three_state_chain_converges_to_value_iteration() {
        // Deterministic chain: c0 → c1 → c2 → terminal, reward only on the
        // final hop; both actions move forward but Switch pays a small toll.
        let step = |flat: usize, a: Action| -> (StateIndex, f64) {
            let toll = if a == Action::Switch { -0.125 } else { 0.0 };
            match flat {
                0 => (cell(1), toll),
                1 => (cell(2), toll),
                _ => (StateIndex::Terminal, 1.0 + toll),
            }
        };
        let gamma = 1.0;

        // Independent value-iteration oracle on the same chain.
        let mut q_star = [[0.0_f64; 2]; 3];
        for _ in 0..100 {
            let mut next = q_star;
            for s in 0..3 {
                for (ai, a) in [Action::Stay, Action::Switch].into_iter().enumerate() {
                    let (succ, r) = step(s, a);
                    let boot = match succ.flat() {
                        Some(f) if f < 3 => q_star[f][0].max(q_star[f][1]),
                        _ => 0.0,
                    };
                    next[s][ai] = r + gamma * boot;
                }
            }
            q_star = next;
        }

        // Q-learning sweeps with α = 1/visits, states covered back-to-front.
        let mut t = table();
        for _ in 0..10_000 {
            for s in (0..3).rev() {
                for a in [Action::Stay, Action::Switch] {
                    let (next, reward) = step(s, a);
                    let alpha =
                        1.0 / (t.visit_count(&cell(s), a).unwrap() as f64 + 1.0);
                    q_update(
                        &mut t,
                        &Transition {
                            state: cell(s),
                            action: a,
                            reward,
                            next,
                        },
                        alpha,
                        gamma,
                    )
                    .unwrap();
                }
            }
        }
        for s in 0..3 {
            for (ai, a) in [Action::Stay, Action::Switch].into_iter().enumerate() {
                let learned = t.value(&cell(s), a).unwrap();
                assert!(
                    (learned - q_star[s][ai]).abs() < 1e-6,
                    "Q({s},{ai}) = {learned}, oracle {}",
                    q_star[s][ai]
                );
            }
        }
    }
}
