//! Offline training of the switch policy.
//!
//! For each training function the switch iteration is swept over
//! 10, 20, …, 200; every sweep point is run for R replications with shared
//! seeds and the log best-so-far curves are averaged into one trajectory.
//! The bank of 20 trajectories therefore observes the outcome of every
//! possible switch point once, and Q-learning replays the fixed bank for
//! `max_epochs` sweeps — no new runs are sampled during learning. Per-state
//! vote tallies across functions (meta-Q) make the aggregation independent
//! of objective scales, and the final policy is the vote argmax with ties
//! kept explicit.

use std::fs;
use std::path::Path;

use crate::benchmarks::Problem;
use crate::error::{Error, Result};
use crate::hses::{run_hses_from_iteration, HsesConfig, RunTrace};
use crate::parallel::batch_map;
use crate::rl::{
    compute_state_from_checkpoints, q_change_rate, q_update, Action, BinMetadata, MetaVotes,
    Policy, Preference, QTable, RawState, StateIndex, TrainingMeta, Transition,
    DECISION_INTERVAL, DEFAULT_HORIZON, STATE_CELLS,
};
use crate::seed::mix_seed;

const LOG_CLAMP: f64 = 1e-12;

/// Q-learning hyper-parameters and trajectory-bank shape.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    pub gamma: f64,
    pub alpha: f64,
    /// Epochs of bank replay.
    pub max_epochs: usize,
    /// Replications averaged per switch point (51 at paper scale).
    pub replications: usize,
    /// Iterations per decision step; must equal the state formula's 10.
    pub decision_interval: usize,
    /// Decision horizon T; `decision_interval × horizon` must equal 200.
    pub horizon: usize,
    /// Use the reward exactly as the terminal log-value instead of its
    /// negation. The negated form (default) rewards smaller final values,
    /// which is what the argmax extraction expects.
    pub literal_reward_sign: bool,
    /// Average the raw objective values across replications instead of
    /// their logarithms.
    pub linear_domain_average: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            gamma: 1.0,
            alpha: 1e-4,
            max_epochs: 100_000,
            replications: 11,
            decision_interval: DECISION_INTERVAL,
            horizon: DEFAULT_HORIZON,
            literal_reward_sign: false,
            linear_domain_average: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("gamma must lie in [0, 1]"));
        }
        if self.decision_interval != DECISION_INTERVAL {
            return Err(Error::config(format!(
                "decision_interval must equal {DECISION_INTERVAL}"
            )));
        }
        if self.decision_interval * self.horizon != 200 {
            return Err(Error::config(
                "decision_interval × horizon must equal 200, the largest swept switch iteration",
            ));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be >= 1"));
        }
        Ok(())
    }
}

/// One training trajectory: the averaged run at a fixed switch iteration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Trajectory {
    pub source_function: String,
    /// The swept switch iteration, one of 10, 20, …, 200.
    pub source_switch_iteration: usize,
    pub meta: BinMetadata,
    /// Mean of log best-so-far values at checkpoints 0, 10, …, switch.
    pub averaged_log_curve: Vec<f64>,
    /// Raw states at decision steps 1..=switch/10.
    pub raw_states: Vec<RawState>,
    /// Discretized transitions; all steps but the last stay with zero
    /// reward, the last switches into the terminal state with the
    /// averaged terminal reward.
    pub steps: Vec<Transition>,
}

/// Builds the T-trajectory bank for one function. The same R seeds are
/// reused at every switch point, so the averaged univariate curves are
/// prefix-consistent across trajectories.
pub fn build_trajectories(
    problem: &Problem,
    hses_config: &HsesConfig,
    config: &TrainingConfig,
    seed_base: u64,
) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let sweep_max = config.decision_interval * config.horizon;
    if (sweep_max * hses_config.population_size) as u64 >= hses_config.max_nfe {
        return Err(Error::config(format!(
            "sweeping the switch up to {sweep_max} iterations needs max_nfe > {}",
            sweep_max * hses_config.population_size
        )));
    }

    let replications = config.replications;
    let seeds: Vec<u64> = (0..replications)
        .map(|r| mix_seed(seed_base, r as u64))
        .collect();

    // One run per (switch point, replication), scheduled as a flat batch.
    let horizon = config.horizon;
    let runs: Vec<Result<RunTrace>> = batch_map(horizon * replications, |task| {
        let m = task / replications + 1;
        let r = task % replications;
        run_hses_from_iteration(
            problem,
            hses_config,
            seeds[r],
            m * config.decision_interval,
        )
    });
    let mut by_switch: Vec<Vec<RunTrace>> = Vec::with_capacity(horizon);
    let mut iter = runs.into_iter();
    for _ in 0..horizon {
        let group: Result<Vec<RunTrace>> = (&mut iter).take(replications).collect();
        by_switch.push(group?);
    }

    let meta = BinMetadata::for_dimension(problem.dimension());
    let mut bank = Vec::with_capacity(horizon);
    for (idx, traces) in by_switch.iter().enumerate() {
        let m = idx + 1;
        let switch_at = m * config.decision_interval;

        // Averaged checkpoint curve over replications.
        let averaged_log_curve: Vec<f64> = (0..=m)
            .map(|j| {
                let k = j * config.decision_interval;
                if config.linear_domain_average {
                    let mean =
                        traces.iter().map(|t| t.curve[k]).sum::<f64>() / traces.len() as f64;
                    mean.max(LOG_CLAMP).ln()
                } else {
                    traces
                        .iter()
                        .map(|t| t.curve[k].max(LOG_CLAMP).ln())
                        .sum::<f64>()
                        / traces.len() as f64
                }
            })
            .collect();
        let checkpoints: Vec<f64> = averaged_log_curve.iter().map(|l| l.exp()).collect();

        let raw_states: Vec<RawState> = (1..=m)
            .map(|t| compute_state_from_checkpoints(&checkpoints, t))
            .collect::<Result<_>>()?;
        let states: Vec<StateIndex> = raw_states.iter().map(|r| meta.discretize(r)).collect();

        let mean_final_log = if config.linear_domain_average {
            let mean = traces.iter().map(|t| t.best_objective).sum::<f64>()
                / traces.len() as f64;
            mean.max(LOG_CLAMP).ln()
        } else {
            traces
                .iter()
                .map(|t| t.best_objective.max(LOG_CLAMP).ln())
                .sum::<f64>()
                / traces.len() as f64
        };
        let terminal_reward = if config.literal_reward_sign {
            mean_final_log
        } else {
            -mean_final_log
        };

        let mut steps = Vec::with_capacity(m);
        for t in 0..m {
            if t + 1 < m {
                steps.push(Transition {
                    state: states[t],
                    action: Action::Stay,
                    reward: 0.0,
                    next: states[t + 1],
                });
            } else {
                steps.push(Transition {
                    state: states[t],
                    action: Action::Switch,
                    reward: terminal_reward,
                    next: StateIndex::Terminal,
                });
            }
        }

        bank.push(Trajectory {
            source_function: problem.id().to_string(),
            source_switch_iteration: switch_at,
            meta: meta.clone(),
            averaged_log_curve,
            raw_states,
            steps,
        });
    }
    Ok(bank)
}

/// Result of replaying one function's bank.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub table: QTable,
    /// Squared-Frobenius change of the table after each epoch.
    pub change_rates: Vec<f64>,
}

/// Trains a Q-table by sweeping the fixed bank `max_epochs` times,
/// trajectories in index order, steps in time order.
pub fn train_on_function(bank: &[Trajectory], config: &TrainingConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let meta = match bank.first() {
        Some(t) => t.meta.clone(),
        None => return Err(Error::contract("trajectory bank is empty")),
    };
    for t in bank {
        meta.ensure_compatible(&t.meta)?;
    }

    let mut table = QTable::new(meta);
    let mut change_rates = Vec::with_capacity(config.max_epochs);
    for _ in 0..config.max_epochs {
        let snapshot = table.clone();
        for trajectory in bank {
            for step in &trajectory.steps {
                q_update(&mut table, step, config.alpha, config.gamma)?;
            }
        }
        change_rates.push(q_change_rate(&snapshot, &table)?);
    }
    Ok(TrainOutcome {
        table,
        change_rates,
    })
}

/// Tallies, per state, which action had the strictly larger value in each
/// function's table; exact equality votes for neither side.
pub fn aggregate_meta_q(tables: &[QTable]) -> Result<MetaVotes> {
    let first = tables
        .first()
        .ok_or_else(|| Error::contract("need at least one table to aggregate"))?;
    let meta = first.meta().clone();
    for t in tables {
        meta.ensure_compatible(t.meta())?;
    }
    let mut votes = [[0u32; 2]; STATE_CELLS];
    for table in tables {
        for (s, row) in table.values().iter().enumerate() {
            if row[1] > row[0] {
                votes[s][1] += 1;
            } else if row[1] < row[0] {
                votes[s][0] += 1;
            }
        }
    }
    Ok(MetaVotes {
        meta,
        votes,
        functions: Vec::new(),
    })
}

/// Reduces meta-Q votes to the final policy: per-state vote argmax, equal
/// votes (including never-voted states) recorded as explicit ties.
pub fn extract_policy(meta: &MetaVotes, training: TrainingMeta) -> Policy {
    let mut preferences = [Preference::Tie; STATE_CELLS];
    for (s, [stay, switch]) in meta.votes.iter().enumerate() {
        preferences[s] = match switch.cmp(stay) {
            std::cmp::Ordering::Greater => Preference::Switch,
            std::cmp::Ordering::Less => Preference::Stay,
            std::cmp::Ordering::Equal => Preference::Tie,
        };
    }
    Policy::new(meta.meta.clone(), preferences, meta.votes, training)
}

/// Per-function artifacts produced by [`train_suite`].
#[derive(Debug, Clone)]
pub struct TrainedFunction {
    pub function: String,
    pub bank: Vec<Trajectory>,
    pub table: QTable,
    pub change_rates: Vec<f64>,
}

/// Full offline pipeline over a set of training functions: banks, tables,
/// vote aggregation, policy extraction. Functions must share a dimension
/// class (the policy's bin scaling is per class).
pub fn train_suite(
    problems: &[Problem],
    hses_config: &HsesConfig,
    config: &TrainingConfig,
    seed_base: u64,
) -> Result<(Policy, Vec<TrainedFunction>)> {
    if problems.is_empty() {
        return Err(Error::contract("need at least one training function"));
    }
    config.validate()?;
    let meta = BinMetadata::for_dimension(problems[0].dimension());
    for p in problems {
        meta.ensure_compatible(&BinMetadata::for_dimension(p.dimension()))?;
    }

    let trained: Vec<Result<TrainedFunction>> = batch_map(problems.len(), |i| {
        let problem = &problems[i];
        let bank = build_trajectories(
            problem,
            hses_config,
            config,
            mix_seed(seed_base, i as u64),
        )?;
        let outcome = train_on_function(&bank, config)?;
        Ok(TrainedFunction {
            function: problem.id().to_string(),
            bank,
            table: outcome.table,
            change_rates: outcome.change_rates,
        })
    });
    let trained: Vec<TrainedFunction> = trained.into_iter().collect::<Result<_>>()?;

    let tables: Vec<QTable> = trained.iter().map(|t| t.table.clone()).collect();
    let mut votes = aggregate_meta_q(&tables)?;
    votes.functions = trained.iter().map(|t| t.function.clone()).collect();

    let policy = extract_policy(
        &votes,
        TrainingMeta {
            gamma: config.gamma,
            alpha: config.alpha,
            max_epochs: config.max_epochs,
            replications: config.replications,
            functions: votes.functions.clone(),
        },
    );
    Ok((policy, trained))
}

const POLICY_SCHEMA: &str = "qhses-policy";
const BANK_SCHEMA: &str = "qhses-trajectory-bank";
const SCHEMA_VERSION: u32 = 1;

#[derive(serde::Serialize, serde::Deserialize)]
struct PolicyFile {
    schema: String,
    version: u32,
    #[serde(flatten)]
    policy: Policy,
}

/// Writes a policy as canonical JSON; identical policies produce identical
/// bytes, so repeated training runs can be diffed directly.
pub fn save_policy(policy: &Policy, path: &Path) -> Result<()> {
    let file = PolicyFile {
        schema: POLICY_SCHEMA.to_string(),
        version: SCHEMA_VERSION,
        policy: policy.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_policy(path: &Path) -> Result<Policy> {
    let text = fs::read_to_string(path)?;
    let file: PolicyFile = serde_json::from_str(&text)?;
    if file.schema != POLICY_SCHEMA {
        return Err(Error::Schema(format!(
            "expected schema {POLICY_SCHEMA:?}, found {:?}",
            file.schema
        )));
    }
    if file.version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported {POLICY_SCHEMA} version {}",
            file.version
        )));
    }
    Ok(file.policy)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct BankFile {
    schema: String,
    version: u32,
    trajectories: Vec<Trajectory>,
}

/// Serializes a trajectory bank (raw and binned states included) to JSON.
pub fn save_trajectory_bank(bank: &[Trajectory], path: &Path) -> Result<()> {
    let file = BankFile {
        schema: BANK_SCHEMA.to_string(),
        version: SCHEMA_VERSION,
        trajectories: bank.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_trajectory_bank(path: &Path) -> Result<Vec<Trajectory>> {
    let text = fs::read_to_string(path)?;
    let file: BankFile = serde_json::from_str(&text)?;
    if file.schema != BANK_SCHEMA || file.version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "expected {BANK_SCHEMA} v{SCHEMA_VERSION}, found {} v{}",
            file.schema, file.version
        )));
    }
    Ok(file.trajectories)
}
