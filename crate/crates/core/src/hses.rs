//! The three-phase hybrid pipeline: univariate sampling, CMA-ES seeded from
//! its final population, then a last univariate phase with the converged
//! coordinates pinned by `detect`. The switch from phase one to CMA-ES
//! happens either at a fixed iteration or under control of a learned
//! policy (see the `qhses` module).

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::{ErrorValue, Problem};
use crate::error::{Error, Result};
use crate::es::{cma_es, detect, uni_sampling, BestSolution, CmaParams, FixedIndexSet, Population};
use crate::rl::{
    compute_state, select_action, Action, Policy, StateIndex, DECISION_INTERVAL, DEFAULT_HORIZON,
};
use crate::seed::mix_seed;

/// Stream tag for the policy's tie-breaking draws. Action selection uses a
/// random stream separate from the search stream, so consulting the policy
/// never perturbs the sampled candidates: a learned run replays the
/// fixed-switch run at its realized switch iteration exactly.
const ACTION_STREAM: u64 = 0x51_ac71 ^ 0xd15e;

/// Configuration of a fixed-switch hybrid run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct HsesConfig {
    /// Univariate iterations before the CMA-ES handoff (I₁).
    pub switch_iteration: usize,
    /// Total evaluation budget for the run.
    pub max_nfe: u64,
    /// Univariate-sampling population size (N).
    pub population_size: usize,
    pub cma: CmaParams,
    /// Relative-std cutoff below which `detect` pins a coordinate.
    pub detect_threshold: f64,
    /// Fraction of `max_nfe` held back for the final univariate phase.
    pub final_phase_reserve: f64,
}

impl HsesConfig {
    /// Defaults: switch at 100, budget 10⁴·n, population 200.
    pub fn for_dimension(dimension: usize) -> Self {
        HsesConfig {
            switch_iteration: 100,
            max_nfe: 10_000 * dimension as u64,
            population_size: 200,
            cma: CmaParams::default(),
            detect_threshold: 1e-6,
            final_phase_reserve: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.switch_iteration == 0 {
            return Err(Error::config("switch_iteration must be >= 1"));
        }
        if self.population_size < 4 {
            return Err(Error::config("population_size must be >= 4"));
        }
        if (self.switch_iteration * self.population_size) as u64 >= self.max_nfe {
            return Err(Error::config(format!(
                "switch_iteration × population_size = {} must stay below max_nfe = {}",
                self.switch_iteration * self.population_size,
                self.max_nfe
            )));
        }
        if !(0.0..=0.5).contains(&self.final_phase_reserve) {
            return Err(Error::config("final_phase_reserve must lie in [0, 0.5]"));
        }
        Ok(())
    }
}

/// Pipeline phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Uni1,
    Cma,
    Uni2,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Uni1 => "uni1",
            Phase::Cma => "cma",
            Phase::Uni2 => "uni2",
        }
    }
}

/// Full record of one hybrid run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunTrace {
    pub problem_id: String,
    pub seed: u64,
    /// Best-so-far objective: entry 0 is the evaluated initial population,
    /// then one entry per univariate iteration / CMA generation.
    pub curve: Vec<f64>,
    /// Cumulative evaluations at each curve entry.
    pub nfe_curve: Vec<u64>,
    /// Phase of each curve entry.
    pub phase_curve: Vec<Phase>,
    /// Curve indices where phases ended: [last uni1 entry, last cma entry].
    pub phase_boundaries: Vec<usize>,
    /// Realized switch iteration (configured I₁ for fixed-switch runs).
    pub switch_iteration: usize,
    /// Progress states observed at each decision step (learned runs only).
    pub visited_states: Vec<StateIndex>,
    /// Evaluations per phase: [init, uni1, cma, uni2].
    pub phase_nfe: [u64; 4],
    pub total_nfe: u64,
    pub best_objective: f64,
    pub best_solution: Vec<f64>,
    pub final_error: ErrorValue,
}

impl RunTrace {
    /// Writes the per-iteration CSV: metadata comment lines, then
    /// `iteration,nfe,best_objective,phase` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# qhses-trace,v1")?;
        writeln!(w, "# problem,{}", self.problem_id)?;
        writeln!(w, "# seed,{}", self.seed)?;
        writeln!(w, "# switch_iteration,{}", self.switch_iteration)?;
        let states: Vec<String> = self
            .visited_states
            .iter()
            .map(|s| match s.flat() {
                Some(f) => f.to_string(),
                None => "terminal".to_string(),
            })
            .collect();
        writeln!(w, "# visited_states,{}", states.join("|"))?;
        writeln!(w, "iteration,nfe,best_objective,phase")?;
        for (i, ((value, nfe), phase)) in self
            .curve
            .iter()
            .zip(&self.nfe_curve)
            .zip(&self.phase_curve)
            .enumerate()
        {
            writeln!(w, "{i},{nfe},{value},{}", phase.name())?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// How phase one decides to hand over to CMA-ES.
pub(crate) enum SwitchRule<'a> {
    /// Switch after exactly this many univariate iterations.
    Fixed(usize),
    /// Consult a policy every `DECISION_INTERVAL` iterations, forcing the
    /// switch after `horizon` consultations.
    Learned { policy: &'a Policy, horizon: usize },
}

pub(crate) struct PipelineShared<'a> {
    pub max_nfe: u64,
    pub population_size: usize,
    pub cma: &'a CmaParams,
    pub detect_threshold: f64,
    pub final_phase_reserve: f64,
}

/// Runs the full three-phase pipeline under the given switch rule.
pub(crate) fn run_pipeline(
    problem: &Problem,
    shared: &PipelineShared<'_>,
    seed: u64,
    rule: SwitchRule<'_>,
) -> Result<RunTrace> {
    let pop_size = shared.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut action_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, ACTION_STREAM));

    let init_pop = Population::uniform(pop_size, problem, &mut rng);
    let (init_x, init_f) = init_pop.best();
    let mut best = BestSolution {
        x: init_x.clone(),
        value: init_f,
    };
    let mut nfe = pop_size as u64;
    let mut curve = vec![init_f];
    let mut nfe_curve = vec![nfe];
    let mut phase_curve = vec![Phase::Init];
    let mut phase_nfe = [pop_size as u64, 0, 0, 0];
    let mut visited: Vec<StateIndex> = Vec::new();

    // Phase 1: univariate sampling until the switch decision.
    let mut pop = init_pop;
    let switch_iteration;
    match rule {
        SwitchRule::Fixed(iterations) => {
            let out = uni_sampling(pop, problem, &FixedIndexSet::empty(), iterations, &mut rng)?;
            absorb(
                &out,
                Phase::Uni1,
                &mut curve,
                &mut nfe_curve,
                &mut phase_curve,
                &mut best,
                nfe,
            );
            nfe += out.nfe;
            phase_nfe[1] = out.nfe;
            pop = out.population;
            switch_iteration = iterations;
        }
        SwitchRule::Learned { policy, horizon } => {
            let mut realized = horizon * DECISION_INTERVAL;
            for step in 1..=horizon {
                let out = uni_sampling(
                    pop,
                    problem,
                    &FixedIndexSet::empty(),
                    DECISION_INTERVAL,
                    &mut rng,
                )?;
                absorb(
                    &out,
                    Phase::Uni1,
                    &mut curve,
                    &mut nfe_curve,
                    &mut phase_curve,
                    &mut best,
                    nfe,
                );
                nfe += out.nfe;
                phase_nfe[1] += out.nfe;
                pop = out.population;

                let raw = compute_state(&curve, step)?;
                let state = policy.meta().discretize(&raw);
                visited.push(state);
                if select_action(policy, &state, &mut action_rng)? == Action::Switch {
                    realized = step * DECISION_INTERVAL;
                    break;
                }
            }
            switch_iteration = realized;
        }
    }
    let uni1_end = curve.len() - 1;

    // Phase 2: CMA-ES on what remains, minus the reserve for phase 3.
    let reserve = (shared.final_phase_reserve * shared.max_nfe as f64).floor() as u64;
    let cma_budget = shared.max_nfe.saturating_sub(nfe).saturating_sub(reserve);
    let out = cma_es(pop, problem, shared.cma, cma_budget, &mut rng)?;
    absorb(
        &out,
        Phase::Cma,
        &mut curve,
        &mut nfe_curve,
        &mut phase_curve,
        &mut best,
        nfe,
    );
    nfe += out.nfe;
    phase_nfe[2] = out.nfe;
    let pop = out.population;
    let cma_end = curve.len() - 1;

    // Phase 3: pin converged coordinates, spend the remainder.
    let fixed = detect(&pop, problem.bounds(), shared.detect_threshold);
    let remaining = shared.max_nfe.saturating_sub(nfe);
    let final_iterations = (remaining / pop.size() as u64) as usize;
    if final_iterations >= 1 && pop.size() >= 4 {
        let out = uni_sampling(pop, problem, &fixed, final_iterations, &mut rng)?;
        absorb(
            &out,
            Phase::Uni2,
            &mut curve,
            &mut nfe_curve,
            &mut phase_curve,
            &mut best,
            nfe,
        );
        nfe += out.nfe;
        phase_nfe[3] = out.nfe;
    }

    debug_assert!(nfe <= shared.max_nfe);
    Ok(RunTrace {
        problem_id: problem.id().to_string(),
        seed,
        curve,
        nfe_curve,
        phase_curve,
        phase_boundaries: vec![uni1_end, cma_end],
        switch_iteration,
        visited_states: visited,
        phase_nfe,
        total_nfe: nfe,
        best_objective: best.value,
        best_solution: best.x.as_slice().to_vec(),
        final_error: problem.error_of(best.value),
    })
}

fn absorb(
    out: &crate::es::SearchOutcome,
    phase: Phase,
    curve: &mut Vec<f64>,
    nfe_curve: &mut Vec<u64>,
    phase_curve: &mut Vec<Phase>,
    best: &mut BestSolution,
    nfe_before: u64,
) {
    for (value, entry_nfe) in out.curve.iter().zip(&out.curve_nfe) {
        // The incoming population's best makes each phase curve start at or
        // below the global best-so-far, so taking the running minimum keeps
        // the stitched curve nonincreasing.
        let merged = value.min(*curve.last().unwrap());
        curve.push(merged);
        nfe_curve.push(nfe_before + entry_nfe);
        phase_curve.push(phase);
    }
    if out.best.value < best.value {
        *best = out.best.clone();
    }
}

/// Runs the hybrid pipeline with the configured fixed switch iteration.
pub fn run_hses(problem: &Problem, config: &HsesConfig, seed: u64) -> Result<RunTrace> {
    config.validate()?;
    run_pipeline(
        problem,
        &PipelineShared {
            max_nfe: config.max_nfe,
            population_size: config.population_size,
            cma: &config.cma,
            detect_threshold: config.detect_threshold,
            final_phase_reserve: config.final_phase_reserve,
        },
        seed,
        SwitchRule::Fixed(config.switch_iteration),
    )
}

/// Runs the pipeline with the switch forced to `switch_at`, which must be a
/// decision-aligned iteration (a multiple of 10 in 10..=200). This is the
/// sweep entry point the trajectory builder uses.
pub fn run_hses_from_iteration(
    problem: &Problem,
    config: &HsesConfig,
    seed: u64,
    switch_at: usize,
) -> Result<RunTrace> {
    if switch_at == 0
        || switch_at % DECISION_INTERVAL != 0
        || switch_at > DEFAULT_HORIZON * DECISION_INTERVAL
    {
        return Err(Error::contract(format!(
            "switch_at must be a multiple of {DECISION_INTERVAL} in {DECISION_INTERVAL}..={}, got {switch_at}",
            DEFAULT_HORIZON * DECISION_INTERVAL
        )));
    }
    let mut cfg = config.clone();
    cfg.switch_iteration = switch_at;
    run_hses(problem, &cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_problem, BaseKind, ProblemSpec};

    fn sphere_10d() -> crate::benchmarks::Problem {
        make_problem(&ProblemSpec::new(BaseKind::Sphere, 10, 42)).unwrap()
    }

    fn small_config() -> HsesConfig {
        HsesConfig {
            switch_iteration: 20,
            max_nfe: 20_000,
            population_size: 50,
            ..HsesConfig::for_dimension(10)
        }
    }

    #[test]
    fn budget_is_respected_and_curve_monotone() {
        let problem = sphere_10d();
        let config = small_config();
        for seed in 0..5_u64 {
            let trace = run_hses(&problem, &config, seed).unwrap();
            assert!(trace.total_nfe <= config.max_nfe);
            assert_eq!(*trace.nfe_curve.last().unwrap(), trace.total_nfe);
            assert!(trace.curve.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(trace.curve.len(), trace.nfe_curve.len());
            assert_eq!(trace.curve.len(), trace.phase_curve.len());
        }
    }

    #[test]
    fn first_phase_boundary_is_the_switch_iteration() {
        let problem = sphere_10d();
        let config = small_config();
        let trace = run_hses(&problem, &config, 1).unwrap();
        assert_eq!(trace.phase_boundaries[0], config.switch_iteration);
        assert_eq!(trace.switch_iteration, config.switch_iteration);
        assert_eq!(trace.phase_curve[0], Phase::Init);
        assert_eq!(trace.phase_curve[1], Phase::Uni1);
        assert_eq!(
            trace.phase_curve[config.switch_iteration],
            Phase::Uni1
        );
        assert_eq!(
            trace.phase_curve[config.switch_iteration + 1],
            Phase::Cma
        );
    }

    #[test]
    fn switch_at_ten_consumes_exactly_ten_populations() {
        let problem = sphere_10d();
        let config = small_config();
        let trace = run_hses_from_iteration(&problem, &config, 3, 10).unwrap();
        assert_eq!(trace.phase_nfe[1], 10 * config.population_size as u64);
        assert_eq!(trace.phase_nfe[0], config.population_size as u64);
    }

    #[test]
    fn misaligned_switch_iterations_are_rejected() {
        let problem = sphere_10d();
        let config = small_config();
        assert!(run_hses_from_iteration(&problem, &config, 1, 15).is_err());
        assert!(run_hses_from_iteration(&problem, &config, 1, 0).is_err());
        assert!(run_hses_from_iteration(&problem, &config, 1, 210).is_err());
        assert!(run_hses_from_iteration(&problem, &config, 1, 40).is_ok());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = small_config();
        config.switch_iteration = 500; // 500 × 50 > 20_000
        assert!(run_hses(&sphere_10d(), &config, 1).is_err());

        let mut config = small_config();
        config.final_phase_reserve = 0.9;
        assert!(config.validate().is_err());
    }

    #[test]
    fn common_random_numbers_share_the_univariate_prefix() {
        let problem = sphere_10d();
        let config = small_config();
        let seed = 9;
        let traces: Vec<RunTrace> = [10, 20, 40]
            .iter()
            .map(|&sw| run_hses_from_iteration(&problem, &config, seed, sw).unwrap())
            .collect();
        // Up to the earliest switch the univariate curves must be identical.
        for t in &traces[1..] {
            assert_eq!(&t.curve[..=10], &traces[0].curve[..=10]);
        }
        assert_eq!(&traces[2].curve[..=20], &traces[1].curve[..=20]);
    }

    #[test]
    fn sphere_is_solved_from_switch_100() {
        let problem = sphere_10d();
        let config = HsesConfig::for_dimension(10);
        let mut solved = 0;
        for seed in 0..5_u64 {
            let trace = run_hses(&problem, &config, seed).unwrap();
            if trace.final_error.value() == 0.0 {
                solved += 1;
            }
        }
        assert!(solved >= 4, "solved {solved}/5");
    }

    #[test]
    fn trace_csv_has_expected_shape() {
        let problem = sphere_10d();
        let trace = run_hses(&problem, &small_config(), 2).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# qhses-trace,v1");
        assert!(text.contains("iteration,nfe,best_objective,phase"));
        let data_rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
        assert_eq!(data_rows, trace.curve.len());
    }
}
