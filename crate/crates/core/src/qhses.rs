//! Policy-controlled hybrid runs: univariate sampling proceeds in
//! ten-iteration chunks, the learned policy is consulted after each chunk,
//! and the run hands over to CMA-ES on the first switch decision (or at
//! the horizon). Everything after the switch is identical to a
//! fixed-switch run, so the controller chooses *when*, never *how*.

use crate::benchmarks::Problem;
use crate::error::{Error, Result};
use crate::es::CmaParams;
use crate::hses::{run_pipeline, HsesConfig, PipelineShared, RunTrace, SwitchRule};
use crate::rl::{scale_factor, Policy, DECISION_INTERVAL, DEFAULT_HORIZON};

/// Configuration of a policy-controlled run; mirrors [`HsesConfig`] with
/// the fixed switch iteration replaced by a policy and a horizon.
#[derive(Debug, Clone)]
pub struct QhsesConfig {
    pub max_nfe: u64,
    pub population_size: usize,
    pub cma: CmaParams,
    pub detect_threshold: f64,
    pub final_phase_reserve: f64,
    /// Maximum number of policy consultations before the switch is forced.
    pub horizon: usize,
    pub policy: Policy,
}

impl QhsesConfig {
    pub fn new(policy: Policy, dimension: usize) -> Self {
        Self::from_hses(&HsesConfig::for_dimension(dimension), policy)
    }

    /// Shares every numeric knob with an existing fixed-switch config, so
    /// learned and fixed runs are directly comparable.
    pub fn from_hses(config: &HsesConfig, policy: Policy) -> Self {
        QhsesConfig {
            max_nfe: config.max_nfe,
            population_size: config.population_size,
            cma: config.cma.clone(),
            detect_threshold: config.detect_threshold,
            final_phase_reserve: config.final_phase_reserve,
            horizon: DEFAULT_HORIZON,
            policy,
        }
    }

    pub fn validate(&self, problem_dimension: usize) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::config("population_size must be >= 4"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        let worst_case = (self.horizon * DECISION_INTERVAL * self.population_size) as u64;
        if worst_case >= self.max_nfe {
            return Err(Error::config(format!(
                "horizon × {DECISION_INTERVAL} × population_size = {worst_case} must stay below max_nfe = {}",
                self.max_nfe
            )));
        }
        if !(0.0..=0.5).contains(&self.final_phase_reserve) {
            return Err(Error::config("final_phase_reserve must lie in [0, 0.5]"));
        }
        let expected = scale_factor(problem_dimension);
        if self.policy.meta().dim_scale != expected {
            return Err(Error::config(format!(
                "policy was trained for dimension scale {}, problem dimension {} needs {}",
                self.policy.meta().dim_scale,
                problem_dimension,
                expected
            )));
        }
        Ok(())
    }
}

/// Runs the hybrid pipeline with the switch decided online by the policy.
pub fn run_qhses(problem: &Problem, config: &QhsesConfig, seed: u64) -> Result<RunTrace> {
    config.validate(problem.dimension())?;
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
        SwitchRule::Learned {
            policy: &config.policy,
            horizon: config.horizon,
        },
    )
}
