//! Experiment harness: batch runs, summary statistics, rank-sum
//! comparisons, and the fixed result-file formats.

mod compare;
mod io;
mod stats;

pub use compare::{compare_algorithms, ComparisonReport, FunctionResults, FunctionVerdict};
pub use io::{
    load_results_dir, read_convergence_csv, read_runs_csv, sanitize_id, write_convergence_csv,
    write_function_results, write_runs_csv, write_stats_csv,
};
pub use stats::{rank_sum_test, summarize, StatsRow, Verdict};

use crate::benchmarks::{ErrorValue, Problem};
use crate::error::Result;
use crate::hses::{run_hses, HsesConfig, RunTrace};
use crate::parallel::batch_map;
use crate::qhses::{run_qhses, QhsesConfig};
use crate::seed::mix_seed;

/// Runs `runs` independent fixed-switch replications; run `i` uses the
/// stream derived from `(seed_base, i)`, so batches are reproducible and
/// order-stable under any parallelism.
pub fn run_hses_batch(
    problem: &Problem,
    config: &HsesConfig,
    runs: usize,
    seed_base: u64,
) -> Result<Vec<RunTrace>> {
    batch_map(runs, |i| run_hses(problem, config, mix_seed(seed_base, i as u64)))
        .into_iter()
        .collect()
}

/// Policy-controlled counterpart of [`run_hses_batch`].
pub fn run_qhses_batch(
    problem: &Problem,
    config: &QhsesConfig,
    runs: usize,
    seed_base: u64,
) -> Result<Vec<RunTrace>> {
    batch_map(runs, |i| run_qhses(problem, config, mix_seed(seed_base, i as u64)))
        .into_iter()
        .collect()
}

/// Collects a batch into the comparison-ready per-function form.
pub fn results_from_traces(function: &str, traces: &[RunTrace]) -> FunctionResults {
    FunctionResults {
        function: function.to_string(),
        errors: traces.iter().map(|t| t.final_error).collect(),
        objectives: traces.iter().map(|t| t.best_objective).collect(),
    }
}

/// Error values of a batch, for summarizing.
pub fn errors_of(traces: &[RunTrace]) -> Vec<ErrorValue> {
    traces.iter().map(|t| t.final_error).collect()
}
