//! Search heuristics: univariate Gaussian sampling, CMA-ES, and the
//! converged-variable detector that pins coordinates for the final phase.

mod cma;
mod detect;
mod uni;

pub use cma::{cma_es, CmaEs, CmaParams};
pub use detect::detect;
pub use uni::uni_sampling;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

/// A minimization objective over a box-bounded domain.
///
/// Implementations must be deterministic; evaluation accounting is the
/// caller's job (searches report their own evaluation counts).
pub trait Objective {
    fn dimension(&self) -> usize;
    fn bounds(&self) -> &[(f64, f64)];
    fn value(&self, x: &[f64]) -> f64;
}

/// A set of evaluated candidate solutions.
#[derive(Debug, Clone)]
pub struct Population {
    individuals: Vec<DVector<f64>>,
    fitness: Vec<f64>,
}

impl Population {
    /// Evaluates the given individuals against the objective.
    pub fn evaluated<O: Objective>(individuals: Vec<DVector<f64>>, objective: &O) -> Self {
        let fitness = individuals
            .iter()
            .map(|x| objective.value(x.as_slice()))
            .collect();
        Population {
            individuals,
            fitness,
        }
    }

    /// Samples `size` individuals uniformly inside the bounds and evaluates.
    pub fn uniform<O: Objective>(size: usize, objective: &O, rng: &mut impl Rng) -> Self {
        let n = objective.dimension();
        let bounds = objective.bounds();
        let individuals = (0..size)
            .map(|_| {
                DVector::from_fn(n, |i, _| {
                    let (lo, hi) = bounds[i];
                    rng.random_range(lo..hi)
                })
            })
            .collect();
        Self::evaluated(individuals, objective)
    }

    pub fn size(&self) -> usize {
        self.individuals.len()
    }

    pub fn individuals(&self) -> &[DVector<f64>] {
        &self.individuals
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    /// Index of the lowest-fitness individual (first on ties).
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.fitness.len() {
            if self.fitness[i] < self.fitness[best] {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> (&DVector<f64>, f64) {
        let i = self.best_index();
        (&self.individuals[i], self.fitness[i])
    }

    /// Per-coordinate standard deviation across the population
    /// (population convention, divisor = size).
    pub fn coordinate_stds(&self) -> Vec<f64> {
        let n = self.individuals[0].len();
        let count = self.individuals.len() as f64;
        (0..n)
            .map(|i| {
                let mean = self.individuals.iter().map(|x| x[i]).sum::<f64>() / count;
                let var = self
                    .individuals
                    .iter()
                    .map(|x| (x[i] - mean) * (x[i] - mean))
                    .sum::<f64>()
                    / count;
                var.sqrt()
            })
            .collect()
    }

    pub(crate) fn from_parts(individuals: Vec<DVector<f64>>, fitness: Vec<f64>) -> Self {
        debug_assert_eq!(individuals.len(), fitness.len());
        Population {
            individuals,
            fitness,
        }
    }
}

/// Coordinates pinned to fixed values during univariate sampling.
#[derive(Debug, Clone, Default)]
pub struct FixedIndexSet {
    entries: Vec<(usize, f64)>,
}

impl FixedIndexSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from (index, value) pairs; indices must be distinct.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|(i, _)| *i);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::contract("fixed indices must be distinct"));
        }
        Ok(FixedIndexSet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Dense per-coordinate mask: `Some(value)` where pinned.
    pub fn mask(&self, dimension: usize) -> Vec<Option<f64>> {
        let mut mask = vec![None; dimension];
        for (i, v) in &self.entries {
            mask[*i] = Some(*v);
        }
        mask
    }
}

/// Best solution found by a search.
#[derive(Debug, Clone)]
pub struct BestSolution {
    pub x: DVector<f64>,
    pub value: f64,
}

/// Result of one search phase.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Population at termination.
    pub population: Population,
    /// Function evaluations consumed by this search.
    pub nfe: u64,
    /// Best solution seen, including the incoming population's best.
    pub best: BestSolution,
    /// Best-so-far objective after each iteration (or generation).
    pub curve: Vec<f64>,
    /// Cumulative evaluations at each curve entry (generation sizes can
    /// change mid-search after a CMA-ES restart).
    pub curve_nfe: Vec<u64>,
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::Objective;
    use std::sync::atomic::{AtomicU64, Ordering};

    /// Wraps an objective, counting evaluations and checking bound
    /// feasibility of every evaluated point.
    pub struct CountingObjective<'a, O> {
        inner: &'a O,
        count: AtomicU64,
    }

    impl<'a, O: Objective> CountingObjective<'a, O> {
        pub fn new(inner: &'a O) -> Self {
            CountingObjective {
                inner,
                count: AtomicU64::new(0),
            }
        }

        pub fn count(&self) -> u64 {
            self.count.load(Ordering::Relaxed)
        }
    }

    impl<O: Objective> Objective for CountingObjective<'_, O> {
        fn dimension(&self) -> usize {
            self.inner.dimension()
        }

        fn bounds(&self) -> &[(f64, f64)] {
            self.inner.bounds()
        }

        fn value(&self, x: &[f64]) -> f64 {
            self.count.fetch_add(1, Ordering::Relaxed);
            for (v, (lo, hi)) in x.iter().zip(self.inner.bounds()) {
                assert!(
                    v >= lo && v <= hi,
                    "evaluated point leaves the box: {v} outside [{lo}, {hi}]"
                );
            }
            self.inner.value(x)
        }
    }
}
