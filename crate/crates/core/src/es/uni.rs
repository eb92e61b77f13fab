//! Univariate Gaussian sampling: an estimation-of-distribution step that
//! fits an independent per-coordinate normal model to the best half of the
//! population and resamples under elitist (μ+λ) truncation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{BestSolution, FixedIndexSet, Objective, Population, SearchOutcome};
use crate::error::{Error, Result};

/// Std floor relative to the per-coordinate bound width, so a fully
/// converged (degenerate) population keeps a valid sampling model.
const STD_FLOOR_REL: f64 = 1e-10;

/// Runs `iterations` univariate-sampling steps starting from `population`.
///
/// Per iteration: fit per-coordinate mean/std to the best half, sample
/// `N` candidates coordinate-wise (pinned coordinates take their fixed
/// values), clip to bounds, evaluate, and keep the best `N` of old ∪ new.
/// Consumes exactly `iterations × N` evaluations.
///
/// Random draws happen strictly per candidate, per free coordinate, in
/// iteration order, so runs that split the same iteration count into
/// chunks reproduce an unchunked run exactly.
pub fn uni_sampling<O: Objective>(
    population: Population,
    objective: &O,
    fixed: &FixedIndexSet,
    iterations: usize,
    rng: &mut impl Rng,
) -> Result<SearchOutcome> {
    let n = objective.dimension();
    let pop_size = population.size();
    if iterations == 0 {
        return Err(Error::contract("uni_sampling requires iterations >= 1"));
    }
    if pop_size < 4 {
        return Err(Error::contract("uni_sampling requires a population of >= 4"));
    }
    if fixed.iter().any(|(i, _)| i >= n) {
        return Err(Error::contract("fixed index out of range"));
    }

    let bounds = objective.bounds();
    let mask = fixed.mask(n);
    let half = pop_size / 2;

    let mut individuals = population.individuals().to_vec();
    let mut fitness = population.fitness().to_vec();
    let (best_x, best_f) = population.best();
    let mut best = BestSolution {
        x: best_x.clone(),
        value: best_f,
    };
    let mut curve = Vec::with_capacity(iterations);
    let mut curve_nfe = Vec::with_capacity(iterations);

    let mut order: Vec<usize> = (0..pop_size).collect();
    let mut means = vec![0.0_f64; n];
    let mut stds = vec![0.0_f64; n];

    for _ in 0..iterations {
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let selected = &order[..half];

        for i in 0..n {
            let mean = selected.iter().map(|&k| individuals[k][i]).sum::<f64>() / half as f64;
            let var = selected
                .iter()
                .map(|&k| {
                    let d = individuals[k][i] - mean;
                    d * d
                })
                .sum::<f64>()
                / half as f64;
            let (lo, hi) = bounds[i];
            means[i] = mean;
            stds[i] = var.sqrt().max(STD_FLOOR_REL * (hi - lo));
        }

        let mut new_individuals = Vec::with_capacity(pop_size);
        let mut new_fitness = Vec::with_capacity(pop_size);
        for _ in 0..pop_size {
            let candidate = DVector::from_fn(n, |i, _| match mask[i] {
                Some(v) => v,
                None => {
                    let (lo, hi) = bounds[i];
                    let normal = Normal::new(means[i], stds[i]).expect("finite model");
                    normal.sample(rng).clamp(lo, hi)
                }
            });
            let value = objective.value(candidate.as_slice());
            new_individuals.push(candidate);
            new_fitness.push(value);
        }

        // Elitist merge: best N of old ∪ new, old first on exact ties.
        let mut merged: Vec<usize> = (0..2 * pop_size).collect();
        merged.sort_by(|&a, &b| {
            let fa = if a < pop_size { fitness[a] } else { new_fitness[a - pop_size] };
            let fb = if b < pop_size { fitness[b] } else { new_fitness[b - pop_size] };
            fa.total_cmp(&fb)
        });
        let mut kept_x = Vec::with_capacity(pop_size);
        let mut kept_f = Vec::with_capacity(pop_size);
        for &idx in merged.iter().take(pop_size) {
            if idx < pop_size {
                kept_x.push(individuals[idx].clone());
                kept_f.push(fitness[idx]);
            } else {
                kept_x.push(new_individuals[idx - pop_size].clone());
                kept_f.push(new_fitness[idx - pop_size]);
            }
        }
        individuals = kept_x;
        fitness = kept_f;

        if fitness[0] < best.value {
            best = BestSolution {
                x: individuals[0].clone(),
                value: fitness[0],
            };
        }
        curve.push(best.value);
        curve_nfe.push(curve.len() as u64 * pop_size as u64);
    }

    let nfe = (iterations * pop_size) as u64;
    Ok(SearchOutcome {
        population: Population::from_parts(individuals, fitness),
        nfe,
        best,
        curve,
        curve_nfe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{BaseKind, Problem};
    use crate::es::test_support::CountingObjective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sphere(n: usize) -> Problem {
        Problem::plain(BaseKind::Sphere, n, 0.0).unwrap()
    }

    #[test]
    fn sphere_10d_reaches_1e2_error_in_most_runs() {
        let problem = sphere(10);
        let mut hits = 0;
        for seed in 0..20_u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pop = Population::uniform(200, &problem, &mut rng);
            let out =
                uni_sampling(pop, &problem, &FixedIndexSet::empty(), 100, &mut rng).unwrap();
            if out.best.value <= 1e-2 {
                hits += 1;
            }
        }
        assert!(hits >= 18, "only {hits}/20 runs reached 1e-2");
    }

    #[test]
    fn fully_pinned_population_samples_only_the_pinned_vector() {
        use std::cell::RefCell;

        struct Recording<'a> {
            inner: &'a Problem,
            seen: RefCell<Vec<Vec<f64>>>,
        }
        impl Objective for Recording<'_> {
            fn dimension(&self) -> usize {
                self.inner.dimension()
            }
            fn bounds(&self) -> &[(f64, f64)] {
                self.inner.bounds()
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.seen.borrow_mut().push(x.to_vec());
                crate::es::Objective::value(self.inner, x)
            }
        }

        let problem = sphere(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = Population::uniform(8, &problem, &mut rng);
        let before_best = pop.best().1;

        let recorder = Recording {
            inner: &problem,
            seen: RefCell::new(Vec::new()),
        };
        let pinned: Vec<(usize, f64)> = (0..4).map(|i| (i, 1.5)).collect();
        let fixed = FixedIndexSet::new(pinned).unwrap();
        let out = uni_sampling(pop, &recorder, &fixed, 1, &mut rng).unwrap();

        let seen = recorder.seen.borrow();
        assert_eq!(seen.len(), 8);
        assert!(seen.iter().all(|x| x == &vec![1.5; 4]));
        assert!(out.best.value <= before_best);
        assert_eq!(out.nfe, 8);
    }

    #[test]
    fn curve_is_nonincreasing() {
        let problem = sphere(6);
        for seed in [1_u64, 7, 42] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pop = Population::uniform(24, &problem, &mut rng);
            let out =
                uni_sampling(pop, &problem, &FixedIndexSet::empty(), 50, &mut rng).unwrap();
            assert!(out.curve.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn chunked_runs_match_a_single_run() {
        let problem = sphere(5);
        let mut rng_a = ChaCha8Rng::seed_from_u64(11);
        let mut rng_b = ChaCha8Rng::seed_from_u64(11);
        let pop_a = Population::uniform(12, &problem, &mut rng_a);
        let pop_b = Population::uniform(12, &problem, &mut rng_b);

        let single =
            uni_sampling(pop_a, &problem, &FixedIndexSet::empty(), 20, &mut rng_a).unwrap();

        let first =
            uni_sampling(pop_b, &problem, &FixedIndexSet::empty(), 10, &mut rng_b).unwrap();
        let second = uni_sampling(
            first.population,
            &problem,
            &FixedIndexSet::empty(),
            10,
            &mut rng_b,
        )
        .unwrap();

        let mut chunked_curve = first.curve.clone();
        chunked_curve.extend_from_slice(&second.curve);
        assert_eq!(single.curve, chunked_curve);
        assert_eq!(single.best.value, second.best.value);
    }

    #[test]
    fn nfe_matches_actual_evaluation_count_and_bounds_hold() {
        let problem = sphere(8);
        let counting = CountingObjective::new(&problem);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = Population::uniform(30, &counting, &mut rng);
        let baseline = counting.count();
        let out =
            uni_sampling(pop, &counting, &FixedIndexSet::empty(), 17, &mut rng).unwrap();
        assert_eq!(out.nfe, 17 * 30);
        assert_eq!(counting.count() - baseline, out.nfe);
    }

    #[test]
    fn degenerate_population_does_not_error() {
        let problem = sphere(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let identical = vec![DVector::from_element(4, 2.0); 6];
        let pop = Population::evaluated(identical, &problem);
        let out = uni_sampling(pop, &problem, &FixedIndexSet::empty(), 3, &mut rng).unwrap();
        assert!(out.best.value.is_finite());
    }

    #[test]
    fn zero_iterations_is_a_contract_violation() {
        let problem = sphere(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = Population::uniform(8, &problem, &mut rng);
        assert!(uni_sampling(pop, &problem, &FixedIndexSet::empty(), 0, &mut rng).is_err());
    }
}
