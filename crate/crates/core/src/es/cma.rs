//! CMA-ES (Covariance Matrix Adaptation Evolution Strategy).
//!
//! Standard (μ/μ_w, λ) strategy with rank-one and rank-μ covariance updates
//! and cumulative step-size adaptation, following Hansen & Ostermeier (2001)
//! and Hansen's tutorial parameterization. Candidates are clipped to the box
//! before evaluation. Numerical degeneracy (non-positive or badly
//! conditioned covariance) triggers an in-place restart with doubled
//! population instead of a failure.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{BestSolution, Objective, Population, SearchOutcome};
use crate::error::{Error, Result};

/// CMA-ES strategy parameters (the θ of the hybrid pipeline).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CmaParams {
    /// Offspring per generation; defaults to 4 + ⌊3 ln n⌋.
    pub population_size: Option<usize>,
    /// Stop when the best-so-far value improves by less than
    /// `stagnation_rel_tol` (relative) over this many generations.
    pub stagnation_window: usize,
    pub stagnation_rel_tol: f64,
    /// Covariance condition number that triggers a restart.
    pub max_condition: f64,
    /// Lower bound on the initial step size derived from the population.
    pub sigma_floor: f64,
}

impl Default for CmaParams {
    fn default() -> Self {
        CmaParams {
            population_size: None,
            stagnation_window: 50,
            stagnation_rel_tol: 1e-12,
            max_condition: 1e14,
            sigma_floor: 1e-8,
        }
    }
}

pub fn default_population_size(dimension: usize) -> usize {
    4 + (3.0 * (dimension as f64).ln()).floor() as usize
}

struct StrategyConstants {
    mu: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
}

fn strategy_constants(n: usize, lambda: usize) -> StrategyConstants {
    let nf = n as f64;
    let mu = lambda / 2;
    let raw: Vec<f64> = (0..mu)
        .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
        .collect();
    let sum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
    let c_1 = 2.0 / ((nf + 1.3) * (nf + 1.3) + mu_eff);
    let c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0) * (nf + 2.0) + mu_eff))
        .min(1.0 - c_1);

    StrategyConstants {
        mu,
        weights,
        mu_eff,
        c_sigma,
        d_sigma,
        c_c,
        c_1,
        c_mu,
    }
}

/// The adaptation state, steppable one generation at a time.
pub struct CmaEs {
    n: usize,
    bounds: Vec<(f64, f64)>,
    params: CmaParams,
    lambda: usize,
    consts: StrategyConstants,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    sigma0: f64,
    cov: DMatrix<f64>,
    p_c: DVector<f64>,
    p_sigma: DVector<f64>,
    gens_since_restart: i32,
    generations: u64,
    restarts: u32,
    incumbent: BestSolution,
    last_generation: Option<(Vec<DVector<f64>>, Vec<f64>)>,
}

impl CmaEs {
    /// Initializes from a population: the mean starts at its best individual
    /// and σ₀ at the mean per-coordinate standard deviation (floored).
    pub fn new(init: &Population, bounds: Vec<(f64, f64)>, params: &CmaParams) -> Result<Self> {
        if init.size() == 0 {
            return Err(Error::contract("CMA-ES requires a nonempty initial population"));
        }
        let n = bounds.len();
        let lambda = params.population_size.unwrap_or_else(|| default_population_size(n));
        if lambda < 4 {
            return Err(Error::config("CMA-ES population size must be >= 4"));
        }
        let nf = n as f64;
        let stds = init.coordinate_stds();
        let sigma0 = (stds.iter().sum::<f64>() / nf).max(params.sigma_floor);
        let (best_x, best_f) = init.best();

        Ok(CmaEs {
            n,
            bounds,
            params: params.clone(),
            lambda,
            consts: strategy_constants(n, lambda),
            chi_n: nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf)),
            mean: best_x.clone(),
            sigma: sigma0,
            sigma0,
            cov: DMatrix::identity(n, n),
            p_c: DVector::zeros(n),
            p_sigma: DVector::zeros(n),
            gens_since_restart: 0,
            generations: 0,
            restarts: 0,
            incumbent: BestSolution {
                x: best_x.clone(),
                value: best_f,
            },
            last_generation: None,
        })
    }

    pub fn population_size(&self) -> usize {
        self.lambda
    }

    pub fn best(&self) -> &BestSolution {
        &self.incumbent
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn generations(&self) -> u64 {
        self.generations
    }

    pub fn restarts(&self) -> u32 {
        self.restarts
    }

    /// Doubles the population and resets the distribution around the
    /// current mean; invoked on covariance degeneracy.
    fn restart(&mut self) {
        self.lambda *= 2;
        self.consts = strategy_constants(self.n, self.lambda);
        self.cov = DMatrix::identity(self.n, self.n);
        self.p_c = DVector::zeros(self.n);
        self.p_sigma = DVector::zeros(self.n);
        self.sigma = self.sigma0;
        self.gens_since_restart = 0;
        self.restarts += 1;
    }

    /// Runs one generation; returns the evaluations consumed.
    pub fn step<O: Objective>(&mut self, objective: &O, rng: &mut impl Rng) -> u64 {
        // Eigendecompose C = B D² Bᵀ; restart on degeneracy.
        let (eigvecs, d) = loop {
            let eig = self.cov.clone().symmetric_eigen();
            let min = eig.eigenvalues.min();
            let max = eig.eigenvalues.max();
            if !(min.is_finite() && max.is_finite()) || min <= 0.0
                || max / min > self.params.max_condition
            {
                self.restart();
                continue;
            }
            break (eig.eigenvectors, eig.eigenvalues.map(f64::sqrt));
        };

        let lambda = self.lambda;
        let cst = &self.consts;

        // Sample, clip, evaluate.
        let mut xs: Vec<DVector<f64>> = Vec::with_capacity(lambda);
        let mut fs: Vec<f64> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = &eigvecs * z.component_mul(&d);
            let mut x = &self.mean + self.sigma * y;
            for i in 0..self.n {
                let (lo, hi) = self.bounds[i];
                x[i] = x[i].clamp(lo, hi);
            }
            fs.push(objective.value(x.as_slice()));
            xs.push(x);
        }

        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));

        if fs[order[0]] < self.incumbent.value {
            self.incumbent = BestSolution {
                x: xs[order[0]].clone(),
                value: fs[order[0]],
            };
        }

        // Weighted recombination over the top μ (clipped coordinates).
        let old_mean = self.mean.clone();
        let mut new_mean = DVector::zeros(self.n);
        for (w, &idx) in cst.weights.iter().zip(order.iter().take(cst.mu)) {
            new_mean += *w * &xs[idx];
        }
        let y_w = (&new_mean - &old_mean) / self.sigma;

        // C^{-1/2} y_w = B D⁻¹ Bᵀ y_w.
        let d_inv = d.map(|v| 1.0 / v);
        let c_inv_sqrt_y = &eigvecs * (eigvecs.transpose() * &y_w).component_mul(&d_inv);

        self.p_sigma = (1.0 - cst.c_sigma) * &self.p_sigma
            + (cst.c_sigma * (2.0 - cst.c_sigma) * cst.mu_eff).sqrt() * c_inv_sqrt_y;

        let unbias = 1.0 - (1.0 - cst.c_sigma).powi(2 * (self.gens_since_restart + 1));
        let p_sigma_norm = self.p_sigma.norm();
        let h_sigma = if p_sigma_norm / unbias.sqrt()
            < (1.4 + 2.0 / (self.n as f64 + 1.0)) * self.chi_n
        {
            1.0
        } else {
            0.0
        };

        self.p_c = (1.0 - cst.c_c) * &self.p_c
            + h_sigma * (cst.c_c * (2.0 - cst.c_c) * cst.mu_eff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::zeros(self.n, self.n);
        for (w, &idx) in cst.weights.iter().zip(order.iter().take(cst.mu)) {
            let y_i = (&xs[idx] - &old_mean) / self.sigma;
            rank_mu += *w * &y_i * y_i.transpose();
        }

        let delta_h = (1.0 - h_sigma) * cst.c_c * (2.0 - cst.c_c);
        let base = 1.0 - cst.c_1 - cst.c_mu + cst.c_1 * delta_h;
        self.cov = base * &self.cov
            + cst.c_1 * &self.p_c * self.p_c.transpose()
            + cst.c_mu * rank_mu;
        self.cov = (&self.cov + self.cov.transpose()) * 0.5;

        self.sigma *= ((cst.c_sigma / cst.d_sigma) * (p_sigma_norm / self.chi_n - 1.0)).exp();
        self.sigma = self.sigma.clamp(1e-300, 1e6);

        self.mean = new_mean;
        if !self.mean.iter().all(|v| v.is_finite()) || !self.sigma.is_finite() {
            self.mean = self.incumbent.x.clone();
            self.restart();
        }

        self.generations += 1;
        self.gens_since_restart += 1;
        self.last_generation = Some((xs, fs));
        lambda as u64
    }

    fn take_last_generation(&mut self) -> Option<(Vec<DVector<f64>>, Vec<f64>)> {
        self.last_generation.take()
    }
}

/// Runs CMA-ES from `init` until the evaluation budget is exhausted or the
/// best-so-far value stagnates. If not even one generation fits in the
/// budget, the outcome reports the initial best with zero evaluations.
pub fn cma_es<O: Objective>(
    init: Population,
    objective: &O,
    params: &CmaParams,
    budget: u64,
    rng: &mut impl Rng,
) -> Result<SearchOutcome> {
    let mut es = CmaEs::new(&init, objective.bounds().to_vec(), params)?;
    let mut nfe = 0_u64;
    let mut curve: Vec<f64> = Vec::new();
    let mut curve_nfe: Vec<u64> = Vec::new();

    while nfe + es.population_size() as u64 <= budget {
        nfe += es.step(objective, rng);
        let best_now = es.best().value;
        curve.push(best_now);
        curve_nfe.push(nfe);

        let w = params.stagnation_window;
        if curve.len() > w {
            let prev = curve[curve.len() - 1 - w];
            let improvement = prev - best_now;
            if improvement < params.stagnation_rel_tol * prev.abs().max(1e-30) {
                break;
            }
        }
    }

    let best = es.best().clone();
    let population = match es.take_last_generation() {
        Some((xs, fs)) => Population::from_parts(xs, fs),
        None => init,
    };
    Ok(SearchOutcome {
        population,
        nfe,
        best,
        curve,
        curve_nfe,
    })
}
