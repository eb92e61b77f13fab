//! A hybrid evolution-strategy optimizer with a learned phase-switch
//! controller.
//!
//! The toolkit has three layers:
//!
//! * **Search** — univariate Gaussian sampling, CMA-ES, and the three-phase
//!   hybrid pipeline (`hses`) that chains them with a converged-variable
//!   detector in between.
//! * **Control** — a tabular Q-learning agent over a 36-cell progress-state
//!   grid that decides, every ten sampling iterations, whether to hand over
//!   to CMA-ES (`rl`, `training`, `qhses`).
//! * **Harness** — benchmark problems, statistics, rank-sum comparisons,
//!   and batch execution helpers (`benchmarks`, `experiments`, `parallel`).
//!
//! Every run owns a seeded random stream, so batches are reproducible
//! bit-for-bit regardless of thread count.

pub mod benchmarks;
pub mod error;
pub mod es;
pub mod experiments;
pub mod hses;
pub mod parallel;
pub mod qhses;
pub mod rl;
pub mod training;
pub mod seed;

pub use error::{Error, Result};
