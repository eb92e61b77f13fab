//! Benchmark problems: base functions composed with shift/rotation
//! transforms, plus the error-value convention used for reporting.

mod bases;
mod transform;

pub use bases::{hybrid_blocks, BaseKind, ALL_BASE_KINDS};
pub use transform::{
    load_transform_data, orthogonality_defect, random_rotation, write_transform_data,
};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::mix_seed3;

/// Default box bounds per coordinate.
pub const DEFAULT_BOUNDS: (f64, f64) = (-100.0, 100.0);

/// A reported error value: obtained objective minus the known optimum,
/// with raw errors at or below 1e-8 stored as exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ErrorValue(f64);

impl ErrorValue {
    /// Raw errors at or below this threshold count as solved.
    pub const ZERO_THRESHOLD: f64 = 1e-8;

    pub fn from_raw(raw: f64) -> Self {
        if raw <= Self::ZERO_THRESHOLD {
            ErrorValue(0.0)
        } else {
            ErrorValue(raw)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for ErrorValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A black-box minimization problem: a base function composed with an
/// optional shift and rotation, plus a constant value offset so the known
/// global minimum equals `optimum_value` exactly.
///
/// Evaluation computes `base(R·(x − shift)) − base(z*) + optimum_value`
/// where `z*` is the base's minimizer; problems are immutable after
/// construction and safe to share across concurrent runs.
#[derive(Debug, Clone)]
pub struct Problem {
    id: String,
    base: BaseKind,
    dimension: usize,
    bounds: Vec<(f64, f64)>,
    optimum_value: f64,
    shift: Option<DVector<f64>>,
    rotation: Option<DMatrix<f64>>,
    base_offset: f64,
    optimizer: Vec<f64>,
}

impl Problem {
    /// A bare base function on the default box: no shift, no rotation.
    pub fn plain(base: BaseKind, dimension: usize, optimum_value: f64) -> Result<Self> {
        Self::compose(
            format!("{}:{}:plain", base.name(), dimension),
            base,
            dimension,
            vec![DEFAULT_BOUNDS; dimension],
            optimum_value,
            None,
            None,
        )
    }

    /// Full composition with explicit transforms (e.g. from a transform-data
    /// file). Rotation orthogonality is not enforced; a defect above 1e-6 is
    /// logged as a warning, mirroring [`load_transform_data`].
    pub fn compose(
        id: String,
        base: BaseKind,
        dimension: usize,
        bounds: Vec<(f64, f64)>,
        optimum_value: f64,
        shift: Option<DVector<f64>>,
        rotation: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        bases::check_dimension(base, dimension)?;
        if dimension == 0 {
            return Err(Error::config("dimension must be >= 1"));
        }
        if bounds.len() != dimension {
            return Err(Error::config(format!(
                "bounds length {} != dimension {dimension}",
                bounds.len()
            )));
        }
        if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::config("each bound must satisfy lower < upper"));
        }
        if let Some(s) = &shift {
            if s.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: s.len(),
                });
            }
        }
        if let Some(r) = &rotation {
            if r.nrows() != dimension || r.ncols() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: r.nrows().max(r.ncols()),
                });
            }
            let defect = orthogonality_defect(r);
            if defect > 1e-6 {
                log::warn!("problem {id}: rotation orthogonality defect {defect:e}");
            }
        }

        let z_star = DVector::from_vec(base.minimizer(dimension));
        let base_offset = base.value(z_star.as_slice());
        // x* = shift + Rᵀ z*, the minimizer in input space.
        let mut x_star = match &rotation {
            Some(r) => r.transpose() * &z_star,
            None => z_star,
        };
        if let Some(s) = &shift {
            x_star += s;
        }

        Ok(Problem {
            id,
            base,
            dimension,
            bounds,
            optimum_value,
            shift,
            rotation,
            base_offset,
            optimizer: x_star.as_slice().to_vec(),
        })
    }

    /// Evaluates the objective, checking the argument length.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation used on hot paths; length is a caller invariant.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        let mut z: Vec<f64> = match &self.shift {
            Some(s) => x.iter().zip(s.iter()).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        if let Some(r) = &self.rotation {
            let rotated: Vec<f64> = (0..self.dimension)
                .map(|i| (0..self.dimension).map(|j| r[(i, j)] * z[j]).sum())
                .collect();
            z = rotated;
        }
        self.base.value(&z) - self.base_offset + self.optimum_value
    }

    /// Error value of an objective value relative to the known optimum.
    pub fn error_of(&self, objective: f64) -> ErrorValue {
        ErrorValue::from_raw(objective - self.optimum_value)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn base(&self) -> BaseKind {
        self.base
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    pub fn shift(&self) -> Option<&DVector<f64>> {
        self.shift.as_ref()
    }

    pub fn rotation(&self) -> Option<&DMatrix<f64>> {
        self.rotation.as_ref()
    }

    /// The constructed global minimizer in input space.
    pub fn optimizer(&self) -> &[f64] {
        &self.optimizer
    }
}

impl crate::es::Objective for Problem {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn value(&self, x: &[f64]) -> f64 {
        Problem::value(self, x)
    }
}

/// Recipe for a seeded benchmark problem.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProblemSpec {
    pub base: BaseKind,
    pub dimension: usize,
    pub seed: u64,
    /// Known global minimum of the composed problem. Defaults to
    /// 100 × base index so logarithms of raw objective values stay positive.
    pub optimum_value: f64,
    /// Apply a seeded random rotation. Defaults to true; unimodal bases may
    /// switch it off without changing their difficulty class.
    pub rotate: bool,
}

impl ProblemSpec {
    pub fn new(base: BaseKind, dimension: usize, seed: u64) -> Self {
        ProblemSpec {
            base,
            dimension,
            seed,
            optimum_value: 100.0 * base.index() as f64,
            rotate: true,
        }
    }

    /// Registry key, `base-kind:dimension:seed`.
    pub fn key(&self) -> String {
        format!("{}:{}:{}", self.base.name(), self.dimension, self.seed)
    }
}

/// Parses a `base-kind:dimension:seed` registry key.
pub fn parse_problem_key(key: &str) -> Result<ProblemSpec> {
    let parts: Vec<&str> = key.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::config(format!(
            "problem key {key:?} must have the form base-kind:dimension:seed"
        )));
    }
    let base = BaseKind::parse(parts[0])?;
    let dimension: usize = parts[1]
        .parse()
        .map_err(|_| Error::config(format!("bad dimension in key {key:?}")))?;
    let seed: u64 = parts[2]
        .parse()
        .map_err(|_| Error::config(format!("bad seed in key {key:?}")))?;
    Ok(ProblemSpec::new(base, dimension, seed))
}

/// Builds the problem for a registry key with default offsets and rotation.
pub fn problem_from_key(key: &str) -> Result<Problem> {
    make_problem(&parse_problem_key(key)?)
}

/// Constructs a problem deterministically from its spec: the shift is drawn
/// uniformly from the central 80% of the box and the rotation comes from
/// QR-orthonormalizing a seeded Gaussian matrix.
pub fn make_problem(spec: &ProblemSpec) -> Result<Problem> {
    bases::check_dimension(spec.base, spec.dimension)?;
    let n = spec.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed3(
        spec.seed,
        spec.base.index() as u64,
        n as u64,
    ));
    let bounds = vec![DEFAULT_BOUNDS; n];
    let shift = DVector::from_fn(n, |i, _| {
        let (lo, hi) = bounds[i];
        let margin = 0.1 * (hi - lo);
        rng.random_range(lo + margin..hi - margin)
    });
    let rotation = spec.rotate.then(|| random_rotation(n, &mut rng));
    Problem::compose(
        spec.key(),
        spec.base,
        n,
        bounds,
        spec.optimum_value,
        Some(shift),
        rotation,
    )
}
