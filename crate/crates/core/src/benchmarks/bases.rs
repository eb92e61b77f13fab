//! Base test functions.
//!
//! Classic single-objective test functions in their standard forms
//! (see Liang et al., "Problem Definitions and Evaluation Criteria for the
//! CEC Special Sessions on Real-Parameter Optimization" for the lineage).
//! Each base exposes its raw value and its known global minimizer; shift,
//! rotation and value offsets are composed on top by [`super::Problem`].

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// The supported base functions.
///
/// `Hybrid` partitions the coordinates into three consecutive blocks and
/// applies elliptic / Rastrigin / Ackley to them, so its minimizer is the
/// origin like the other multimodal bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Sphere,
    Elliptic,
    BentCigar,
    Rosenbrock,
    Rastrigin,
    Ackley,
    Griewank,
    Schwefel,
    Hybrid,
}

pub const ALL_BASE_KINDS: [BaseKind; 9] = [
    BaseKind::Sphere,
    BaseKind::Elliptic,
    BaseKind::BentCigar,
    BaseKind::Rosenbrock,
    BaseKind::Rastrigin,
    BaseKind::Ackley,
    BaseKind::Griewank,
    BaseKind::Schwefel,
    BaseKind::Hybrid,
];

impl BaseKind {
    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Sphere => "sphere",
            BaseKind::Elliptic => "elliptic",
            BaseKind::BentCigar => "bent-cigar",
            BaseKind::Rosenbrock => "rosenbrock",
            BaseKind::Rastrigin => "rastrigin",
            BaseKind::Ackley => "ackley",
            BaseKind::Griewank => "griewank",
            BaseKind::Schwefel => "schwefel",
            BaseKind::Hybrid => "hybrid",
        }
    }

    /// 1-based position in [`ALL_BASE_KINDS`], used for default value offsets.
    pub fn index(self) -> usize {
        ALL_BASE_KINDS.iter().position(|k| *k == self).unwrap() + 1
    }

    pub fn parse(name: &str) -> Result<Self> {
        let normalized = name.trim().to_ascii_lowercase().replace('_', "-");
        ALL_BASE_KINDS
            .into_iter()
            .find(|k| k.name() == normalized)
            .ok_or_else(|| Error::UnknownBase(name.to_string()))
    }

    /// Smallest dimension the base is defined for.
    pub fn min_dimension(self) -> usize {
        match self {
            BaseKind::Rosenbrock => 2,
            BaseKind::Hybrid => 3,
            _ => 1,
        }
    }

    /// The global minimizer of the raw base function.
    pub fn minimizer(self, dimension: usize) -> Vec<f64> {
        match self {
            BaseKind::Rosenbrock => vec![1.0; dimension],
            _ => vec![0.0; dimension],
        }
    }

    /// Raw base value at `z` (before shift/rotation/offset composition).
    pub fn value(self, z: &[f64]) -> f64 {
        match self {
            BaseKind::Sphere => sphere(z),
            BaseKind::Elliptic => elliptic(z),
            BaseKind::BentCigar => bent_cigar(z),
            BaseKind::Rosenbrock => rosenbrock(z),
            BaseKind::Rastrigin => rastrigin(z),
            BaseKind::Ackley => ackley(z),
            BaseKind::Griewank => griewank(z),
            BaseKind::Schwefel => schwefel(z),
            BaseKind::Hybrid => hybrid(z),
        }
    }
}

impl std::fmt::Display for BaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// f(z) = Σ zᵢ², minimum 0 at the origin.
pub fn sphere(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

/// High-conditioned elliptic: Σ 10⁶^(i/(n−1)) zᵢ², condition number 10⁶.
pub fn elliptic(z: &[f64]) -> f64 {
    let n = z.len();
    if n == 1 {
        return z[0] * z[0];
    }
    z.iter()
        .enumerate()
        .map(|(i, v)| 1e6_f64.powf(i as f64 / (n - 1) as f64) * v * v)
        .sum()
}

/// Bent cigar: z₁² + 10⁶ Σ_{i≥2} zᵢ².
pub fn bent_cigar(z: &[f64]) -> f64 {
    z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
}

/// Rosenbrock in its classic form, minimum 0 at (1, …, 1).
pub fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum()
}

/// Rastrigin: 10n + Σ (zᵢ² − 10 cos 2πzᵢ), minimum 0 at the origin.
pub fn rastrigin(z: &[f64]) -> f64 {
    10.0 * z.len() as f64
        + z.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

/// Ackley with the standard constants a=20, b=0.2, c=2π.
pub fn ackley(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let sum_sq = z.iter().map(|v| v * v).sum::<f64>() / n;
    let sum_cos = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sum_sq.sqrt()).exp() - sum_cos.exp() + 20.0 + E
}

/// Griewank: 1 + Σ zᵢ²/4000 − Π cos(zᵢ/√i).
pub fn griewank(z: &[f64]) -> f64 {
    let sum = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = z
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sum - prod
}

const SCHWEFEL_SHIFT: f64 = 420.968_746_227_503_6;

/// Modified Schwefel with the CEC out-of-range penalty, rescaled so the
/// minimum sits at the origin of the [-100, 100] box.
pub fn schwefel(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    418.982_887_272_433_8 * n
        - z.iter()
            .map(|v| schwefel_term(10.0 * v + SCHWEFEL_SHIFT, n))
            .sum::<f64>()
}

fn schwefel_term(y: f64, n: f64) -> f64 {
    if y.abs() <= 500.0 {
        y * y.abs().sqrt().sin()
    } else if y > 500.0 {
        let w = 500.0 - (y % 500.0);
        w * w.abs().sqrt().sin() - (y - 500.0) * (y - 500.0) / (10_000.0 * n)
    } else {
        let w = (y.abs() % 500.0) - 500.0;
        w * w.abs().sqrt().sin() - (y + 500.0) * (y + 500.0) / (10_000.0 * n)
    }
}

/// Coordinate block sizes for the hybrid base: three near-equal chunks,
/// the remainder spread over the leading blocks (9 → 3/3/3, 10 → 4/3/3).
pub fn hybrid_blocks(dimension: usize) -> [usize; 3] {
    let q = dimension / 3;
    let r = dimension % 3;
    [q + usize::from(r > 0), q + usize::from(r > 1), q]
}

fn hybrid(z: &[f64]) -> f64 {
    let [a, b, _] = hybrid_blocks(z.len());
    elliptic(&z[..a]) + rastrigin(&z[a..a + b]) + ackley(&z[a + b..])
}

pub(crate) fn check_dimension(kind: BaseKind, dimension: usize) -> Result<()> {
    if dimension < kind.min_dimension() {
        return Err(Error::config(format!(
            "base {} requires dimension >= {}, got {}",
            kind,
            kind.min_dimension(),
            dimension
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minima_at_known_points() {
        for kind in ALL_BASE_KINDS {
            let n = 9;
            let z = kind.minimizer(n);
            let at_min = kind.value(&z);
            // Schwefel's closed-form constant is accurate to ~1e-11 per
            // coordinate; everything else is exact.
            let tol = if kind == BaseKind::Schwefel { 1e-9 } else { 1e-12 };
            assert!(
                at_min.abs() < tol,
                "{kind}: value at minimizer = {at_min:e}"
            );
            // Nearby points must not be lower.
            for i in 0..n {
                let mut p = z.clone();
                p[i] += 0.25;
                assert!(kind.value(&p) > at_min, "{kind}: not minimal in dim {i}");
            }
        }
    }

    #[test]
    fn rosenbrock_classic_minimizer() {
        assert_eq!(rosenbrock(&[1.0, 1.0]), 0.0);
        assert!(rosenbrock(&[0.0, 0.0]) > 0.0);
    }

    #[test]
    fn schwefel_has_no_lower_value_in_reachable_range() {
        // The penalty branches must keep the rescaled global minimum at the
        // origin even for arguments far outside the box (|z| up to ~650 can
        // be reached after rotation of box-feasible points).
        let mut worst = f64::INFINITY;
        let mut at = 0.0;
        let mut v = -700.0;
        while v <= 700.0 {
            let val = schwefel(&[v]);
            if val < worst {
                worst = val;
                at = v;
            }
            v += 1e-3;
        }
        assert!(
            worst >= -1e-9,
            "schwefel dips to {worst:e} at z={at}, below the origin value"
        );
    }

    #[test]
    fn hybrid_partition_sizes() {
        assert_eq!(hybrid_blocks(9), [3, 3, 3]);
        assert_eq!(hybrid_blocks(10), [4, 3, 3]);
        assert_eq!(hybrid_blocks(11), [4, 4, 3]);
        assert_eq!(hybrid_blocks(3), [1, 1, 1]);
    }

    #[test]
    fn parse_names_round_trip() {
        for kind in ALL_BASE_KINDS {
            assert_eq!(BaseKind::parse(kind.name()).unwrap(), kind);
        }
        assert_eq!(BaseKind::parse("bent_cigar").unwrap(), BaseKind::BentCigar);
        assert!(BaseKind::parse("nonesuch").is_err());
    }
}
