//! Summary statistics and the two-sided rank-sum test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::benchmarks::ErrorValue;
use crate::error::{Error, Result};

/// Per-function summary of a replication set, computed on error values
/// with the 1e-8 zeroing floor already applied.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StatsRow {
    pub function: String,
    pub runs: usize,
    pub best: f64,
    pub worst: f64,
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1); zero by convention for n = 1.
    pub std: f64,
}

/// Order statistics and moments of a replication set. The zeroing floor is
/// re-applied before aggregation, which is idempotent for values that
/// already passed through [`ErrorValue::from_raw`].
pub fn summarize(function: impl Into<String>, errors: &[ErrorValue]) -> Result<StatsRow> {
    if errors.is_empty() {
        return Err(Error::contract("summarize requires at least one error value"));
    }
    let mut values: Vec<f64> = errors
        .iter()
        .map(|e| ErrorValue::from_raw(e.value()).value())
        .collect();
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        var.sqrt()
    };
    Ok(StatsRow {
        function: function.into(),
        runs: n,
        best: values[0],
        worst: values[n - 1],
        median: median_of_sorted(&values),
        mean,
        std,
    })
}

pub(crate) fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Outcome of comparing sample A against sample B (smaller errors are
/// better).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ABetter,
    NoDifference,
    BBetter,
}

impl Verdict {
    pub fn flipped(self) -> Self {
        match self {
            Verdict::ABetter => Verdict::BBetter,
            Verdict::BBetter => Verdict::ABetter,
            Verdict::NoDifference => Verdict::NoDifference,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::ABetter => "better",
            Verdict::NoDifference => "=",
            Verdict::BBetter => "worse",
        }
    }
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney U) test with midranks, tie
/// correction, and continuity correction. On rejection the direction comes
/// from the medians, ties broken by the means.
pub fn rank_sum_test(a: &[f64], b: &[f64], significance: f64) -> Result<Verdict> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::contract(format!(
            "rank-sum test needs both samples >= 3, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !(0.0..1.0).contains(&significance) || significance <= 0.0 {
        return Err(Error::contract("significance must lie in (0, 1)"));
    }

    let p = match approximate_p_value(a, b) {
        // Every pooled value identical: no evidence of a difference.
        None => return Ok(Verdict::NoDifference),
        Some(p) => p,
    };
    if p >= significance {
        return Ok(Verdict::NoDifference);
    }

    // Significant: direct the verdict by medians (errors: lower wins).
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (med_a, med_b) = (median_of_sorted(&sa), median_of_sorted(&sb));
    if med_a < med_b {
        Ok(Verdict::ABetter)
    } else if med_b < med_a {
        Ok(Verdict::BBetter)
    } else {
        let mean_a = a.iter().sum::<f64>() / a.len() as f64;
        let mean_b = b.iter().sum::<f64>() / b.len() as f64;
        if mean_a < mean_b {
            Ok(Verdict::ABetter)
        } else if mean_b < mean_a {
            Ok(Verdict::BBetter)
        } else {
            Ok(Verdict::NoDifference)
        }
    }
}

/// Two-sided p-value from the tie-corrected, continuity-corrected normal
/// approximation; `None` when the pooled sample is entirely tied.
fn approximate_p_value(a: &[f64], b: &[f64]) -> Option<f64> {
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;

    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .map(|v| (*v, 0))
        .chain(b.iter().map(|v| (*v, 1)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Midranks and tie-group sizes.
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        for item in &pooled[i..j] {
            if item.1 == 0 {
                rank_sum_a += midrank;
            }
        }
        i = j;
    }

    let u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean_u = n1 * n2 / 2.0;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return None;
    }

    let diff = u_a - mean_u;
    let corrected = if diff.abs() <= 0.5 { 0.0 } else { diff.abs() - 0.5 };
    let z = corrected / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Some(2.0 * (1.0 - normal.cdf(z)))
}
