//! Pairwise algorithm comparison over a function suite.

use crate::benchmarks::ErrorValue;
use crate::error::{Error, Result};

use super::stats::{median_of_sorted, rank_sum_test, Verdict};

/// Replication results of one algorithm on one function.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FunctionResults {
    pub function: String,
    /// Floored error values, one per run.
    pub errors: Vec<ErrorValue>,
    /// Raw final objective values, one per run.
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FunctionVerdict {
    pub function: String,
    /// Verdict for algorithm A versus algorithm B.
    pub verdict: Verdict,
    pub median_error_a: f64,
    pub median_error_b: f64,
}

/// Suite-level comparison: per-function verdicts plus aggregate counts and
/// the two summary scales (mean errors, and mean raw function values as in
/// competition-style "function value" totals, which large-valued functions
/// dominate).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ComparisonReport {
    pub verdicts: Vec<FunctionVerdict>,
    pub better: usize,
    pub approx: usize,
    pub worse: usize,
    pub sum_mean_error_a: f64,
    pub sum_mean_error_b: f64,
    pub sum_mean_objective_a: f64,
    pub sum_mean_objective_b: f64,
}

/// Compares two result sets function by function with the rank-sum test.
/// The suites must cover the same functions with the same replication
/// counts.
pub fn compare_algorithms(
    a: &[FunctionResults],
    b: &[FunctionResults],
    significance: f64,
) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "function sets differ in size: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut verdicts = Vec::with_capacity(a.len());
    let (mut better, mut approx, mut worse) = (0, 0, 0);
    let (mut err_a, mut err_b, mut obj_a, mut obj_b) = (0.0, 0.0, 0.0, 0.0);

    for ra in a {
        let rb = b
            .iter()
            .find(|r| r.function == ra.function)
            .ok_or_else(|| {
                Error::contract(format!("function {} missing from the B results", ra.function))
            })?;
        if ra.errors.len() != rb.errors.len() {
            return Err(Error::contract(format!(
                "function {}: replication counts differ ({} vs {})",
                ra.function,
                ra.errors.len(),
                rb.errors.len()
            )));
        }
        let ea: Vec<f64> = ra.errors.iter().map(|e| e.value()).collect();
        let eb: Vec<f64> = rb.errors.iter().map(|e| e.value()).collect();
        let verdict = rank_sum_test(&ea, &eb, significance)?;
        match verdict {
            Verdict::ABetter => better += 1,
            Verdict::NoDifference => approx += 1,
            Verdict::BBetter => worse += 1,
        }
        let mut sa = ea.clone();
        let mut sb = eb.clone();
        sa.sort_by(f64::total_cmp);
        sb.sort_by(f64::total_cmp);
        verdicts.push(FunctionVerdict {
            function: ra.function.clone(),
            verdict,
            median_error_a: median_of_sorted(&sa),
            median_error_b: median_of_sorted(&sb),
        });

        err_a += ea.iter().sum::<f64>() / ea.len() as f64;
        err_b += eb.iter().sum::<f64>() / eb.len() as f64;
        obj_a += ra.objectives.iter().sum::<f64>() / ra.objectives.len() as f64;
        obj_b += rb.objectives.iter().sum::<f64>() / rb.objectives.len() as f64;
    }

    Ok(ComparisonReport {
        verdicts,
        better,
        approx,
        worse,
        sum_mean_error_a: err_a,
        sum_mean_error_b: err_b,
        sum_mean_objective_a: obj_a,
        sum_mean_objective_b: obj_b,
    })
}

impl ComparisonReport {
    /// Plain-text table for terminal output.
    pub fn render_table(&self, label_a: &str, label_b: &str) -> String {
        let mut out = String::new();
        let width = self
            .verdicts
            .iter()
            .map(|v| v.function.len())
            .max()
            .unwrap_or(8)
            .max(8);
        out.push_str(&format!(
            "{:<width$}  {:>12}  {:>12}  verdict ({label_a} vs {label_b})\n",
            "function", "median A", "median B"
        ));
        for v in &self.verdicts {
            out.push_str(&format!(
                "{:<width$}  {:>12.4e}  {:>12.4e}  {}\n",
                v.function,
                v.median_error_a,
                v.median_error_b,
                v.verdict.symbol()
            ));
        }
        out.push_str(&format!(
            "\n{label_a} better / no difference / worse: {} / {} / {}\n",
            self.better, self.approx, self.worse
        ));
        out.push_str(&format!(
            "sum of mean errors:          {label_a} {:.4e}, {label_b} {:.4e}\n",
            self.sum_mean_error_a, self.sum_mean_error_b
        ));
        out.push_str(&format!(
            "sum of mean function values: {label_a} {:.4e}, {label_b} {:.4e}\n",
            self.sum_mean_objective_a, self.sum_mean_objective_b
        ));
        out
    }

    /// CSV form: per-function rows, aggregate tallies as trailing comments.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# qhses-comparison,v1")?;
        writeln!(w, "function,verdict,median_error_a,median_error_b")?;
        for v in &self.verdicts {
            writeln!(
                w,
                "{},{},{},{}",
                v.function,
                match v.verdict {
                    Verdict::ABetter => "a_better",
                    Verdict::NoDifference => "no_difference",
                    Verdict::BBetter => "b_better",
                },
                v.median_error_a,
                v.median_error_b
            )?;
        }
        writeln!(w, "# better,{}", self.better)?;
        writeln!(w, "# approx,{}", self.approx)?;
        writeln!(w, "# worse,{}", self.worse)?;
        writeln!(w, "# sum_mean_error_a,{}", self.sum_mean_error_a)?;
        writeln!(w, "# sum_mean_error_b,{}", self.sum_mean_error_b)?;
        writeln!(w, "# sum_mean_objective_a,{}", self.sum_mean_objective_a)?;
        writeln!(w, "# sum_mean_objective_b,{}", self.sum_mean_objective_b)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn results(function: &str, errors: &[f64]) -> FunctionResults {
        FunctionResults {
            function: function.into(),
            errors: errors.iter().map(|e| ErrorValue::from_raw(*e)).collect(),
            objectives: errors.iter().map(|e| e + 100.0).collect(),
        }
    }

    #[test]
    fn self_comparison_is_all_no_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let suite: Vec<FunctionResults> = (0..4)
            .map(|i| {
                let errors: Vec<f64> =
                    (0..10).map(|_| rng.random_range(0.0..5.0)).collect();
                results(&format!("f{i}"), &errors)
            })
            .collect();
        let report = compare_algorithms(&suite, &suite, 0.05).unwrap();
        assert_eq!(report.approx, 4);
        assert_eq!(report.better, 0);
        assert_eq!(report.worse, 0);
        assert_eq!(report.sum_mean_error_a, report.sum_mean_error_b);
    }

    #[test]
    fn constructed_dominance_counts_two_wins() {
        // Six functions; A strictly dominates on the first two, the rest
        // draw from the same distribution.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..6 {
            let base: Vec<f64> = (0..15).map(|_| rng.random_range(1.0..2.0)).collect();
            if i < 2 {
                a.push(results(&format!("f{i}"), &base));
                let shifted: Vec<f64> = base.iter().map(|v| v + 50.0).collect();
                b.push(results(&format!("f{i}"), &shifted));
            } else {
                let other: Vec<f64> = (0..15).map(|_| rng.random_range(1.0..2.0)).collect();
                a.push(results(&format!("f{i}"), &base));
                b.push(results(&format!("f{i}"), &other));
            }
        }
        let report = compare_algorithms(&a, &b, 0.05).unwrap();
        assert_eq!(
            (report.better, report.approx, report.worse),
            (2, 4, 0),
            "verdicts: {:?}",
            report.verdicts
        );
    }

    #[test]
    fn swapping_sides_swaps_the_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..5 {
            let ea: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..4.0)).collect();
            let offset = if i % 2 == 0 { 10.0 } else { 0.0 };
            let eb: Vec<f64> = (0..12)
                .map(|_| rng.random_range(0.0..4.0) + offset)
                .collect();
            a.push(results(&format!("f{i}"), &ea));
            b.push(results(&format!("f{i}"), &eb));
        }
        let ab = compare_algorithms(&a, &b, 0.05).unwrap();
        let ba = compare_algorithms(&b, &a, 0.05).unwrap();
        assert_eq!(ab.better, ba.worse);
        assert_eq!(ab.worse, ba.better);
        assert_eq!(ab.approx, ba.approx);
        assert_eq!(ab.better + ab.approx + ab.worse, 5);
    }

    #[test]
    fn mismatched_suites_are_rejected() {
        let a = vec![results("f0", &[1.0, 2.0, 3.0, 4.0])];
        let b = vec![results("f1", &[1.0, 2.0, 3.0, 4.0])];
        assert!(compare_algorithms(&a, &b, 0.05).is_err());

        let b = vec![results("f0", &[1.0, 2.0, 3.0])];
        assert!(compare_algorithms(&a, &b, 0.05).is_err());
    }
}
