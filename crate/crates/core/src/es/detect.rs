//! Converged-variable detection for the final univariate phase.

use super::{FixedIndexSet, Population};

/// Marks coordinate `i` as fixed when its population std divided by the
/// bound width falls below `threshold`; the pinned value is the best
/// individual's coordinate.
pub fn detect(population: &Population, bounds: &[(f64, f64)], threshold: f64) -> FixedIndexSet {
    assert!(population.size() > 0, "detect requires a nonempty population");
    let stds = population.coordinate_stds();
    let (best, _) = population.best();
    let entries: Vec<(usize, f64)> = stds
        .iter()
        .enumerate()
        .filter(|(i, std)| {
            let (lo, hi) = bounds[*i];
            **std / (hi - lo) < threshold
        })
        .map(|(i, _)| (i, best[i]))
        .collect();
    FixedIndexSet::new(entries).expect("indices are distinct by construction")
}
