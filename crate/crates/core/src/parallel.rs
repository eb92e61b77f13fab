//! Batch execution helpers.
//!
//! Single runs are strictly single-threaded and own their random streams;
//! all parallelism in this crate happens at the batch level through these
//! two functions. Results come back in index order, so outputs are
//! identical whether the `parallel` feature (rayon) is enabled or not, and
//! regardless of worker count.

/// Maps `f` over `0..count`, in parallel when the `parallel` feature is
/// enabled.
#[cfg(feature = "parallel")]
pub fn batch_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..count` sequentially (the `parallel` feature is off).
#[cfg(not(feature = "parallel"))]
pub fn batch_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..count).map(f).collect()
}

/// Always-sequential variant, kept available for baseline comparisons.
pub fn batch_map_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let f = |i: usize| i * i + 1;
        assert_eq!(batch_map(100, f), batch_map_sequential(100, f));
    }
}
