//! Order-preserving parallel map over independent work items.

use rayon::prelude::*;

/// Evaluates `f(0..n)` on `workers` threads and returns results in index
/// order, so downstream reductions do not depend on scheduling.
pub fn map_indexed<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_worker_count() {
        let serial = map_indexed(1, 100, |i| i * i);
        for w in [2, 3, 8] {
            assert_eq!(map_indexed(w, 100, |i| i * i), serial);
        }
        assert!(map_indexed(4, 0, |i| i).is_empty());
    }
}
