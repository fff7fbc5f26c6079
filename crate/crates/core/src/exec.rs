//! Work scheduling for the data-parallel kernels.
//!
//! Every heavy loop in the crate is expressed as a map over a fixed chunk
//! index space followed by an in-order fold of the chunk results. The chunk
//! layout never depends on thread count, so the parallel and sequential paths
//! produce bit-identical results; the `parallel` feature (and the runtime
//! override below, used by the benchmarks) only changes scheduling.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential path even when the `parallel` feature is enabled.
/// Used by the benchmark suite to compare both schedulers in one binary.
pub fn set_force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn force_sequential() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// Maps `f` over `0..chunks` and returns the results in index order.
pub fn map_chunks<T, F>(chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !force_sequential() {
            use rayon::prelude::*;
            return (0..chunks).into_par_iter().map(f).collect();
        }
    }
    (0..chunks).map(f).collect()
}

/// Maps `f` over chunks and folds the results in index order.
pub fn map_reduce_chunks<T, A, F, G>(chunks: usize, f: F, init: A, fold: G) -> A
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    G: FnMut(A, T) -> A,
{
    map_chunks(chunks, f).into_iter().fold(init, fold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_results_are_ordered() {
        let v = map_chunks(17, |i| i * i);
        assert_eq!(v, (0..17).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn sequential_override_matches_parallel() {
        let par = map_reduce_chunks(64, |i| (i as f64).sqrt(), 0.0, |a, b| a + b);
        set_force_sequential(true);
        let seq = map_reduce_chunks(64, |i| (i as f64).sqrt(), 0.0, |a, b| a + b);
        set_force_sequential(false);
        assert_eq!(par.to_bits(), seq.to_bits());
    }
}
