//! Data-parallel fan-out with a sequential fallback.
//!
//! `run_indexed` dispatches independent work items over rayon when the
//! `parallel` feature is enabled and runs them in order otherwise. Both paths
//! produce identical output vectors: items are keyed by index, collected in
//! index order, and never share mutable state.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the rayon backend.
pub fn enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Map `f` over `0..n`, in parallel when available.
pub fn run_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`run_indexed`], always single-threaded.
///
/// Kept unconditionally so benches can compare backends within one build.
pub fn run_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let squares = run_indexed(100, |i| i * i);
        assert_eq!(squares, run_indexed_seq(100, |i| i * i));
        assert_eq!(squares[7], 49);
    }
}
