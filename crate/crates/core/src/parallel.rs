//! Order-preserving map with an optional rayon backend.

/// Maps `f` over `items`, in parallel when `parallel` is set and the crate
/// was built with the `parallel` feature. Output order always matches input
/// order, so callers see identical results either way.
pub fn map_ordered<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Whether a parallel backend was compiled in.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
