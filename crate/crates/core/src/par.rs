//! Frame-level data parallelism.
//!
//! Every per-frame stage is a pure function of its frame index, so the
//! parallel and sequential paths produce identical output. Without the
//! `parallel` feature, [`Execution::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Like [`map_indexed`], short-circuiting on the first error by index order.
pub fn try_map_indexed<R, E, F>(exec: Execution, n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    // Collect everything so that the reported error is the lowest failing
    // index regardless of scheduling.
    map_indexed(exec, n, f).into_iter().collect()
}
