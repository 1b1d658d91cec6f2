//! Data-parallel helpers. With the `parallel` feature off, every entry point
//! runs sequentially and [`Execution::Parallel`] is accepted but ignored.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], execution: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let _ = execution;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Like [`map`] but each call yields several outputs, concatenated in order.
pub fn flat_map<T, U, F>(items: &[T], execution: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> Vec<U> + Sync + Send,
{
    map(items, execution, f).into_iter().flatten().collect()
}
