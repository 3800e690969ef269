//! Per-agent map that runs on rayon when the `parallel` feature is on and
//! falls back to a plain iterator otherwise. Output order is always agent
//! order, so results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_agents<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(usize, &I) -> T + Sync,
{
    items.par_iter().enumerate().map(|(j, it)| f(j, it)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_agents<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    F: Fn(usize, &I) -> T,
{
    items.iter().enumerate().map(|(j, it)| f(j, it)).collect()
}
