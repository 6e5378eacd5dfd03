//! Deterministic parallel sweeps over index ranges.
//!
//! Reductions here are exact (max/min with index tie-breaks), so results do
//! not depend on how work is split across threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, preserving order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Fallible order-preserving map; the error from the lowest index wins.
pub fn try_map_collect<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_collect(n, f).into_iter().collect()
}

/// Index and payload of the largest value; ties go to the smallest index.
pub fn try_argmax<T, E, F>(n: usize, f: F) -> Result<(usize, f64, T), E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<(f64, T), E> + Sync + Send,
{
    let values = try_map_collect(n, f)?;
    let mut best: Option<(usize, f64, T)> = None;
    for (i, (v, t)) in values.into_iter().enumerate() {
        let better = match &best {
            None => true,
            Some((_, bv, _)) => v.total_cmp(bv).is_gt(),
        };
        if better {
            best = Some((i, v, t));
        }
    }
    Ok(best.expect("try_argmax over an empty range"))
}
