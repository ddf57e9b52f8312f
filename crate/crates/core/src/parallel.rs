//! Batch-level data parallelism.
//!
//! Independent solves (sweeps over seeds and λ values, safety suites) are
//! mapped over a rayon pool when the `parallel` feature is enabled and
//! sequentially otherwise. Each solve stays single-threaded.

use crate::error::Result;

/// Whether batch helpers can use more than one thread.
pub const ENABLED: bool = cfg!(feature = "parallel");

/// Order-preserving map, parallel when `parallel` is set and the feature
/// is enabled.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// As [`map`], stopping at the first error (in item order).
pub fn try_map<T, R, F>(items: &[T], parallel: bool, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map(items, parallel, f).into_iter().collect()
}

/// Number of worker threads batch helpers would use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn map_preserves_order() {
        let v: Vec<u64> = (0..1000).collect();
        let seq = map(&v, false, |x| x * x);
        let par = map(&v, true, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(par[999], 998001);
    }

    #[test]
    fn try_map_reports_first_error() {
        let v: Vec<usize> = (0..50).collect();
        let r = try_map(&v, true, |&x| {
            if x == 7 || x == 30 {
                Err(Error::InvalidArgument(format!("{x}")))
            } else {
                Ok(x)
            }
        });
        match r {
            Err(Error::InvalidArgument(m)) => assert_eq!(m, "7"),
            other => panic!("{other:?}"),
        }
    }
}
