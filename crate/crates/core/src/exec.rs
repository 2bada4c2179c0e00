//! Execution policy for the data-parallel loops (window sweeps, partial
//! sums, prefix scans). Without the `parallel` feature every policy runs
//! sequentially; results never depend on the policy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `start..end`.
    pub fn map_range<R, F>(self, start: u64, end: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (start..end).into_par_iter().map(f).collect();
        }
        (start..end).map(f).collect()
    }

    /// Runs two closures, possibly concurrently.
    pub fn join<A, B, RA, RB>(self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return rayon::join(a, b);
        }
        (a(), b())
    }

    /// Splits `start..end` into contiguous chunks, folds each chunk with
    /// `f`, and returns the per-chunk results in order.
    pub fn chunked<R, F>(self, start: u64, end: u64, chunk: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64, u64) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        let bounds: Vec<(u64, u64)> = (start..end)
            .step_by(chunk as usize)
            .map(|lo| (lo, (lo + chunk).min(end)))
            .collect();
        self.map(&bounds, |&(lo, hi)| f(lo, hi))
    }
}
