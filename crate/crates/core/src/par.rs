//! Data-parallel helpers with a sequential fallback.
//!
//! Reductions split the index range into fixed-size chunks, sum each chunk
//! sequentially and then add the chunk sums in order. The result is
//! therefore bitwise identical whether the chunks run on one thread or many.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for reductions and parallel loops.
pub const CHUNK: usize = 4096;

/// Execution mode for per-arm work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// sequentially otherwise.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    fn parallel(self, n: usize) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel && n > CHUNK
    }

    /// `f(0) + f(1) + … + f(n-1)` in a fixed association order.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let chunk_sum = |c: usize| {
            let end = ((c + 1) * CHUNK).min(n);
            (c * CHUNK..end).map(&f).sum::<f64>()
        };
        let chunks = n.div_ceil(CHUNK);
        #[cfg(feature = "parallel")]
        if self.parallel(n) {
            let partial: Vec<f64> = (0..chunks).into_par_iter().map(chunk_sum).collect();
            return partial.iter().sum();
        }
        (0..chunks).map(chunk_sum).sum()
    }

    /// Largest `f(i)`; NaN values are ignored.
    pub fn max<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.parallel(n) {
            return (0..n).into_par_iter().map(&f).reduce(|| f64::NEG_INFINITY, f64::max);
        }
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(0..n).map(f).collect()`.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.parallel(n) {
            return (0..n).into_par_iter().with_min_len(CHUNK / 4).map(&f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Overwrite `out[i] = f(i)` and return the sum of the new values.
    pub fn fill_sum<F>(self, out: &mut [f64], f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let fill = |(c, chunk): (usize, &mut [f64])| {
            let base = c * CHUNK;
            let mut s = 0.0;
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = f(base + j);
                s += *slot;
            }
            s
        };
        #[cfg(feature = "parallel")]
        if self.parallel(out.len()) {
            let partial: Vec<f64> = out.par_chunks_mut(CHUNK).enumerate().map(fill).collect();
            return partial.iter().sum();
        }
        let partial: Vec<f64> = out.chunks_mut(CHUNK).enumerate().map(fill).collect();
        partial.iter().sum()
    }

    /// Apply `f(i, &mut out[i])` to every slot.
    pub fn for_each_mut<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.parallel(out.len()) {
            out.par_iter_mut().enumerate().with_min_len(CHUNK / 4).for_each(|(i, v)| f(i, v));
            return;
        }
        out.iter_mut().enumerate().for_each(|(i, v)| f(i, v));
    }
}
