//! Data-parallel execution of grid and batch kernels.
//!
//! With the `parallel` feature (default) the parallel mode fans blocks out
//! over rayon; without it everything degrades to the sequential path. Both
//! modes use the same fixed blocking and combine partial results in block
//! order, so results are bit-identical regardless of thread scheduling.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const BLOCK: usize = 4096;

/// Execution mode for the data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Rayon work-stealing; falls back to sequential without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

fn block_ranges(len: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..len.div_ceil(BLOCK)).map(move |b| (b * BLOCK, ((b + 1) * BLOCK).min(len)))
}

/// Sum of `f(i)` over `0..len`, blocked for deterministic rounding.
pub(crate) fn sum_f64<F>(len: usize, mode: Parallelism, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let block_sum = |(lo, hi): (usize, usize)| (lo..hi).map(&f).sum::<f64>();
    let partials: Vec<f64> = match mode {
        Parallelism::Sequential => block_ranges(len).map(block_sum).collect(),
        Parallelism::Parallel => {
            #[cfg(feature = "parallel")]
            {
                block_ranges(len)
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(block_sum)
                    .collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                block_ranges(len).map(block_sum).collect()
            }
        }
    };
    partials.iter().sum()
}

/// Complex sum of `f(i)` over `0..len`, blocked like [`sum_f64`].
pub(crate) fn sum_c64<F>(len: usize, mode: Parallelism, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let block_sum = |(lo, hi): (usize, usize)| {
        (lo..hi).map(&f).fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    };
    let partials: Vec<Complex64> = match mode {
        Parallelism::Sequential => block_ranges(len).map(block_sum).collect(),
        Parallelism::Parallel => {
            #[cfg(feature = "parallel")]
            {
                block_ranges(len)
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(block_sum)
                    .collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                block_ranges(len).map(block_sum).collect()
            }
        }
    };
    partials
        .iter()
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Element-wise table fill.
pub(crate) fn fill_c64<F>(len: usize, mode: Parallelism, f: F) -> Vec<Complex64>
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..len).map(f).collect(),
        Parallelism::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..len).map(f).collect()
            }
        }
    }
}

/// Maps `f` over `0..len` preserving index order.
pub(crate) fn map_collect<T, F>(len: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..len).map(f).collect(),
        Parallelism::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..len).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bit_for_bit() {
        let f = |i: usize| ((i as f64) * 0.1).sin() / (i as f64 + 1.0);
        let seq = sum_f64(100_000, Parallelism::Sequential, f);
        let par = sum_f64(100_000, Parallelism::Parallel, f);
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn complex_modes_agree_bit_for_bit() {
        let f = |i: usize| Complex64::new((i as f64).cos(), (i as f64 * 0.3).sin());
        let seq = sum_c64(50_000, Parallelism::Sequential, f);
        let par = sum_c64(50_000, Parallelism::Parallel, f);
        assert_eq!(seq.re.to_bits(), par.re.to_bits());
        assert_eq!(seq.im.to_bits(), par.im.to_bits());
    }
}
