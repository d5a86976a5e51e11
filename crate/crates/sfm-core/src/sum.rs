//! Compensated and deterministic summation.
//!
//! The pairwise double sums in the test statistics and the reductions inside
//! parallel Monte Carlo loops must be reproducible bit-for-bit. Partitions are
//! fixed-size chunks summed left to right with Neumaier compensation, and the
//! per-chunk partials are folded in chunk order, so the result does not depend
//! on the number of worker threads.

use rayon::prelude::*;

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice, left to right.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut acc = Accumulator::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Chunk size used by [`par_sum_indexed`]. Fixed so partition boundaries do
/// not depend on thread count.
const CHUNK: usize = 1024;

/// Deterministic parallel sum of `f(i)` for `i` in `0..n`.
///
/// Identical output for any Rayon pool size, and identical to the serial
/// chunked evaluation.
pub fn par_sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = Accumulator::new();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    neumaier_sum(&chunks)
}
