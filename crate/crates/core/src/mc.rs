//! Deterministic chunked Monte Carlo.
//!
//! Samples are split into fixed chunks of [`CHUNK`] rows. Chunks are mapped
//! independently (in parallel with the `parallel` feature) and merged in a fixed
//! order: each batch of [`BATCH`] chunks is reduced pairwise, then batches are
//! folded left to right. The result is bit-identical for any worker count.

use serde::Serialize;

use crate::rng::GaussianRows;
pub use crate::rng::CHUNK;

/// Chunks per batch; fixed so the reduction tree does not depend on the thread pool.
pub const BATCH: usize = 16;

/// Monte Carlo estimate of a mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerProductEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl InnerProductEstimate {
    /// `|value − target| / std_error`, or 0/∞ when the standard error vanishes.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.value - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

fn pairwise<T, M: Fn(T, T) -> T>(mut items: Vec<T>, merge: &M) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// Maps every chunk of `0..n` through `map(chunk, len)` and merges deterministically.
pub fn reduce_chunks<T, F, M>(n: usize, map: F, merge: M) -> Option<T>
where
    T: Send,
    F: Fn(u64, usize) -> T + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let len_of = |c: usize| CHUNK.min(n - c * CHUNK);
    let mut acc: Option<T> = None;
    let mut start = 0;
    while start < n_chunks {
        let end = (start + BATCH).min(n_chunks);
        #[cfg(feature = "parallel")]
        let parts: Vec<T> = {
            use rayon::prelude::*;
            (start..end).into_par_iter().map(|c| map(c as u64, len_of(c))).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<T> = (start..end).map(|c| map(c as u64, len_of(c))).collect();
        let batch = pairwise(parts, &merge);
        acc = match (acc, batch) {
            (Some(a), Some(b)) => Some(merge(a, b)),
            (a, b) => a.or(b),
        };
        start = end;
    }
    acc
}

/// Running sums `Σy` and `Σy²` for several outputs.
#[derive(Debug, Clone)]
pub struct Moments {
    pub n: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn zeros(k: usize) -> Self {
        Self { n: 0, sum: vec![0.0; k], sum_sq: vec![0.0; k] }
    }

    #[inline]
    pub fn push(&mut self, y: &[f64]) {
        self.n += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(y) {
            *s += v;
            *q += v * v;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }

    pub fn estimate(&self, i: usize, seed: u64) -> InnerProductEstimate {
        mean_and_se(self.sum[i], self.sum_sq[i], self.n, seed)
    }

    pub fn estimates(&self, seed: u64) -> Vec<InnerProductEstimate> {
        (0..self.sum.len()).map(|i| self.estimate(i, seed)).collect()
    }
}

/// Mean and standard error (`sample std / √n`) from raw sums.
pub fn mean_and_se(sum: f64, sum_sq: f64, n: usize, seed: u64) -> InnerProductEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    InnerProductEstimate { value: mean, std_error: (var / nf).sqrt(), n_samples: n, seed }
}

/// Estimates `E[f(z)]` for `z ~ N(0, I_dim)`, where `f` writes `k` outputs per sample.
pub fn gaussian_moments<F>(dim: usize, n: usize, seed: u64, tag: u64, k: usize, f: F) -> Moments
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let rows = GaussianRows::new(seed, tag, dim);
    reduce_chunks(
        n,
        |chunk, len| {
            let mut buf = vec![0.0; len * dim];
            rows.fill_chunk(chunk, len, &mut buf);
            let mut out = vec![0.0; k];
            let mut acc = Moments::zeros(k);
            for z in buf.chunks_exact(dim) {
                f(z, &mut out);
                acc.push(&out);
            }
            acc
        },
        Moments::merge,
    )
    .unwrap_or_else(|| Moments::zeros(k))
}
