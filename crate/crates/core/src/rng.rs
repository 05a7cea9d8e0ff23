//! Counter-based random streams.
//!
//! Every random quantity in the crate is addressed by `(seed, tag, stream, position)`:
//! the key is derived from the user seed and a purpose tag, the stream selects an
//! independent ChaCha8 keystream (one per hidden unit, or one per Monte Carlo chunk),
//! and values are consumed sequentially inside the stream. Entry `(j, i)` of the
//! weight matrix is therefore a pure function of `(seed, i, j)`, and a Monte Carlo
//! chunk is a pure function of `(seed, tag, chunk)`, whatever the worker count.
//!
//! Normals use the Box–Muller transform: `u1 ∈ (0, 1]`, `u2 ∈ [0, 1)` from the top
//! 53 bits of successive 64-bit words; the cosine branch is emitted first, the sine
//! branch second.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Purpose tags that separate the key space.
pub mod tags {
    pub const WEIGHTS: u64 = 0x5745_4947_4854_5331;
    pub const INPUTS: u64 = 0x494e_5055_5453_0001;
    pub const FISHER: u64 = 0x4649_5348_4552_0001;
    pub const LIMITS: u64 = 0x4c49_4d49_5453_0001;
    pub const ORACLE: u64 = 0x4f52_4143_4c45_0001;
    pub const RELU_1D: u64 = 0x4c45_4d42_3100_0001;
    pub const TRAIN: u64 = 0x5452_4149_4e00_0001;
    pub const NOISE: u64 = 0x4e4f_4953_4500_0001;
    pub const TARGET: u64 = 0x5441_5247_4554_0001;
    pub const BOOTSTRAP: u64 = 0x424f_4f54_0000_0001;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// A single addressable stream of uniforms and standard normals.
#[derive(Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64, tag: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, tag));
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (n > 0), by rejection to avoid modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let r = self.rng.next_u64();
            if r <= zone {
                return r % n;
            }
        }
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for z in out.iter_mut() {
            *z = self.normal();
        }
    }
}

/// Rows of IID standard normal vectors, grouped into fixed-size chunks.
///
/// Sample `k` lives in chunk `k / CHUNK` at row `k % CHUNK`; each chunk draws its
/// rows from its own stream, so any chunk can be regenerated independently.
#[derive(Debug, Clone, Copy)]
pub struct GaussianRows {
    pub seed: u64,
    pub tag: u64,
    pub dim: usize,
}

/// Samples per Monte Carlo chunk.
pub const CHUNK: usize = 1024;

impl GaussianRows {
    pub fn new(seed: u64, tag: u64, dim: usize) -> Self {
        Self { seed, tag, dim }
    }

    /// Fills `out` (row-major, `len × dim`) with the first `len` rows of `chunk`.
    pub fn fill_chunk(&self, chunk: u64, len: usize, out: &mut [f64]) {
        debug_assert!(len <= CHUNK);
        let mut s = Stream::new(self.seed, self.tag, chunk);
        s.fill_normal(&mut out[..len * self.dim]);
    }

    /// Materializes rows `0..n` (used for small sample sets such as experiment inputs).
    pub fn rows(&self, n: usize) -> Vec<Vec<f64>> {
        let mut buf = vec![0.0; CHUNK * self.dim];
        let mut out = Vec::with_capacity(n);
        let mut chunk = 0u64;
        while out.len() < n {
            let len = CHUNK.min(n - out.len());
            self.fill_chunk(chunk, len, &mut buf);
            out.extend(buf[..len * self.dim].chunks(self.dim).map(<[f64]>::to_vec));
            chunk += 1;
        }
        out
    }
}
