//! The frozen random first layer and its ReLU feature map `X(x) = σ(xᵀW)`.

use crate::error::{Error, Result};
use crate::linalg::{self, View};
use crate::rng::{tags, Stream};

/// Frozen first-layer weights `W ∈ ℝ^{d×m}` with IID `N(0, 1/m)` entries.
///
/// Storage is column-major by hidden unit: the `d` weights feeding hidden unit `i`
/// (the column `W⁽ⁱ⁾`) are contiguous at `weights[i*d .. (i+1)*d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    d: usize,
    m: usize,
    weights: Vec<f64>,
    seed: Option<u64>,
}

/// Non-negative activation vector `X(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Activation(Vec<f64>);

impl Activation {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl FeatureMap {
    /// Draws `W` with entries `N(0, 1/m)`.
    ///
    /// Column `i` is stream `i` of the weight key, so `W` for a larger `m` shares
    /// its leading columns (up to the `1/√m` scale) with `W` for a smaller `m`.
    pub fn generate(d: usize, m: usize, seed: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidDimension(format!("d = {d}, m = {m}; both must be ≥ 1")));
        }
        let scale = 1.0 / (m as f64).sqrt();
        let mut weights = vec![0.0; d * m];
        let fill = |(i, col): (usize, &mut [f64])| {
            let mut s = Stream::new(seed, tags::WEIGHTS, i as u64);
            for w in col.iter_mut() {
                *w = s.normal() * scale;
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            weights.par_chunks_mut(d).enumerate().for_each(fill);
        }
        #[cfg(not(feature = "parallel"))]
        weights.chunks_mut(d).enumerate().for_each(fill);
        Ok(Self { d, m, weights, seed: Some(seed) })
    }

    /// Builds a feature map from explicit rows `W_1, …, W_d` (each of length `m`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if d == 0 || m == 0 {
            return Err(Error::InvalidDimension("empty weight matrix".into()));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidDimension("ragged weight rows".into()));
        }
        if rows.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::InvalidDimension("non-finite weight".into()));
        }
        let mut weights = vec![0.0; d * m];
        for (j, row) in rows.iter().enumerate() {
            for (i, &w) in row.iter().enumerate() {
                weights[i * d + j] = w;
            }
        }
        Ok(Self { d, m, weights, seed: None })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Raw column-major storage (`weights[i*d + j] = W_{j,i}`).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Column `W⁽ⁱ⁾` (0-based hidden unit).
    pub fn column(&self, i: usize) -> &[f64] {
        &self.weights[i * self.d..(i + 1) * self.d]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.d)
    }

    /// Row `W_j` (0-based input coordinate).
    pub fn row(&self, j: usize) -> Vec<f64> {
        self.columns().map(|c| c[j]).collect()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.columns().map(linalg::norm).collect()
    }

    /// The matrix as a `d × m` strided view.
    pub(crate) fn view(&self) -> View<'_> {
        View { data: &self.weights, rows: self.d, cols: self.m, rs: 1, cs: self.d }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::InvalidDimension(format!("input has length {}, expected d = {}", x.len(), self.d)));
        }
        Ok(())
    }

    pub fn activate(&self, x: &[f64]) -> Result<Activation> {
        self.check_input(x)?;
        Ok(Activation(self.columns().map(|c| linalg::dot(x, c).max(0.0)).collect()))
    }

    /// `f_v(x) = X(x)ᵀ v` for a raw m-vector.
    pub fn eval_vector(&self, v: &[f64], x: &[f64]) -> Result<f64> {
        if v.len() != self.m {
            return Err(Error::InvalidDimension(format!("vector has length {}, expected m = {}", v.len(), self.m)));
        }
        self.check_input(x)?;
        Ok(self.columns().zip(v).map(|(c, vi)| linalg::dot(x, c).max(0.0) * vi).sum())
    }

    pub fn eval_basis(&self, v: &crate::eigenvectors::BasisVector, x: &[f64]) -> Result<f64> {
        self.eval_vector(&v.values, x)
    }

    /// Activations for a row-major batch `xs` (`n × d`), written row-major into `out` (`n × m`).
    pub fn activate_batch(&self, xs: &[f64], n: usize, out: &mut [f64]) {
        assert_eq!(xs.len(), n * self.d);
        assert!(out.len() >= n * self.m);
        linalg::gemm(1.0, View::row_major(xs, n, self.d), self.view(), 0.0, out, self.m);
        for a in &mut out[..n * self.m] {
            *a = a.max(0.0);
        }
    }

    /// Spectral norm `‖W‖`, via the largest eigenvalue of the `d × d` matrix `W Wᵀ`.
    pub fn spectral_norm(&self) -> f64 {
        let mut g = vec![0.0; self.d * self.d];
        linalg::gemm(1.0, self.view(), self.view().t(), 0.0, &mut g, self.d);
        let g = nalgebra::DMatrix::from_row_slice(self.d, self.d, &g);
        linalg::symmetric_eigenvalues_desc(&g)[0].max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shape_and_finiteness() {
        let fm = FeatureMap::generate(2, 4, 42).unwrap();
        assert_eq!((fm.d(), fm.m()), (2, 4));
        assert_eq!(fm.weights().len(), 8);
        assert!(fm.weights().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let a = FeatureMap::generate(3, 8, 7).unwrap();
        let b = FeatureMap::generate(3, 8, 7).unwrap();
        assert_eq!(a.weights(), b.weights());
        let c = FeatureMap::generate(3, 8, 8).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(matches!(FeatureMap::generate(0, 4, 1), Err(Error::InvalidDimension(_))));
        assert!(matches!(FeatureMap::generate(3, 0, 1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn wider_maps_share_leading_columns() {
        let small = FeatureMap::generate(4, 10, 3).unwrap();
        let big = FeatureMap::generate(4, 40, 3).unwrap();
        let ratio = (40.0f64 / 10.0).sqrt();
        for (a, b) in small.weights().iter().zip(big.weights()) {
            assert!((a - b * ratio).abs() < 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn entry_variance_is_one_over_m() {
        // d = 10, m = 10_000: the sample variance of 10^5 entries sits within 3 CLT sigmas of 1/m.
        let (d, m) = (10, 10_000);
        let fm = FeatureMap::generate(d, m, 2024).unwrap();
        let n = (d * m) as f64;
        let mean = fm.weights().iter().sum::<f64>() / n;
        let var = fm.weights().iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = 1.0 / m as f64;
        // Var of the sample variance of Gaussians: 2σ⁴/(n-1).
        let clt_sigma = target * (2.0 / (n - 1.0)).sqrt();
        assert!((var - target).abs() < 3.0 * clt_sigma, "var {var} vs {target}");
        assert!(mean.abs() < 5.0 * (target / n).sqrt());
    }

    #[test]
    fn moments_over_regenerations() {
        // Pool the entry mean and variance over 200 seeds; each must stay within 5 CLT sigmas.
        let (d, m) = (3, 50);
        let seeds = 200;
        let (mut s1, mut s2, mut count) = (0.0, 0.0, 0.0);
        for seed in 0..seeds {
            for &w in FeatureMap::generate(d, m, seed).unwrap().weights() {
                s1 += w;
                s2 += w * w;
                count += 1.0;
            }
        }
        let target = 1.0 / m as f64;
        let mean = s1 / count;
        let var = s2 / count - mean * mean;
        assert!(mean.abs() < 5.0 * (target / count).sqrt());
        assert!((var - target).abs() < 5.0 * target * (2.0 / count).sqrt());
    }

    #[test]
    fn hand_checked_relu() {
        let fm = FeatureMap::from_rows(&[vec![1.0, -1.0]]).unwrap();
        assert_eq!(fm.activate(&[2.0]).unwrap().values(), &[2.0, 0.0]);
    }

    #[test]
    fn zero_input_gives_zero_activation() {
        let fm = FeatureMap::generate(5, 16, 1).unwrap();
        assert!(fm.activate(&[0.0; 5]).unwrap().values().iter().all(|&a| a == 0.0));
        let v: Vec<f64> = (0..16).map(|i| i as f64 - 3.0).collect();
        assert_eq!(fm.eval_vector(&v, &[0.0; 5]).unwrap(), 0.0);
        assert_eq!(fm.eval_vector(&[0.0; 16], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatches_rejected() {
        let fm = FeatureMap::generate(3, 4, 1).unwrap();
        assert!(matches!(fm.activate(&[1.0, 2.0]), Err(Error::InvalidDimension(_))));
        assert!(matches!(fm.eval_vector(&[1.0; 3], &[1.0; 3]), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn batch_activation_matches_single() {
        let fm = FeatureMap::generate(4, 9, 5).unwrap();
        let xs: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; 3 * 9];
        fm.activate_batch(&xs, 3, &mut out);
        for r in 0..3 {
            let single = fm.activate(&xs[r * 4..(r + 1) * 4]).unwrap();
            for (a, b) in single.values().iter().zip(&out[r * 9..(r + 1) * 9]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectral_norm_of_known_matrix() {
        let fm = FeatureMap::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!((fm.spectral_norm() - 4.0).abs() < 1e-12);
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, n)
    }

    proptest! {
        #[test]
        fn activation_is_nonnegative_and_homogeneous(x in vec_strategy(6), c in 0.01f64..50.0) {
            let fm = FeatureMap::generate(6, 32, 9).unwrap();
            let a = fm.activate(&x).unwrap();
            prop_assert!(a.values().iter().all(|&v| v >= 0.0));
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            let b = fm.activate(&cx).unwrap();
            for (p, q) in a.values().iter().zip(b.values()) {
                prop_assert!((c * p - q).abs() <= 1e-12 * (1.0 + q.abs()));
            }
        }

        #[test]
        fn activation_is_lipschitz(x in vec_strategy(6), y in vec_strategy(6)) {
            let fm = FeatureMap::generate(6, 32, 9).unwrap();
            let a = fm.activate(&x).unwrap();
            let b = fm.activate(&y).unwrap();
            let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(p, q)| p - q).collect();
            let dx: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
            prop_assert!(linalg::norm(&diff) <= fm.spectral_norm() * linalg::norm(&dx) + 1e-12);
        }

        #[test]
        fn evaluation_is_linear_in_v(x in vec_strategy(4), u in vec_strategy(20), w in vec_strategy(20), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let fm = FeatureMap::generate(4, 20, 13).unwrap();
            let combo: Vec<f64> = u.iter().zip(&w).map(|(p, q)| a * p + b * q).collect();
            let lhs = fm.eval_vector(&combo, &x).unwrap();
            let rhs = a * fm.eval_vector(&u, &x).unwrap() + b * fm.eval_vector(&w, &x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
