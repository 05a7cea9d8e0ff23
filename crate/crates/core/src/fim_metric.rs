//! Fisher information matrix `J = E[X(x)X(x)ᵀ]` over `x ~ N(0, I_d)` and the
//! function-space inner product `⟨f_u, f_v⟩ = E[f_u(x) f_v(x)] = uᵀJv`.
//!
//! Two modes:
//!
//! * matrix-free: Monte Carlo inner products of any set of m-vectors, for any `m`;
//! * explicit: the dense `m × m` estimate `Ĵ`, refused above a width cap.
//!
//! Both draw inputs from the same counter-based stream for a given seed, so
//! `uᵀĴv` and the matrix-free estimate of `⟨f_u, f_v⟩` agree up to summation order.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigenvectors::{basis_labels, build, cluster_eigenvalues, BasisVector};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::linalg::{self, View};
pub use crate::mc::InnerProductEstimate;
use crate::mc::{mean_and_se, reduce_chunks, CHUNK};
use crate::rng::{tags, GaussianRows};

/// Largest width for which the dense Fisher matrix is formed by default.
pub const DEFAULT_EXPLICIT_CAP: usize = 2048;

/// Activation rows processed per GEMM call (bounded so `rows × m` stays near 4M entries).
fn row_block(m: usize) -> usize {
    (4_000_000 / m.max(1)).clamp(1, CHUNK)
}

fn input_rows(fm: &FeatureMap, seed: u64) -> GaussianRows {
    GaussianRows::new(seed, tags::FISHER, fm.d())
}

/// Sums of `f_i f_j` and `(f_i f_j)²` over the sample stream, for `k` vectors.
#[derive(Debug, Clone)]
pub struct ProjectionSums {
    pub n: usize,
    pub k: usize,
    /// Row-major `k × k`.
    pub cross: Vec<f64>,
    pub cross_sq: Vec<f64>,
}

impl ProjectionSums {
    fn zeros(k: usize) -> Self {
        Self { n: 0, k, cross: vec![0.0; k * k], cross_sq: vec![0.0; k * k] }
    }

    fn merge(mut self, o: Self) -> Self {
        self.n += o.n;
        self.cross.iter_mut().zip(&o.cross).for_each(|(a, b)| *a += b);
        self.cross_sq.iter_mut().zip(&o.cross_sq).for_each(|(a, b)| *a += b);
        self
    }

    pub fn estimate(&self, i: usize, j: usize, seed: u64) -> InnerProductEstimate {
        let idx = i * self.k + j;
        mean_and_se(self.cross[idx], self.cross_sq[idx], self.n, seed)
    }
}

/// One pass over `n` inputs: all `f_{v_i}(x)` are evaluated on the same `x` before
/// the pairwise products are accumulated.
pub fn projection_sums(fm: &FeatureMap, vectors: &[&[f64]], n: usize, seed: u64) -> Result<ProjectionSums> {
    let (d, m, k) = (fm.d(), fm.m(), vectors.len());
    if let Some(v) = vectors.iter().find(|v| v.len() != m) {
        return Err(Error::InvalidDimension(format!("vector has length {}, expected m = {m}", v.len())));
    }
    let mut packed = Vec::with_capacity(k * m);
    for v in vectors {
        packed.extend_from_slice(v);
    }
    let basis = View { data: &packed, rows: m, cols: k, rs: 1, cs: m };
    let rows = input_rows(fm, seed);
    let rb = row_block(m);
    let sums = reduce_chunks(
        n,
        |chunk, len| {
            let mut xs = vec![0.0; len * d];
            rows.fill_chunk(chunk, len, &mut xs);
            let mut acts = vec![0.0; rb.min(len) * m];
            let mut f = vec![0.0; rb.min(len) * k];
            let mut f2 = vec![0.0; rb.min(len) * k];
            let mut acc = ProjectionSums::zeros(k);
            acc.n = len;
            let mut r0 = 0;
            while r0 < len {
                let r = rb.min(len - r0);
                fm.activate_batch(&xs[r0 * d..(r0 + r) * d], r, &mut acts);
                linalg::gemm(1.0, View::row_major(&acts[..r * m], r, m), basis, 0.0, &mut f, k);
                for (a, b) in f2.iter_mut().zip(&f[..r * k]) {
                    *a = b * b;
                }
                let fv = View::row_major(&f[..r * k], r, k);
                let f2v = View::row_major(&f2[..r * k], r, k);
                linalg::gemm(1.0, fv.t(), fv, 1.0, &mut acc.cross, k);
                linalg::gemm(1.0, f2v.t(), f2v, 1.0, &mut acc.cross_sq, k);
                r0 += r;
            }
            acc
        },
        ProjectionSums::merge,
    );
    Ok(sums.unwrap_or_else(|| ProjectionSums::zeros(k)))
}

/// Monte Carlo estimate of `⟨f_u, f_v⟩ = E[(X(x)ᵀu)(X(x)ᵀv)]`.
pub fn inner_product_mc(fm: &FeatureMap, u: &[f64], v: &[f64], n_samples: usize, seed: u64) -> Result<InnerProductEstimate> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_samples });
    }
    let sums = projection_sums(fm, &[u, v], n_samples, seed)?;
    Ok(sums.estimate(0, 1, seed))
}

/// Dense `Ĵ = (1/n)·Σ X(x_k)X(x_k)ᵀ`, symmetric by construction.
pub fn empirical_fim_explicit(fm: &FeatureMap, n_samples: usize, seed: u64) -> Result<DMatrix<f64>> {
    empirical_fim_explicit_with_cap(fm, n_samples, seed, DEFAULT_EXPLICIT_CAP)
}

pub fn empirical_fim_explicit_with_cap(fm: &FeatureMap, n_samples: usize, seed: u64, cap: usize) -> Result<DMatrix<f64>> {
    let (d, m) = (fm.d(), fm.m());
    if m > cap {
        return Err(Error::ExplicitModeRefused { m, cap });
    }
    if n_samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    const BLOCK: usize = 256;
    let rows = input_rows(fm, seed);
    let mut acc = vec![0.0; m * m];
    let mut xs = vec![0.0; CHUNK * d];
    let mut acts = vec![0.0; CHUNK * m];
    for chunk in 0..n_samples.div_ceil(CHUNK) {
        let len = CHUNK.min(n_samples - chunk * CHUNK);
        rows.fill_chunk(chunk as u64, len, &mut xs);
        fm.activate_batch(&xs[..len * d], len, &mut acts);
        // Upper block triangle of XᵀX only.
        for b0 in (0..m).step_by(BLOCK) {
            let bw = BLOCK.min(m - b0);
            let left = View { data: &acts[b0..], rows: len, cols: bw, rs: m, cs: 1 };
            for c0 in (b0..m).step_by(BLOCK) {
                let cw = BLOCK.min(m - c0);
                let right = View { data: &acts[c0..], rows: len, cols: cw, rs: m, cs: 1 };
                linalg::gemm(1.0, left.t(), right, 1.0, &mut acc[b0 * m + c0..], m);
            }
        }
    }
    let scale = 1.0 / n_samples as f64;
    let mut j = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in r..m {
            // Inside a diagonal block both triangles were accumulated; keep the upper one.
            let v = acc[r * m + c] * scale;
            j[(r, c)] = v;
            j[(c, r)] = v;
        }
    }
    Ok(j)
}

/// Pairwise Fisher inner products of a set of basis vectors.
#[derive(Debug, Clone, Serialize)]
pub struct GramSummary {
    pub labels: Vec<String>,
    pub gram: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub nominal: Vec<f64>,
    pub max_offdiag_abs: f64,
    /// Largest `|G_ij| / SE_ij` over off-diagonal entries.
    pub max_offdiag_z: f64,
    /// Largest `|G_ii/λ_i − 1|`.
    pub max_diag_reldev: f64,
    pub min_eigenvalue: f64,
    /// `√(Σ SE_ij²)` over all entries; scale for the PSD tolerance.
    pub aggregate_std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl GramSummary {
    /// Smallest eigenvalue above `−4 × aggregate standard error`.
    pub fn is_psd_within_noise(&self) -> bool {
        self.min_eigenvalue > -4.0 * self.aggregate_std_error
    }

    pub fn diag_ratio(&self, i: usize) -> f64 {
        self.gram[i][i] / self.nominal[i]
    }
}

pub fn gram_summary(fm: &FeatureMap, basis: &[BasisVector], n_samples: usize, seed: u64) -> Result<GramSummary> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_samples });
    }
    let vectors: Vec<&[f64]> = basis.iter().map(|b| b.values.as_slice()).collect();
    let sums = projection_sums(fm, &vectors, n_samples, seed)?;
    let k = basis.len();
    let mut gram = vec![vec![0.0; k]; k];
    let mut se = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let e = sums.estimate(i.min(j), i.max(j), seed);
            gram[i][j] = e.value;
            se[i][j] = e.std_error;
        }
    }
    let nominal: Vec<f64> = basis.iter().map(|b| b.nominal_eigenvalue).collect();
    let (mut max_off, mut max_z, mut max_dev, mut agg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..k {
        max_dev = max_dev.max((gram[i][i] / nominal[i] - 1.0).abs());
        for j in 0..k {
            agg += se[i][j] * se[i][j];
            if i != j {
                max_off = max_off.max(gram[i][j].abs());
                let z = if se[i][j] > 0.0 { gram[i][j].abs() / se[i][j] } else { 0.0 };
                max_z = max_z.max(z);
            }
        }
    }
    let g = DMatrix::from_fn(k, k, |i, j| gram[i][j]);
    let min_eigenvalue = linalg::symmetric_eigenvalues_desc(&g).last().copied().unwrap_or(0.0);
    Ok(GramSummary {
        labels: basis.iter().map(|b| b.label.to_string()).collect(),
        gram,
        std_error: se,
        nominal,
        max_offdiag_abs: max_off,
        max_offdiag_z: max_z,
        max_diag_reldev: max_dev,
        min_eigenvalue,
        aggregate_std_error: agg.sqrt(),
        n_samples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cluster {
    Top,
    Second,
    Third,
    /// Outside every band (the small-eigenvalue tail).
    Unassigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClusterCounts {
    pub top: usize,
    pub second: usize,
    pub third: usize,
    pub rest: usize,
}

impl ClusterCounts {
    fn add(&mut self, c: Cluster) {
        match c {
            Cluster::Top => self.top += 1,
            Cluster::Second => self.second += 1,
            Cluster::Third => self.third += 1,
            Cluster::Unassigned => self.rest += 1,
        }
    }

    /// `[1, d, d(d+1)/2 − 1]` clusters, the remaining `m − d − d(d+1)/2` eigenvalues in the tail.
    pub fn expected(d: usize, m: usize) -> Self {
        let third = (d * (d + 1) / 2).saturating_sub(1);
        let top = 1.min(m);
        let second = d.min(m - top);
        let third = third.min(m - top - second);
        Self { top, second, third, rest: m - top - second - third }
    }
}

/// Relative half-width of the cluster bands.
pub const CLUSTER_BAND: f64 = 0.2;

/// Band assignment: `λ ∈ [(1−b)ν, (1+b)ν]`; overlapping bands resolve to the larger `ν`.
pub fn band_cluster(lambda: f64, d: usize) -> Cluster {
    let [top, second, third] = cluster_eigenvalues(d);
    let inside = |nu: f64| lambda >= (1.0 - CLUSTER_BAND) * nu && lambda <= (1.0 + CLUSTER_BAND) * nu;
    [(top, Cluster::Top), (second, Cluster::Second), (third, Cluster::Third)]
        .into_iter()
        .filter(|(nu, _)| inside(*nu))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(Cluster::Unassigned, |(_, c)| c)
}

/// Nearest nominal value on a log scale; anything below a tenth of the third
/// cluster value counts as the tail.
pub fn nearest_cluster(lambda: f64, d: usize) -> Cluster {
    let [top, second, third] = cluster_eigenvalues(d);
    if lambda < 0.1 * third {
        return Cluster::Unassigned;
    }
    let l = lambda.ln();
    [(top, Cluster::Top), (second, Cluster::Second), (third, Cluster::Third)]
        .into_iter()
        .min_by(|a, b| (a.0.ln() - l).abs().total_cmp(&(b.0.ln() - l).abs()))
        .map(|(_, c)| c)
        .unwrap_or(Cluster::Unassigned)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub d: usize,
    pub m: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// `[(2d+1)/4π, 1/4, 1/(2π(d+2))]`
    pub nominal: [f64; 3],
    pub band: f64,
    /// Eigenvalues of `Ĵ`, descending.
    pub eigenvalues: Vec<f64>,
    pub cluster_assignment: Vec<Cluster>,
    pub band_counts: ClusterCounts,
    pub nearest_counts: ClusterCounts,
    pub expected_counts: ClusterCounts,
    /// Spectral norm of `Ĵ − Σ λ_nominal v vᵀ` over the decomposition basis.
    pub residual_opnorm: f64,
    pub min_over_max_eigenvalue: f64,
}

/// `Ĵ − Σ_t λ_t v_t v_tᵀ` over the decomposition basis (`V0`, rows, diagonal and pair vectors).
pub fn decomposition_residual_matrix(fm: &FeatureMap, fim: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = fm.m();
    let basis = basis_labels(fm.d()).into_iter().map(|l| build(fm, l)).collect::<Result<Vec<_>>>()?;
    let k = basis.len();
    let mut plain = Vec::with_capacity(k * m);
    let mut scaled = Vec::with_capacity(k * m);
    for b in &basis {
        plain.extend_from_slice(&b.values);
        scaled.extend(b.values.iter().map(|v| v * b.nominal_eigenvalue));
    }
    // Row-major copy of Ĵ (symmetric, so the column-major buffer already is one).
    let mut r: Vec<f64> = fim.as_slice().to_vec();
    linalg::gemm(-1.0, View::row_major(&plain, k, m).t(), View::row_major(&scaled, k, m), 1.0, &mut r, m);
    let mut out = DMatrix::from_row_slice(m, m, &r);
    linalg::symmetrize(&mut out);
    Ok(out)
}

pub fn decomposition_residual(fm: &FeatureMap, n_samples: usize, seed: u64) -> Result<SpectrumReport> {
    decomposition_residual_with_cap(fm, n_samples, seed, DEFAULT_EXPLICIT_CAP)
}

pub fn decomposition_residual_with_cap(fm: &FeatureMap, n_samples: usize, seed: u64, cap: usize) -> Result<SpectrumReport> {
    let fim = empirical_fim_explicit_with_cap(fm, n_samples, seed, cap)?;
    spectrum_report(fm, &fim, n_samples, seed)
}

/// Clusters the spectrum of a precomputed `Ĵ` and measures the decomposition residual.
pub fn spectrum_report(fm: &FeatureMap, fim: &DMatrix<f64>, n_samples: usize, seed: u64) -> Result<SpectrumReport> {
    let (d, m) = (fm.d(), fm.m());
    let eigenvalues = linalg::symmetric_eigenvalues_desc(fim);
    let cluster_assignment: Vec<Cluster> = eigenvalues.iter().map(|&l| band_cluster(l, d)).collect();
    let mut band_counts = ClusterCounts::default();
    cluster_assignment.iter().for_each(|&c| band_counts.add(c));
    let mut nearest_counts = ClusterCounts::default();
    eigenvalues.iter().for_each(|&l| nearest_counts.add(nearest_cluster(l, d)));
    let residual = decomposition_residual_matrix(fm, fim)?;
    let res_ev = linalg::symmetric_eigenvalues_desc(&residual);
    let residual_opnorm = res_ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let min = eigenvalues.last().copied().unwrap_or(0.0);
    Ok(SpectrumReport {
        d,
        m,
        n_samples,
        seed,
        nominal: cluster_eigenvalues(d),
        band: CLUSTER_BAND,
        eigenvalues,
        cluster_assignment,
        band_counts,
        nearest_counts,
        expected_counts: ClusterCounts::expected(d, m),
        residual_opnorm,
        min_over_max_eigenvalue: if max > 0.0 { min / max } else { 0.0 },
    })
}
