//! Full-batch gradient descent on the output weights of the random-feature model.
//!
//! Two losses:
//!
//! * population: `L(v) = ½ (v − v*)ᵀ Ĵ (v − v*)` with `Ĵ` the explicit empirical Fisher matrix;
//! * empirical: `L(v) = 1/(2n) Σ_k (X(x_k)ᵀv − y_k)²` with `y_k = X(x_k)ᵀv* + ε_k`.
//!
//! Each iteration records the error expressed in Fisher-metric coordinates
//! `p_i(t) = ⟨v(t) − v*, Ĵ v_i⟩ / λ_i` for every basis vector `v_i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigenvectors::{basis_labels, build, BasisLabel, BasisVector};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::fim_metric::{empirical_fim_explicit, projection_sums};
use crate::linalg::{self, View};
use crate::rng::{tags, GaussianRows, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Population,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Unit vector drawn from the seed's target stream.
    RandomUnit,
    Vector(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct GdConfig {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    /// Training-set size (empirical) or Fisher sample count (population).
    pub n_train: usize,
    pub noise_std: f64,
    pub step: f64,
    pub iters: usize,
    pub target: Target,
    /// Starting point; zero when `None`.
    pub init: Option<Vec<f64>>,
    pub mode: Mode,
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::InvalidConfig { field: field.into(), reason: reason.into() });
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step", "must be a positive finite number");
        }
        if self.iters < 1 {
            return bad("iters", "must be at least 1");
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std", "must be non-negative");
        }
        if self.n_train < 1 {
            return bad("n_train", "must be at least 1");
        }
        for (name, v) in [("target", self.target_vector_opt()), ("init", self.init.as_deref())] {
            if let Some(v) = v {
                if v.len() != self.m {
                    return bad(name, &format!("length {} does not match m = {}", v.len(), self.m));
                }
            }
        }
        Ok(())
    }

    fn target_vector_opt(&self) -> Option<&[f64]> {
        match &self.target {
            Target::Vector(v) => Some(v),
            Target::RandomUnit => None,
        }
    }

    pub fn target_vector(&self) -> Vec<f64> {
        match &self.target {
            Target::Vector(v) => v.clone(),
            Target::RandomUnit => random_unit(self.m, self.seed),
        }
    }
}

pub fn random_unit(m: usize, seed: u64) -> Vec<f64> {
    let mut v = vec![0.0; m];
    Stream::new(seed, tags::TARGET, 0).fill_normal(&mut v);
    let n = linalg::norm(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub iter: usize,
    pub loss: f64,
    pub projections: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub mode: Mode,
    pub step: f64,
    pub labels: Vec<BasisLabel>,
    pub nominal: Vec<f64>,
    /// `v_iᵀĴv_i / v_iᵀv_i` for each basis vector.
    pub rayleigh: Vec<f64>,
    /// Top eigenvalue of `Ĵ` (population mode).
    pub lambda_max: Option<f64>,
    pub warning: Option<String>,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.projections[index]).collect()
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}

/// Basis recorded by default: `V0`, the rows, the diagonal and the pair vectors.
pub fn default_basis(fm: &FeatureMap) -> Result<Vec<BasisVector>> {
    basis_labels(fm.d()).into_iter().map(|l| build(fm, l)).collect()
}

pub fn run_gd(cfg: &GdConfig, fm: &FeatureMap) -> Result<Trajectory> {
    let basis = default_basis(fm)?;
    match cfg.mode {
        Mode::Population => {
            check_shape(cfg, fm)?;
            let fim = empirical_fim_explicit(fm, cfg.n_train, cfg.seed)?;
            run_population(cfg, &fim, &basis)
        }
        Mode::Empirical => run_empirical(cfg, fm, &basis),
    }
}

/// Population-mode run against a precomputed `Ĵ`.
pub fn run_gd_with_fim(cfg: &GdConfig, fm: &FeatureMap, fim: &DMatrix<f64>, basis: &[BasisVector]) -> Result<Trajectory> {
    check_shape(cfg, fm)?;
    if fim.nrows() != fm.m() || fim.ncols() != fm.m() {
        return Err(Error::InvalidDimension(format!("Fisher matrix is {}×{}, expected m = {}", fim.nrows(), fim.ncols(), fm.m())));
    }
    run_population(cfg, fim, basis)
}

fn check_shape(cfg: &GdConfig, fm: &FeatureMap) -> Result<()> {
    cfg.validate()?;
    if cfg.d != fm.d() || cfg.m != fm.m() {
        return Err(Error::InvalidConfig {
            field: "d/m".into(),
            reason: format!("config says {}×{}, feature map is {}×{}", cfg.d, cfg.m, fm.d(), fm.m()),
        });
    }
    Ok(())
}

fn packed(basis: &[BasisVector], m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(basis.len() * m);
    basis.iter().for_each(|b| out.extend_from_slice(&b.values));
    out
}

fn run_population(cfg: &GdConfig, fim: &DMatrix<f64>, basis: &[BasisVector]) -> Result<Trajectory> {
    let m = cfg.m;
    let k = basis.len();
    let target = DVector::from_vec(cfg.target_vector());
    let mut v = DVector::from_vec(cfg.init.clone().unwrap_or_else(|| vec![0.0; m]));
    let vecs = packed(basis, m);
    // Row t of `jb` is (Ĵ v_t)ᵀ.
    let mut jb = vec![0.0; k * m];
    linalg::gemm(1.0, View::row_major(&vecs, k, m), View::col_major(fim.as_slice(), m, m), 0.0, &mut jb, m);
    let nominal: Vec<f64> = basis.iter().map(|b| b.nominal_eigenvalue).collect();
    let rayleigh: Vec<f64> = (0..k)
        .map(|t| {
            let b = &vecs[t * m..(t + 1) * m];
            linalg::dot(b, &jb[t * m..(t + 1) * m]) / linalg::dot(b, b)
        })
        .collect();
    let lambda_max = linalg::largest_eigenvalue_psd(fim);
    let warning = (cfg.step >= 2.0 / lambda_max)
        .then(|| format!("step {} ≥ 2/λ̂_max = {}; population gradient descent diverges", cfg.step, 2.0 / lambda_max));
    let jb_view = View::row_major(&jb, k, m);
    let mut records = Vec::with_capacity(cfg.iters + 1);
    let mut proj = vec![0.0; k];
    for iter in 0..=cfg.iters {
        let e = &v - &target;
        let grad = fim * &e;
        let loss = 0.5 * e.dot(&grad);
        linalg::gemm(1.0, jb_view, View::col_major(e.as_slice(), m, 1), 0.0, &mut proj, 1);
        records.push(TrajectoryRecord { iter, loss, projections: proj.iter().zip(&nominal).map(|(p, l)| p / l).collect() });
        if iter < cfg.iters {
            v.axpy(-cfg.step, &grad, 1.0);
        }
    }
    Ok(Trajectory {
        mode: Mode::Population,
        step: cfg.step,
        labels: basis.iter().map(|b| b.label).collect(),
        nominal,
        rayleigh,
        lambda_max: Some(lambda_max),
        warning,
        records,
    })
}

/// Training set `(X, y)`: activations row-major `n × m` and noisy targets.
pub fn training_set(cfg: &GdConfig, fm: &FeatureMap, target: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, m, d) = (cfg.n_train, fm.m(), fm.d());
    let xs: Vec<f64> = GaussianRows::new(cfg.seed, tags::TRAIN, d).rows(n).concat();
    let mut acts = vec![0.0; n * m];
    fm.activate_batch(&xs, n, &mut acts);
    let mut y = vec![0.0; n];
    linalg::gemm(1.0, View::row_major(&acts, n, m), View::col_major(target, m, 1), 0.0, &mut y, 1);
    if cfg.noise_std > 0.0 {
        let mut noise = Stream::new(cfg.seed, tags::NOISE, 0);
        y.iter_mut().for_each(|yk| *yk += cfg.noise_std * noise.normal());
    }
    (acts, y)
}

fn run_empirical(cfg: &GdConfig, fm: &FeatureMap, basis: &[BasisVector]) -> Result<Trajectory> {
    cfg.validate()?;
    let (n, m, k) = (cfg.n_train, fm.m(), basis.len());
    let target = cfg.target_vector();
    let (acts, y) = training_set(cfg, fm, &target);
    let x = View::row_major(&acts, n, m);
    let vecs = packed(basis, m);
    // F = X·V, so that ⟨e, Ĵ_train v_i⟩ = (Xe)ᵀF_i / n.
    let mut f = vec![0.0; n * k];
    linalg::gemm(1.0, x, View::row_major(&vecs, k, m).t(), 0.0, &mut f, k);
    let nominal: Vec<f64> = basis.iter().map(|b| b.nominal_eigenvalue).collect();
    let rayleigh: Vec<f64> = (0..k)
        .map(|t| {
            let b = &vecs[t * m..(t + 1) * m];
            (0..n).map(|r| f[r * k + t] * f[r * k + t]).sum::<f64>() / n as f64 / linalg::dot(b, b)
        })
        .collect();
    let mut v = cfg.init.clone().unwrap_or_else(|| vec![0.0; m]);
    let e_of = |v: &[f64]| -> Vec<f64> { v.iter().zip(&target).map(|(a, b)| a - b).collect() };
    let inv_n = 1.0 / n as f64;
    let mut resid = vec![0.0; n];
    let mut xe = vec![0.0; n];
    let mut grad = vec![0.0; m];
    let mut proj = vec![0.0; k];
    let mut records = Vec::with_capacity(cfg.iters + 1);
    for iter in 0..=cfg.iters {
        resid.copy_from_slice(&y);
        linalg::gemm(1.0, x, View::col_major(&v, m, 1), -1.0, &mut resid, 1);
        let loss = 0.5 * inv_n * resid.iter().map(|r| r * r).sum::<f64>();
        let e = e_of(&v);
        linalg::gemm(1.0, x, View::col_major(&e, m, 1), 0.0, &mut xe, 1);
        linalg::gemm(inv_n, View::row_major(&f, n, k).t(), View::col_major(&xe, n, 1), 0.0, &mut proj, 1);
        records.push(TrajectoryRecord { iter, loss, projections: proj.iter().zip(&nominal).map(|(p, l)| p / l).collect() });
        if iter < cfg.iters {
            linalg::gemm(inv_n, x.t(), View::col_major(&resid, n, 1), 0.0, &mut grad, 1);
            v.iter_mut().zip(&grad).for_each(|(a, g)| *a -= cfg.step * g);
        }
    }
    Ok(Trajectory {
        mode: Mode::Empirical,
        step: cfg.step,
        labels: basis.iter().map(|b| b.label).collect(),
        nominal,
        rayleigh,
        lambda_max: None,
        warning: None,
        records,
    })
}

/// Empirical-loss gradient `(1/n) Xᵀ(Xv − y)`.
pub fn empirical_gradient(acts: &[f64], y: &[f64], v: &[f64]) -> Vec<f64> {
    let (n, m) = (y.len(), v.len());
    let x = View::row_major(acts, n, m);
    let mut resid = y.to_vec();
    linalg::gemm(1.0, x, View::col_major(v, m, 1), -1.0, &mut resid, 1);
    let mut grad = vec![0.0; m];
    linalg::gemm(1.0 / n as f64, x.t(), View::col_major(&resid, n, 1), 0.0, &mut grad, 1);
    grad
}

/// Fraction of iterations discarded before fitting.
pub const TRANSIENT_FRACTION: f64 = 0.1;
/// Points closer to zero than this fraction of the series' peak are treated as noise.
pub const RELATIVE_NOISE_FLOOR: f64 = 1e-10;
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `log|p(t)|` against `t`.
    pub rate: f64,
    pub intercept: f64,
    pub points: usize,
}

impl RateFit {
    /// Iterations for `|p|` to halve under the fitted rate.
    pub fn half_life(&self) -> f64 {
        if self.rate < 0.0 {
            -std::f64::consts::LN_2 / self.rate
        } else {
            f64::INFINITY
        }
    }
}

/// Least-squares log-decay rate of a series, after the transient and above the noise floor.
pub fn rate_fit_series(series: &[f64]) -> Result<RateFit> {
    let peak = series.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    if !(peak > 0.0) {
        return Err(Error::Unfittable("series is identically zero".into()));
    }
    let floor = peak * RELATIVE_NOISE_FLOOR;
    let start = (series.len() as f64 * TRANSIENT_FRACTION).ceil() as usize;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, p)| p.abs() > floor && p.is_finite())
        .map(|(t, p)| (t as f64, p.abs().ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Unfittable(format!("{} post-transient points above the noise floor, need {MIN_FIT_POINTS}", pts.len())));
    }
    let n = pts.len() as f64;
    let (mt, ml) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + t / n, b + l / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + (t - mt) * (l - ml), b + (t - mt) * (t - mt)));
    let rate = sxy / sxx;
    Ok(RateFit { rate, intercept: ml - rate * mt, points: pts.len() })
}

pub fn rate_fit(traj: &Trajectory, basis_index: usize) -> Result<RateFit> {
    if basis_index >= traj.labels.len() {
        return Err(Error::IndexOutOfRange { what: "basis", index: basis_index, lo: 0, hi: traj.labels.len().saturating_sub(1) });
    }
    rate_fit_series(&traj.series(basis_index))
}

/// First iteration at which `|p(t)| ≤ |p(0)|/2`, or the peak if `p(0) = 0`.
pub fn observed_half_life(series: &[f64]) -> Option<usize> {
    let start = series.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    series.iter().position(|p| p.abs() <= 0.5 * start && start > 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Expansion {
    pub labels: Vec<BasisLabel>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    /// `⟨f_v, f_v⟩` under the same samples.
    pub norm_sq: f64,
    pub warning: Option<String>,
}

impl Expansion {
    pub fn relative_residual_sq(&self) -> f64 {
        if self.norm_sq > 0.0 {
            self.residual_norm * self.residual_norm / self.norm_sq
        } else {
            0.0
        }
    }
}

/// Smallest `λ_min/λ_max` of the Gram matrix accepted before declaring rank deficiency.
pub const GRAM_CONDITION_FLOOR: f64 = 1e-10;

/// Least-squares expansion of `f_v` on `span{f_{v_i}}` in the Monte Carlo inner product.
pub fn expand_in_basis(fm: &FeatureMap, v: &[f64], basis: &[BasisVector], n_samples: usize, seed: u64) -> Result<Expansion> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_samples });
    }
    let k = basis.len();
    let mut vectors: Vec<&[f64]> = basis.iter().map(|b| b.values.as_slice()).collect();
    vectors.push(v);
    let sums = projection_sums(fm, &vectors, n_samples, seed)?;
    let at = |i: usize, j: usize| sums.cross[i * (k + 1) + j] / n_samples as f64;
    let gram = DMatrix::from_fn(k, k, |i, j| at(i, j));
    let rhs = DVector::from_fn(k, |i, _| at(i, k));
    let norm_sq = at(k, k);
    let ev = linalg::symmetric_eigenvalues_desc(&gram);
    let (hi, lo) = (ev.first().copied().unwrap_or(0.0), ev.last().copied().unwrap_or(0.0));
    let condition = if hi > 0.0 { lo / hi } else { 0.0 };
    if k > 0 && condition < GRAM_CONDITION_FLOOR {
        return Err(Error::RankDeficient { condition });
    }
    let coefficients = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => return Err(Error::RankDeficient { condition }),
    };
    let captured = coefficients.dot(&rhs);
    let vn = linalg::norm(v);
    Ok(Expansion {
        labels: basis.iter().map(|b| b.label).collect(),
        coefficients: coefficients.iter().copied().collect(),
        residual_norm: (norm_sq - captured).max(0.0).sqrt(),
        norm_sq,
        // Rounding allowance so unit vectors do not warn.
        warning: (vn > 1.0 + 1e-12).then(|| format!("‖v‖ = {vn} exceeds 1; the remainder bound assumes ‖v‖ ≤ 1")),
    })
}
