//! Approximate eigenvectors of the Fisher information matrix.
//!
//! Three eigenvalue clusters, four vector families (indices are 1-based, as in the
//! usual notation `l, γ ∈ 1..=d`):
//!
//! | family | vectors | nominal eigenvalue |
//! |---|---|---|
//! | `V0` (G1) | `‖W⁽ⁱ⁾‖/√d` | `(2d+1)/4π` |
//! | `Row(l)` (G2) | row `W_l` | `1/4` |
//! | `Diag(γ)`, γ < d (G3) | `ṽ⁽ᵞ⁾ − ṽ⁽ᵈ⁾/(√d+1)` | `1/(2π(d+2))` |
//! | `Pair(α, β)`, α < β (G3) | `√(d+2)·W_α⁽ⁱ⁾W_β⁽ⁱ⁾/‖W⁽ⁱ⁾‖` | `1/(2π(d+2))` |
//!
//! with `ṽ⁽ᵞ⁾ = (v⁽ᵞ,ᵞ⁾ − √((d+2)/d)·v⁽⁰⁾)/√2`. The `Tilde(γ)` vectors are linearly
//! dependent (they sum to zero), which is why only `d − 1` diagonal vectors enter the basis.

use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{check_index, Error, Result};
use crate::features::FeatureMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    G1,
    G2,
    G3DiagTilde,
    G3Diag,
    G3OffDiag,
}

/// Identity of one constructed vector; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisLabel {
    V0,
    Row(usize),
    Tilde(usize),
    Diag(usize),
    /// `v⁽ᵅ,ᵝ⁾` with `α ≤ β`; only `α < β` belongs to the basis.
    Pair(usize, usize),
}

impl BasisLabel {
    pub fn group(&self) -> Group {
        match self {
            BasisLabel::V0 => Group::G1,
            BasisLabel::Row(_) => Group::G2,
            BasisLabel::Tilde(_) => Group::G3DiagTilde,
            BasisLabel::Diag(_) => Group::G3Diag,
            BasisLabel::Pair(..) => Group::G3OffDiag,
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::V0 => write!(f, "v0"),
            BasisLabel::Row(l) => write!(f, "vl_{l}"),
            BasisLabel::Tilde(g) => write!(f, "vtilde_{g}"),
            BasisLabel::Diag(g) => write!(f, "vg_{g}"),
            BasisLabel::Pair(a, b) => write!(f, "vab_{a}_{b}"),
        }
    }
}

/// One approximate eigenvector together with its nominal cluster eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    pub label: BasisLabel,
    pub values: Vec<f64>,
    pub nominal_eigenvalue: f64,
}

impl BasisVector {
    pub fn group(&self) -> Group {
        self.label.group()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.values)
    }
}

/// The three nominal cluster eigenvalues `[(2d+1)/4π, 1/4, 1/(2π(d+2))]`.
pub fn cluster_eigenvalues(d: usize) -> [f64; 3] {
    let d = d as f64;
    [(2.0 * d + 1.0) / (4.0 * PI), 0.25, 1.0 / (2.0 * PI * (d + 2.0))]
}

pub fn nominal_eigenvalue(group: Group, d: usize) -> f64 {
    let [top, second, third] = cluster_eigenvalues(d);
    match group {
        Group::G1 => top,
        Group::G2 => second,
        _ => third,
    }
}

/// `v⁽⁰⁾_i = ‖W⁽ⁱ⁾‖/√d`, the (approximate) Perron vector.
pub fn perron_vector(fm: &FeatureMap) -> BasisVector {
    let scale = 1.0 / (fm.d() as f64).sqrt();
    BasisVector {
        label: BasisLabel::V0,
        values: fm.column_norms().into_iter().map(|n| n * scale).collect(),
        nominal_eigenvalue: nominal_eigenvalue(Group::G1, fm.d()),
    }
}

/// `v⁽ˡ⁾ = W_l`, `1 ≤ l ≤ d`.
pub fn row_vector(fm: &FeatureMap, l: usize) -> Result<BasisVector> {
    check_index("row", l, 1, fm.d())?;
    Ok(BasisVector { label: BasisLabel::Row(l), values: fm.row(l - 1), nominal_eigenvalue: nominal_eigenvalue(Group::G2, fm.d()) })
}

fn checked_norms(fm: &FeatureMap) -> Result<Vec<f64>> {
    let norms = fm.column_norms();
    match norms.iter().position(|&n| n == 0.0) {
        Some(i) => Err(Error::DegenerateColumn(i)),
        None => Ok(norms),
    }
}

fn pair_values(fm: &FeatureMap, norms: &[f64], a: usize, b: usize) -> Vec<f64> {
    let s = ((fm.d() + 2) as f64).sqrt();
    fm.columns().zip(norms).map(|(c, n)| s * c[a - 1] * c[b - 1] / n).collect()
}

/// `v⁽ᵅ,ᵝ⁾_i = √(d+2)·W_α⁽ⁱ⁾W_β⁽ⁱ⁾/‖W⁽ⁱ⁾‖`; argument order does not matter.
pub fn pair_vector(fm: &FeatureMap, alpha: usize, beta: usize) -> Result<BasisVector> {
    check_index("alpha", alpha, 1, fm.d())?;
    check_index("beta", beta, 1, fm.d())?;
    let (a, b) = (alpha.min(beta), alpha.max(beta));
    let norms = checked_norms(fm)?;
    Ok(BasisVector {
        label: BasisLabel::Pair(a, b),
        values: pair_values(fm, &norms, a, b),
        nominal_eigenvalue: nominal_eigenvalue(Group::G3OffDiag, fm.d()),
    })
}

fn tilde_values(fm: &FeatureMap, norms: &[f64], gamma: usize) -> Vec<f64> {
    let d = fm.d() as f64;
    let c = ((d + 2.0) / d).sqrt() / d.sqrt();
    pair_values(fm, norms, gamma, gamma).into_iter().zip(norms).map(|(p, n)| (p - c * n) * std::f64::consts::FRAC_1_SQRT_2).collect()
}

/// `ṽ⁽ᵞ⁾ = (v⁽ᵞ,ᵞ⁾ − √((d+2)/d)·v⁽⁰⁾)/√2`, `1 ≤ γ ≤ d`.
pub fn tilde_vector(fm: &FeatureMap, gamma: usize) -> Result<BasisVector> {
    check_index("gamma", gamma, 1, fm.d())?;
    let norms = checked_norms(fm)?;
    Ok(BasisVector {
        label: BasisLabel::Tilde(gamma),
        values: tilde_values(fm, &norms, gamma),
        nominal_eigenvalue: nominal_eigenvalue(Group::G3DiagTilde, fm.d()),
    })
}

fn diag_values(fm: &FeatureMap, norms: &[f64], gamma: usize, last: &[f64]) -> Vec<f64> {
    let k = 1.0 / ((fm.d() as f64).sqrt() + 1.0);
    tilde_values(fm, norms, gamma).into_iter().zip(last).map(|(t, l)| t - k * l).collect()
}

/// `v⁽ᵞ⁾ = ṽ⁽ᵞ⁾ − ṽ⁽ᵈ⁾/(√d+1)`, `1 ≤ γ ≤ d−1`.
pub fn diag_vector(fm: &FeatureMap, gamma: usize) -> Result<BasisVector> {
    check_index("gamma", gamma, 1, fm.d().saturating_sub(1))?;
    let norms = checked_norms(fm)?;
    let last = tilde_values(fm, &norms, fm.d());
    Ok(BasisVector {
        label: BasisLabel::Diag(gamma),
        values: diag_values(fm, &norms, gamma, &last),
        nominal_eigenvalue: nominal_eigenvalue(Group::G3Diag, fm.d()),
    })
}

/// Labels of the full basis in canonical order: `V0`, `Row(1..=d)`, `Diag(1..d)`,
/// then `Pair(α, β)` for `α < β` in lexicographic order.
pub fn basis_labels(d: usize) -> Vec<BasisLabel> {
    let mut labels = Vec::with_capacity(d + d * (d + 1) / 2);
    labels.push(BasisLabel::V0);
    labels.extend((1..=d).map(BasisLabel::Row));
    labels.extend((1..d).map(BasisLabel::Diag));
    for a in 1..=d {
        labels.extend(((a + 1)..=d).map(|b| BasisLabel::Pair(a, b)));
    }
    labels
}

/// Builds any labelled vector.
pub fn build(fm: &FeatureMap, label: BasisLabel) -> Result<BasisVector> {
    match label {
        BasisLabel::V0 => Ok(perron_vector(fm)),
        BasisLabel::Row(l) => row_vector(fm, l),
        BasisLabel::Tilde(g) => tilde_vector(fm, g),
        BasisLabel::Diag(g) => diag_vector(fm, g),
        BasisLabel::Pair(a, b) => pair_vector(fm, a, b),
    }
}

/// All `d + d(d+1)/2` basis vectors, in the order of [`basis_labels`].
pub fn full_basis(fm: &FeatureMap) -> Result<Vec<BasisVector>> {
    let d = fm.d();
    if d < 2 {
        return Err(Error::InvalidDimension(format!("full basis needs d ≥ 2, got {d}")));
    }
    let norms = checked_norms(fm)?;
    let last = tilde_values(fm, &norms, d);
    let [_, _, third] = cluster_eigenvalues(d);
    let mut out = vec![perron_vector(fm)];
    for l in 1..=d {
        out.push(row_vector(fm, l)?);
    }
    for g in 1..d {
        out.push(BasisVector { label: BasisLabel::Diag(g), values: diag_values(fm, &norms, g, &last), nominal_eigenvalue: third });
    }
    for a in 1..=d {
        for b in (a + 1)..=d {
            out.push(BasisVector { label: BasisLabel::Pair(a, b), values: pair_values(fm, &norms, a, b), nominal_eigenvalue: third });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(d: usize, m: usize, seed: u64) -> FeatureMap {
        FeatureMap::generate(d, m, seed).unwrap()
    }

    #[test]
    fn perron_vector_is_nonnegative_and_zero_on_zero_columns() {
        let f = FeatureMap::from_rows(&[vec![1.0, 0.0, -2.0], vec![0.5, 0.0, 1.0]]).unwrap();
        let v = perron_vector(&f);
        assert!(v.values.iter().all(|&x| x >= 0.0));
        assert_eq!(v.values[1], 0.0);
        assert!((v.values[2] - 5f64.sqrt() / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nominal_eigenvalues_at_d10() {
        let [top, second, third] = cluster_eigenvalues(10);
        assert!((top - 1.671127).abs() < 5e-6);
        assert_eq!(second, 0.25);
        assert!((third - 0.013263).abs() < 5e-7);
        assert_eq!(perron_vector(&fm(10, 4, 1)).nominal_eigenvalue, top);
    }

    #[test]
    fn row_extraction() {
        let f = FeatureMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let v = row_vector(&f, 2).unwrap();
        assert_eq!(v.values, vec![3.0, 4.0]);
        assert_eq!(v.nominal_eigenvalue, 0.25);
        assert_eq!(row_vector(&f, 2).unwrap(), v);
        assert!(matches!(row_vector(&f, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(row_vector(&f, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn pair_vector_properties() {
        let f = fm(10, 64, 3);
        let diag = pair_vector(&f, 4, 4).unwrap();
        assert!(diag.values.iter().all(|&x| x >= 0.0));
        assert_eq!(pair_vector(&f, 2, 7).unwrap().values, pair_vector(&f, 7, 2).unwrap().values);
        assert!((pair_vector(&f, 2, 7).unwrap().nominal_eigenvalue - 1.0 / (24.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn zero_column_is_an_error_not_nan() {
        let f = FeatureMap::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(pair_vector(&f, 1, 2), Err(Error::DegenerateColumn(1)));
        assert_eq!(tilde_vector(&f, 1), Err(Error::DegenerateColumn(1)));
        assert_eq!(diag_vector(&f, 1), Err(Error::DegenerateColumn(1)));
    }

    #[test]
    fn tilde_vectors_sum_to_zero() {
        let f = fm(5, 50, 17);
        let mut total = vec![0.0; 50];
        for g in 1..=5 {
            for (t, v) in total.iter_mut().zip(tilde_vector(&f, g).unwrap().values) {
                *t += v;
            }
        }
        assert!(total.iter().all(|t| t.abs() < 1e-10), "{total:?}");
    }

    #[test]
    fn diag_vector_identity_and_range() {
        let f = fm(10, 40, 5);
        let last = tilde_vector(&f, 10).unwrap();
        let k = 1.0 / (10f64.sqrt() + 1.0);
        for g in 1..10 {
            let v = diag_vector(&f, g).unwrap();
            let t = tilde_vector(&f, g).unwrap();
            for ((a, b), c) in v.values.iter().zip(&t.values).zip(&last.values) {
                assert!((a + k * c - b).abs() <= 1e-12 * b.abs().max(1e-3));
            }
            assert_eq!(v.nominal_eigenvalue, pair_vector(&f, 1, 2).unwrap().nominal_eigenvalue);
        }
        assert!(matches!(diag_vector(&f, 10), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(tilde_vector(&f, 11), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn full_basis_sizes_and_order() {
        let f10 = fm(10, 20, 1);
        let b10 = full_basis(&f10).unwrap();
        assert_eq!(b10.len(), 65);
        let b2 = full_basis(&fm(2, 20, 1)).unwrap();
        assert_eq!(b2.len(), 5);
        let labels: Vec<_> = b2.iter().map(|v| v.label).collect();
        assert_eq!(labels, vec![BasisLabel::V0, BasisLabel::Row(1), BasisLabel::Row(2), BasisLabel::Diag(1), BasisLabel::Pair(1, 2)]);
        assert_eq!(labels, basis_labels(2));
        assert_eq!(full_basis(&f10).unwrap(), b10);
        for v in &b10 {
            assert_eq!(&build(&f10, v.label).unwrap(), v);
        }
        assert!(full_basis(&fm(1, 4, 1)).is_err());
    }

    #[test]
    fn squared_norms_concentrate_at_large_m() {
        let f = fm(10, 10_000, 99);
        assert!((perron_vector(&f).norm().powi(2) - 1.0).abs() < 0.1);
        for l in [1, 5, 10] {
            assert!((row_vector(&f, l).unwrap().norm().powi(2) - 1.0).abs() < 0.1);
        }
    }
}
