//! Realized `X(x)ᵀv` against the limit functions on Gaussian inputs.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::eigenvectors::{build, BasisLabel, BasisVector};
use crate::error::{check_index, Error, Result};
use crate::features::FeatureMap;
use crate::limits::{LimitFn, LimitKind};
use crate::rng::{tags, GaussianRows, Stream};

/// Column groups of the accuracy table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MaeGroup {
    G1,
    G2,
    G3Diag,
    G3OffDiag,
}

impl MaeGroup {
    pub const ALL: [MaeGroup; 4] = [MaeGroup::G1, MaeGroup::G2, MaeGroup::G3Diag, MaeGroup::G3OffDiag];
}

impl fmt::Display for MaeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaeGroup::G1 => "G1",
            MaeGroup::G2 => "G2",
            MaeGroup::G3Diag => "G3diag",
            MaeGroup::G3OffDiag => "G3offdiag",
        })
    }
}

impl FromStr for MaeGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g1" => Ok(MaeGroup::G1),
            "g2" => Ok(MaeGroup::G2),
            "g3diag" => Ok(MaeGroup::G3Diag),
            "g3offdiag" => Ok(MaeGroup::G3OffDiag),
            _ => Err(Error::InvalidConfig {
                field: "groups".into(),
                reason: format!("unknown group `{s}`, expected G1, G2, G3diag or G3offdiag"),
            }),
        }
    }
}

/// Which member of each family stands for its group; 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Representatives {
    pub l: usize,
    pub gamma: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl Default for Representatives {
    fn default() -> Self {
        Self { l: 1, gamma: 1, alpha: 1, beta: 2 }
    }
}

impl Representatives {
    pub fn label(&self, group: MaeGroup) -> BasisLabel {
        match group {
            MaeGroup::G1 => BasisLabel::V0,
            MaeGroup::G2 => BasisLabel::Row(self.l),
            MaeGroup::G3Diag => BasisLabel::Diag(self.gamma),
            MaeGroup::G3OffDiag => BasisLabel::Pair(self.alpha.min(self.beta), self.alpha.max(self.beta)),
        }
    }

    pub fn limit_kind(&self, group: MaeGroup) -> LimitKind {
        match self.label(group) {
            BasisLabel::V0 => LimitKind::Radial,
            BasisLabel::Row(l) => LimitKind::Coordinate(l),
            BasisLabel::Diag(g) | BasisLabel::Tilde(g) => LimitKind::DiagContrast(g),
            BasisLabel::Pair(a, b) => LimitKind::CrossProduct(a, b),
        }
    }

    pub fn validate(&self, d: usize, groups: &[MaeGroup]) -> Result<()> {
        for g in groups {
            match g {
                MaeGroup::G1 => {}
                MaeGroup::G2 => check_index("l", self.l, 1, d)?,
                MaeGroup::G3Diag => check_index("gamma", self.gamma, 1, d.saturating_sub(1))?,
                MaeGroup::G3OffDiag => {
                    check_index("alpha", self.alpha, 1, d)?;
                    check_index("beta", self.beta, 1, d)?;
                    if self.alpha == self.beta {
                        return Err(Error::InvalidConfig { field: "beta".into(), reason: "must differ from alpha".into() });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `n` standard Gaussian inputs; the same for every width `m`.
pub fn experiment_inputs(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    GaussianRows::new(seed, tags::INPUTS, d).rows(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub theoretical: f64,
    pub realized: f64,
}

/// Representative vector and its limit function for a group.
pub fn representative(fm: &FeatureMap, group: MaeGroup, reps: &Representatives) -> Result<(BasisVector, LimitFn)> {
    reps.validate(fm.d(), &[group])?;
    let v = build(fm, reps.label(group))?;
    let f = LimitFn::new(reps.limit_kind(group), fm.d())?;
    Ok((v, f))
}

/// Limit value at `x`; the homogeneous limits vanish at `x = 0`.
fn limit_at(f: &LimitFn, x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    f.eval(x)
}

pub fn scatter(fm: &FeatureMap, group: MaeGroup, reps: &Representatives, inputs: &[Vec<f64>]) -> Result<Vec<ScatterPoint>> {
    let (v, f) = representative(fm, group, reps)?;
    inputs.iter().map(|x| Ok(ScatterPoint { theoretical: limit_at(&f, x)?, realized: fm.eval_basis(&v, x)? })).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MaeCell {
    pub d: usize,
    pub m: usize,
    pub group: MaeGroup,
    pub index: String,
    pub mae: f64,
    pub n_inputs: usize,
    pub seed: u64,
    pub bootstrap_se: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Standard deviation of the mean over `BOOTSTRAP_RESAMPLES` resamples with replacement.
pub fn bootstrap_se(values: &[f64], seed: u64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = Stream::new(seed, tags::BOOTSTRAP, 0);
    let means: Vec<f64> =
        (0..BOOTSTRAP_RESAMPLES).map(|_| (0..n).map(|_| values[s.below(n as u64) as usize]).sum::<f64>() / n as f64).collect();
    let mu = means.iter().sum::<f64>() / means.len() as f64;
    (means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (means.len() - 1) as f64).sqrt()
}

/// Mean absolute error of the representative of `group` over `inputs`.
pub fn mae_on_inputs(
    fm: &FeatureMap,
    group: MaeGroup,
    reps: &Representatives,
    inputs: &[Vec<f64>],
    seed: u64,
    keep_residuals: bool,
) -> Result<MaeCell> {
    if inputs.is_empty() {
        return Err(Error::InvalidConfig { field: "n".into(), reason: "need at least one input".into() });
    }
    let pts = scatter(fm, group, reps, inputs)?;
    let abs: Vec<f64> = pts.iter().map(|p| (p.theoretical - p.realized).abs()).collect();
    Ok(MaeCell {
        d: fm.d(),
        m: fm.m(),
        group,
        index: reps.label(group).to_string(),
        mae: abs.iter().sum::<f64>() / abs.len() as f64,
        n_inputs: inputs.len(),
        seed,
        bootstrap_se: bootstrap_se(&abs, seed),
        residuals: keep_residuals.then(|| pts.iter().map(|p| p.realized - p.theoretical).collect()),
    })
}

/// MAE with inputs drawn from the seed's input stream.
pub fn mae(fm: &FeatureMap, group: MaeGroup, reps: &Representatives, n_inputs: usize, seed: u64) -> Result<MaeCell> {
    mae_on_inputs(fm, group, reps, &experiment_inputs(fm.d(), n_inputs, seed), seed, false)
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_names_round_trip() {
        for g in MaeGroup::ALL {
            assert_eq!(g.to_string().parse::<MaeGroup>().unwrap(), g);
        }
        assert!("G4".parse::<MaeGroup>().is_err());
    }

    #[test]
    fn representatives_are_checked() {
        let r = Representatives { gamma: 5, ..Default::default() };
        assert!(r.validate(5, &[MaeGroup::G3Diag]).is_err());
        assert!(r.validate(5, &[MaeGroup::G1, MaeGroup::G2]).is_ok());
        let r = Representatives { alpha: 2, beta: 2, ..Default::default() };
        assert!(r.validate(5, &[MaeGroup::G3OffDiag]).is_err());
        assert_eq!(Representatives { alpha: 3, beta: 1, ..Default::default() }.label(MaeGroup::G3OffDiag), BasisLabel::Pair(1, 3));
    }

    #[test]
    fn zero_input_gives_zero_error() {
        let fm = FeatureMap::generate(6, 500, 1).unwrap();
        let c = mae_on_inputs(&fm, MaeGroup::G1, &Representatives::default(), &[vec![0.0; 6]], 1, true).unwrap();
        assert_eq!(c.mae, 0.0);
        assert_eq!(c.bootstrap_se, 0.0);
    }

    #[test]
    fn coordinate_theory_is_half_the_coordinate() {
        let fm = FeatureMap::generate(5, 200, 1).unwrap();
        let reps = Representatives { l: 3, ..Default::default() };
        let xs = experiment_inputs(5, 20, 2);
        let pts = scatter(&fm, MaeGroup::G2, &reps, &xs).unwrap();
        for (p, x) in pts.iter().zip(&xs) {
            assert_eq!(p.theoretical, x[2] / 2.0);
        }
    }

    #[test]
    fn inputs_do_not_depend_on_width() {
        let a = FeatureMap::generate(4, 100, 3).unwrap();
        let b = FeatureMap::generate(4, 300, 3).unwrap();
        let ca = mae_on_inputs(&a, MaeGroup::G2, &Representatives::default(), &experiment_inputs(4, 10, 3), 3, true).unwrap();
        let cb = mae_on_inputs(&b, MaeGroup::G2, &Representatives::default(), &experiment_inputs(4, 10, 3), 3, true).unwrap();
        assert_eq!(ca.n_inputs, cb.n_inputs);
        assert_eq!(ca.index, "vl_1");
    }

    #[test]
    fn bootstrap_se_is_close_to_the_analytic_value() {
        let values: Vec<f64> = (0..100).map(|k| (k % 10) as f64).collect();
        let n = values.len() as f64;
        let mu = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
        let se = bootstrap_se(&values, 4);
        assert!((se / (sd / n.sqrt()) - 1.0).abs() < 0.1, "{se}");
        assert_eq!(se, bootstrap_se(&values, 4));
    }

    #[test]
    fn pearson_of_linear_relation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [3.0, 5.0, 7.0, 9.0];
        assert!((pearson(&a, &b) - 1.0).abs() < 1e-15);
    }
}
