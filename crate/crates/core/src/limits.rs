//! Closed-form infinite-width limits of `f_v(x) = X(x)ᵀv` for each eigenvector family.
//!
//! Every limit is `‖x‖` times a function of the direction of `x`:
//!
//! * radial: `c0·‖x‖`, `c0 = √d·B(d/2,1/2)/(2π)`
//! * coordinate `l`: `x_l/2`
//! * centered square `γ`: `c_diag·‖x‖·(r_γ − 1/d)`, `r_γ = x_γ²/‖x‖²`
//! * diagonal contrast `γ < d`: `c_diag·‖x‖·(r_γ − r_d/(√d+1) − 1/(d+√d))`
//! * cross product `α < β`: `c_off·x_α·x_β/‖x‖`
//!
//! with `c_diag = d√(d+2)·B/(2π(d+1)√2)` and `c_off = d√(d+2)·B/(2π(d+1))`.
//! Only the leading terms are evaluated; remainders are exposed as bound envelopes.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{check_index, Error, Result};
use crate::mc::{gaussian_moments, InnerProductEstimate};
use crate::rng::tags;

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` through log-gamma.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("beta function needs positive finite arguments, got ({a}, {b})")));
    }
    Ok((ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

/// Dimension-dependent prefactors shared by the limit functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialConstants {
    pub d: usize,
    /// `B(d/2, 1/2)`
    pub beta_half: f64,
    pub c0: f64,
    pub c_diag: f64,
    pub c_off: f64,
}

impl SpecialConstants {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("d must be ≥ 1".into()));
        }
        let df = d as f64;
        let beta_half = beta_fn(df / 2.0, 0.5)?;
        let c_off = df * (df + 2.0).sqrt() * beta_half / (2.0 * PI * (df + 1.0));
        Ok(Self { d, beta_half, c0: df.sqrt() * beta_half / (2.0 * PI), c_diag: c_off / SQRT_2, c_off })
    }

    /// Large-d approximation `√(π(2d+1))/d` of `B(d/2, 1/2)`; a cross-check only.
    pub fn asymptotic_beta_half(d: usize) -> f64 {
        let df = d as f64;
        (PI * (2.0 * df + 1.0)).sqrt() / df
    }
}

/// Which limit function; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LimitKind {
    /// Limit of the Perron direction, proportional to `‖x‖`.
    Radial,
    /// `x_l / 2`.
    Coordinate(usize),
    /// Limit of `ṽ⁽ᵞ⁾`, proportional to `(x_γ² − ‖x‖²/d)/‖x‖`.
    CenteredSquare(usize),
    /// Limit of `v⁽ᵞ⁾ = ṽ⁽ᵞ⁾ − ṽ⁽ᵈ⁾/(√d+1)`, `γ < d`.
    DiagContrast(usize),
    /// Limit of `v⁽ᵅ,ᵝ⁾`, proportional to `x_α x_β/‖x‖`, `α < β`.
    CrossProduct(usize, usize),
}

/// A hypothesis of the limit theorem that the chosen `d` does not satisfy.
/// The formula still evaluates; callers decide whether to surface the warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HypothesisViolation {
    pub d: usize,
    pub required: &'static str,
}

impl std::fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "limit theorem assumes {} but d = {}", self.required, self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitFn {
    pub kind: LimitKind,
    pub d: usize,
    pub constants: SpecialConstants,
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl LimitFn {
    pub fn new(kind: LimitKind, d: usize) -> Result<Self> {
        match kind {
            LimitKind::Radial => {}
            LimitKind::Coordinate(l) => check_index("l", l, 1, d)?,
            LimitKind::CenteredSquare(g) => check_index("gamma", g, 1, d)?,
            LimitKind::DiagContrast(g) => check_index("gamma", g, 1, d.saturating_sub(1))?,
            LimitKind::CrossProduct(a, b) => {
                check_index("alpha", a, 1, d.saturating_sub(1))?;
                check_index("beta", b, a + 1, d)?;
            }
        }
        Ok(Self { kind, d, constants: SpecialConstants::new(d)? })
    }

    pub fn hypothesis_violation(&self) -> Option<HypothesisViolation> {
        let (ok, required) = match self.kind {
            LimitKind::Radial | LimitKind::Coordinate(_) => (self.d > 2, "d > 2"),
            _ => (self.d >= 6, "d ≥ 6"),
        };
        (!ok).then_some(HypothesisViolation { d: self.d, required })
    }

    fn check(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::InvalidDimension(format!("input has length {}, expected d = {}", x.len(), self.d)));
        }
        let n2 = norm_sq(x);
        let needs_nonzero = !matches!(self.kind, LimitKind::Radial | LimitKind::Coordinate(_));
        if needs_nonzero && n2 == 0.0 {
            return Err(Error::Domain("limit is undefined at x = 0".into()));
        }
        Ok(n2)
    }

    /// Leading-term value at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let n2 = self.check(x)?;
        let norm = n2.sqrt();
        let c = &self.constants;
        let d = self.d as f64;
        Ok(match self.kind {
            LimitKind::Radial => c.c0 * norm,
            LimitKind::Coordinate(l) => x[l - 1] / 2.0,
            LimitKind::CenteredSquare(g) => c.c_diag * norm * (x[g - 1] * x[g - 1] / n2 - 1.0 / d),
            LimitKind::DiagContrast(g) => {
                let s = d.sqrt();
                let rg = x[g - 1] * x[g - 1] / n2;
                let rd = x[self.d - 1] * x[self.d - 1] / n2;
                c.c_diag * norm * (rg - rd / (s + 1.0) - 1.0 / (d + s))
            }
            LimitKind::CrossProduct(a, b) => c.c_off * x[a - 1] * x[b - 1] / norm,
        })
    }

    /// Bound envelope of the omitted remainder: `r_γ²‖x‖` for the centered square,
    /// `r_γ²‖x‖ + r_d²‖x‖/(√d+1)` for the diagonal contrast,
    /// `|x_α x_β|/‖x_αβ‖·r_αβ²` for the cross product, and 0 for the exact limits.
    pub fn remainder_envelope(&self, x: &[f64]) -> Result<f64> {
        let n2 = self.check(x)?;
        let norm = n2.sqrt();
        Ok(match self.kind {
            LimitKind::Radial | LimitKind::Coordinate(_) => 0.0,
            LimitKind::CenteredSquare(g) => (x[g - 1] * x[g - 1] / n2).powi(2) * norm,
            LimitKind::DiagContrast(g) => {
                let rg = x[g - 1] * x[g - 1] / n2;
                let rd = x[self.d - 1] * x[self.d - 1] / n2;
                (rg * rg + rd * rd / ((self.d as f64).sqrt() + 1.0)) * norm
            }
            LimitKind::CrossProduct(a, b) => {
                let pair_sq = x[a - 1] * x[a - 1] + x[b - 1] * x[b - 1];
                if pair_sq == 0.0 {
                    0.0
                } else {
                    let r = pair_sq / n2;
                    (x[a - 1] * x[b - 1]).abs() / pair_sq.sqrt() * r * r
                }
            }
        })
    }
}

/// Monte Carlo `E[F_i(x) F_j(x)]` over `x ~ N(0, I_d)` for every pair of the given limits,
/// one shared sample stream. Entry `[i][j]` is symmetric.
pub fn limit_gram_mc(limits: &[LimitFn], n_samples: usize, seed: u64) -> Result<Vec<Vec<InnerProductEstimate>>> {
    let Some(d) = limits.first().map(|f| f.d) else {
        return Ok(Vec::new());
    };
    if limits.iter().any(|f| f.d != d) {
        return Err(Error::InvalidDimension("limit functions disagree on d".into()));
    }
    if n_samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_samples });
    }
    let k = limits.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let moments = gaussian_moments(d, n_samples, seed, tags::LIMITS, pairs.len(), |x, out| {
        // x = 0 has probability zero; evaluation cannot fail otherwise.
        let vals: Vec<f64> = limits.iter().map(|f| f.eval(x).unwrap_or(0.0)).collect();
        for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
            *o = vals[i] * vals[j];
        }
    });
    let est = moments.estimates(seed);
    let mut gram = vec![vec![est[0]; k]; k];
    for (e, &(i, j)) in est.into_iter().zip(&pairs) {
        gram[i][j] = e;
        gram[j][i] = e;
    }
    Ok(gram)
}
