//! Brute-force references for the closed-form expectations: one-dimensional
//! quadrature against the sphere-marginal density and Gaussian Monte Carlo.
//!
//! The population limit of `X(x)ᵀv` for each family is an expectation over
//! `Z ~ N(0, I_d)`:
//!
//! * radial: `E[σ(xᵀZ)·‖Z‖/√d]`
//! * coordinate `l`: `E[σ(xᵀZ)·Z_l]`
//! * centered square `γ`: `√((d+2)/2)·E[σ(xᵀZ)·(Z_γ² − ‖Z‖²/d)/‖Z‖]`
//! * diagonal contrast `γ`: centered square `γ` minus centered square `d` over `√d+1`
//! * cross product `α, β`: `√(d+2)·E[σ(xᵀZ)·Z_α Z_β/‖Z‖]`

use std::cell::Cell;
use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::limits::{beta_fn, LimitFn, LimitKind};
use crate::mc::{gaussian_moments, InnerProductEstimate};
use crate::rng::tags;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub n_points: usize,
}

/// Default absolute target for quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Tanh-sinh quadrature of `g` over `[a, b]`; endpoint singularities are tolerated.
pub fn tanh_sinh<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, n_points: 0 });
    }
    let bad = Cell::new(None);
    let out = quadrature::double_exponential::integrate(
        |u| {
            let y = g(u);
            if !y.is_finite() && bad.get().is_none() && u > a && u < b {
                bad.set(Some(u));
            }
            y
        },
        a,
        b,
        tol,
    );
    if let Some(u) = bad.get() {
        return Err(Error::NonFiniteIntegrand(u));
    }
    Ok(QuadratureResult {
        value: out.integral,
        abs_error_estimate: out.error_estimate.abs(),
        n_points: out.num_function_evaluations as usize,
    })
}

/// `E[g(u)]` for `u` the first coordinate of a uniform point on `S^{d−1}`,
/// whose density is `(1 − u²)^{(d−3)/2} / B((d−1)/2, 1/2)` on `[−1, 1]`.
pub fn sphere_marginal_moment<G: Fn(f64) -> f64>(d: usize, g: G) -> Result<QuadratureResult> {
    if d < 3 {
        return Err(Error::InvalidDimension(format!("sphere marginal needs d ≥ 3, got {d}")));
    }
    let df = d as f64;
    let norm = beta_fn((df - 1.0) / 2.0, 0.5)?;
    let expo = (df - 3.0) / 2.0;
    let f = |u: f64| g(u) * (1.0 - u * u).max(0.0).powf(expo) / norm;
    // Split at the kink of σ.
    let lo = tanh_sinh(f, -1.0, 0.0, QUAD_TOL)?;
    let hi = tanh_sinh(f, 0.0, 1.0, QUAD_TOL)?;
    Ok(QuadratureResult {
        value: lo.value + hi.value,
        abs_error_estimate: lo.abs_error_estimate + hi.abs_error_estimate,
        n_points: lo.n_points + hi.n_points,
    })
}

fn relu(s: f64) -> f64 {
    s.max(0.0)
}

fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

fn std_normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// `E[σ(a + bZ)] = aΦ(a/|b|) + |b|φ(a/|b|)`.
pub fn relu_gaussian_mean(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 || !b.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!("need finite a and nonzero finite b, got a = {a}, b = {b}")));
    }
    let t = a / b.abs();
    Ok(a * std_normal_cdf(t) + b.abs() * std_normal_pdf(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReluExpectationCheck {
    pub a: f64,
    pub b: f64,
    pub closed: f64,
    pub mc: InnerProductEstimate,
    pub quad: QuadratureResult,
}

impl ReluExpectationCheck {
    pub fn mc_z(&self) -> f64 {
        self.mc.z_score(self.closed)
    }

    pub fn quad_diff(&self) -> f64 {
        (self.quad.value - self.closed).abs()
    }
}

pub const RELU_EXPECTATION_SAMPLES: usize = 10_000_000;

/// Closed form, Monte Carlo and quadrature routes to `E[σ(a + bZ)]`.
pub fn relu_expectation_check(a: f64, b: f64, n_samples: usize, seed: u64) -> Result<ReluExpectationCheck> {
    let closed = relu_gaussian_mean(a, b)?;
    if n_samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n_samples });
    }
    let mc = gaussian_moments(1, n_samples, seed, tags::RELU_1D, 1, |z, out| out[0] = relu(a + b * z[0])).estimate(0, seed);
    // Integrate (a + |b|z)φ(z) over z > −a/|b|, truncated where φ underflows.
    const CUT: f64 = 40.0;
    let lo = (-a / b.abs()).max(-CUT);
    let quad = if lo >= CUT {
        QuadratureResult { value: 0.0, abs_error_estimate: 0.0, n_points: 0 }
    } else {
        tanh_sinh(|z| (a + b.abs() * z).max(0.0) * std_normal_pdf(z), lo, CUT, QUAD_TOL)?
    };
    Ok(ReluExpectationCheck { a, b, closed, mc, quad })
}

/// Per-sample integrand of the population limit for `kind` at `x`, given `z`.
fn limit_integrand(kind: LimitKind, d: usize, x: &[f64], z: &[f64]) -> f64 {
    let s: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
    if s <= 0.0 {
        return 0.0;
    }
    let n2: f64 = z.iter().map(|v| v * v).sum();
    let norm = n2.sqrt();
    let df = d as f64;
    let centered = |g: usize| ((df + 2.0) / 2.0).sqrt() * (z[g - 1] * z[g - 1] - n2 / df) / norm;
    let shape = match kind {
        LimitKind::Radial => norm / df.sqrt(),
        LimitKind::Coordinate(l) => z[l - 1],
        LimitKind::CenteredSquare(g) => centered(g),
        LimitKind::DiagContrast(g) => centered(g) - centered(d) / (df.sqrt() + 1.0),
        LimitKind::CrossProduct(a, b) => (df + 2.0).sqrt() * z[a - 1] * z[b - 1] / norm,
    };
    s * shape
}

/// Minimum sample count accepted by the Gaussian oracles.
pub const MIN_ORACLE_SAMPLES: usize = 10_000;

/// Monte Carlo population limits for several `(kind, x)` cases in one pass over `Z`.
pub fn limit_expectations_mc(cases: &[(LimitKind, Vec<f64>)], d: usize, n_samples: usize, seed: u64) -> Result<Vec<InnerProductEstimate>> {
    if n_samples < MIN_ORACLE_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_ORACLE_SAMPLES, got: n_samples });
    }
    for (kind, x) in cases {
        LimitFn::new(*kind, d)?;
        if x.len() != d || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDimension(format!("input must be a finite vector of length {d}")));
        }
    }
    let k = cases.len();
    let moments = gaussian_moments(d, n_samples, seed, tags::ORACLE, k, |z, out| {
        for (o, (kind, x)) in out.iter_mut().zip(cases) {
            *o = limit_integrand(*kind, d, x, z);
        }
    });
    Ok(moments.estimates(seed))
}

pub fn group_expectation_mc(kind: LimitKind, x: &[f64], d: usize, n_samples: usize, seed: u64) -> Result<InnerProductEstimate> {
    Ok(limit_expectations_mc(&[(kind, x.to_vec())], d, n_samples, seed)?[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialCaseRow {
    pub name: String,
    pub kind: LimitKind,
    pub x: Vec<f64>,
    pub closed_form: f64,
    pub mc: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub quadrature: Option<f64>,
    pub quad_abs_diff: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialCaseTable {
    pub d: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub sigma_tol: f64,
    pub quad_tol: f64,
    pub rows: Vec<SpecialCaseRow>,
}

impl SpecialCaseTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&SpecialCaseRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleTolerances {
    /// Allowed `|closed − MC|` in standard errors.
    pub sigma: f64,
    /// Allowed `|closed − quadrature|`.
    pub quad: f64,
    /// `(row, offset)`: perturbs one closed-form value (negative testing only).
    pub inject: Option<(usize, f64)>,
}

impl Default for OracleTolerances {
    fn default() -> Self {
        Self { sigma: 4.0, quad: 1e-8, inject: None }
    }
}

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[k - 1] = 1.0;
    x
}

fn normalized(v: Vec<f64>, scale: f64) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| scale * a / n).collect()
}

/// One-dimensional reductions of the exact cases, all at `‖x‖ = 1`.
struct SphereReductions {
    /// `E[σ(u)]`
    relu: f64,
    /// Centered square at `x = e_γ`.
    on_axis: f64,
    /// Centered square at `x ⊥ e_γ`.
    off_axis: f64,
    /// Cross product at `x = (e_α + e_β)/√2`.
    diagonal_pair: f64,
}

impl SphereReductions {
    fn new(d: usize) -> Result<Self> {
        let df = d as f64;
        let scale = ((df + 2.0) / 2.0).sqrt() * df;
        Ok(Self {
            relu: sphere_marginal_moment(d, relu)?.value,
            on_axis: scale * sphere_marginal_moment(d, |u| relu(u) * (u * u - 1.0 / df))?.value,
            off_axis: scale * sphere_marginal_moment(d, |u| relu(u) * ((1.0 - u * u) / (df - 1.0) - 1.0 / df))?.value,
            diagonal_pair: (df + 2.0).sqrt() * df / 2.0
                * sphere_marginal_moment(d, |u| relu(u) * (u * u - (1.0 - u * u) / (df - 1.0)))?.value,
        })
    }
}

pub const SPECIAL_CASE_SAMPLES: usize = 10_000_000;

/// Closed form vs Monte Carlo (and quadrature where one-dimensional) for every exact case.
pub fn special_case_table(d: usize, n_samples: usize, seed: u64, tol: OracleTolerances) -> Result<SpecialCaseTable> {
    if d < 6 {
        return Err(Error::InvalidDimension(format!("special-case table needs d ≥ 6, got {d}")));
    }
    let red = SphereReductions::new(d)?;
    let s = (d as f64).sqrt();
    let spread = normalized((1..=d).map(|k| k as f64).collect(), 1.0);
    let pair = {
        let mut x = vec![0.0; d];
        x[0] = 1.0 / SQRT_2;
        x[1] = 1.0 / SQRT_2;
        x
    };
    let e1 = unit(d, 1);
    let e2 = unit(d, 2);
    let e3 = unit(d, 3);
    let ed = unit(d, d);
    let cases: Vec<(&str, LimitKind, Vec<f64>, Option<f64>)> = vec![
        ("radial, x = e_1", LimitKind::Radial, e1.clone(), Some(s * red.relu)),
        ("radial, ‖x‖ = 2", LimitKind::Radial, normalized(spread.clone(), 2.0), Some(2.0 * s * red.relu)),
        ("coordinate 1, x = e_1", LimitKind::Coordinate(1), e1.clone(), Some(0.5)),
        ("coordinate 2, x = e_1", LimitKind::Coordinate(2), e1.clone(), Some(0.0)),
        ("coordinate 2, generic x", LimitKind::Coordinate(2), spread.clone(), None),
        ("centered square 1, x = e_1", LimitKind::CenteredSquare(1), e1.clone(), Some(red.on_axis)),
        ("centered square 1, x = e_2", LimitKind::CenteredSquare(1), e2.clone(), Some(red.off_axis)),
        ("diag contrast 1, x = e_1", LimitKind::DiagContrast(1), e1.clone(), Some(red.on_axis - red.off_axis / (s + 1.0))),
        ("diag contrast 1, x = e_d", LimitKind::DiagContrast(1), ed, Some(red.off_axis - red.on_axis / (s + 1.0))),
        ("diag contrast 1, x = e_2", LimitKind::DiagContrast(1), e2, Some(red.off_axis * (1.0 - 1.0 / (s + 1.0)))),
        ("cross product (1,2), x = (e_1+e_2)/√2", LimitKind::CrossProduct(1, 2), pair, Some(red.diagonal_pair)),
        ("cross product (1,2), x = e_1", LimitKind::CrossProduct(1, 2), e1, None),
        ("cross product (1,2), x = e_3", LimitKind::CrossProduct(1, 2), e3, None),
    ];
    let mc_cases: Vec<(LimitKind, Vec<f64>)> = cases.iter().map(|(_, k, x, _)| (*k, x.clone())).collect();
    let est = limit_expectations_mc(&mc_cases, d, n_samples, seed)?;
    let mut rows = Vec::with_capacity(cases.len());
    for (row, ((name, kind, x, quad), e)) in cases.into_iter().zip(est).enumerate() {
        let offset = tol.inject.filter(|(r, _)| *r == row).map_or(0.0, |(_, o)| o);
        let closed = LimitFn::new(kind, d)?.eval(&x)? + offset;
        let z = e.z_score(closed);
        let quad_abs_diff = quad.map(|q| (q - closed).abs());
        let pass = z < tol.sigma && quad_abs_diff.is_none_or(|q| q < tol.quad);
        rows.push(SpecialCaseRow {
            name: name.to_string(),
            kind,
            x,
            closed_form: closed,
            mc: e.value,
            std_error: e.std_error,
            z_score: z,
            quadrature: quad,
            quad_abs_diff,
            pass,
        });
    }
    Ok(SpecialCaseTable { d, n_samples, seed, sigma_tol: tol.sigma, quad_tol: tol.quad, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub leading: f64,
    pub mc: f64,
    pub std_error: f64,
    pub abs_diff: f64,
    pub envelope: f64,
    /// `|MC − leading| / envelope`.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub kind: LimitKind,
    pub d: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    /// Every row within `sigma·SE + envelope`.
    pub bounded: bool,
}

/// Unit-norm input with a prescribed share `r` of its squared norm on the target
/// coordinates of `kind` and the rest spread evenly.
pub fn sweep_input(kind: LimitKind, d: usize, r: f64) -> Result<Vec<f64>> {
    let targets: Vec<usize> = match kind {
        LimitKind::CenteredSquare(g) | LimitKind::DiagContrast(g) => vec![g],
        LimitKind::CrossProduct(a, b) => vec![a, b],
        _ => return Err(Error::Domain("remainder sweep applies to the diagonal and cross-product limits".into())),
    };
    let rest = (1.0 - r) / (d - targets.len()) as f64;
    let on = r / targets.len() as f64;
    Ok((1..=d).map(|k| if targets.contains(&k) { on.sqrt() } else { rest.sqrt() }).collect())
}

/// Monte Carlo truth against the leading term along a fixed-norm path.
pub fn remainder_sweep(kind: LimitKind, d: usize, r_values: &[f64], n_samples: usize, seed: u64, sigma: f64) -> Result<SweepReport> {
    if d < 6 {
        return Err(Error::InvalidDimension(format!("remainder sweep needs d ≥ 6, got {d}")));
    }
    let lf = LimitFn::new(kind, d)?;
    if let Some(r) = r_values.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(Error::Domain(format!("sweep ratio {r} outside (0, 1]")));
    }
    let xs = r_values.iter().map(|&r| sweep_input(kind, d, r)).collect::<Result<Vec<_>>>()?;
    let est = if xs.is_empty() {
        Vec::new()
    } else {
        limit_expectations_mc(&xs.iter().map(|x| (kind, x.clone())).collect::<Vec<_>>(), d, n_samples, seed)?
    };
    let mut rows = Vec::with_capacity(xs.len());
    for ((&r, x), e) in r_values.iter().zip(&xs).zip(est) {
        let leading = lf.eval(x)?;
        let envelope = lf.remainder_envelope(x)?;
        let abs_diff = (e.value - leading).abs();
        rows.push(SweepRow {
            r,
            leading,
            mc: e.value,
            std_error: e.std_error,
            abs_diff,
            envelope,
            ratio: if envelope > 0.0 { abs_diff / envelope } else { 0.0 },
            pass: abs_diff <= sigma * e.std_error + envelope,
        });
    }
    let bounded = rows.iter().all(|r| r.pass);
    Ok(SweepReport { kind, d, n_samples, seed, rows, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_density_normalizes_for_every_small_d() {
        for d in 3..12 {
            let q = sphere_marginal_moment(d, |_| 1.0).unwrap();
            assert!((q.value - 1.0).abs() < 1e-10, "d={d}: {}", q.value);
            assert!(q.abs_error_estimate >= 0.0);
            assert!(sphere_marginal_moment(d, |u| u).unwrap().value.abs() < 1e-12);
        }
        assert!(sphere_marginal_moment(2, |_| 1.0).is_err());
    }

    #[test]
    fn sphere_relu_moment_matches_beta() {
        for d in [3, 4, 10, 50] {
            let df = d as f64;
            let b = beta_fn(df / 2.0, 0.5).unwrap();
            let q = sphere_marginal_moment(d, relu).unwrap();
            assert!((q.value - b / (2.0 * PI)).abs() < 1e-10, "d={d}");
            // Second moment of the marginal is 1/d.
            assert!((sphere_marginal_moment(d, |u| u * u).unwrap().value - 1.0 / df).abs() < 1e-10);
        }
        let q = sphere_marginal_moment(10, relu).unwrap();
        assert!((q.value - 0.12934).abs() < 5e-6);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = tanh_sinh(|u| if u > 0.5 { f64::NAN } else { u }, 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::NonFiniteIntegrand(_))));
    }

    #[test]
    fn relu_gaussian_mean_values() {
        assert!((relu_gaussian_mean(0.0, 1.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let tail = 0.5 * erfc(5.0 / SQRT_2);
        let expected = 5.0 * (1.0 - tail) + (-12.5f64).exp() / (2.0 * PI).sqrt();
        assert!((relu_gaussian_mean(5.0, 1.0).unwrap() - expected).abs() < 1e-14);
        assert!((relu_gaussian_mean(5.0, 1.0).unwrap() - 5.0).abs() < 1e-6);
        for (a, b) in [(0.3, 2.0), (-1.0, 0.5), (2.0, 7.0)] {
            assert_eq!(relu_gaussian_mean(a, b).unwrap(), relu_gaussian_mean(a, -b).unwrap());
        }
        assert!(matches!(relu_gaussian_mean(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn relu_expectation_routes_agree() {
        for (a, b) in [(0.0, 1.0), (0.7, -1.3), (-0.5, 0.4), (5.0, 1.0)] {
            let c = relu_expectation_check(a, b, 400_000, 3).unwrap();
            assert!(c.quad_diff() < 1e-8, "{a},{b}: {c:?}");
            assert!(c.mc_z() < 4.0, "{a},{b}: {c:?}");
        }
        assert!(relu_expectation_check(1.0, 0.0, 100, 1).is_err());
    }

    #[test]
    fn oracle_needs_enough_samples() {
        let r = group_expectation_mc(LimitKind::Radial, &[1.0, 0.0, 0.0], 3, 100, 1);
        assert!(matches!(r, Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn group_expectation_known_values() {
        let d = 10;
        let e = group_expectation_mc(LimitKind::Coordinate(3), &unit(d, 3), d, 200_000, 1).unwrap();
        assert!(e.z_score(0.5) < 4.0, "{e:?}");
        let e = group_expectation_mc(LimitKind::Radial, &unit(d, 1), d, 200_000, 2).unwrap();
        assert!(e.z_score(0.40902) < 4.0, "{e:?}");
        let e = group_expectation_mc(LimitKind::CrossProduct(1, 2), &unit(d, 2), d, 200_000, 3).unwrap();
        assert!(e.z_score(0.0) < 4.0, "{e:?}");
    }

    #[test]
    fn quadrature_reductions_match_closed_forms() {
        for d in [6, 10, 50] {
            let red = SphereReductions::new(d).unwrap();
            let sq = |x: Vec<f64>| LimitFn::new(LimitKind::CenteredSquare(1), d).unwrap().eval(&x).unwrap();
            assert!((red.on_axis - sq(unit(d, 1))).abs() < 1e-10);
            assert!((red.off_axis - sq(unit(d, 2))).abs() < 1e-10);
            assert!((red.off_axis + red.on_axis / (d as f64 - 1.0)).abs() < 1e-10);
        }
        let b = beta_fn(5.0, 0.5).unwrap();
        let expected = 9.0 * 12f64.sqrt() / (2.0 * PI * 11.0 * SQRT_2) * b;
        assert!((SphereReductions::new(10).unwrap().on_axis - expected).abs() < 1e-10);
    }

    #[test]
    fn small_table_passes_and_injection_fails() {
        let t = special_case_table(6, 200_000, 4, OracleTolerances::default()).unwrap();
        assert!(t.all_pass(), "{:#?}", t.failures());
        let bad = special_case_table(6, 200_000, 4, OracleTolerances { inject: Some((2, 0.05)), ..Default::default() }).unwrap();
        assert_eq!(bad.failures().len(), 1);
        assert_eq!(bad.failures()[0].name, t.rows[2].name);
        assert!(special_case_table(5, 200_000, 4, OracleTolerances::default()).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let rep = remainder_sweep(LimitKind::DiagContrast(1), 10, &[], 20_000, 1, 4.0).unwrap();
        assert!(rep.rows.is_empty() && rep.bounded);
        let x = sweep_input(LimitKind::DiagContrast(1), 10, 1.0).unwrap();
        assert_eq!(x, unit(10, 1));
        let x = sweep_input(LimitKind::CrossProduct(1, 2), 10, 0.3).unwrap();
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((x[0] * x[0] + x[1] * x[1] - 0.3).abs() < 1e-14);
        assert!(remainder_sweep(LimitKind::DiagContrast(1), 10, &[1.5], 20_000, 1, 4.0).is_err());
        assert!(remainder_sweep(LimitKind::Radial, 10, &[0.5], 20_000, 1, 4.0).is_err());
    }

    #[test]
    fn sweep_is_bounded() {
        let rep = remainder_sweep(LimitKind::DiagContrast(1), 10, &[0.4, 0.2, 0.1, 0.05, 1.0], 200_000, 2, 4.0).unwrap();
        assert!(rep.bounded, "{rep:#?}");
    }
}
