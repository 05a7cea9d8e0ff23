use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use relu_fim::dynamics::{self, GdConfig, Mode, Target, Trajectory};
use relu_fim::eigenvectors::{build, full_basis};
use relu_fim::experiment::{self, MaeCell, MaeGroup, Representatives};
use relu_fim::fim_metric::{self, DEFAULT_EXPLICIT_CAP};
use relu_fim::limits::limit_gram_mc;
use relu_fim::oracles::{self, OracleTolerances};
use relu_fim::{linalg, BasisLabel, FeatureMap, LimitFn, LimitKind};

use crate::output::{emit, json, num, Csv};
use crate::settings::Settings;
use crate::{Common, ConfigError, RepArgs};

pub const DEFAULT_SEED: u64 = 1;

const COMMON_KEYS: [&str; 7] = ["d", "m", "n", "seed", "groups", "out", "format"];
const REP_KEYS: [&str; 4] = ["l", "gamma", "alpha", "beta"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

/// Settings plus the resolved common fields.
struct Ctx {
    s: Settings,
    d: usize,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

fn context(common: &Common, extra: &[&str], d_default: usize, format_default: Format) -> Result<Ctx> {
    let s = Settings::load(common.config.as_deref())?;
    let known: Vec<&str> = COMMON_KEYS.iter().chain(extra).copied().collect();
    s.reject_unknown(&known)?;
    let d = s.pick(common.d, "d", d_default)?;
    if d == 0 {
        return Err(ConfigError::new("d", "must be at least 1").into());
    }
    Ok(Ctx {
        d,
        seed: s.pick(common.seed, "seed", DEFAULT_SEED)?,
        out: s.pick_opt(common.out.clone(), "out")?,
        format: s.pick(
            common.format.as_deref().map(str::parse).transpose().map_err(|e: String| ConfigError::new("format", e))?,
            "format",
            format_default,
        )?,
        s,
    })
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(ConfigError::new(name, "must be at least 1").into());
    }
    Ok(v)
}

fn widths(ctx: &Ctx, common: &Common, default: &str) -> Result<Vec<usize>> {
    let ms: Vec<usize> = ctx.s.pick_list(common.m.as_deref(), "m", default)?;
    if ms.is_empty() {
        return Err(ConfigError::new("m", "no width given").into());
    }
    ms.into_iter().map(|m| positive("m", m)).collect()
}

fn single_width(ctx: &Ctx, common: &Common, default: &str) -> Result<usize> {
    let ms = widths(ctx, common, default)?;
    if ms.len() != 1 {
        return Err(ConfigError::new("m", "this command takes a single width").into());
    }
    Ok(ms[0])
}

fn groups(ctx: &Ctx, common: &Common) -> Result<Vec<MaeGroup>> {
    let gs: Vec<MaeGroup> = ctx.s.pick_list(common.groups.as_deref(), "groups", "G1,G2,G3diag,G3offdiag")?;
    if gs.is_empty() {
        return Err(ConfigError::new("groups", "selection is empty").into());
    }
    Ok(gs)
}

fn representatives(ctx: &Ctx, reps: &RepArgs, groups: &[MaeGroup]) -> Result<Representatives> {
    let def = Representatives::default();
    let r = Representatives {
        l: ctx.s.pick(reps.l, "l", def.l)?,
        gamma: ctx.s.pick(reps.gamma, "gamma", def.gamma)?,
        alpha: ctx.s.pick(reps.alpha, "alpha", def.alpha)?,
        beta: ctx.s.pick(reps.beta, "beta", def.beta)?,
    };
    r.validate(ctx.d, groups)?;
    Ok(r)
}

#[derive(Serialize)]
struct MaeReport<'a> {
    d: usize,
    n_inputs: usize,
    seed: u64,
    representatives: Representatives,
    cells: &'a [MaeCell],
}

pub fn mae(common: &Common, reps: &RepArgs, residuals: bool) -> Result<Vec<String>> {
    let ctx = context(common, &REP_KEYS, 10, Format::Csv)?;
    let ms = widths(&ctx, common, "10000,100000")?;
    let n = positive("n", ctx.s.pick(common.n, "n", 100)?)?;
    let gs = groups(&ctx, common)?;
    let reps = representatives(&ctx, reps, &gs)?;
    let inputs = experiment::experiment_inputs(ctx.d, n, ctx.seed);
    let mut cells = Vec::new();
    for &m in &ms {
        let fm = FeatureMap::generate(ctx.d, m, ctx.seed)?;
        for &g in &gs {
            cells.push(experiment::mae_on_inputs(&fm, g, &reps, &inputs, ctx.seed, residuals)?);
        }
    }
    let text = match ctx.format {
        Format::Json => json(&MaeReport { d: ctx.d, n_inputs: n, seed: ctx.seed, representatives: reps, cells: &cells })?,
        Format::Csv => {
            let mut csv = Csv::new(&["d", "m", "group", "index", "mae", "seed", "mae_bootstrap_se"]);
            for c in &cells {
                csv.row([
                    c.d.to_string(),
                    c.m.to_string(),
                    c.group.to_string(),
                    c.index.clone(),
                    num(c.mae),
                    c.seed.to_string(),
                    num(c.bootstrap_se),
                ]);
            }
            csv.into_string()
        }
    };
    emit(ctx.out.as_deref(), &text)?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct ScatterRow {
    d: usize,
    m: usize,
    group: MaeGroup,
    theoretical: f64,
    realized: f64,
}

pub fn scatter(common: &Common, reps: &RepArgs) -> Result<Vec<String>> {
    let ctx = context(common, &REP_KEYS, 10, Format::Csv)?;
    let ms = widths(&ctx, common, "100000")?;
    let n = positive("n", ctx.s.pick(common.n, "n", 100)?)?;
    let gs = groups(&ctx, common)?;
    let reps = representatives(&ctx, reps, &gs)?;
    let inputs = experiment::experiment_inputs(ctx.d, n, ctx.seed);
    let mut rows = Vec::new();
    for &m in &ms {
        let fm = FeatureMap::generate(ctx.d, m, ctx.seed)?;
        for &g in &gs {
            for p in experiment::scatter(&fm, g, &reps, &inputs)? {
                rows.push(ScatterRow { d: ctx.d, m, group: g, theoretical: p.theoretical, realized: p.realized });
            }
        }
    }
    let text = match ctx.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new(&["d", "m", "group", "theoretical", "realized"]);
            for r in &rows {
                csv.row([r.d.to_string(), r.m.to_string(), r.group.to_string(), num(r.theoretical), num(r.realized)]);
            }
            csv.into_string()
        }
    };
    emit(ctx.out.as_deref(), &text)?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct GramReport {
    d: usize,
    m: usize,
    summary: fim_metric::GramSummary,
    /// Off-diagonal entries with `|G_ij| > sigma · SE_ij`.
    offdiag_beyond_sigma: usize,
    sigma: f64,
}

pub fn spectrum(common: &Common, report: Option<String>, cap: Option<usize>) -> Result<Vec<String>> {
    let ctx = context(common, &["report", "cap"], 20, Format::Json)?;
    let m = single_width(&ctx, common, "2048")?;
    let n = positive("n", ctx.s.pick(common.n, "n", 200_000)?)?;
    let cap = ctx.s.pick(cap, "cap", DEFAULT_EXPLICIT_CAP)?;
    let report = ctx.s.pick(report, "report", "spectrum".to_string())?;
    let fm = FeatureMap::generate(ctx.d, m, ctx.seed)?;
    let text = match report.as_str() {
        "spectrum" => {
            if m > cap {
                return Err(relu_fim::Error::ExplicitModeRefused { m, cap }.into());
            }
            let rep = fim_metric::decomposition_residual_with_cap(&fm, n, ctx.seed, cap)?;
            eprintln!(
                "bands {}/{}/{} (expected {}/{}/{}), residual ‖·‖ = {:.4e}",
                rep.band_counts.top,
                rep.band_counts.second,
                rep.band_counts.third,
                rep.expected_counts.top,
                rep.expected_counts.second,
                rep.expected_counts.third,
                rep.residual_opnorm
            );
            match ctx.format {
                Format::Json => json(&rep)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["rank", "eigenvalue", "band"]);
                    for (i, (l, c)) in rep.eigenvalues.iter().zip(&rep.cluster_assignment).enumerate() {
                        csv.row([(i + 1).to_string(), num(*l), format!("{c:?}")]);
                    }
                    csv.into_string()
                }
            }
        }
        "gram" => {
            let basis = full_basis(&fm)?;
            let summary = fim_metric::gram_summary(&fm, &basis, n, ctx.seed)?;
            let sigma = 4.0;
            let k = basis.len();
            let beyond = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && summary.gram[i][j].abs() > sigma * summary.std_error[i][j])
                .count();
            eprintln!(
                "max |offdiag| = {:.4e}, {} of {} off-diagonal entries beyond {sigma} SE, max |diag/λ − 1| = {:.3}",
                summary.max_offdiag_abs,
                beyond,
                k * (k - 1),
                summary.max_diag_reldev
            );
            match ctx.format {
                Format::Json => json(&GramReport { d: ctx.d, m, summary, offdiag_beyond_sigma: beyond, sigma })?,
                Format::Csv => {
                    let mut csv = Csv::new(&["row", "col", "value", "std_error"]);
                    for i in 0..k {
                        for j in 0..k {
                            csv.row([
                                summary.labels[i].clone(),
                                summary.labels[j].clone(),
                                num(summary.gram[i][j]),
                                num(summary.std_error[i][j]),
                            ]);
                        }
                    }
                    csv.into_string()
                }
            }
        }
        other => return Err(ConfigError::new("report", format!("`{other}`: expected spectrum or gram")).into()),
    };
    emit(ctx.out.as_deref(), &text)?;
    Ok(Vec::new())
}

#[derive(Args, Debug)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub reps: RepArgs,
    /// population or empirical.
    #[arg(long)]
    pub mode: Option<String>,
    /// Learning rate; defaults to `step_scale / λ̂_max`.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// `random` (one run toward a random unit target) or `aligned` (one run per
    /// representative, target along that vector).
    #[arg(long)]
    pub target: Option<String>,
    /// Aligned runs last `efolds / (η λ_nominal)` iterations unless `--iters` is set.
    #[arg(long)]
    pub efolds: Option<f64>,
    /// Where to write the fitted-rate table in `random` mode.
    #[arg(long)]
    pub rates_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct RateRow {
    group: MaeGroup,
    label: String,
    nominal: f64,
    rayleigh: f64,
    fitted_rate: Option<f64>,
    /// `log(1 − η·Rayleigh)`
    rayleigh_rate: f64,
    /// `log(1 − η·λ_nominal)`
    nominal_rate: f64,
    rel_dev: Option<f64>,
    fitted_half_life: Option<f64>,
    observed_half_life: Option<usize>,
    iters: usize,
    error: Option<String>,
}

fn rate_row(group: MaeGroup, label: BasisLabel, traj: &Trajectory) -> Result<RateRow> {
    let idx = traj.index_of(label).with_context(|| format!("{label} missing from trajectory"))?;
    let eta = traj.step;
    let (nominal, rayleigh) = (traj.nominal[idx], traj.rayleigh[idx]);
    let rayleigh_rate = (1.0 - eta * rayleigh).ln();
    let series = traj.series(idx);
    let fit = dynamics::rate_fit_series(&series);
    Ok(RateRow {
        group,
        label: label.to_string(),
        nominal,
        rayleigh,
        fitted_rate: fit.as_ref().ok().map(|f| f.rate),
        rayleigh_rate,
        nominal_rate: (1.0 - eta * nominal).ln(),
        rel_dev: fit.as_ref().ok().map(|f| (f.rate / rayleigh_rate - 1.0).abs()),
        fitted_half_life: fit.as_ref().ok().map(|f| f.half_life()),
        observed_half_life: dynamics::observed_half_life(&series),
        iters: traj.records.len() - 1,
        error: fit.err().map(|e| e.to_string()),
    })
}

fn rates_text(rows: &[RateRow], format: Format) -> Result<String> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    Ok(match format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new(&[
                "group",
                "label",
                "nominal",
                "rayleigh",
                "fitted_rate",
                "rayleigh_rate",
                "nominal_rate",
                "rel_dev",
                "fitted_half_life",
                "observed_half_life",
                "iters",
            ]);
            for r in rows {
                csv.row([
                    r.group.to_string(),
                    r.label.clone(),
                    num(r.nominal),
                    num(r.rayleigh),
                    opt(r.fitted_rate),
                    num(r.rayleigh_rate),
                    num(r.nominal_rate),
                    opt(r.rel_dev),
                    opt(r.fitted_half_life),
                    r.observed_half_life.map(|h| h.to_string()).unwrap_or_default(),
                    r.iters.to_string(),
                ]);
            }
            csv.into_string()
        }
    })
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let labels: Vec<String> = traj.labels.iter().map(ToString::to_string).collect();
    let mut header = vec!["iter", "loss"];
    header.extend(labels.iter().map(String::as_str));
    let mut csv = Csv::new(&header);
    for r in &traj.records {
        csv.row(std::iter::once(r.iter.to_string()).chain(std::iter::once(num(r.loss))).chain(r.projections.iter().map(|&p| num(p))));
    }
    csv.into_string()
}

#[derive(Serialize)]
struct DynamicsReport<'a> {
    trajectory: &'a Trajectory,
    rates: &'a [RateRow],
}

pub fn dynamics(args: &DynamicsArgs) -> Result<Vec<String>> {
    let extra: Vec<&str> =
        REP_KEYS.iter().copied().chain(["mode", "step", "step_scale", "iters", "noise_std", "target", "efolds", "rates_out"]).collect();
    let common = &args.common;
    let ctx = context(common, &extra, 20, Format::Csv)?;
    let m = single_width(&ctx, common, "1024")?;
    let gs = groups(&ctx, common)?;
    let reps = representatives(&ctx, &args.reps, &gs)?;
    let mode = match ctx.s.pick(args.mode.clone(), "mode", "population".to_string())?.as_str() {
        "population" => Mode::Population,
        "empirical" => Mode::Empirical,
        other => return Err(ConfigError::new("mode", format!("`{other}`: expected population or empirical")).into()),
    };
    let n = positive("n", ctx.s.pick(common.n, "n", if mode == Mode::Population { 50_000 } else { 4_000 })?)?;
    let noise_std = ctx.s.pick(args.noise_std, "noise_std", 1.0)?;
    let target = ctx.s.pick(args.target.clone(), "target", "random".to_string())?;
    let efolds = ctx.s.pick(args.efolds, "efolds", 2.0)?;
    let iters_flag = ctx.s.pick_opt(args.iters, "iters")?;
    let rates_out: Option<PathBuf> = ctx.s.pick_opt(args.rates_out.clone(), "rates_out")?;
    if !(efolds > 0.0) {
        return Err(ConfigError::new("efolds", "must be positive").into());
    }
    let fm = FeatureMap::generate(ctx.d, m, ctx.seed)?;
    let basis = dynamics::default_basis(&fm)?;
    let step_flag = ctx.s.pick_opt(args.step, "step")?;
    let need_fim = mode == Mode::Population || step_flag.is_none();
    let fim = if need_fim { Some(fim_metric::empirical_fim_explicit(&fm, n, ctx.seed)?) } else { None };
    let step = match step_flag {
        Some(s) => s,
        None => {
            let scale = ctx.s.pick(args.step_scale, "step_scale", 0.1)?;
            scale / linalg::largest_eigenvalue_psd(fim.as_ref().expect("Fisher matrix computed when no step is given"))
        }
    };
    let base = GdConfig {
        d: ctx.d,
        m,
        seed: ctx.seed,
        n_train: n,
        noise_std,
        step,
        iters: iters_flag.unwrap_or(2000),
        target: Target::RandomUnit,
        init: None,
        mode,
    };
    base.validate()?;
    let run = |cfg: &GdConfig| -> Result<Trajectory> {
        Ok(match (&fim, mode) {
            (Some(j), Mode::Population) => dynamics::run_gd_with_fim(cfg, &fm, j, &basis)?,
            _ => dynamics::run_gd(cfg, &fm)?,
        })
    };
    match target.as_str() {
        "random" => {
            let traj = run(&base)?;
            if let Some(w) = &traj.warning {
                eprintln!("warning: {w}");
            }
            let rows = gs.iter().map(|&g| rate_row(g, reps.label(g), &traj)).collect::<Result<Vec<_>>>()?;
            let text = match ctx.format {
                Format::Csv => trajectory_csv(&traj),
                Format::Json => json(&DynamicsReport { trajectory: &traj, rates: &rows })?,
            };
            emit(ctx.out.as_deref(), &text)?;
            if let Some(p) = rates_out {
                emit(Some(&p), &rates_text(&rows, ctx.format)?)?;
            }
        }
        "aligned" => {
            let mut rows = Vec::new();
            for &g in &gs {
                let v = build(&fm, reps.label(g))?;
                let norm = v.norm();
                let iters = iters_flag.unwrap_or_else(|| (efolds / (step * v.nominal_eigenvalue)).ceil() as usize).max(1);
                let cfg = GdConfig { iters, target: Target::Vector(v.values.iter().map(|x| x / norm).collect()), ..base.clone() };
                let traj = run(&cfg)?;
                if let Some(w) = &traj.warning {
                    eprintln!("warning: {w}");
                }
                rows.push(rate_row(g, v.label, &traj)?);
            }
            for r in &rows {
                eprintln!(
                    "{:<10} {:<10} fitted {:>12} reference {:.6e} half-life {}",
                    r.group.to_string(),
                    r.label,
                    r.fitted_rate.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into()),
                    r.rayleigh_rate,
                    r.fitted_half_life.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into())
                );
            }
            emit(ctx.out.as_deref(), &rates_text(&rows, ctx.format)?)?;
        }
        other => return Err(ConfigError::new("target", format!("`{other}`: expected random or aligned")).into()),
    }
    Ok(Vec::new())
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Allowed |closed − MC| in standard errors.
    #[arg(long)]
    pub sigma_tol: Option<f64>,
    /// Allowed |closed − quadrature|.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// `ROW:OFFSET` (or `OFFSET` for row 0): perturb one closed-form value.
    #[arg(long)]
    pub inject_error: Option<String>,
    /// Comma-separated norm shares for the remainder sweeps.
    #[arg(long)]
    pub r_values: Option<String>,
    /// Samples for the limit-function second moments.
    #[arg(long)]
    pub n_limit: Option<usize>,
    /// Samples per one-dimensional ReLU expectation check.
    #[arg(long)]
    pub n_relu: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ReluRow {
    check: oracles::ReluExpectationCheck,
    z_score: f64,
    quad_abs_diff: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct MomentRow {
    group: MaeGroup,
    kind: LimitKind,
    mc: f64,
    std_error: f64,
    target: f64,
    rel_dev: f64,
    z_score: f64,
    /// `relative` (|mc/target − 1| ≤ tol) or `sigma` (z ≤ sigma).
    rule: &'static str,
    tol: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    d: usize,
    seed: u64,
    special_cases: Option<oracles::SpecialCaseTable>,
    relu_expectation: Vec<ReluRow>,
    remainder_sweeps: Vec<oracles::SweepReport>,
    limit_moments: Vec<MomentRow>,
    failures: Vec<String>,
}

fn parse_inject(s: &str) -> Result<(usize, f64)> {
    let bad = |e: String| anyhow::Error::from(ConfigError::new("inject_error", e));
    match s.split_once(':') {
        Some((r, o)) => Ok((r.trim().parse().map_err(|e| bad(format!("{e}")))?, o.trim().parse().map_err(|e| bad(format!("{e}")))?)),
        None => Ok((0, s.trim().parse().map_err(|e| bad(format!("{e}")))?)),
    }
}

fn kind_group(kind: LimitKind) -> MaeGroup {
    match kind {
        LimitKind::Radial => MaeGroup::G1,
        LimitKind::Coordinate(_) => MaeGroup::G2,
        LimitKind::CenteredSquare(_) | LimitKind::DiagContrast(_) => MaeGroup::G3Diag,
        LimitKind::CrossProduct(..) => MaeGroup::G3OffDiag,
    }
}

/// `(a, b)` grid for the one-dimensional ReLU expectation.
const RELU_GRID: [(f64, f64); 6] = [(0.0, 1.0), (5.0, 1.0), (0.5, -2.0), (-1.0, 0.7), (2.0, 3.0), (-0.3, -0.4)];

pub fn oracle(args: &OracleArgs) -> Result<Vec<String>> {
    let common = &args.common;
    let ctx = context(common, &["sigma_tol", "quad_tol", "inject_error", "r_values", "n_limit", "n_relu"], 10, Format::Json)?;
    if ctx.format != Format::Json {
        return Err(ConfigError::new("format", "oracle reports are JSON only").into());
    }
    let d = ctx.d;
    let n = positive("n", ctx.s.pick(common.n, "n", oracles::SPECIAL_CASE_SAMPLES)?)?;
    let n_limit = positive("n_limit", ctx.s.pick(args.n_limit, "n_limit", 1_000_000)?)?;
    let n_relu = positive("n_relu", ctx.s.pick(args.n_relu, "n_relu", oracles::RELU_EXPECTATION_SAMPLES)?)?;
    let gs = groups(&ctx, common)?;
    let inject: Option<String> = ctx.s.pick_opt(args.inject_error.clone(), "inject_error")?;
    let tol = OracleTolerances {
        sigma: ctx.s.pick(args.sigma_tol, "sigma_tol", 4.0)?,
        quad: ctx.s.pick(args.quad_tol, "quad_tol", 1e-8)?,
        inject: inject.as_deref().map(parse_inject).transpose()?,
    };
    let r_values: Vec<f64> = ctx.s.pick_list(args.r_values.as_deref(), "r_values", "0.4,0.2,0.1,0.05,1")?;
    if d < 6 {
        return Err(ConfigError::new("d", "the oracle table needs d ≥ 6").into());
    }
    let mut failures = Vec::new();

    let mut table = oracles::special_case_table(d, n, ctx.seed, tol)?;
    table.rows.retain(|r| gs.contains(&kind_group(r.kind)));
    for r in table.failures() {
        failures.push(format!("special case `{}`: closed {} mc {} (z {:.2})", r.name, r.closed_form, r.mc, r.z_score));
    }

    let mut relu_expectation = Vec::new();
    for (a, b) in RELU_GRID {
        let check = oracles::relu_expectation_check(a, b, n_relu, ctx.seed)?;
        let (z, q) = (check.mc_z(), check.quad_diff());
        let pass = z < tol.sigma && q < tol.quad;
        if !pass {
            failures.push(format!("relu expectation a={a} b={b}: z {z:.2}, quadrature diff {q:.2e}"));
        }
        relu_expectation.push(ReluRow { check, z_score: z, quad_abs_diff: q, pass });
    }

    let mut remainder_sweeps = Vec::new();
    for (g, kind) in [(MaeGroup::G3Diag, LimitKind::DiagContrast(1)), (MaeGroup::G3OffDiag, LimitKind::CrossProduct(1, 2))] {
        if !gs.contains(&g) {
            continue;
        }
        let rep = oracles::remainder_sweep(kind, d, &r_values, n, ctx.seed, tol.sigma)?;
        for r in rep.rows.iter().filter(|r| !r.pass) {
            failures.push(format!("remainder sweep {kind:?} r={}: diff {:.3e} envelope {:.3e}", r.r, r.abs_diff, r.envelope));
        }
        remainder_sweeps.push(rep);
    }

    let [top, second, third] = relu_fim::eigenvectors::cluster_eigenvalues(d);
    let moments: Vec<(MaeGroup, LimitKind, f64, &'static str, f64)> = vec![
        (MaeGroup::G1, LimitKind::Radial, top, "relative", 0.03),
        (MaeGroup::G2, LimitKind::Coordinate(1), second, "sigma", tol.sigma),
        (MaeGroup::G3Diag, LimitKind::DiagContrast(1), third, "relative", 0.05),
        (MaeGroup::G3OffDiag, LimitKind::CrossProduct(1, 2), third, "relative", 0.05),
    ]
    .into_iter()
    .filter(|m| gs.contains(&m.0))
    .collect();
    let fns = moments.iter().map(|m| LimitFn::new(m.1, d)).collect::<relu_fim::Result<Vec<_>>>()?;
    let gram = limit_gram_mc(&fns, n_limit, ctx.seed)?;
    let mut limit_moments = Vec::new();
    for (i, (g, kind, target, rule, t)) in moments.into_iter().enumerate() {
        let e = gram[i][i];
        let rel_dev = (e.value / target - 1.0).abs();
        let z = e.z_score(target);
        let pass = if rule == "sigma" { z < t } else { rel_dev <= t };
        if !pass {
            failures.push(format!("second moment {kind:?}: {} vs {target} ({rule} tol {t})", e.value));
        }
        limit_moments.push(MomentRow {
            group: g,
            kind,
            mc: e.value,
            std_error: e.std_error,
            target,
            rel_dev,
            z_score: z,
            rule,
            tol: t,
            pass,
        });
    }

    let report = OracleReport {
        d,
        seed: ctx.seed,
        special_cases: Some(table),
        relu_expectation,
        remainder_sweeps,
        limit_moments,
        failures: failures.clone(),
    };
    emit(ctx.out.as_deref(), &json(&report)?)?;
    Ok(failures)
}
