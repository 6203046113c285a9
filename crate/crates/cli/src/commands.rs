use std::fs;
use std::path::Path;

use intwave::dispersion::{cont_spec_edge, criticality_check, criticality_check_at, symbol_qtilde, EdgeReport, TaylorCoefficients};
use intwave::dno::{apply_flat_multiplier, FlatKind, Side, StripSolver};
use intwave::params::{bifurcation_curve, classify_region, Curve, RegionLabel};
use intwave::profiles::{
    build_profile, fit_decay_rate, kawahara_default_grid, steady_ode_residual, ProfileKind, ProfileSpec, SteadyEquation,
    KAWAHARA_EXPLICIT_DELTA,
};
use intwave::spectra::{assemble_operator, eigensolve, OperatorKind, OperatorRequest, SpectrumReport};
use intwave::stability::{region_verdict, trivial_flow_verdict, Conclusion, MomentCurve, Verdict};
use intwave::{Grid, GridProfile, NonDimParams, PhysicalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::args::{
    BifurcationArgs, ClassifyArgs, Cli, Command, DispersionArgs, DnCheckArgs, ProfileArgs, SpectrumArgs, VerdictArgs,
};
use crate::error::{CliError, CliResult};
use crate::report::{output_stem, versions, write_outputs, Report, Table, Written};

/// What a run produced, and the conclusion when the command reaches one.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub written: Written,
    pub conclusion: Option<Conclusion>,
    pub summary: String,
}

impl Outcome {
    /// 0 on success, 2 when the verdict is inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.conclusion {
            Some(Conclusion::Inconclusive) => 2,
            _ => 0,
        }
    }
}

pub fn load_params(path: Option<&Path>) -> CliResult<PhysicalParams> {
    let params = match path {
        None => PhysicalParams::p0(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub beta: f64,
    pub lambda: f64,
    pub region: RegionLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationResult {
    pub beta0: f64,
    pub lambda0: f64,
    pub rows: usize,
    /// Samples dropped at or beyond the Γ₂ pole.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub edge: EdgeReport,
    pub taylor_at_critical_point: TaylorCoefficients,
    pub taylor_at_params: TaylorCoefficients,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnCheckRow {
    pub side: String,
    pub input: String,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnCheckResult {
    pub grid: Grid,
    pub ny: usize,
    pub max_relative_error: f64,
    pub rows: Vec<DnCheckRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub spec: ProfileSpec,
    pub grid: Grid,
    pub peak: f64,
    pub integral: f64,
    pub l2_norm: f64,
    pub steady_residual: Option<f64>,
    pub decay_rate_fit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictResult {
    pub verdict: Verdict,
    pub curve: MomentCurve,
}

struct Context<'a> {
    cli: &'a Cli,
    params: PhysicalParams,
    nondim: NonDimParams,
}

impl Context<'_> {
    fn emit<T: Serialize, O: Serialize>(&self, options: &O, result: T, table: Option<&Table>) -> CliResult<(Written, T)> {
        let command = self.cli.command.name();
        let report = Report {
            command: command.to_string(),
            versions: versions(),
            params: self.params,
            nondim: self.nondim.clone(),
            seed: self.cli.global.seed,
            options: serde_json::to_value(options).map_err(|e| CliError::Config(e.to_string()))?,
            result,
        };
        let stem = output_stem(command, !self.cli.global.no_timestamp);
        let written = write_outputs(&self.cli.global.output_dir, &stem, &report, table)?;
        Ok((written, report.result))
    }
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let params = load_params(cli.global.params.as_deref())?;
    let nondim = params.nondimensionalize().map_err(|e| CliError::Config(e.to_string()))?;
    let ctx = Context { cli, params, nondim };
    match &cli.command {
        Command::Classify(a) => classify(&ctx, a),
        Command::Bifurcation(a) => bifurcation(&ctx, a),
        Command::Dispersion(a) => dispersion(&ctx, a),
        Command::DnCheck(a) => dn_check(&ctx, a),
        Command::Profile(a) => profile(&ctx, a),
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Verdict(a) => verdict(&ctx, a),
        Command::Trivial(a) => {
            let v = trivial_flow_verdict(&ctx.params)?;
            let (written, v) = ctx.emit(a, v, None)?;
            Ok(Outcome { written, conclusion: Some(v.conclusion), summary: format!("{:?}", v.conclusion) })
        }
    }
}

fn classify(ctx: &Context, a: &ClassifyArgs) -> CliResult<Outcome> {
    if !(a.c_width > 0.0) {
        return Err(CliError::Config(format!("c-width must be positive, got {}", a.c_width)));
    }
    let nd = ctx.nondim.with_beta_lambda(a.beta.unwrap_or(ctx.nondim.beta), a.lambda.unwrap_or(ctx.nondim.lambda));
    let region = classify_region(&nd, a.c_width);
    let summary = format!("region {:?}", region.label);
    let (written, _) = ctx.emit(a, ClassifyResult { beta: nd.beta, lambda: nd.lambda, region }, None)?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn sample_points(max: f64, samples: usize) -> CliResult<Vec<f64>> {
    if !(max > 0.0 && max.is_finite()) || samples < 2 {
        return Err(CliError::Config(format!("need a positive range and at least 2 samples, got {max} and {samples}")));
    }
    Ok((0..samples).map(|i| max * i as f64 / (samples - 1) as f64).collect())
}

fn bifurcation(ctx: &Context, a: &BifurcationArgs) -> CliResult<Outcome> {
    let nd = &ctx.nondim;
    let mut table = Table::new(&["curve", "s", "beta", "lambda"]);
    table.push(vec!["critical".into(), "0".into(), nd.beta0.to_string(), nd.lambda0.to_string()]);
    let mut skipped = 0;
    for (name, curve) in [("gamma2", Curve::Gamma2), ("gamma3", Curve::Gamma3)] {
        for s in sample_points(a.xi_max, a.samples)? {
            match bifurcation_curve(nd, curve, s) {
                Ok((b, l)) => table.push(vec![name.into(), s.to_string(), b.to_string(), l.to_string()]),
                Err(intwave::Error::Singular(_)) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let result = BifurcationResult { beta0: nd.beta0, lambda0: nd.lambda0, rows: table.rows.len(), skipped };
    let summary = format!("{} rows, {} skipped at the pole", result.rows, skipped);
    let (written, _) = ctx.emit(a, result, Some(&table))?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn dispersion(ctx: &Context, a: &DispersionArgs) -> CliResult<Outcome> {
    let nd = &ctx.nondim;
    let mut table = Table::new(&["xi", "qtilde"]);
    for xi in sample_points(a.xi_max, a.samples)? {
        table.push_numbers(&[xi, symbol_qtilde(xi, nd)]);
    }
    let result = DispersionResult {
        edge: cont_spec_edge(&ctx.params),
        taylor_at_critical_point: criticality_check(nd),
        taylor_at_params: criticality_check_at(nd, nd.beta, nd.lambda),
    };
    let summary = format!("nu* = {} at xi = {}", result.edge.nu_star_dimless, result.edge.argmin_xi);
    let (written, _) = ctx.emit(a, result, Some(&table))?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn relative_error(approx: &[f64], exact: &[f64]) -> f64 {
    let num: f64 = approx.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = exact.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

fn dn_check(ctx: &Context, a: &DnCheckArgs) -> CliResult<Outcome> {
    let grid = Grid::new(a.half_period, a.nx).map_err(|e| CliError::Config(e.to_string()))?;
    let half_modes = a.nx / 2;
    if let Some(&m) = a.modes.iter().find(|&&m| m == 0 || m >= half_modes) {
        return Err(CliError::Config(format!("modes must lie in 1..{half_modes}, got {m}")));
    }
    if a.random_modes == 0 || a.random_modes >= half_modes {
        return Err(CliError::Config(format!("random-modes must lie in 1..{half_modes}")));
    }
    let wavenumber = |m: usize| std::f64::consts::PI * m as f64 / a.half_period;
    let mut inputs: Vec<(String, GridProfile)> = a
        .modes
        .iter()
        .map(|&m| (format!("cos-{m}"), GridProfile::from_fn(grid, |x| (wavenumber(m) * x).cos())))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cli.global.seed);
    let coeffs: Vec<(f64, f64)> =
        (1..=a.random_modes).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    inputs.push((
        "random".into(),
        GridProfile::from_fn(grid, |x| {
            coeffs.iter().enumerate().map(|(i, (c, s))| c * (wavenumber(i + 1) * x).cos() + s * (wavenumber(i + 1) * x).sin()).sum()
        }),
    ));

    let flat = GridProfile::zeros(grid);
    let mut table = Table::new(&["side", "input", "relative_error"]);
    let mut rows = Vec::new();
    for (side, kind, name) in [(Side::Plus, FlatKind::GPlus, "plus"), (Side::Minus, FlatKind::GMinus, "minus")] {
        let solver = StripSolver::new(&flat, side, &ctx.params, a.ny)?;
        for (label, f) in &inputs {
            let exact = apply_flat_multiplier(kind, f, &ctx.params)?;
            let err = relative_error(&solver.apply(&f.values)?, &exact.values);
            table.push(vec![name.into(), label.clone(), err.to_string()]);
            rows.push(DnCheckRow { side: name.into(), input: label.clone(), relative_error: err });
        }
    }
    let max_relative_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let summary = format!("max relative error {max_relative_error:e}");
    let result = DnCheckResult { grid, ny: a.ny, max_relative_error, rows };
    let (written, _) = ctx.emit(a, result, Some(&table))?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn explicit_grid(half_period: Option<f64>, n: Option<usize>) -> CliResult<Option<Grid>> {
    match (half_period, n) {
        (Some(l), Some(n)) => Ok(Some(Grid::new(l, n).map_err(|e| CliError::Config(e.to_string()))?)),
        _ => Ok(None),
    }
}

fn profile_spec(nd: &NonDimParams, a: &ProfileArgs) -> ProfileSpec {
    let beta = a.beta.unwrap_or(nd.beta);
    let mut spec = match a.kind {
        ProfileKind::Kdv => ProfileSpec::kdv(nd.varrho, nd.h, beta),
        ProfileKind::GardnerElevation | ProfileKind::GardnerDepression => {
            ProfileSpec::gardner_for(a.kind == ProfileKind::GardnerElevation, nd.varrho, nd.h, a.kappa, Some(beta))
        }
        ProfileKind::KawaharaExplicit => ProfileSpec::kawahara_explicit(),
        ProfileKind::KawaharaNumeric => ProfileSpec::kawahara(a.delta),
        ProfileKind::CubicKawaharaNumeric => {
            ProfileSpec::cubic_kawahara(a.delta, a.kappa, nd.varrho, nd.h, a.negative_branch)
        }
    };
    if a.cubic.is_some() {
        spec.cubic = a.cubic;
    }
    spec
}

fn profile(ctx: &Context, a: &ProfileArgs) -> CliResult<Outcome> {
    let spec = profile_spec(&ctx.nondim, a);
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let grid = match explicit_grid(a.half_period, a.n)? {
        Some(g) => g,
        None => match spec.kind {
            ProfileKind::KawaharaExplicit => kawahara_default_grid(KAWAHARA_EXPLICIT_DELTA)?,
            ProfileKind::KawaharaNumeric | ProfileKind::CubicKawaharaNumeric => kawahara_default_grid(a.delta)?,
            _ => Grid::new(40.0 * spec.width()?, 1024)?,
        },
    };
    let z = build_profile(&spec, grid)?;
    let mut table = Table::new(&["x", "value"]);
    for (x, v) in grid.points().iter().zip(&z.values) {
        table.push_numbers(&[*x, *v]);
    }
    let fourth_order = !matches!(spec.kind, ProfileKind::Kdv | ProfileKind::GardnerElevation | ProfileKind::GardnerDepression);
    let result = ProfileResult {
        spec: spec.clone(),
        grid,
        peak: z.values.iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m }),
        integral: z.integral(),
        l2_norm: z.l2_norm(),
        steady_residual: SteadyEquation::for_spec(&spec).ok().map(|eq| steady_ode_residual(&z, eq)),
        decay_rate_fit: if fourth_order { fit_decay_rate(&z).ok() } else { None },
    };
    let summary = format!("peak {} on {} points", result.peak, grid.n);
    let (written, _) = ctx.emit(a, result, Some(&table))?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn operator_request(nd: &NonDimParams, a: &SpectrumArgs) -> CliResult<OperatorRequest> {
    let (varrho, h) = (nd.varrho, nd.h);
    let beta = a.beta.unwrap_or(nd.beta);
    Ok(match a.kind {
        OperatorKind::Qtilde0AKdv => OperatorRequest::Qtilde0AKdv { varrho, h, beta },
        OperatorKind::Qtilde0AGardner => OperatorRequest::Qtilde0AGardner {
            varrho,
            h,
            kappa: a.kappa,
            cubic: a.cubic,
            beta: Some(beta),
            elevation: !a.depression,
        },
        OperatorKind::Qtilde0C => OperatorRequest::Qtilde0C { varrho, h, delta: a.delta },
        OperatorKind::Qtilde0CCubic => OperatorRequest::Qtilde0CCubic {
            varrho,
            h,
            delta: a.delta,
            kappa: a.kappa,
            negative_branch: a.negative_branch,
        },
        OperatorKind::QepsA => OperatorRequest::QepsA { varrho, h, beta, epsilon: a.epsilon },
        OperatorKind::QepsC => OperatorRequest::QepsC { varrho, h, delta: a.delta, epsilon: a.epsilon },
        OperatorKind::Qdelta => OperatorRequest::Qdelta { delta: a.delta },
        OperatorKind::QcEta => {
            return Err(CliError::Config("qc-eta needs an interface profile and is not available here".into()))
        }
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub request: OperatorRequest,
    /// Eigenvector columns go to the CSV; `lowest_vectors` is left empty.
    pub report: SpectrumReport,
}

fn spectrum(ctx: &Context, a: &SpectrumArgs) -> CliResult<Outcome> {
    if a.k == 0 {
        return Err(CliError::Config("k must be at least 1".into()));
    }
    let request = operator_request(&ctx.nondim, a)?;
    let grid = match explicit_grid(a.half_period, a.n)? {
        Some(g) => g,
        None => request.default_grid()?,
    };
    let op = assemble_operator(&request, grid)?;
    let mut report = eigensolve(&op, a.k);
    let vectors = std::mem::take(&mut report.lowest_vectors);
    let mut header = vec!["x".to_string()];
    header.extend((1..=vectors.len()).map(|i| format!("v{i}")));
    let mut table = Table { header, rows: Vec::new() };
    for (j, x) in grid.points().iter().enumerate() {
        let mut row = vec![*x];
        row.extend(vectors.iter().map(|v| v.values[j]));
        table.push_numbers(&row);
    }
    let summary = format!("lowest eigenvalues {:?}, {} negative", report.eigenvalues, report.n_negative);
    let (written, _) = ctx.emit(a, SpectrumResult { request, report }, Some(&table))?;
    Ok(Outcome { written, conclusion: None, summary })
}

fn verdict(ctx: &Context, a: &VerdictArgs) -> CliResult<Outcome> {
    let c_star = a.cstar.unwrap_or(ctx.params.c);
    let (v, curve) = region_verdict(c_star, a.family, &ctx.params, a.dc, a.n)?;
    let mut table = Table::new(&["c", "dprime", "epsilon", "statistic", "statistic_error"]);
    for p in &curve.samples {
        table.push_numbers(&[p.c, p.dprime, p.epsilon, p.statistic, p.statistic_error]);
    }
    let conclusion = v.conclusion;
    let summary = format!("{conclusion:?} ({})", v.criterion);
    let (written, _) = ctx.emit(a, VerdictResult { verdict: v, curve }, Some(&table))?;
    Ok(Outcome { written, conclusion: Some(conclusion), summary })
}
