//! Command-line front end: configuration, dispatch and JSON reports.
//!
//! `spinlab <command> --config FILE` reads a [`RunConfig`], runs the command,
//! prints a [`Report`] to stdout and writes bulk fields into `--out`.
//! Exit status: 0 all checks met, 1 a declared tolerance failed, 2 schema or
//! usage error, 3 numerical failure, 4 unknown command.

mod config;
mod expr;
mod io;
mod report;

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::Parser;
use num_complex::Complex64;
use serde_json::{json, Value};

pub use config::{MetricSpec, Options, ParamsSpec, PotentialSpec, Resolver, RunConfig, SpinorSpec};
pub use expr::Expr;
pub use io::{real_field_from_json, real_field_to_json, spinor_from_json, spinor_to_json, FieldFile, GridSpec};
pub use report::{Check, Profile, Report, Tolerances};

use crate::cauchy::{evolve_dirac, Background, EvolutionConfig};
use crate::clifford::{GammaRep, MAX_DIM};
use crate::edm::{
    calibration, clifford_symbol, constraint_residual, edm_residual, el_consistency, first_variation, lagrangian,
    principal_symbol, pullback_symbol_report, wave_gauge_residual, Direction, EdmFields, InitialData,
    SpacetimeOneForm,
};
use crate::error::Error;
use crate::grid::{MetricField, OneFormField, VectorField};
use crate::linalg::max_abs;
use crate::random::FieldSampler;
use crate::spinor::{
    beta_residuals, beta_transport, conjugated_dirac, dirac, dirac_potential, dirac_pullback, operator_spectrum,
    MetricPath, SpinGeometry, SpinStructureTwist, SpinorField, RESOLVED_SMOOTHNESS,
};

/// Every command accepted by [`run`].
pub const COMMANDS: [&str; 12] = [
    "clifford-check",
    "dirac-spectrum",
    "dirac-apply",
    "dirac-pullback",
    "beta-transport",
    "edm-residual",
    "lagrangian",
    "el-check",
    "constraints",
    "wave-gauge",
    "symbol",
    "evolve",
];

/// Largest `r + s` covered by `clifford-check` without an explicit signature.
pub const CLIFFORD_SUITE_DIM: usize = 6;

const DEFAULT_COUNT: usize = 16;
const DEFAULT_DIRECTIONS: usize = 5;
const DEFAULT_STEP: f64 = 1e-3;
const DEFAULT_CFL: f64 = 0.5;
const DEFAULT_STEPS: usize = 100;
const DIRECTION_AMPLITUDES: (f64, f64, f64) = (0.1, 0.3, 0.3);

/// Failure of a command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownCommand(_) => 4,
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                Error::Degenerate { .. }
                | Error::NotJoinable(_)
                | Error::NotPseudoOrthogonal { .. }
                | Error::Logarithm(_)
                | Error::SymbolFit(_)
                | Error::Eigensolver(_)
                | Error::Evolution { .. } => 3,
                _ => 2,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct Context {
    pub profile: Profile,
    /// Directory against which relative field-file paths resolve.
    pub base: PathBuf,
    /// Explicit signature for `clifford-check`.
    pub signature: Option<(usize, usize)>,
}

impl Default for Context {
    fn default() -> Self {
        Self {
            profile: Profile::Default,
            base: PathBuf::from("."),
            signature: None,
        }
    }
}

/// A report plus the bulk files (name, contents) a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    /// The exit status the report implies.
    pub fn exit_code(&self) -> i32 {
        if self.report.has_non_finite() {
            3
        } else if self.report.passed {
            0
        } else {
            1
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.report.outputs.push(name.into());
        self.files.push((name.into(), contents));
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinlab", version, about = "Spinor geometry checks on flat-coordinate tori")]
struct Cli {
    /// One of: clifford-check, dirac-spectrum, dirac-apply, dirac-pullback,
    /// beta-transport, edm-residual, lagrangian, el-check, constraints,
    /// wave-gauge, symbol, evolve.
    command: Option<String>,
    /// JSON configuration file, or `-` for stdin.
    #[arg(long)]
    config: Option<String>,
    /// Directory receiving bulk output files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
    /// Positive directions for `clifford-check`.
    #[arg(long)]
    r: Option<usize>,
    /// Negative directions for `clifford-check`.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
}

fn usage() -> String {
    format!(
        "usage: spinlab <COMMAND> [--config FILE|-] [--out DIR] [--tolerance-profile default|strict]\ncommands: {}",
        COMMANDS.join(", ")
    )
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.report.to_json());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::UnknownCommand(_)) {
                eprintln!("{}", usage());
            }
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("SPINLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    let command = cli.command.as_deref().ok_or_else(|| CliError::UnknownCommand(String::new()))?;
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.into()));
    }
    let (config, base) = match cli.config.as_deref() {
        None => (None, PathBuf::from(".")),
        Some("-") => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text).map_err(Error::from)?;
            (Some(RunConfig::from_json(&text)?), PathBuf::from("."))
        }
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let base = Path::new(path).parent().map(Path::to_path_buf).unwrap_or_default();
            (Some(RunConfig::from_json(&text)?), base)
        }
    };
    let config = config.map(|mut c| {
        let o = &mut c.options;
        o.steps = cli.steps.or(o.steps);
        o.cfl = cli.cfl.or(o.cfl);
        o.stride = cli.stride.or(o.stride);
        c
    });
    let signature = match (cli.r, cli.s) {
        (None, None) => None,
        (r, s) => Some((r.unwrap_or(0), s.unwrap_or(0))),
    };
    let ctx = Context {
        profile: cli.tolerance_profile,
        base,
        signature,
    };
    let outcome = run(command, config.as_ref(), &ctx)?;
    std::fs::create_dir_all(&cli.out).map_err(Error::from)?;
    for (name, contents) in &outcome.files {
        std::fs::write(cli.out.join(name), contents).map_err(Error::from)?;
    }
    Ok(outcome)
}

/// Runs one command. `config` may be absent only for `clifford-check`.
pub fn run(command: &str, config: Option<&RunConfig>, ctx: &Context) -> CliResult<Outcome> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.into()));
    }
    let mut out = Outcome {
        report: Report::new(command, config.map(RunConfig::hash), ctx.profile),
        files: Vec::new(),
    };
    let tol = Tolerances::for_profile(ctx.profile);
    if command == "clifford-check" {
        clifford_check(&mut out, config, ctx, &tol)?;
        return Ok(out);
    }
    let cfg = config.ok_or_else(|| CliError::Usage(format!("`{command}` needs --config")))?;
    let res = Resolver::new(cfg, &ctx.base);
    match command {
        "dirac-spectrum" => dirac_spectrum(&mut out, &res, &tol)?,
        "dirac-apply" => dirac_apply(&mut out, &res)?,
        "dirac-pullback" => dirac_pullback_cmd(&mut out, &res, &tol)?,
        "beta-transport" => beta_transport_cmd(&mut out, &res, &tol)?,
        "edm-residual" => edm_residual_cmd(&mut out, &res)?,
        "lagrangian" => lagrangian_cmd(&mut out, &res)?,
        "el-check" => el_check(&mut out, &res, &tol)?,
        "constraints" => constraints(&mut out, &res)?,
        "wave-gauge" => wave_gauge(&mut out, &res)?,
        "symbol" => symbol(&mut out, &res, &tol)?,
        "evolve" => evolve(&mut out, &res, &tol)?,
        _ => unreachable!("command list checked above"),
    }
    Ok(out)
}

fn clifford_check(out: &mut Outcome, config: Option<&RunConfig>, ctx: &Context, tol: &Tolerances) -> CliResult<()> {
    let signatures: Vec<(usize, usize)> = match (ctx.signature, config) {
        (Some(sig), _) => vec![sig],
        (None, Some(c)) => vec![c.signature()],
        (None, None) => (1..=CLIFFORD_SUITE_DIM.min(MAX_DIM))
            .flat_map(|m| (0..=m).map(move |s| (m - s, s)))
            .collect(),
    };
    let mut worst = [0.0f64; 3];
    let mut per = serde_json::Map::new();
    for (r, s) in signatures {
        let rep = GammaRep::new(r, s)?;
        let v = [
            rep.anticommutator_residual(),
            rep.adjoint_residual(),
            rep.inner_hermitian_residual(),
        ];
        for (w, x) in worst.iter_mut().zip(v) {
            *w = w.max(x);
        }
        per.insert(
            format!("({r},{s})"),
            json!({"anticommutator": v[0], "adjoint": v[1], "inner_hermitian": v[2], "spinor_dim": rep.spinor_dim()}),
        );
    }
    out.report.value("signatures", Value::Object(per));
    out.report.check("anticommutator", worst[0], tol.clifford);
    out.report.check("adjoint", worst[1], tol.clifford);
    out.report.check("inner_hermitian", worst[2], tol.clifford);
    Ok(())
}

/// The potential and the first charge, when the potential is non-zero.
fn coupling(res: &Resolver) -> CliResult<Option<(OneFormField, f64)>> {
    let a = res.potential()?;
    if a.max_abs() == 0.0 {
        return Ok(None);
    }
    Ok(Some((a, res.config.params.q.first().copied().unwrap_or(1.0))))
}

fn dirac_spectrum(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let g = res.metric(&cfg.metric)?;
    let geom = SpinGeometry::new(&rep, &g)?;
    let twist = cfg.spin_structure()?;
    let count = cfg.options.count.unwrap_or(DEFAULT_COUNT);
    let pot = coupling(res)?;
    let op = geom.dirac_operator(pot.as_ref().map(|(a, q)| (a, *q)))?;
    let spec = operator_spectrum(&op, &g, &twist, count)?;
    out.report.value("eigenvalues", spec.eigenvalues.clone());
    out.report.value("resolved", spec.resolved());
    out.report.value("doublers", spec.doublers());
    out.report.value("matrix_dim", spec.matrix_dim);
    out.report.check("hermiticity_defect", spec.hermiticity_defect, tol.hermiticity);
    let mut csv = String::from("eigenvalue,index,smoothness,resolved\n");
    for (i, (l, s)) in spec.eigenvalues.iter().zip(&spec.smoothness).enumerate() {
        csv.push_str(&format!("{l:.16e},{i},{s:.16e},{}\n", u8::from(*s > RESOLVED_SMOOTHNESS)));
    }
    out.file("spectrum.csv", csv);
    Ok(())
}

fn require_spinors(res: &Resolver, spinor_dim: usize) -> CliResult<Vec<SpinorField>> {
    let psi = res.spinors(spinor_dim)?;
    if psi.is_empty() {
        return Err(Error::Config("this command needs at least one spinor".into()).into());
    }
    Ok(psi)
}

fn raise(g: &MetricField, a: &OneFormField) -> VectorField {
    let m = g.dim();
    let mut values = vec![0.0; a.values.len()];
    for p in 0..g.grid.len() {
        for i in 0..m {
            values[p * m + i] = (0..m).map(|j| g.inv(p, i, j) * a.at(p)[j]).sum();
        }
    }
    VectorField {
        grid: g.grid.clone(),
        values,
    }
}

fn dirac_apply(out: &mut Outcome, res: &Resolver) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let g = res.metric(&cfg.metric)?;
    let geom = SpinGeometry::new(&rep, &g)?;
    let a = res.potential()?;
    let spinors = require_spinors(res, rep.spinor_dim())?;
    let sharp = raise(&g, &a);
    let mut norms = Vec::new();
    let mut gaps = Vec::new();
    for (i, psi) in spinors.iter().enumerate() {
        let q = cfg.params.q.get(i).copied().unwrap_or(0.0);
        let gauged = dirac_potential(&geom, &a, q, psi)?;
        // The alternative convention `D^g ψ − q A·ψ`.
        let alternative = dirac(&geom, psi)?.sub(&geom.clifford_field(&sharp, psi)?.scale(Complex64::new(q, 0.0)))?;
        norms.push(gauged.max_abs());
        gaps.push(gauged.sub(&alternative)?.max_abs());
        out.file(&format!("dirac_apply_{i}.json"), to_pretty(&spinor_to_json(&gauged)));
    }
    out.report.value("max_abs", norms);
    out.report.value("convention_gap", gaps);
    Ok(())
}

fn to_pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("field serializes")
}

fn target(res: &Resolver) -> CliResult<MetricField> {
    let spec = res
        .config
        .options
        .target_metric
        .as_ref()
        .ok_or_else(|| Error::Config("options.target_metric is required".into()))?;
    Ok(res.metric(spec)?)
}

fn dirac_pullback_cmd(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let g = res.metric(&cfg.metric)?;
    let h = target(res)?;
    let geom = SpinGeometry::new(&rep, &g)?;
    let mut gaps = Vec::new();
    for (i, psi) in require_spinors(res, rep.spinor_dim())?.iter().enumerate() {
        let direct = dirac_pullback(&geom, &h, psi)?;
        let oracle = conjugated_dirac(&rep, &g, &h, psi)?;
        let scale = oracle.max_abs().max(f64::MIN_POSITIVE);
        gaps.push(direct.sub(&oracle)?.max_abs() / scale);
        out.file(&format!("dirac_pullback_{i}.json"), to_pretty(&spinor_to_json(&direct)));
    }
    let worst = gaps.iter().fold(0.0f64, |a, b| a.max(*b));
    out.report.value("relative_gaps", gaps);
    out.report.check("pullback_relative_gap", worst, tol.pullback);
    Ok(())
}

fn beta_transport_cmd(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let g = res.metric(&cfg.metric)?;
    let h = target(res)?;
    let path = MetricPath::new(&g, &h)?;
    let mut worst = [0.0f64; 3];
    for (i, psi) in require_spinors(res, rep.spinor_dim())?.iter().enumerate() {
        let r = beta_residuals(&rep, &g, &h, psi)?;
        for (w, x) in worst.iter_mut().zip([r.round_trip, r.isometry, r.intertwining]) {
            *w = w.max(x);
        }
        let moved = beta_transport(&rep, &path, psi)?;
        out.file(&format!("beta_transport_{i}.json"), to_pretty(&spinor_to_json(&moved)));
    }
    out.report.check("round_trip", worst[0], tol.beta);
    out.report.check("isometry", worst[1], tol.beta);
    out.report.check("intertwining", worst[2], tol.beta);
    Ok(())
}

fn fields(res: &Resolver, rep: &GammaRep) -> CliResult<EdmFields> {
    Ok(EdmFields {
        metric: res.metric(&res.config.metric)?,
        spinors: res.spinors(rep.spinor_dim())?,
        potential: res.potential()?,
    })
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

fn residual_check(out: &mut Outcome, res: &Resolver, name: &str, value: f64) {
    if let Some(t) = res.config.options.residual_tolerance {
        out.report.check(name, value, t);
    }
}

fn edm_residual_cmd(out: &mut Outcome, res: &Resolver) -> CliResult<()> {
    let rep = res.config.rep()?;
    let params = res.config.params()?;
    let f = fields(res, &rep)?;
    let r = edm_residual(&rep, &params, &f)?;
    let (e, d, m) = r.norms();
    let dirac_rms = rms(r.dirac.iter().flat_map(|psi| psi.values.iter().map(|z| z.norm())));
    let maxwell_rms = rms(r.maxwell.re.values.iter().chain(&r.maxwell.im.values).copied());
    out.report.value("einstein", json!({"max": e, "rms": rms(r.einstein.values.iter().copied())}));
    out.report.value("dirac", json!({"max": d, "rms": dirac_rms}));
    out.report.value("maxwell", json!({"max": m, "rms": maxwell_rms}));
    residual_check(out, res, "einstein", e);
    residual_check(out, res, "dirac", d);
    residual_check(out, res, "maxwell", m);
    Ok(())
}

fn lagrangian_cmd(out: &mut Outcome, res: &Resolver) -> CliResult<()> {
    let rep = res.config.rep()?;
    let params = res.config.params()?;
    let f = fields(res, &rep)?;
    out.report.value("action", lagrangian(&rep, &params, &f)?);
    Ok(())
}

fn el_check(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let params = cfg.params()?;
    let f = fields(res, &rep)?;
    let cal = calibration()?;
    let mut rng = FieldSampler::new(cfg.options.seed.unwrap_or(1));
    let step = cfg.options.step.unwrap_or(DEFAULT_STEP);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_exact = 0.0f64;
    for _ in 0..cfg.options.directions.unwrap_or(DEFAULT_DIRECTIONS) {
        let dir = Direction::random(&mut rng, &f, DIRECTION_AMPLITUDES)?;
        let r = el_consistency(&rep, &params, &f, &dir, step)?;
        worst = worst.max(r.relative_gap);
        let mut row = json!({
            "dl": r.dl, "coarse": r.derivative.coarse, "fine": r.derivative.fine,
            "pairing": r.pairing, "terms": r.terms.to_vec(), "relative_gap": r.relative_gap,
        });
        if rep.signature().1 == 0 {
            let exact = first_variation(&rep, &params, &f, &dir)?;
            let rel = (exact - r.dl).abs() / exact.abs().max(r.dl.abs()).max(f64::MIN_POSITIVE);
            worst_exact = worst_exact.max(rel);
            row["exact_variation"] = json!(exact);
            row["exact_relative_gap"] = json!(rel);
        }
        rows.push(row);
    }
    out.report.value("calibration", json!({"c": cal.c.to_vec(), "misfit": cal.misfit, "directions": cal.directions}));
    out.report.value("directions", rows);
    if rep.signature().1 == 0 {
        out.report.value("max_exact_relative_gap", worst_exact);
    }
    out.report.check("el_relative_gap", worst, tol.el_gap);
    Ok(())
}

fn constraints(out: &mut Outcome, res: &Resolver) -> CliResult<()> {
    let cfg = res.config;
    let params = cfg.params()?;
    let g0 = res.metric(&cfg.metric)?;
    let grid = g0.grid.clone();
    let spacetime = GammaRep::new(cfg.dimension, 1)?;
    let o = &cfg.options;
    let k = match &o.extrinsic {
        Some(rows) => res.tensor_exprs(rows)?,
        None => crate::grid::TensorField::zeros(&grid),
    };
    let a0 = SpacetimeOneForm {
        spatial: res.potential()?,
        normal: match &o.normal_potential {
            Some(e) => res.scalar_expr(e)?,
            None => crate::grid::ScalarField::zeros(&grid),
        },
    };
    let a1 = SpacetimeOneForm {
        spatial: match &o.potential_rate {
            Some(e) => res.one_form_exprs(e)?,
            None => OneFormField::zeros(&grid),
        },
        normal: crate::grid::ScalarField::zeros(&grid),
    };
    let data = InitialData::new(g0, k, res.spinors(spacetime.spinor_dim())?, a0, a1)?;
    let r = constraint_residual(&data, &params)?;
    let (h, m) = r.norms();
    out.report.value("hamiltonian", json!({"max": h, "rms": rms(r.hamiltonian.values.iter().copied())}));
    out.report.value("momentum", json!({"max": m, "rms": rms(r.momentum.values.iter().copied())}));
    residual_check(out, res, "hamiltonian", h);
    residual_check(out, res, "momentum", m);
    Ok(())
}

fn wave_gauge(out: &mut Outcome, res: &Resolver) -> CliResult<()> {
    let cfg = res.config;
    let g = res.metric(&cfg.metric)?;
    let h = res.metric(cfg.options.target_metric.as_ref().unwrap_or(&MetricSpec::Flat))?;
    let q = wave_gauge_residual(&h, &g)?;
    out.report.value("max", q.max_abs());
    out.report.value("rms", rms(q.values.iter().copied()));
    residual_check(out, res, "wave_gauge", q.max_abs());
    Ok(())
}

fn complex_matrix_json(m: &crate::clifford::CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn symbol(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    let rep = cfg.rep()?;
    let g = res.metric(&cfg.metric)?;
    let grid = g.grid.clone();
    let m = cfg.dimension;
    let omega = cfg.options.omega.clone().unwrap_or_else(|| vec![1.0; m]);
    let base = match &cfg.options.base {
        Some(idx) => {
            if idx.len() != m || idx.iter().zip(grid.sizes()).any(|(i, n)| i >= n) {
                return Err(Error::Config("options.base is not a grid index".into()).into());
            }
            grid.flat_index(idx)
        }
        None => grid.flat_index(&grid.sizes().iter().map(|n| n / 2).collect::<Vec<_>>()),
    };
    let geom = SpinGeometry::new(&rep, &g)?;
    let twist = SpinStructureTwist::periodic(m);
    let empirical = principal_symbol(|psi| dirac(&geom, psi), 1, &grid, &twist, rep.spinor_dim(), &omega, base)?;
    let closed = clifford_symbol(&geom, base, &omega);
    out.report.value("dirac_empirical", complex_matrix_json(&empirical));
    out.report.check("dirac_symbol", max_abs(&(&empirical - &closed)), tol.dirac_symbol);
    if let Some(spec) = &cfg.options.target_metric {
        let h = res.metric(spec)?;
        let r = pullback_symbol_report(&rep, &g, &h, &omega, base, tol.pullback_symbol)?;
        out.report.value(
            "pullback_square",
            json!({
                "matches": r.matches,
                "g_quadratic": r.g_quadratic, "h_quadratic": r.h_quadratic, "chain_value": r.chain_value,
                "g_deviation": r.g_deviation, "h_deviation": r.h_deviation, "chain_deviation": r.chain_deviation,
            }),
        );
        out.report.check("pullback_symbol", r.g_deviation.min(r.h_deviation), tol.pullback_symbol);
    }
    Ok(())
}

fn evolve(out: &mut Outcome, res: &Resolver, tol: &Tolerances) -> CliResult<()> {
    let cfg = res.config;
    if cfg.dimension != 1 || cfg.signature() != (1, 0) {
        return Err(Error::Config("evolve expects a one-dimensional slice with signature [1, 0]".into()).into());
    }
    let o = &cfg.options;
    let twist = cfg.twist.as_ref().map_or(0.0, |t| t[0]);
    let mut ec = EvolutionConfig::new(
        cfg.grid[0],
        o.cfl.unwrap_or(DEFAULT_CFL),
        o.steps.unwrap_or(DEFAULT_STEPS),
        twist,
    );
    ec.stride = o.stride.unwrap_or(0);
    ec.lambda = cfg.params.lambda.first().copied().unwrap_or(0.0);
    let profile = |src: &Option<String>| -> CliResult<Option<Expr>> {
        Ok(match src {
            Some(s) => Some(Expr::parse_in(s, 1, true)?),
            None => None,
        })
    };
    let scale = profile(&o.scale)?;
    let lapse = profile(&o.lapse)?;
    let static_background = !scale.as_ref().is_some_and(Expr::uses_time) && !lapse.as_ref().is_some_and(Expr::uses_time);
    if scale.is_some() || lapse.is_some() {
        ec.background = Background::new(
            move |t, x| scale.as_ref().map_or(1.0, |e| e.eval(&[x], t)),
            move |t, x| lapse.as_ref().map_or(1.0, |e| e.eval(&[x], t)),
        );
    }
    let spinor_dim = GammaRep::new(1, 1)?.spinor_dim();
    let psi0 = require_spinors(res, spinor_dim)?.remove(0);
    let traj = evolve_dirac(&ec, &psi0)?;
    let mut csv = String::from("t,charge,max_norm\n");
    for ((t, q), n) in traj.times.iter().zip(&traj.charge).zip(&traj.max_norm) {
        csv.push_str(&format!("{t:.16e},{q:.16e},{n:.16e}\n"));
    }
    out.file("timeseries.csv", csv);
    out.file("final_state.json", to_pretty(&spinor_to_json(&traj.final_state)));
    for (k, (t, psi)) in traj.samples.iter().enumerate().skip(1) {
        if k + 1 < traj.samples.len() {
            out.file(&format!("state_{k:05}.json"), to_pretty(&json!({"t": t, "field": spinor_to_json(psi)})));
        }
    }
    let q0 = traj.charge[0];
    let drift = traj
        .charge
        .iter()
        .fold(0.0f64, |a, q| a.max((q - q0).abs() / q0.abs().max(f64::MIN_POSITIVE)));
    out.report.value("dt", traj.dt);
    out.report.value("steps", traj.times.len() - 1);
    out.report.value("final_time", *traj.times.last().expect("initial time present"));
    out.report.value("charge_initial", q0);
    out.report.value("charge_drift", drift);
    out.report.value("final_max_norm", traj.final_state.max_abs());
    if ec.lambda == 0.0 && static_background && q0 != 0.0 {
        out.report.check("charge_drift", drift, tol.charge_drift);
    }
    Ok(())
}
