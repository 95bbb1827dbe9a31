//! Command execution. Every command returns an exit code and the text to
//! print; `main` only does argument parsing and I/O.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use superharm_core::berezin::{divergence, divergence_closed, lie_berezin, riemannian_volume, BerezinSection, Density};
use superharm_core::exec::Exec;
use superharm_core::harmonic::{
    gradient, gradient_from_definition, laplacian, laplacian_four_term, verify_theorem_for, HarmonicReport,
    Verdict,
};
use superharm_core::jets::JetChart;
use superharm_core::sgeometry::{contract_11, pullback_sigma_q, MetricMode, SuperMatrix, Supermetric};
use superharm_core::superalg::{GradedDerivation, GradedExpr, SuperChart};
use superharm_core::symscalar::ratio;
use superharm_core::variational::{euler_lagrange, sigma_lagrangian};

use crate::latex;
use crate::metricfile::{parse_metric_file, MetricDecl};
use crate::parse::{parse_expr, parse_scalar, parse_vfield, ParseError};
use crate::report::{terms_of, Check, Component, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Opaque,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityArg {
    Atom,
    Expr(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricArg {
    Flat,
    File(PathBuf),
    /// File contents supplied directly.
    Inline(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub dim: Option<(usize, usize)>,
    pub mode: Option<ModeArg>,
    pub output: OutputFormat,
    pub density: DensityArg,
    pub metric: Option<MetricArg>,
    pub exec: Exec,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            dim: None,
            mode: None,
            output: OutputFormat::Text,
            density: DensityArg::Atom,
            metric: None,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Grad(String),
    Div(String),
    Laplacian(String),
    El(Option<String>),
    Pullback,
    Contract,
    Strcheck,
    VerifyTheorem,
    LieBerezin(String),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Grad(_) => "grad",
            Command::Div(_) => "div",
            Command::Laplacian(_) => "laplacian",
            Command::El(_) => "el",
            Command::Pullback => "pullback",
            Command::Contract => "contract",
            Command::Strcheck => "strcheck",
            Command::VerifyTheorem => "verify-theorem",
            Command::LieBerezin(_) => "lie-berezin",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Parse(&'static str, ParseError),
    Input(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(what, e) => write!(f, "{what}: {e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

impl From<superharm_core::Error> for CliError {
    fn from(e: superharm_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn parse_err(what: &'static str) -> impl Fn(ParseError) -> CliError {
    move |e| CliError::Parse(what, e)
}

enum Value {
    Expr(GradedExpr),
    Field(GradedDerivation),
    Labeled(Vec<(String, GradedExpr)>),
}

struct Output {
    value: Value,
    verdict: Option<Verdict>,
    constants: Option<BTreeMap<String, String>>,
    checks: Vec<Check>,
    text_extra: Vec<String>,
}

impl Output {
    fn value(value: Value) -> Self {
        Self {
            value,
            verdict: None,
            constants: None,
            checks: Vec::new(),
            text_extra: Vec::new(),
        }
    }

    fn check(mut self, name: &str, method: &str, passed: bool) -> Self {
        self.checks.push(Check {
            name: name.into(),
            method: method.into(),
            passed,
        });
        self.verdict = Some(if self.checks.iter().all(|c| c.passed) { Verdict::Pass } else { Verdict::Fail });
        self
    }
}

struct Context {
    dim: (usize, usize),
    decl: Option<MetricDecl>,
    flat: bool,
    mode: Option<ModeArg>,
    density: DensityArg,
}

impl Context {
    fn new(cfg: &SessionConfig) -> Result<Self, CliError> {
        let decl = match &cfg.metric {
            Some(MetricArg::File(p)) => {
                let src = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Input(format!("cannot read metric file {}: {e}", p.display())))?;
                Some(parse_metric_file(&src).map_err(parse_err("metric file"))?)
            }
            Some(MetricArg::Inline(src)) => Some(parse_metric_file(src).map_err(parse_err("metric file"))?),
            _ => None,
        };
        let file_dim = decl.as_ref().and_then(|d| d.dim);
        let dim = match (cfg.dim, file_dim) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Input(format!(
                    "--dim {} {} disagrees with the metric file's dim {} {}",
                    a.0, a.1, b.0, b.1
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => (1, 1),
        };
        let flat = cfg.metric == Some(MetricArg::Flat);
        let explicit_metric = flat || decl.as_ref().is_some_and(|d| d.is_explicit());
        match cfg.mode {
            Some(ModeArg::Opaque) if explicit_metric => {
                return Err(CliError::Input("--mode opaque conflicts with an explicit metric".into()))
            }
            Some(ModeArg::Explicit) if decl.as_ref().is_some_and(|d| !d.is_explicit()) => {
                return Err(CliError::Input("--mode explicit needs g[i,j] entries in the metric file".into()))
            }
            _ => {}
        }
        Ok(Self {
            dim,
            decl,
            flat,
            mode: cfg.mode,
            density: cfg.density.clone(),
        })
    }

    fn chart(&self) -> Arc<SuperChart> {
        SuperChart::standard(self.dim.0, self.dim.1)
    }

    fn metric(&self, chart: &Arc<SuperChart>) -> Result<Supermetric, CliError> {
        if self.dim.0 != self.dim.1 {
            return Err(CliError::Input(format!(
                "an odd metric needs dimension (n|n), got ({}|{})",
                self.dim.0, self.dim.1
            )));
        }
        if self.flat || (self.decl.is_none() && self.mode == Some(ModeArg::Explicit)) {
            return Ok(Supermetric::flat(chart)?);
        }
        match &self.decl {
            Some(d) => d.build(chart).map_err(CliError::Input),
            None => Ok(Supermetric::opaque(chart, true)?),
        }
    }

    fn density(&self, chart: &Arc<SuperChart>) -> Result<Density, CliError> {
        match &self.density {
            DensityArg::Atom => Ok(Density::atom()),
            DensityArg::Expr(src) => {
                let s = parse_scalar(src, chart).map_err(parse_err("density"))?;
                Ok(Density::from_expr(s)?)
            }
        }
    }

    fn mode_name(&self, g: Option<&Supermetric>) -> String {
        match (g, self.mode) {
            (Some(g), _) => g.mode().name().to_string(),
            (None, Some(ModeArg::Explicit)) => MetricMode::Explicit.name().to_string(),
            (None, _) if self.flat || self.decl.as_ref().is_some_and(|d| d.is_explicit()) => {
                MetricMode::Explicit.name().to_string()
            }
            (None, _) => MetricMode::Opaque { inverse_rule: true }.name().to_string(),
        }
    }
}

fn matrix_entries(chart: &Arc<SuperChart>, m: &SuperMatrix) -> Vec<(String, GradedExpr)> {
    let names: Vec<String> = chart.coords().map(|c| chart.coord_name(c).to_string()).collect();
    let mut out = Vec::new();
    for (r, row) in m.rows().iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            out.push((format!("({}, {})", names[r], names[c]), e.clone()));
        }
    }
    out
}

fn theorem_output(r: &HarmonicReport) -> Output {
    let fmt_c = |c: Option<&superharm_core::symscalar::Rational>| c.map_or("none".to_string(), |c| c.to_string());
    let mut constants = BTreeMap::new();
    constants.insert("c_t".to_string(), fmt_c(r.c_t()));
    constants.insert("c_tau".to_string(), fmt_c(r.c_tau()));
    let value = Value::Labeled(vec![
        ("residual_t".into(), r.residual_t().clone()),
        ("residual_tau".into(), r.residual_tau().clone()),
    ]);
    let mut out = Output::value(value)
        .check(
            "t equation",
            "rho^-1 * E_t on the generic section minus c_t * (even part of laplacian)",
            r.t.constant.is_some() && r.residual_t().is_zero(),
        )
        .check(
            "tau equation",
            "rho^-1 * E_tau on the generic section minus c_tau * (odd part of laplacian)",
            r.tau.constant.is_some() && r.residual_tau().is_zero(),
        );
    out.verdict = Some(r.verdict);
    out.constants = Some(constants);
    out.text_extra = vec![
        r.verdict.name().to_string(),
        format!("c_t = {}", fmt_c(r.c_t())),
        format!("c_tau = {}", fmt_c(r.c_tau())),
    ];
    out
}

fn execute(cfg: &SessionConfig, cmd: &Command, ctx: &Context) -> Result<(Output, Arc<SuperChart>, String), CliError> {
    let base = ctx.chart();
    Ok(match cmd {
        Command::Grad(src) => {
            let g = ctx.metric(&base)?;
            let f = parse_expr(src, &base).map_err(parse_err("expression"))?;
            let grad = gradient(&f, &g)?;
            let mut out = Output::value(Value::Field(grad.clone()));
            if g.mode() == MetricMode::Explicit {
                let def = gradient_from_definition(&f, &g)?;
                out = out.check("gradient", "solve <grad f, d_a> = d_a f and compare with the closed form", def == grad);
            }
            (out, base, ctx.mode_name(Some(&g)))
        }
        Command::Div(src) => {
            let x = parse_vfield(src, &base).map_err(parse_err("vector field"))?;
            let rho = ctx.density(&base)?;
            let vol = BerezinSection::new(GradedExpr::scalar(&base, rho.expr().clone()));
            let d = divergence(&x, &vol)?;
            let closed = divergence_closed(&x, &rho)?;
            let out = Output::value(Value::Expr(d.clone())).check(
                "divergence",
                "Lie derivative rules on xi*rho compared with (1/rho) sum d_a(rho X^a)",
                d == closed,
            );
            (out, base, ctx.mode_name(None))
        }
        Command::Laplacian(src) => {
            let g = ctx.metric(&base)?;
            let rho = ctx.density(&base)?;
            let f = parse_expr(src, &base).map_err(parse_err("expression"))?;
            let lap = laplacian(&f, &g, &rho)?;
            let four = laplacian_four_term(&f, &g, &rho)?;
            let out = Output::value(Value::Expr(lap.clone())).check(
                "laplacian",
                "div(grad f) compared with the four-term coordinate formula",
                lap == four,
            );
            (out, base, ctx.mode_name(Some(&g)))
        }
        Command::El(src) => {
            let jets = JetChart::new(&base)?;
            let (lambda, mode) = match src {
                Some(s) => (parse_expr(s, jets.chart()).map_err(parse_err("Lagrangian"))?, ctx.mode_name(None)),
                None => {
                    let g = ctx.metric(&base)?;
                    let rho = ctx.density(&base)?;
                    let l = sigma_lagrangian(&g, &jets)?.times_density(rho.expr());
                    (l.expr().clone(), ctx.mode_name(Some(&g)))
                }
            };
            let (et, etau) = euler_lagrange(&jets, &lambda)?;
            let out = Output::value(Value::Labeled(vec![("E_t".into(), et), ("E_tau".into(), etau)]));
            (out, jets.chart().clone(), mode)
        }
        Command::Pullback => {
            let jets = JetChart::new(&base)?;
            let q = pullback_sigma_q(&jets)?;
            let out = Output::value(Value::Labeled(matrix_entries(&base, &q)));
            (out, jets.chart().clone(), ctx.mode_name(None))
        }
        Command::Contract => {
            let g = ctx.metric(&base)?;
            let jets = JetChart::new(&base)?;
            let inv = g.inverse_matrix(jets.chart())?;
            let c = contract_11(&inv, &pullback_sigma_q(&jets)?)?.scale(&ratio(1, 2));
            let l = sigma_lagrangian(&g, &jets)?;
            let out = Output::value(Value::Expr(c.clone())).check(
                "contraction",
                "(1/2) trace(G^-1 * sigma*Q) compared with g^ij (t_-j tau_i + t_i tau_-j)",
                &c == l.expr(),
            );
            (out, jets.chart().clone(), ctx.mode_name(Some(&g)))
        }
        Command::Strcheck => {
            let g = ctx.metric(&base)?;
            let jets = JetChart::new(&base)?;
            let inv = g.inverse_matrix(jets.chart())?;
            let s = inv.product(&pullback_sigma_q(&jets)?)?.supertrace();
            let out = Output::value(Value::Expr(s.clone())).check(
                "supertrace",
                "Str(G^-1 * sigma*Q) normalizes to 0",
                s.is_zero(),
            );
            (out, jets.chart().clone(), ctx.mode_name(Some(&g)))
        }
        Command::VerifyTheorem => {
            let g = ctx.metric(&base)?;
            let rho = ctx.density(&base)?;
            let r = verify_theorem_for(&g, &rho, cfg.exec)?;
            (theorem_output(&r), base, ctx.mode_name(Some(&g)))
        }
        Command::LieBerezin(src) => {
            let x = parse_vfield(src, &base).map_err(parse_err("vector field"))?;
            let rho = ctx.density(&base)?;
            let vol = riemannian_volume_for(&base, &rho);
            let l = lie_berezin(&x, &vol)?;
            let out = Output::value(Value::Labeled(vec![("xi".into(), l.coeff().clone())]));
            (out, base, ctx.mode_name(None))
        }
    })
}

fn riemannian_volume_for(chart: &Arc<SuperChart>, rho: &Density) -> BerezinSection {
    match Supermetric::flat(chart) {
        Ok(g) => riemannian_volume(&g, rho).expect("flat odd metric"),
        Err(_) => BerezinSection::new(GradedExpr::scalar(chart, rho.expr().clone())),
    }
}

fn render_expr(e: &GradedExpr, fmt: OutputFormat) -> String {
    match fmt {
        OutputFormat::Latex => latex::expr(e),
        _ => e.to_string(),
    }
}

fn render(cfg: &SessionConfig, cmd: &Command, ctx: &Context, out: &Output, chart: &Arc<SuperChart>, mode: String) -> String {
    match cfg.output {
        OutputFormat::Json => {
            let (result_terms, components) = match &out.value {
                Value::Expr(e) => (terms_of(e), vec![]),
                Value::Field(d) => (
                    vec![],
                    d.components()
                        .map(|(c, v)| Component {
                            label: d.chart().coord_name(c).to_string(),
                            terms: terms_of(v),
                        })
                        .collect(),
                ),
                Value::Labeled(items) => (
                    vec![],
                    items
                        .iter()
                        .map(|(l, e)| Component {
                            label: l.clone(),
                            terms: terms_of(e),
                        })
                        .collect(),
                ),
            };
            let report = Report {
                command: cmd.name().to_string(),
                dim: [ctx.dim.0, ctx.dim.1],
                mode,
                result_terms,
                verdict: out.verdict.map(|v| v.name().to_string()),
                constants: out.constants.clone(),
                generators: chart.odd().iter().map(|s| s.to_string()).collect(),
                components,
                checks: out.checks.clone(),
            };
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
        fmt => {
            let mut lines = Vec::new();
            if !out.text_extra.is_empty() {
                lines.extend(out.text_extra.iter().cloned());
            } else {
                match &out.value {
                    Value::Expr(e) => lines.push(render_expr(e, fmt)),
                    Value::Field(d) => lines.push(match fmt {
                        OutputFormat::Latex => latex::derivation(d),
                        _ => d.to_string(),
                    }),
                    Value::Labeled(items) => {
                        for (l, e) in items {
                            lines.push(format!("{l} = {}", render_expr(e, fmt)));
                        }
                    }
                }
            }
            if out.verdict == Some(Verdict::Fail) {
                for c in out.checks.iter().filter(|c| !c.passed) {
                    lines.push(format!("check failed: {} ({})", c.name, c.method));
                }
            }
            lines.join("\n") + "\n"
        }
    }
}

/// Run one command. Exit codes: 0 success or pass, 1 fail verdict, 2 input
/// error.
pub fn run(cfg: &SessionConfig, cmd: &Command) -> Outcome {
    let result = Context::new(cfg).and_then(|ctx| {
        let (out, chart, mode) = execute(cfg, cmd, &ctx)?;
        Ok((render(cfg, cmd, &ctx, &out, &chart, mode), out.verdict))
    });
    match result {
        Ok((stdout, verdict)) => Outcome {
            code: if verdict == Some(Verdict::Fail) { 1 } else { 0 },
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: (usize, usize)) -> SessionConfig {
        SessionConfig {
            dim: Some(dim),
            ..SessionConfig::default()
        }
    }

    #[test]
    fn strcheck_prints_zero() {
        let o = run(&cfg((2, 2)), &Command::Strcheck);
        assert_eq!((o.code, o.stdout.as_str()), (0, "0\n"));
    }

    #[test]
    fn flat_laplacian() {
        let c = SessionConfig {
            metric: Some(MetricArg::Flat),
            density: DensityArg::Expr("1".into()),
            ..cfg((1, 1))
        };
        let o = run(&c, &Command::Laplacian("x1*th1".into()));
        assert_eq!((o.code, o.stdout.as_str()), (0, "2\n"));
    }

    #[test]
    fn theorem_text() {
        let c = SessionConfig {
            mode: Some(ModeArg::Opaque),
            ..cfg((1, 1))
        };
        let o = run(&c, &Command::VerifyTheorem);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert_eq!(o.stdout, "pass\nc_t = -1\nc_tau = 1\n");
    }

    #[test]
    fn input_errors_exit_2() {
        let o = run(&cfg((1, 1)), &Command::Grad("x1 + (".into()));
        assert_eq!(o.code, 2);
        assert!(o.stderr.contains("line 1, column 6"), "{}", o.stderr);
        let o = run(&cfg((2, 1)), &Command::Strcheck);
        assert_eq!(o.code, 2);
        let c = SessionConfig {
            mode: Some(ModeArg::Opaque),
            metric: Some(MetricArg::Flat),
            ..cfg((1, 1))
        };
        assert_eq!(run(&c, &Command::Strcheck).code, 2);
    }

    #[test]
    fn explicit_metric_file() {
        let c = SessionConfig {
            metric: Some(MetricArg::Inline("dim 2 2\nmetric odd from g\ng[1,1] = 1\ng[1,2] = x1\ng[2,2] = 1 + x1^2\n".into())),
            dim: None,
            ..SessionConfig::default()
        };
        let o = run(&c, &Command::Grad("x1*th2 + th1*th2".into()));
        assert_eq!(o.code, 0, "{}", o.stderr);
        let o = run(&c, &Command::VerifyTheorem);
        assert_eq!(o.code, 0, "{}{}", o.stdout, o.stderr);
    }

    #[test]
    fn other_commands_succeed() {
        for cmd in [
            Command::Div("x1: x1*th1; th1: th1".into()),
            Command::El(None),
            Command::El(Some("t_1*tau_m1 + t_m1*tau_1".into())),
            Command::Pullback,
            Command::Contract,
            Command::LieBerezin("x1: x1".into()),
        ] {
            for output in [OutputFormat::Text, OutputFormat::Json, OutputFormat::Latex] {
                let c = SessionConfig { output, ..cfg((1, 1)) };
                let o = run(&c, &cmd);
                assert_eq!(o.code, 0, "{cmd:?}: {}", o.stderr);
            }
        }
    }
}
