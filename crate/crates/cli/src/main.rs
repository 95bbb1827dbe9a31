use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use superharm_cli::session::{run, Command, DensityArg, MetricArg, ModeArg, OutputFormat, SessionConfig};
use superharm_core::exec::Exec;

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Opaque,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum Threads {
    Sequential,
    Parallel,
}

/// Symbolic calculus for odd-metric supermanifolds.
#[derive(Parser)]
#[command(name = "superharm", version)]
struct Cli {
    /// Even and odd dimension.
    #[arg(long, num_args = 2, value_names = ["M", "N"], global = true)]
    dim: Option<Vec<usize>>,
    #[arg(long, value_enum, global = true)]
    mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "text", global = true)]
    output: Output,
    /// `atom` for a symbolic rho(x), otherwise an expression in the even coordinates.
    #[arg(long, default_value = "atom", global = true)]
    density: String,
    /// `flat` or a metric declaration file.
    #[arg(long, global = true)]
    metric: Option<String>,
    #[arg(long, value_enum, default_value = "parallel", global = true)]
    exec: Threads,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gradient of a superfunction.
    Grad { expr: String },
    /// Divergence of a vector field, written `x1: EXPR; th1: EXPR`.
    Div { field: String },
    /// Laplacian of a superfunction.
    Laplacian { expr: String },
    /// Euler-Lagrange expressions of a Lagrangian on the jet chart.
    El { lagrangian: Option<String> },
    /// Pullback of the canonical odd form along the jet map.
    Pullback,
    /// Half the (1,1) contraction of the pulled-back form with the inverse metric.
    Contract,
    /// Supertrace of the inverse metric times the pulled-back form.
    Strcheck,
    /// Compare the field equations with the Laplacian on a generic section.
    VerifyTheorem,
    /// Lie derivative of the volume element along a vector field.
    LieBerezin { field: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = SessionConfig {
        dim: cli.dim.map(|d| (d[0], d[1])),
        mode: cli.mode.map(|m| match m {
            Mode::Opaque => ModeArg::Opaque,
            Mode::Explicit => ModeArg::Explicit,
        }),
        output: match cli.output {
            Output::Text => OutputFormat::Text,
            Output::Json => OutputFormat::Json,
            Output::Latex => OutputFormat::Latex,
        },
        density: match cli.density.as_str() {
            "atom" => DensityArg::Atom,
            s => DensityArg::Expr(s.to_string()),
        },
        metric: cli.metric.map(|m| match m.as_str() {
            "flat" => MetricArg::Flat,
            p => MetricArg::File(PathBuf::from(p)),
        }),
        exec: match cli.exec {
            Threads::Sequential => Exec::Sequential,
            Threads::Parallel => Exec::Parallel,
        },
    };
    let cmd = match cli.command {
        Cmd::Grad { expr } => Command::Grad(expr),
        Cmd::Div { field } => Command::Div(field),
        Cmd::Laplacian { expr } => Command::Laplacian(expr),
        Cmd::El { lagrangian } => Command::El(lagrangian),
        Cmd::Pullback => Command::Pullback,
        Cmd::Contract => Command::Contract,
        Cmd::Strcheck => Command::Strcheck,
        Cmd::VerifyTheorem => Command::VerifyTheorem,
        Cmd::LieBerezin { field } => Command::LieBerezin(field),
    };
    let out = run(&cfg, &cmd);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
