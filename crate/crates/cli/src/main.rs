//! Command-line interface: load problem configs, run solves or the built-in
//! benchmark suite, print singular integrals.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime
//! or numeric errors.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use abeltc_core::bench::{
    builtin_problems, render_table, run_many, uniform_grid, BenchReport, BenchmarkCase,
    ReportFormat,
};
use abeltc_core::config::load_config;
use abeltc_core::expr::parse_single_var;
use abeltc_core::quadrature::{singular_integral, QuadError, SingularIntegralSpec};
use abeltc_core::solver::{evaluate_solution, solve, SolveError};
use abeltc_core::{differentiate, Problem};

/// Environment variable that overrides the default quadrature node count.
const QUAD_NODES_ENV: &str = "ABELTC_QUAD_NODES";

#[derive(Parser)]
#[command(
    name = "abeltc",
    version,
    about = "Taylor-collocation solver for generalized Abel integral equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> ReportFormat {
        match f {
            OutputFormat::Text => ReportFormat::Text,
            OutputFormat::Csv => ReportFormat::Csv,
            OutputFormat::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config file.
    Solve {
        /// Path to the JSON config.
        #[arg(long)]
        config: PathBuf,
        /// Taylor degree; may be repeated. Overrides the config's `n`.
        #[arg(long = "n")]
        n: Vec<usize>,
        /// Output format.
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
        /// Write the output to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run built-in benchmark cases and print their error tables.
    Bench {
        /// Case name (ex1..ex5); may be repeated. Default: all cases.
        #[arg(long = "example")]
        example: Vec<String>,
        /// Comma-separated degrees, e.g. `--n 5,7,9`. Default: each case's
        /// usual degrees.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Output format.
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
    },
    /// Print one weakly singular moment integral (debugging aid).
    Quad {
        /// Singularity exponent in (0,1).
        #[arg(long)]
        alpha: f64,
        /// Kernel profile, an expression in `t`.
        #[arg(long)]
        phi: String,
        /// Upper integration limit.
        #[arg(long)]
        x: f64,
        /// Moment power.
        #[arg(long)]
        j: usize,
        /// Node count (default: ABELTC_QUAD_NODES or 64).
        #[arg(long)]
        m: Option<usize>,
        /// Lower integration limit.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Expansion point of the moment factor.
        #[arg(long, default_value_t = 0.0)]
        z: f64,
        /// Disable the closed-form dispatch for the identity profile.
        #[arg(long)]
        force_quadrature: bool,
    },
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> CliError {
        match &e {
            SolveError::InvalidProblem { .. } | SolveError::DegreeOutOfRange { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> CliError {
        match &e {
            QuadError::InvalidAlpha(_)
            | QuadError::InvalidNodeCount(_)
            | QuadError::InvalidInterval { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn quad_nodes_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(QUAD_NODES_ENV) {
        Ok(text) => text.parse::<usize>().map(Some).map_err(|_| {
            CliError::Validation(format!("{QUAD_NODES_ENV}={text} is not a node count"))
        }),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, n, output, out } => run_solve(config, n, output, out),
        Command::Bench { example, n, output } => run_bench(example, n, output),
        Command::Quad { alpha, phi, x, j, m, a, z, force_quadrature } => {
            run_quad(alpha, &phi, x, j, m, a, z, force_quadrature)
        }
    }
}

fn run_solve(
    config_path: PathBuf,
    n_override: Vec<usize>,
    output: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut spec = load_config(&config_path).map_err(|e| CliError::Validation(e.to_string()))?;
    if spec.problem.quad_nodes.is_none() {
        spec.problem.quad_nodes = quad_nodes_from_env()?;
    }
    let degrees = if n_override.is_empty() { spec.n_values.clone() } else { n_override };
    let grid = uniform_grid(spec.problem.a, spec.problem.b, spec.grid_points);
    let name = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".to_string());

    let rendered = if spec.problem.exact.is_some() {
        let case = BenchmarkCase {
            name,
            problem: spec.problem.clone(),
            default_n_list: degrees.clone(),
            report_grid: grid,
            closed_form_g: None,
        };
        let jobs: Vec<(BenchmarkCase, usize)> =
            degrees.iter().map(|&n| (case.clone(), n)).collect();
        let reports = run_many(&jobs)?;
        render_reports(&reports, output)
    } else {
        let mut chunks = Vec::with_capacity(degrees.len());
        for &n in &degrees {
            chunks.push(render_plain_solve(&spec.problem, &name, n, &grid, output)?);
        }
        join_chunks(chunks, output)
    };

    match out {
        Some(path) => fs::write(&path, rendered)
            .map_err(|e| CliError::Runtime(format!("cannot write `{}`: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn render_reports(reports: &[BenchReport], output: OutputFormat) -> String {
    match output {
        OutputFormat::Json => {
            let values: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| serde_json::from_str(&render_table(r, ReportFormat::Json)).unwrap())
                .collect();
            let mut text = serde_json::to_string_pretty(&values).unwrap();
            text.push('\n');
            text
        }
        _ => {
            let chunks: Vec<String> = reports
                .iter()
                .map(|r| {
                    let mut chunk = String::new();
                    if output == OutputFormat::Csv {
                        let _ = writeln!(chunk, "# case {} n={}", r.case_name, r.n);
                    }
                    chunk.push_str(&render_table(r, output.into()));
                    chunk
                })
                .collect();
            chunks.join("\n")
        }
    }
}

fn join_chunks(chunks: Vec<String>, output: OutputFormat) -> String {
    match output {
        OutputFormat::Json => {
            let mut text = String::from("[\n");
            text.push_str(&chunks.join(",\n"));
            text.push_str("\n]\n");
            text
        }
        _ => chunks.join("\n"),
    }
}

/// Table for a problem without a known exact solution: x and approx only.
fn render_plain_solve(
    problem: &Problem,
    name: &str,
    n: usize,
    grid: &[f64],
    output: OutputFormat,
) -> Result<String, CliError> {
    let sol = solve(problem, n)?;
    let rows: Vec<(f64, f64)> = grid.iter().map(|&x| (x, evaluate_solution(&sol, x))).collect();
    let mut out = String::new();
    match output {
        OutputFormat::Text => {
            let _ = writeln!(
                out,
                "case {name}, n = {n} (rank {}, condition {:.3e}, residual {:.3e})",
                sol.rank, sol.condition_estimate, sol.residual_norm
            );
            for w in &sol.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            let _ = writeln!(out, "{:>10}  {:>14}", "x", "approx");
            for (x, approx) in &rows {
                let _ = writeln!(out, "{x:>10.6}  {approx:>14.6}");
            }
        }
        OutputFormat::Csv => {
            let _ = writeln!(out, "# case {name} n={n}");
            let _ = writeln!(out, "x,approx");
            for (x, approx) in &rows {
                let _ = writeln!(out, "{x:.16e},{approx:.16e}");
            }
        }
        OutputFormat::Json => {
            let value = json!({
                "case_name": name,
                "n": n,
                "rows": rows
                    .iter()
                    .map(|(x, approx)| json!({"x": x, "approx": approx}))
                    .collect::<Vec<_>>(),
                "rank": sol.rank,
                "condition_estimate": sol.condition_estimate,
                "residual_norm": sol.residual_norm,
                "warnings": sol.warnings,
            });
            out = serde_json::to_string_pretty(&value).unwrap();
        }
    }
    Ok(out)
}

fn run_bench(
    examples: Vec<String>,
    degrees: Vec<usize>,
    output: OutputFormat,
) -> Result<(), CliError> {
    let registry = builtin_problems();
    let selected: Vec<BenchmarkCase> = if examples.is_empty() {
        registry
    } else {
        let mut picked = Vec::with_capacity(examples.len());
        for name in &examples {
            let case = registry.iter().find(|c| &c.name == name).ok_or_else(|| {
                let known: Vec<&str> = registry.iter().map(|c| c.name.as_str()).collect();
                CliError::Validation(format!(
                    "unknown example `{name}`; available: {}",
                    known.join(", ")
                ))
            })?;
            picked.push(case.clone());
        }
        picked
    };

    let env_nodes = quad_nodes_from_env()?;
    let mut jobs: Vec<(BenchmarkCase, usize)> = Vec::new();
    for case in selected {
        let mut case = case;
        if case.problem.quad_nodes.is_none() {
            case.problem.quad_nodes = env_nodes;
        }
        let ns = if degrees.is_empty() { case.default_n_list.clone() } else { degrees.clone() };
        for n in ns {
            jobs.push((case.clone(), n));
        }
    }
    let reports = run_many(&jobs)?;
    print!("{}", render_reports(&reports, output));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_quad(
    alpha: f64,
    phi_text: &str,
    x: f64,
    j: usize,
    m: Option<usize>,
    a: f64,
    z: f64,
    force_quadrature: bool,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Validation(format!("alpha must be in (0,1), got {alpha}")));
    }
    if x < a {
        return Err(CliError::Validation(format!("x = {x} must not be below a = {a}")));
    }
    let phi =
        parse_single_var(phi_text, "t").map_err(|e| CliError::Validation(format!("phi: {e}")))?;
    let phi_prime = differentiate(&phi, "t");
    let nodes = match m {
        Some(m) => m,
        None => quad_nodes_from_env()?.unwrap_or(64),
    };
    let spec = SingularIntegralSpec {
        x,
        j,
        z,
        a,
        alpha,
        phi: &phi,
        phi_prime: &phi_prime,
        force_quadrature,
    };
    let value = singular_integral(&spec, nodes)?;
    println!("{value:.15}");
    Ok(())
}
