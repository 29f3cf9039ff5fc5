//! Built-in benchmark cases and report generation.
//!
//! The registry holds five problems with known exact solutions. Their
//! forcing terms are manufactured — the integral operator is applied to the
//! exact solution with a high-order rule — so each benchmark is consistent
//! by construction; the closed-form forcing expressions are stored alongside
//! and cross-checked in tests rather than trusted verbatim.

use std::time::Instant;

use serde::Serialize;

use crate::expr::{parse, ExprAst};
use crate::solver::{
    evaluate_solution, residual, solve, Forcing, Kind, Problem, SolveError,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One registered benchmark: a problem with its exact solution attached,
/// the degrees it is usually run at, and the reporting grid.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub problem: Problem,
    pub default_n_list: Vec<usize>,
    pub report_grid: Vec<f64>,
    /// Closed-form forcing expression, kept for cross-checks against the
    /// manufactured forcing.
    pub closed_form_g: Option<ExprAst>,
}

impl BenchmarkCase {
    /// Replaces the reporting grid, e.g. with a finer one for max-error
    /// checks that should not benefit from lucky node placement.
    pub fn with_report_grid(mut self, grid: Vec<f64>) -> BenchmarkCase {
        self.report_grid = grid;
        self
    }
}

/// One table row: grid point, exact and approximate values, absolute error.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub x: f64,
    pub exact: f64,
    pub approx: f64,
    pub abs_error: f64,
}

/// Result of one `(case, n)` run.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub case_name: String,
    pub n: usize,
    pub rows: Vec<BenchRow>,
    /// Maximum of the row errors.
    pub max_error: f64,
    pub timing_seconds: f64,
    pub rank: usize,
    pub condition_estimate: f64,
    pub residual_norm: f64,
}

/// Equispaced grid of `points` values covering `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let mut grid: Vec<f64> = (0..points)
        .map(|i| a + (b - a) * (i as f64) / ((points - 1) as f64))
        .collect();
    grid[0] = a;
    grid[points - 1] = b;
    grid
}

fn default_report_grid() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
}

/// The five built-in cases on `[0, 1]`, all expanded about `z = 0`:
///
/// | name | kind   | alpha | profile  | exact      |
/// |------|--------|-------|----------|------------|
/// | ex1  | first  | 1/2   | `t^2`    | `pi x^3`   |
/// | ex2  | first  | 1/4   | `sin t`  | `cos x`    |
/// | ex3  | first  | 1/6   | `exp t`  | `exp x`    |
/// | ex4  | second | 1/2   | `t`      | `x^2`      |
/// | ex5  | second | 1/4   | `t`      | `1 - 2x`   |
///
/// The second-kind cases use `lambda = -1`.
pub fn builtin_problems() -> Vec<BenchmarkCase> {
    let case = |name: &str,
                kind: Kind,
                alpha: f64,
                phi: &str,
                exact: &str,
                closed_form_g: &str,
                n_list: &[usize]| {
        let problem = Problem::builder(kind, alpha, 0.0, 1.0)
            .phi(parse(phi).expect("builtin phi"))
            .exact(parse(exact).expect("builtin exact"))
            .forcing(Forcing::manufactured())
            .lambda(-1.0)
            .build()
            .expect("builtin case must validate");
        BenchmarkCase {
            name: name.to_string(),
            problem,
            default_n_list: n_list.to_vec(),
            report_grid: default_report_grid(),
            closed_form_g: Some(parse(closed_form_g).expect("builtin g")),
        }
    };

    vec![
        case("ex1", Kind::First, 0.5, "t^2", "pi*x^3", "(2/3)*pi*x^3", &[5, 7, 9]),
        case("ex2", Kind::First, 0.25, "sin(t)", "cos(x)", "(4/3)*sin(x)^(3/4)", &[5, 7, 9]),
        case("ex3", Kind::First, 1.0 / 6.0, "exp(t)", "exp(x)", "(6/5)*(exp(x)-1)^(5/6)", &[5, 7, 9]),
        case(
            "ex4",
            Kind::Second,
            0.5,
            "t",
            "x^2",
            "x^2 + (16/15)*x^(5/2)",
            &[5],
        ),
        case(
            "ex5",
            Kind::Second,
            0.25,
            "t",
            "1 - 2*x",
            "1 - 2*x - (32/21)*x^(7/4) + (4/3)*x^(3/4)",
            &[3],
        ),
    ]
}

/// Manufactured forcing value: the problem's integral operator applied to
/// `exact` with an `m`-point rule (plus the identity term for second-kind
/// problems).
pub fn manufactured_g(
    problem: &Problem,
    exact: &ExprAst,
    x: f64,
    m: usize,
) -> Result<f64, SolveError> {
    let transformed = problem.apply_operator(exact, x, m)?;
    Ok(match problem.kind {
        Kind::First => transformed,
        Kind::Second => exact.eval_single("x", x)? - problem.lambda * transformed,
    })
}

/// Solves the case at degree `n`, evaluates it on the report grid against
/// the exact solution, and fills a report.
pub fn run_benchmark(case: &BenchmarkCase, n: usize) -> Result<BenchReport, SolveError> {
    let exact = case.problem.exact.as_ref().ok_or(SolveError::MissingExact)?;
    let start = Instant::now();
    let sol = solve(&case.problem, n)?;

    let mut rows = Vec::with_capacity(case.report_grid.len());
    let mut max_error = 0.0f64;
    for &x in &case.report_grid {
        let exact_value = exact.eval_single("x", x)?;
        let approx = evaluate_solution(&sol, x);
        let abs_error = (exact_value - approx).abs();
        max_error = max_error.max(abs_error);
        rows.push(BenchRow { x, exact: exact_value, approx, abs_error });
    }

    Ok(BenchReport {
        case_name: case.name.clone(),
        n,
        rows,
        max_error,
        timing_seconds: start.elapsed().as_secs_f64(),
        rank: sol.rank,
        condition_estimate: sol.condition_estimate,
        residual_norm: sol.residual_norm,
    })
}

/// Runs every `(case, n)` pair; independent runs execute in parallel when
/// the `parallel` feature is enabled.
pub fn run_many(jobs: &[(BenchmarkCase, usize)]) -> Result<Vec<BenchReport>, SolveError> {
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter()
            .map(|(case, n)| run_benchmark(case, *n))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter()
            .map(|(case, n)| run_benchmark(case, *n))
            .collect()
    }
}

/// Equation residual diagnostics for a finished run, on a uniform grid.
pub fn max_equation_residual(
    case: &BenchmarkCase,
    n: usize,
    grid_points: usize,
) -> Result<f64, SolveError> {
    let sol = solve(&case.problem, n)?;
    let grid = uniform_grid(case.problem.a, case.problem.b, grid_points);
    let defects = residual(&case.problem, &sol, &grid)?;
    Ok(defects.iter().fold(0.0f64, |acc, r| acc.max(r.abs())))
}

/// Output format of [`render_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

/// Renders one report.
///
/// Text is a fixed-width table with a max-error footer; CSV has the columns
/// `x,exact,approx,abs_error` with 17-significant-digit reals and a trailing
/// `# max_error = ...` comment; JSON serializes the whole report.
pub fn render_table(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "case {}, n = {} (rank {}, condition {:.3e}, residual {:.3e})\n",
                report.case_name, report.n, report.rank, report.condition_estimate,
                report.residual_norm
            ));
            out.push_str(&format!(
                "{:>10}  {:>14}  {:>14}  {:>12}\n",
                "x", "exact", "approx", "abs_error"
            ));
            for row in &report.rows {
                out.push_str(&format!(
                    "{:>10.6}  {:>14.6}  {:>14.6}  {:>12.6e}\n",
                    row.x, row.exact, row.approx, row.abs_error
                ));
            }
            out.push_str(&format!(
                "max error: {:.6e}  ({:.3} ms)\n",
                report.max_error,
                report.timing_seconds * 1e3
            ));
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from("x,exact,approx,abs_error\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    row.x, row.exact, row.approx, row.abs_error
                ));
            }
            out.push_str(&format!("# max_error = {:.16e}\n", report.max_error));
            out
        }
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization cannot fail")
        }
    }
}
