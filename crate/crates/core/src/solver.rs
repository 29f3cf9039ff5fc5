//! Collocation assembly, linear solve, and solution diagnostics.
//!
//! A problem is either first kind,
//!
//! ```text
//! ∫_a^x Phi(t) / (phi(x) - phi(t))^alpha dt = g(x),
//! ```
//!
//! or second kind,
//!
//! ```text
//! Phi(x) = g(x) + lambda ∫_a^x Phi(t) / (phi(x) - phi(t))^alpha dt.
//! ```
//!
//! The unknown is approximated by a degree-`n` Taylor polynomial about `z`;
//! collocating at the `n + 1` equispaced points of `[a, b]` yields a dense
//! linear system in the derivatives `Phi^(j)(z)`. First-kind systems get the
//! moment matrix `A` with `A[i][j] = I(x_i, j)/j!`; second-kind systems get
//! `B - lambda A` where `B[i][j] = (x_i - z)^j / j!`.

use std::fmt;

use crate::expr::{differentiate, ExprAst, ExprError};
use crate::linalg::{solve_min_norm_ls, DenseMatrix, LinalgError, DEFAULT_RANK_TOL};
use crate::quadrature::{
    abel_operator_apply, singular_integral, QuadError, SingularIntegralSpec,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest supported Taylor degree; factorial scaling and monomial
/// conditioning degrade quickly beyond this in double precision.
pub const MAX_DEGREE: usize = 30;

/// Node count used when re-evaluating the equation residual; finer than the
/// assembly rule so quadrature errors do not cancel between the two.
pub const RESIDUAL_NODES: usize = 96;

/// Node count used when a forcing term is manufactured by applying the
/// integral operator to a known exact solution.
pub const MANUFACTURED_NODES: usize = 128;

/// Condition-estimate level above which a solve attaches a warning.
const CONDITION_WARN: f64 = 1e12;

/// Sample count for the monotonicity check of `phi` on `[a, b]`.
const MONOTONICITY_SAMPLES: usize = 257;

/// Grid size for the sup-norm factors of [`error_bound`].
const BOUND_GRID: usize = 1001;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// A problem field failed validation.
    InvalidProblem { field: String, message: String },
    /// Taylor degree outside `1..=MAX_DEGREE`.
    DegreeOutOfRange { n: usize },
    /// A residual grid point lies outside `[a, b]`.
    GridPointOutOfRange { x: f64, a: f64, b: f64 },
    /// A manufactured forcing term needs an exact solution on the problem.
    MissingExact,
    Expr(ExprError),
    Quad(QuadError),
    Linalg(LinalgError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidProblem { field, message } => write!(f, "{field}: {message}"),
            SolveError::DegreeOutOfRange { n } => {
                write!(f, "Taylor degree {n} is outside 1..={MAX_DEGREE}")
            }
            SolveError::GridPointOutOfRange { x, a, b } => {
                write!(f, "grid point {x} lies outside [{a}, {b}]")
            }
            SolveError::MissingExact => {
                write!(f, "manufactured forcing requires an exact solution")
            }
            SolveError::Expr(e) => write!(f, "{e}"),
            SolveError::Quad(e) => write!(f, "{e}"),
            SolveError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<ExprError> for SolveError {
    fn from(e: ExprError) -> Self {
        SolveError::Expr(e)
    }
}

impl From<QuadError> for SolveError {
    fn from(e: QuadError) -> Self {
        SolveError::Quad(e)
    }
}

impl From<LinalgError> for SolveError {
    fn from(e: LinalgError) -> Self {
        SolveError::Linalg(e)
    }
}

/// Whether the unknown appears only inside the integral (first kind) or
/// also outside it (second kind).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    First,
    Second,
}

/// The forcing term `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    /// An expression in the variable `x`.
    Expression(ExprAst),
    /// `g` is manufactured by applying the problem's integral operator to
    /// its exact solution with an `nodes`-point rule, so the benchmark is
    /// consistent by construction.
    Manufactured { nodes: usize },
}

impl Forcing {
    pub fn manufactured() -> Forcing {
        Forcing::Manufactured { nodes: MANUFACTURED_NODES }
    }
}

/// One Abel integral equation instance.
///
/// Built through [`Problem::builder`], which validates the fields and
/// derives `phi_prime` symbolically from `phi`; a separately supplied
/// derivative is deliberately not accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: Kind,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    /// Taylor expansion point, in `[a, b]`. Defaults to `a`.
    pub z: f64,
    /// Coefficient of the integral term for second-kind problems; ignored
    /// for first-kind ones.
    pub lambda: f64,
    /// Kernel profile, an expression in `t`, strictly increasing on `[a, b]`.
    pub phi: ExprAst,
    /// Symbolic derivative of `phi`.
    pub phi_prime: ExprAst,
    pub g: Forcing,
    /// Known exact solution, an expression in `x`.
    pub exact: Option<ExprAst>,
    /// Disables the closed-form dispatch for the identity profile.
    pub force_quadrature: bool,
    /// Overrides the assembly node-count policy `max(32, 2n + 8)`.
    pub quad_nodes: Option<usize>,
    /// Overrides the default relative rank tolerance of the solver.
    pub rank_tol: Option<f64>,
}

pub struct ProblemBuilder {
    kind: Kind,
    alpha: f64,
    a: f64,
    b: f64,
    z: Option<f64>,
    lambda: f64,
    phi: Option<ExprAst>,
    g: Option<Forcing>,
    exact: Option<ExprAst>,
    force_quadrature: bool,
    quad_nodes: Option<usize>,
    rank_tol: Option<f64>,
}

impl Problem {
    pub fn builder(kind: Kind, alpha: f64, a: f64, b: f64) -> ProblemBuilder {
        ProblemBuilder {
            kind,
            alpha,
            a,
            b,
            z: None,
            lambda: -1.0,
            phi: None,
            g: None,
            exact: None,
            force_quadrature: false,
            quad_nodes: None,
            rank_tol: None,
        }
    }

    /// Value of the forcing term at `x`.
    pub fn forcing_at(&self, x: f64) -> Result<f64, SolveError> {
        match &self.g {
            Forcing::Expression(ast) => Ok(ast.eval_single("x", x)?),
            Forcing::Manufactured { nodes } => {
                let exact = self.exact.as_ref().ok_or(SolveError::MissingExact)?;
                let transformed = self.apply_operator(exact, x, *nodes)?;
                Ok(match self.kind {
                    Kind::First => transformed,
                    Kind::Second => exact.eval_single("x", x)? - self.lambda * transformed,
                })
            }
        }
    }

    /// Applies the integral operator `f ↦ ∫_a^x f(t)(phi(x)-phi(t))^(-alpha) dt`
    /// to a single-variable expression, using an `m`-point rule.
    pub fn apply_operator(&self, f: &ExprAst, x: f64, m: usize) -> Result<f64, SolveError> {
        let var = f
            .variables()
            .into_iter()
            .next()
            .unwrap_or("x")
            .to_string();
        let value = abel_operator_apply(
            &self.phi,
            &self.phi_prime,
            self.alpha,
            self.a,
            x,
            m,
            |t| f.eval_single(&var, t).map_err(QuadError::from),
        )?;
        Ok(value)
    }

    /// Node count used for assembly at degree `n`.
    pub fn assembly_nodes(&self, n: usize) -> usize {
        self.quad_nodes.unwrap_or_else(|| (2 * n + 8).max(32))
    }
}

impl ProblemBuilder {
    pub fn phi(mut self, phi: ExprAst) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn forcing(mut self, g: Forcing) -> Self {
        self.g = Some(g);
        self
    }

    pub fn exact(mut self, exact: ExprAst) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn z(mut self, z: f64) -> Self {
        self.z = Some(z);
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn force_quadrature(mut self, force: bool) -> Self {
        self.force_quadrature = force;
        self
    }

    pub fn quad_nodes(mut self, nodes: Option<usize>) -> Self {
        self.quad_nodes = nodes;
        self
    }

    pub fn rank_tol(mut self, tol: Option<f64>) -> Self {
        self.rank_tol = tol;
        self
    }

    /// Validates the fields and derives `phi_prime`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the guards
    pub fn build(self) -> Result<Problem, SolveError> {
        let invalid = |field: &str, message: String| SolveError::InvalidProblem {
            field: field.to_string(),
            message,
        };

        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", "alpha must be in (0,1)".to_string()));
        }
        // `!(a < b)` rather than `a >= b`: the guard must also trip on NaN.
        if !(self.a < self.b) {
            return Err(invalid("a", format!("interval requires a < b, got [{}, {}]", self.a, self.b)));
        }
        let z = self.z.unwrap_or(self.a);
        if !(z >= self.a && z <= self.b) {
            return Err(invalid("z", format!("expansion point {z} must lie in [{}, {}]", self.a, self.b)));
        }
        if !self.lambda.is_finite() {
            return Err(invalid("lambda", "lambda must be finite".to_string()));
        }
        let phi = self.phi.ok_or_else(|| invalid("phi", "phi is required".to_string()))?;
        let g = self.g.ok_or_else(|| invalid("g", "g is required".to_string()))?;

        if phi.variables().iter().any(|&v| v != "t") {
            return Err(invalid("phi", "phi must be an expression in t only".to_string()));
        }
        if let Forcing::Expression(ast) = &g {
            if ast.variables().iter().any(|&v| v != "x") {
                return Err(invalid("g", "g must be an expression in x only".to_string()));
            }
        }
        if let Some(exact) = &self.exact {
            if exact.variables().iter().any(|&v| v != "x") {
                return Err(invalid("exact", "exact must be an expression in x only".to_string()));
            }
        }
        if matches!(g, Forcing::Manufactured { .. }) && self.exact.is_none() {
            return Err(invalid("g", "manufactured forcing requires an exact solution".to_string()));
        }
        if let Some(m) = self.quad_nodes {
            if !(4..=crate::quadrature::MAX_NODES).contains(&m) {
                return Err(invalid("quad_nodes", format!("node count {m} is outside 4..={}", crate::quadrature::MAX_NODES)));
            }
        }
        if let Some(tol) = self.rank_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(invalid("rank_tol", "rank tolerance must be in (0,1)".to_string()));
            }
        }

        // Monotonicity is checked by sampling phi' at equispaced points; a
        // symbolic proof is out of reach for arbitrary expressions. The two
        // endpoint samples may have zero slope (e.g. t^2 at t = 0, which is
        // still strictly increasing); an interior zero would break the
        // kernel ratio limit and is rejected.
        let phi_prime = differentiate(&phi, "t");
        for i in 0..MONOTONICITY_SAMPLES {
            let t = self.a
                + (self.b - self.a) * (i as f64) / ((MONOTONICITY_SAMPLES - 1) as f64);
            let slope = phi_prime.eval_single("t", t).map_err(|e| {
                invalid("phi", format!("phi' could not be evaluated at t = {t}: {e}"))
            })?;
            let endpoint = i == 0 || i == MONOTONICITY_SAMPLES - 1;
            if slope < 0.0 || (!endpoint && slope == 0.0) {
                return Err(invalid(
                    "phi",
                    format!("phi must be strictly increasing on [a, b]; phi'({t}) = {slope}"),
                ));
            }
        }

        Ok(Problem {
            kind: self.kind,
            alpha: self.alpha,
            a: self.a,
            b: self.b,
            z,
            lambda: self.lambda,
            phi,
            phi_prime,
            g,
            exact: self.exact,
            force_quadrature: self.force_quadrature,
            quad_nodes: self.quad_nodes,
            rank_tol: self.rank_tol,
        })
    }
}

/// Approximate solution: the Taylor coefficients `Phi^(j)(z)` for
/// `j = 0..=n` plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSolution {
    pub z: f64,
    pub n: usize,
    /// `coefficients[j]` is `Phi^(j)(z)`; length `n + 1`.
    pub coefficients: Vec<f64>,
    pub rank: usize,
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
}

/// Execution strategy for assembly. `Parallel` falls back to sequential
/// when the `parallel` feature is disabled; results are bit-identical
/// either way because each matrix row is summed in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl ExecMode {
    fn default_mode() -> ExecMode {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// The `n + 1` equispaced collocation points of `[a, b]`, with both
/// endpoints exact.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the guard
pub fn collocation_points(a: f64, b: f64, n: usize) -> Result<Vec<f64>, SolveError> {
    if n < 1 {
        return Err(SolveError::DegreeOutOfRange { n });
    }
    // `!(a < b)` rather than `a >= b`: the guard must also trip on NaN.
    if !(a < b) {
        return Err(SolveError::InvalidProblem {
            field: "a".to_string(),
            message: format!("interval requires a < b, got [{a}, {b}]"),
        });
    }
    let mut points: Vec<f64> = (0..=n)
        .map(|i| a + (b - a) * (i as f64) / (n as f64))
        .collect();
    points[0] = a;
    points[n] = b;
    Ok(points)
}

fn inverse_factorials(n: usize) -> Vec<f64> {
    let mut inv = vec![1.0f64; n + 1];
    let mut fact = 1.0f64;
    for (j, slot) in inv.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        *slot = 1.0 / fact;
    }
    inv
}

#[allow(clippy::needless_range_loop)] // j is the moment power, not just an index
fn fill_row(
    problem: &Problem,
    n: usize,
    x: f64,
    m_nodes: usize,
    inv_fact: &[f64],
    row: &mut [f64],
) -> Result<(), SolveError> {
    for j in 0..=n {
        let spec = SingularIntegralSpec {
            x,
            j,
            z: problem.z,
            a: problem.a,
            alpha: problem.alpha,
            phi: &problem.phi,
            phi_prime: &problem.phi_prime,
            force_quadrature: problem.force_quadrature,
        };
        let moment = inv_fact[j] * singular_integral(&spec, m_nodes)?;
        row[j] = match problem.kind {
            Kind::First => moment,
            Kind::Second => {
                inv_fact[j] * (x - problem.z).powi(j as i32) - problem.lambda * moment
            }
        };
    }
    Ok(())
}

/// Assembles the collocation system `(matrix, rhs)` for degree `n` using
/// the default execution mode.
pub fn assemble(problem: &Problem, n: usize) -> Result<(DenseMatrix, Vec<f64>), SolveError> {
    assemble_with(problem, n, ExecMode::default_mode())
}

/// Assembles with an explicit execution mode; rows are independent, so the
/// parallel path produces bit-identical entries.
pub fn assemble_with(
    problem: &Problem,
    n: usize,
    mode: ExecMode,
) -> Result<(DenseMatrix, Vec<f64>), SolveError> {
    if !(1..=MAX_DEGREE).contains(&n) {
        return Err(SolveError::DegreeOutOfRange { n });
    }
    let points = collocation_points(problem.a, problem.b, n)?;
    let m_nodes = problem.assembly_nodes(n);
    let inv_fact = inverse_factorials(n);
    let cols = n + 1;

    let mut matrix = DenseMatrix::zeros(cols, cols);
    match mode {
        ExecMode::Sequential => {
            for (i, row) in matrix.data_mut().chunks_mut(cols).enumerate() {
                fill_row(problem, n, points[i], m_nodes, &inv_fact, row)?;
            }
        }
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                matrix
                    .data_mut()
                    .par_chunks_mut(cols)
                    .enumerate()
                    .try_for_each(|(i, row)| {
                        fill_row(problem, n, points[i], m_nodes, &inv_fact, row)
                    })?;
            }
            #[cfg(not(feature = "parallel"))]
            {
                for (i, row) in matrix.data_mut().chunks_mut(cols).enumerate() {
                    fill_row(problem, n, points[i], m_nodes, &inv_fact, row)?;
                }
            }
        }
    }

    let rhs = points
        .iter()
        .map(|&x| problem.forcing_at(x))
        .collect::<Result<Vec<f64>, SolveError>>()?;
    Ok((matrix, rhs))
}

/// Assembles and solves the collocation system for degree `n`.
///
/// Deterministic for fixed inputs and quadrature settings. A condition
/// estimate above `1e12` attaches a warning to the solution rather than
/// failing the solve.
pub fn solve(problem: &Problem, n: usize) -> Result<TaylorSolution, SolveError> {
    let (matrix, rhs) = assemble(problem, n)?;
    let rank_tol = problem.rank_tol.unwrap_or(DEFAULT_RANK_TOL);
    let ls = solve_min_norm_ls(&matrix, &rhs, rank_tol)?;

    let mut warnings = Vec::new();
    if ls.condition_estimate > CONDITION_WARN {
        warnings.push(format!(
            "condition estimate {:.3e} exceeds {CONDITION_WARN:.0e}; coefficients may be inaccurate",
            ls.condition_estimate
        ));
    }

    Ok(TaylorSolution {
        z: problem.z,
        n,
        coefficients: ls.x,
        rank: ls.rank,
        residual_norm: ls.residual_norm,
        condition_estimate: ls.condition_estimate,
        warnings,
    })
}

/// Horner evaluation of `sum_j coefficients[j]/j! (x - z)^j`.
pub fn evaluate_solution(sol: &TaylorSolution, x: f64) -> f64 {
    let dx = x - sol.z;
    let inv_fact = inverse_factorials(sol.n);
    let mut acc = 0.0f64;
    for j in (0..=sol.n).rev() {
        acc = acc * dx + sol.coefficients[j] * inv_fact[j];
    }
    acc
}

/// Signed equation residuals of `sol` on `grid`.
///
/// The integral of the Taylor polynomial is evaluated term-wise through the
/// moment integrals with the finer [`RESIDUAL_NODES`] rule.
#[allow(clippy::needless_range_loop)] // j is the moment power, not just an index
pub fn residual(
    problem: &Problem,
    sol: &TaylorSolution,
    grid: &[f64],
) -> Result<Vec<f64>, SolveError> {
    let inv_fact = inverse_factorials(sol.n);
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        if x < problem.a || x > problem.b {
            return Err(SolveError::GridPointOutOfRange { x, a: problem.a, b: problem.b });
        }
        let mut transform = 0.0f64;
        for j in 0..=sol.n {
            let spec = SingularIntegralSpec {
                x,
                j,
                z: problem.z,
                a: problem.a,
                alpha: problem.alpha,
                phi: &problem.phi,
                phi_prime: &problem.phi_prime,
                force_quadrature: problem.force_quadrature,
            };
            transform += sol.coefficients[j] * inv_fact[j] * singular_integral(&spec, RESIDUAL_NODES)?;
        }
        let g = problem.forcing_at(x)?;
        let defect = match problem.kind {
            Kind::First => transform - g,
            Kind::Second => evaluate_solution(sol, x) - g - problem.lambda * transform,
        };
        out.push(defect);
    }
    Ok(out)
}

/// User-supplied ingredients of the a-posteriori error bound: a sup bound
/// on the `(n+1)`-th derivative of the exact solution over `[a, b]`, and
/// the absolute coefficient errors at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundInputs {
    pub deriv_bound: f64,
    pub coeff_errors: Vec<f64>,
}

impl ErrorBoundInputs {
    /// Honest inputs computed from a known exact solution: coefficient
    /// errors against its symbolic derivatives at `z`, and the sup of its
    /// `(n+1)`-th derivative sampled on a fine grid of `[a, b]`.
    pub fn from_exact(
        exact: &ExprAst,
        sol: &TaylorSolution,
        a: f64,
        b: f64,
    ) -> Result<ErrorBoundInputs, SolveError> {
        let var = exact.variables().into_iter().next().unwrap_or("x").to_string();
        let mut derivative = exact.clone();
        let mut coeff_errors = Vec::with_capacity(sol.n + 1);
        for j in 0..=sol.n {
            let value = derivative.eval_single(&var, sol.z)?;
            coeff_errors.push((value - sol.coefficients[j]).abs());
            derivative = differentiate(&derivative, &var);
        }
        let mut deriv_bound = 0.0f64;
        for i in 0..BOUND_GRID {
            let x = a + (b - a) * (i as f64) / ((BOUND_GRID - 1) as f64);
            deriv_bound = deriv_bound.max(derivative.eval_single(&var, x)?.abs());
        }
        Ok(ErrorBoundInputs { deriv_bound, coeff_errors })
    }
}

/// A-posteriori sup-norm error bound for `sol` on `[a, b]`:
///
/// ```text
/// M / (n+1)! * deriv_bound + C * max_i coeff_errors[i]
/// ```
///
/// with `M = max |x-z|^(n+1)` and `C = max sum_i |x-z|^i / i!`, both taken
/// over a fine grid of `[a, b]`.
pub fn error_bound(sol: &TaylorSolution, inputs: &ErrorBoundInputs, a: f64, b: f64) -> f64 {
    let inv_fact = inverse_factorials(sol.n + 1);
    let mut m_factor = 0.0f64;
    let mut c_factor = 0.0f64;
    for i in 0..BOUND_GRID {
        let x = a + (b - a) * (i as f64) / ((BOUND_GRID - 1) as f64);
        let dx = (x - sol.z).abs();
        m_factor = m_factor.max(dx.powi(sol.n as i32 + 1));
        let mut weight_sum = 0.0f64;
        for (i, inv) in inv_fact.iter().take(sol.n + 1).enumerate() {
            weight_sum += dx.powi(i as i32) * inv;
        }
        c_factor = c_factor.max(weight_sum);
    }
    let max_coeff_error = inputs.coeff_errors.iter().cloned().fold(0.0f64, f64::max);
    m_factor * inv_fact[sol.n + 1] * inputs.deriv_bound + c_factor * max_coeff_error
}
