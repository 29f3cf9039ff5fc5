//! Taylor-collocation solver for generalized Abel integral equations of the
//! first and second kinds.
//!
//! The unknown is expanded as a Taylor polynomial about a point `z`; forcing
//! the equation to hold at equispaced collocation points turns it into a
//! small dense linear system whose entries are weakly singular moment
//! integrals. Those integrals are evaluated with Gauss–Jacobi quadrature
//! (or a closed form for the identity kernel profile), and the system is
//! solved by rank-revealing minimum-norm least squares, which absorbs the
//! structurally zero first row that first-kind problems produce at the left
//! endpoint.
//!
//! Modules:
//! - [`expr`]: the expression language for kernel profiles and forcing terms
//! - [`quadrature`]: Gauss–Jacobi rules and singular moment integrals
//! - [`linalg`]: dense matrices and the pivoted-QR least-squares solver
//! - [`solver`]: collocation assembly, solve, residuals and error bounds
//! - [`bench`](crate::bench): built-in benchmark cases and report generation
//! - [`config`]: JSON problem configurations
//!
//! The `parallel` feature (on by default) computes matrix rows and
//! independent benchmark runs on a rayon thread pool; results are
//! bit-identical to the sequential fallback.

pub mod bench;
pub mod config;
pub mod expr;
pub mod linalg;
pub mod quadrature;
pub mod solver;

pub use config::{load_config, Config, ConfigError, RunSpec};
pub use expr::{differentiate, parse, parse_single_var, ExprAst, ExprError};
pub use linalg::{DenseMatrix, LinalgError, LsSolution};
pub use quadrature::{
    jacobi_rule, singular_integral, singular_integral_identity_phi, QuadError, QuadratureRule,
    SingularIntegralSpec,
};
pub use solver::{
    collocation_points, error_bound, evaluate_solution, residual, solve, ErrorBoundInputs,
    Forcing, Kind, Problem, SolveError, TaylorSolution,
};
