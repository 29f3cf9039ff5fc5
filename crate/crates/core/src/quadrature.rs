//! Gauss–Jacobi quadrature and weakly singular moment integrals.
//!
//! The moment integrals have the form
//!
//! ```text
//! I(x, j) = ∫_a^x (t - z)^j / (phi(x) - phi(t))^alpha dt,    0 < alpha < 1,
//! ```
//!
//! with `phi` strictly increasing on `[a, x]`. The integrand is split into a
//! smooth factor `(t - z)^j * ((x - t)/(phi(x) - phi(t)))^alpha` and the
//! endpoint singularity `(x - t)^(-alpha)`; mapping `[a, x]` onto `[-1, 1]`
//! turns the singular part into the Gauss–Jacobi weight `(1 - s)^(-alpha)`,
//! which the rule absorbs exactly.
//!
//! For the identity profile `phi(t) = t` the integral has a closed form,
//! used automatically unless a caller forces the quadrature path.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use crate::expr::{ExprAst, ExprError};

/// Largest supported node count for a Gauss–Jacobi rule.
pub const MAX_NODES: usize = 512;

/// Relative threshold below which `phi(x) - phi(t)` is treated as cancelled
/// and the ratio falls back to its analytic limit `1/phi'((x+t)/2)`.
const CANCELLATION_DELTA: f64 = 1e-12;

/// Off-diagonal decay tolerance of the tridiagonal eigensolver.
const EIGEN_TOL: f64 = 1e-14;

/// Errors from rule construction or integral evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// Node count outside `1..=MAX_NODES`.
    InvalidNodeCount(usize),
    /// Singularity exponent outside `(0, 1)`.
    InvalidAlpha(f64),
    /// Upper limit below lower limit.
    InvalidInterval { a: f64, x: f64 },
    /// The implicit-shift eigensolver did not converge; signals a defect.
    EigenNoConvergence { size: usize },
    /// `phi(x) - phi(t)` was non-positive at a quadrature node, so `phi` is
    /// not strictly increasing on the interval.
    NonMonotone { x: f64, t: f64 },
    /// `phi'` vanished where the cancellation-safe ratio limit needed it.
    ZeroDerivative { at: f64 },
    /// Expression evaluation failed inside the integrand.
    Expr(ExprError),
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::InvalidNodeCount(m) => {
                write!(f, "node count {m} is outside 1..={MAX_NODES}")
            }
            QuadError::InvalidAlpha(alpha) => {
                write!(f, "alpha must be in (0,1), got {alpha}")
            }
            QuadError::InvalidInterval { a, x } => {
                write!(f, "upper limit {x} is below lower limit {a}")
            }
            QuadError::EigenNoConvergence { size } => {
                write!(f, "tridiagonal eigensolver failed to converge for size {size}")
            }
            QuadError::NonMonotone { x, t } => write!(
                f,
                "phi(x) - phi(t) is not positive for x = {x}, t = {t}; phi must be strictly increasing"
            ),
            QuadError::ZeroDerivative { at } => {
                write!(f, "phi' vanishes at {at}; the kernel ratio has no finite limit")
            }
            QuadError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for QuadError {}

impl From<ExprError> for QuadError {
    fn from(e: ExprError) -> Self {
        QuadError::Expr(e)
    }
}

/// A Gauss–Jacobi rule for the weight `(1 - s)^(-alpha)` on `[-1, 1]`.
///
/// Nodes are strictly inside `(-1, 1)` and strictly increasing, all weights
/// are positive, and the weights sum to the total mass
/// `2^(1-alpha) / (1-alpha)`. The rule integrates polynomials of degree up
/// to `2m - 1` exactly against the weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Total mass of the weight function, `2^(1-alpha) / (1-alpha)`.
    pub fn total_mass(alpha: f64) -> f64 {
        2f64.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

/// Builds the `m`-point Gauss–Jacobi rule for weight `(1-s)^(-alpha)` on
/// `[-1, 1]` by the Golub–Welsch procedure: the symmetric tridiagonal matrix
/// of three-term recurrence coefficients is diagonalized with an
/// implicit-shift eigensolver; eigenvalues are the nodes and the squared
/// first eigenvector components scaled by the total mass are the weights.
pub fn jacobi_rule(m: usize, alpha: f64) -> Result<QuadratureRule, QuadError> {
    if !(1..=MAX_NODES).contains(&m) {
        return Err(QuadError::InvalidNodeCount(m));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(QuadError::InvalidAlpha(alpha));
    }

    // Monic Jacobi recurrence coefficients specialized to exponents
    // (-alpha, 0): diag[k] is the recurrence shift, offdiag[k] the square
    // root of the recurrence norm ratio.
    let mut diag = vec![0.0f64; m];
    let mut offdiag = vec![0.0f64; m.saturating_sub(1)];
    diag[0] = alpha / (2.0 - alpha);
    for k in 1..m {
        let kf = k as f64;
        let denom = 2.0 * kf - alpha;
        diag[k] = -(alpha * alpha) / (denom * (denom + 2.0));
        let beta = if k == 1 {
            4.0 * (1.0 - alpha) / ((2.0 - alpha) * (2.0 - alpha) * (3.0 - alpha))
        } else {
            4.0 * kf * kf * (kf - alpha) * (kf - alpha)
                / (denom * denom * (denom + 1.0) * (denom - 1.0))
        };
        offdiag[k - 1] = beta.sqrt();
    }

    let mut first_components = vec![0.0f64; m];
    first_components[0] = 1.0;
    tridiagonal_eigen(&mut diag, &mut offdiag, &mut first_components)?;

    let mass = QuadratureRule::total_mass(alpha);
    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(first_components.iter())
        .map(|(&node, &c)| (node, mass * c * c))
        .collect();
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule { alpha, nodes, weights })
}

type RuleCache = RwLock<HashMap<(usize, u64), Arc<QuadratureRule>>>;

/// Returns the cached rule for `(m, alpha)`, building it on first use.
/// Rules are immutable and shared across threads.
pub fn cached_jacobi_rule(m: usize, alpha: f64) -> Result<Arc<QuadratureRule>, QuadError> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (m, alpha.to_bits());

    if let Some(rule) = cache.read().unwrap().get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(jacobi_rule(m, alpha)?);
    let mut guard = cache.write().unwrap();
    Ok(Arc::clone(guard.entry(key).or_insert(rule)))
}

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix,
/// accumulating only the first row of the eigenvector matrix in `z`.
/// `d` holds the diagonal (eigenvalues on return), `e` the off-diagonal.
fn tridiagonal_eigen(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<(), QuadError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    let mut work = vec![0.0f64; n];
    work[..n - 1].copy_from_slice(e);
    let e = &mut work; // e[n-1] is a zero sentinel

    let max_total_iterations = 50 * n;
    let mut iterations = 0usize;

    for l in 0..n {
        loop {
            // Find the first decoupled position at or after l.
            let mut m = l;
            while m < n - 1 {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= EIGEN_TOL * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > max_total_iterations {
                return Err(QuadError::EigenNoConvergence { size: n });
            }

            // Wilkinson-style implicit shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflowed = false;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // A rotation annihilated early; deflate and retry.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// One weakly singular moment integral `I(x, j)`.
///
/// `phi` and `phi_prime` are expressions in the variable `t`. When `phi` is
/// the bare variable `t` and `force_quadrature` is false, the closed form is
/// used instead of quadrature.
#[derive(Debug, Clone)]
pub struct SingularIntegralSpec<'a> {
    pub x: f64,
    pub j: usize,
    pub z: f64,
    pub a: f64,
    pub alpha: f64,
    pub phi: &'a ExprAst,
    pub phi_prime: &'a ExprAst,
    pub force_quadrature: bool,
}

/// The smooth kernel ratio `(x - t) / (phi(x) - phi(t))`.
///
/// Computed directly while the difference carries significant digits;
/// within the relative cancellation window the analytic limit
/// `1/phi'((x+t)/2)` is returned instead.
pub fn near_singularity_ratio(
    x: f64,
    t: f64,
    phi: &ExprAst,
    phi_prime: &ExprAst,
) -> Result<f64, QuadError> {
    let phi_x = phi.eval_single("t", x)?;
    let phi_t = phi.eval_single("t", t)?;
    let diff = phi_x - phi_t;
    if diff.abs() > CANCELLATION_DELTA * phi_x.abs().max(1.0) {
        return Ok((x - t) / diff);
    }
    let mid = 0.5 * (x + t);
    let slope = phi_prime.eval_single("t", mid)?;
    if slope == 0.0 {
        return Err(QuadError::ZeroDerivative { at: mid });
    }
    Ok(1.0 / slope)
}

/// Evaluates `I(x, j)` for the given spec with an `m`-point rule.
///
/// # Errors
///
/// Fails when `phi(x) - phi(t)` is non-positive at a node (non-monotone
/// profile), or when expression evaluation fails.
pub fn singular_integral(spec: &SingularIntegralSpec<'_>, m: usize) -> Result<f64, QuadError> {
    if spec.x < spec.a {
        return Err(QuadError::InvalidInterval { a: spec.a, x: spec.x });
    }
    if spec.x == spec.a {
        return Ok(0.0);
    }
    if !spec.force_quadrature && spec.phi.is_variable("t") {
        return Ok(singular_integral_identity_phi(
            spec.x, spec.j, spec.z, spec.a, spec.alpha,
        ));
    }
    let j = spec.j as i32;
    let z = spec.z;
    abel_operator_apply(
        spec.phi,
        spec.phi_prime,
        spec.alpha,
        spec.a,
        spec.x,
        m,
        |t| Ok((t - z).powi(j)),
    )
}

/// Applies the weakly singular integral operator to an arbitrary density:
/// returns `∫_a^x f(t) / (phi(x) - phi(t))^alpha dt` with an `m`-point rule.
pub fn abel_operator_apply<F>(
    phi: &ExprAst,
    phi_prime: &ExprAst,
    alpha: f64,
    a: f64,
    x: f64,
    m: usize,
    f: F,
) -> Result<f64, QuadError>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    if x < a {
        return Err(QuadError::InvalidInterval { a, x });
    }
    if x == a {
        return Ok(0.0);
    }
    let rule = cached_jacobi_rule(m, alpha)?;
    let half = 0.5 * (x - a);

    let mut sum = 0.0f64;
    for (&s, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let t = x - half * (1.0 - s);
        let ratio = near_singularity_ratio(x, t, phi, phi_prime)?;
        if ratio <= 0.0 {
            return Err(QuadError::NonMonotone { x, t });
        }
        sum += w * f(t)? * ratio.powf(alpha);
    }
    Ok(half.powf(1.0 - alpha) * sum)
}

/// Closed form of `I(x, j)` for the identity profile `phi(t) = t`:
///
/// ```text
/// I(x, j) = sum_{k=0}^{j} C(j,k) (x-z)^(j-k) (-1)^k (x-a)^(k+1-alpha) / (k+1-alpha)
/// ```
///
/// obtained by expanding `(t - z)^j` about `t = x` and integrating each term.
pub fn singular_integral_identity_phi(x: f64, j: usize, z: f64, a: f64, alpha: f64) -> f64 {
    let width = x - a;
    if width == 0.0 {
        return 0.0;
    }
    let offset = x - z;
    let mut binom = 1.0f64;
    let mut sign = 1.0f64;
    let mut sum = 0.0f64;
    for k in 0..=j {
        let kf = k as f64;
        let term = binom
            * offset.powi((j - k) as i32)
            * sign
            * width.powf(kf + 1.0 - alpha)
            / (kf + 1.0 - alpha);
        sum += term;
        binom *= (j - k) as f64 / (kf + 1.0);
        sign = -sign;
    }
    sum
}
