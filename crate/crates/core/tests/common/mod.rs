//! Shared test support: a deterministic RNG and independent numerical
//! oracles. Everything here is deliberately computed by routes that do not
//! touch the library's quadrature or solve paths.

#![allow(dead_code)]

/// SplitMix64: tiny, deterministic, good enough for test sampling.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Moment oracle: `M_k = ∫_{-1}^{1} s^k (1-s)^(-alpha) ds`.
///
/// Substituting `u = 1 - s` gives `∫_0^2 (1-u)^k u^(-alpha) du`; integrating
/// `d/du [u^(1-alpha) (1-u)^k]` over `[0, 2]` yields the forward recurrence
///
/// ```text
/// M_0 = 2^(1-alpha) / (1-alpha)
/// M_k = (k M_{k-1} + (-1)^k 2^(1-alpha)) / (k + 1 - alpha)
/// ```
///
/// whose error-amplification factor `k/(k+1-alpha)` is below one, unlike the
/// raw binomial expansion of `(1-u)^k`, which cancels catastrophically in
/// double precision once `k` exceeds about 20.
pub fn moment_oracle(k: usize, alpha: f64) -> f64 {
    let boundary = 2f64.powf(1.0 - alpha);
    let mut m = boundary / (1.0 - alpha);
    for i in 1..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        m = ((i as f64) * m + sign * boundary) / (i as f64 + 1.0 - alpha);
    }
    m
}

/// Adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }

    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        // Halve the budget per side but keep it above rounding level, or
        // panels whose defect is pure noise would split forever.
        let child_tol = (0.5 * tol).max(1e-16);
        recurse(f, a, fa, m, fm, left, lm, flm, child_tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, child_tol, depth - 1)
    }

    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 60)
}

/// Independent oracle for the weakly singular moment integral
/// `∫_a^x (t-z)^j (phi(x)-phi(t))^(-alpha) dt`.
///
/// The substitution `u = (x-t)^(1-alpha)` removes the endpoint singularity:
/// the integrand becomes `(t(u)-z)^j ((x-t)/(phi(x)-phi(t)))^alpha / (1-alpha)`
/// on `[0, (x-a)^(1-alpha)]`, which an adaptive integrator handles directly.
pub fn singular_moment_oracle<P: Fn(f64) -> f64, D: Fn(f64) -> f64>(
    x: f64,
    j: usize,
    z: f64,
    a: f64,
    alpha: f64,
    phi: &P,
    dphi: &D,
    tol: f64,
) -> f64 {
    if x == a {
        return 0.0;
    }
    let phi_x = phi(x);
    let upper = (x - a).powf(1.0 - alpha);
    let exponent = 1.0 / (1.0 - alpha);
    let integrand = |u: f64| {
        let t = x - u.powf(exponent);
        let diff = phi_x - phi(t);
        let ratio = if diff.abs() > 1e-9 * phi_x.abs().max(1.0) {
            (x - t) / diff
        } else {
            1.0 / dphi(0.5 * (x + t))
        };
        (t - z).powi(j as i32) * ratio.powf(alpha) / (1.0 - alpha)
    };
    adaptive_simpson(&integrand, 0.0, upper, tol)
}

/// True when `value` rounds to the same `digits`-significant-digit decimal
/// as `printed` (a value already rounded to that many digits).
pub fn matches_sig_digits(value: f64, printed: f64, digits: i32) -> bool {
    if printed == 0.0 {
        return value.abs() <= 1e-12;
    }
    let scale = printed.abs().log10().floor() as i32;
    let tol = 0.5000001 * 10f64.powi(scale - digits + 1);
    (value - printed).abs() <= tol
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

use abeltc_core::expr::{differentiate, BinaryOp, ExprAst, Function};

/// Random expression over a bounded grammar in the variable `x`: sums,
/// differences, products, small constant powers, and sin/cos/exp, with
/// constants in `[0.5, 2]`. Chosen so values and derivatives stay tame on
/// `[0.2, 1.3]`, keeping central finite differences well conditioned.
pub fn random_expr(rng: &mut Rng, depth: usize) -> ExprAst {
    if depth == 0 {
        return if rng.next_f64() < 0.6 {
            ExprAst::Variable("x".to_string())
        } else {
            ExprAst::Constant(rng.range(0.5, 2.0))
        };
    }
    let boxed = |e: ExprAst| Box::new(e);
    match rng.below(6) {
        0 => ExprAst::Binary {
            op: BinaryOp::Add,
            left: boxed(random_expr(rng, depth - 1)),
            right: boxed(random_expr(rng, depth - 1)),
        },
        1 => ExprAst::Binary {
            op: BinaryOp::Sub,
            left: boxed(random_expr(rng, depth - 1)),
            right: boxed(random_expr(rng, depth - 1)),
        },
        2 => ExprAst::Binary {
            op: BinaryOp::Mul,
            left: boxed(random_expr(rng, depth - 1)),
            right: boxed(random_expr(rng, depth - 1)),
        },
        3 => ExprAst::Binary {
            op: BinaryOp::Pow,
            left: boxed(random_expr(rng, depth - 1)),
            right: boxed(ExprAst::Constant((2 + rng.below(2)) as f64)),
        },
        4 => ExprAst::Call {
            function: if rng.next_f64() < 0.5 { Function::Sin } else { Function::Cos },
            args: vec![random_expr(rng, depth - 1)],
        },
        _ => ExprAst::Call {
            function: Function::Exp,
            args: vec![ExprAst::Binary {
                op: BinaryOp::Mul,
                left: boxed(ExprAst::Constant(0.5)),
                right: boxed(random_expr(rng, depth - 1)),
            }],
        },
    }
}

/// Compares the symbolic derivative of `count` random expressions against
/// central finite differences (step 1e-6) at `points_each` random points of
/// `[0.2, 1.3]`. Points where evaluation fails or `|f'| <= 1e-3` are
/// skipped. Returns `(checked, max relative error)`.
pub fn derivative_fd_sweep(seed: u64, count: usize, points_each: usize) -> (usize, f64) {
    let mut rng = Rng::new(seed);
    let h = 1e-6;
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let expr = random_expr(&mut rng, 3);
        let deriv = differentiate(&expr, "x");
        for _ in 0..points_each {
            let x = rng.range(0.2, 1.3);
            let up = expr.eval_single("x", x + h);
            let down = expr.eval_single("x", x - h);
            let sym = deriv.eval_single("x", x);
            let (up, down, sym) = match (up, down, sym) {
                (Ok(u), Ok(d), Ok(s)) => (u, d, s),
                _ => continue,
            };
            if sym.abs() <= 1e-3 {
                continue;
            }
            let fd = (up - down) / (2.0 * h);
            let rel = ((sym - fd) / sym).abs();
            worst = worst.max(rel);
            checked += 1;
        }
    }
    (checked, worst)
}
