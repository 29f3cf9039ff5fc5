//! Symbolic differentiation with conservative constant folding.

use super::{BinaryOp, ExprAst, Function};

/// Returns the exact symbolic derivative of `ast` with respect to `var`.
///
/// Uses the chain, product and quotient rules; `f^c` for a constant `c`
/// differentiates via the power rule, general `f^g` via `exp(g*log(f))`.
/// The result is constant-folded: constant subtrees are collapsed and the
/// neutral elements `x*1`, `x+0`, `x^1` are removed, but no further
/// algebraic rewriting is done.
pub fn differentiate(ast: &ExprAst, var: &str) -> ExprAst {
    fold(&derive(ast, var))
}

fn derive(ast: &ExprAst, var: &str) -> ExprAst {
    match ast {
        ExprAst::Constant(_) => ExprAst::Constant(0.0),
        ExprAst::Variable(name) => {
            if name == var {
                ExprAst::Constant(1.0)
            } else {
                ExprAst::Constant(0.0)
            }
        }
        ExprAst::Negate(inner) => ExprAst::Negate(Box::new(derive(inner, var))),
        ExprAst::Binary { op, left, right } => {
            let l = left.as_ref();
            let r = right.as_ref();
            let dl = derive(l, var);
            let dr = derive(r, var);
            match op {
                BinaryOp::Add => ExprAst::binary(BinaryOp::Add, dl, dr),
                BinaryOp::Sub => ExprAst::binary(BinaryOp::Sub, dl, dr),
                BinaryOp::Mul => ExprAst::binary(
                    BinaryOp::Add,
                    ExprAst::binary(BinaryOp::Mul, dl, r.clone()),
                    ExprAst::binary(BinaryOp::Mul, l.clone(), dr),
                ),
                BinaryOp::Div => {
                    // (l'r - lr') / r^2
                    let numerator = ExprAst::binary(
                        BinaryOp::Sub,
                        ExprAst::binary(BinaryOp::Mul, dl, r.clone()),
                        ExprAst::binary(BinaryOp::Mul, l.clone(), dr),
                    );
                    let denominator =
                        ExprAst::binary(BinaryOp::Pow, r.clone(), ExprAst::Constant(2.0));
                    ExprAst::binary(BinaryOp::Div, numerator, denominator)
                }
                BinaryOp::Pow => derive_power(l, r, dl, dr),
            }
        }
        ExprAst::Call { function, args } => {
            if *function == Function::Pow {
                let l = &args[0];
                let r = &args[1];
                return derive_power(l, r, derive(l, var), derive(r, var));
            }
            let arg = &args[0];
            let darg = derive(arg, var);
            let outer = match function {
                Function::Sin => call1(Function::Cos, arg.clone()),
                Function::Cos => {
                    ExprAst::Negate(Box::new(call1(Function::Sin, arg.clone())))
                }
                Function::Tan => ExprAst::binary(
                    BinaryOp::Div,
                    ExprAst::Constant(1.0),
                    ExprAst::binary(
                        BinaryOp::Pow,
                        call1(Function::Cos, arg.clone()),
                        ExprAst::Constant(2.0),
                    ),
                ),
                Function::Exp => call1(Function::Exp, arg.clone()),
                Function::Log => ExprAst::binary(
                    BinaryOp::Div,
                    ExprAst::Constant(1.0),
                    arg.clone(),
                ),
                Function::Sqrt => ExprAst::binary(
                    BinaryOp::Div,
                    ExprAst::Constant(1.0),
                    ExprAst::binary(
                        BinaryOp::Mul,
                        ExprAst::Constant(2.0),
                        call1(Function::Sqrt, arg.clone()),
                    ),
                ),
                // abs'(u) = u/abs(u); undefined at u = 0, where evaluation
                // reports a domain error.
                Function::Abs => ExprAst::binary(
                    BinaryOp::Div,
                    arg.clone(),
                    call1(Function::Abs, arg.clone()),
                ),
                Function::Pow => unreachable!(),
            };
            ExprAst::binary(BinaryOp::Mul, outer, darg)
        }
    }
}

/// d(l^r): power rule for constant exponents, otherwise l^r * (r'·log l + r·l'/l).
fn derive_power(l: &ExprAst, r: &ExprAst, dl: ExprAst, dr: ExprAst) -> ExprAst {
    if let ExprAst::Constant(c) = r {
        let reduced = ExprAst::binary(BinaryOp::Pow, l.clone(), ExprAst::Constant(c - 1.0));
        return ExprAst::binary(
            BinaryOp::Mul,
            ExprAst::binary(BinaryOp::Mul, ExprAst::Constant(*c), reduced),
            dl,
        );
    }
    let original = ExprAst::binary(BinaryOp::Pow, l.clone(), r.clone());
    let log_term = ExprAst::binary(BinaryOp::Mul, dr, call1(Function::Log, l.clone()));
    let ratio_term = ExprAst::binary(
        BinaryOp::Mul,
        r.clone(),
        ExprAst::binary(BinaryOp::Div, dl, l.clone()),
    );
    ExprAst::binary(
        BinaryOp::Mul,
        original,
        ExprAst::binary(BinaryOp::Add, log_term, ratio_term),
    )
}

fn call1(function: Function, arg: ExprAst) -> ExprAst {
    ExprAst::Call { function, args: vec![arg] }
}

fn constant_of(ast: &ExprAst) -> Option<f64> {
    match ast {
        ExprAst::Constant(c) => Some(*c),
        _ => None,
    }
}

/// Conservative folding: collapse finite constant subtrees, drop neutral
/// elements and multiplications by zero. No re-association.
fn fold(ast: &ExprAst) -> ExprAst {
    match ast {
        ExprAst::Constant(_) | ExprAst::Variable(_) => ast.clone(),
        ExprAst::Negate(inner) => {
            let inner = fold(inner);
            match inner {
                ExprAst::Constant(c) => ExprAst::Constant(-c),
                ExprAst::Negate(nested) => *nested,
                other => ExprAst::Negate(Box::new(other)),
            }
        }
        ExprAst::Binary { op, left, right } => {
            let l = fold(left);
            let r = fold(right);
            if let (Some(a), Some(b)) = (constant_of(&l), constant_of(&r)) {
                let v = match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => a.powf(b),
                };
                if v.is_finite() {
                    return ExprAst::Constant(v);
                }
                return ExprAst::binary(*op, l, r);
            }
            match op {
                BinaryOp::Add => {
                    if constant_of(&l) == Some(0.0) {
                        return r;
                    }
                    if constant_of(&r) == Some(0.0) {
                        return l;
                    }
                }
                BinaryOp::Sub => {
                    if constant_of(&r) == Some(0.0) {
                        return l;
                    }
                }
                BinaryOp::Mul => {
                    if constant_of(&l) == Some(1.0) {
                        return r;
                    }
                    if constant_of(&r) == Some(1.0) {
                        return l;
                    }
                    if constant_of(&l) == Some(0.0) || constant_of(&r) == Some(0.0) {
                        return ExprAst::Constant(0.0);
                    }
                }
                BinaryOp::Div => {
                    if constant_of(&r) == Some(1.0) {
                        return l;
                    }
                }
                BinaryOp::Pow => {
                    if constant_of(&r) == Some(1.0) {
                        return l;
                    }
                    if constant_of(&r) == Some(0.0) {
                        return ExprAst::Constant(1.0);
                    }
                }
            }
            ExprAst::binary(*op, l, r)
        }
        ExprAst::Call { function, args } => {
            let args: Vec<ExprAst> = args.iter().map(fold).collect();
            if let Some(consts) = args.iter().map(constant_of).collect::<Option<Vec<f64>>>() {
                let v = match function {
                    Function::Sin => consts[0].sin(),
                    Function::Cos => consts[0].cos(),
                    Function::Tan => consts[0].tan(),
                    Function::Exp => consts[0].exp(),
                    Function::Log => consts[0].ln(),
                    Function::Sqrt => consts[0].sqrt(),
                    Function::Abs => consts[0].abs(),
                    Function::Pow => consts[0].powf(consts[1]),
                };
                if v.is_finite() {
                    return ExprAst::Constant(v);
                }
            }
            ExprAst::Call { function: *function, args }
        }
    }
}
