//! Arithmetic expression language for problem definitions.
//!
//! Expressions written in a small textual grammar are parsed into [`ExprAst`]
//! trees that support IEEE double-precision evaluation and exact symbolic
//! differentiation. This is the value syntax of the `phi`, `g` and `exact`
//! fields of a problem configuration: `phi` is an expression in `t`, the
//! others in `x`.
//!
//! Trees are immutable after construction, so they can be shared freely
//! across threads; evaluation never mutates the tree.

mod deriv;
mod lexer;
mod parser;

pub use deriv::differentiate;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_single_var};

use std::collections::BTreeSet;
use std::fmt;

/// Binary operators, in the usual precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Built-in functions. `pow` takes two arguments, all others one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Function> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            "pow" => Function::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Function::Pow => 2,
            _ => 1,
        }
    }
}

/// Errors from lexing, parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprError {
    /// Unrecognized character at the given offset.
    Lex { position: usize, found: char },
    /// Malformed input at the given offset.
    Syntax { position: usize, message: String },
    /// Wrong number of call arguments.
    Arity {
        position: usize,
        function: String,
        expected: usize,
        found: usize,
    },
    /// Call of a name that is not a built-in function.
    UnknownFunction { position: usize, name: String },
    /// Evaluation hit a variable with no binding.
    UnboundVariable { name: String },
    /// Evaluation produced a non-finite value; carries the offending
    /// subexpression.
    Domain { expr: String },
    /// The expression uses a variable not allowed in its context.
    DisallowedVariable { name: String, allowed: String },
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Lex { position, found } => {
                write!(f, "unrecognized character `{found}` at offset {position}")
            }
            ExprError::Syntax { position, message } => {
                write!(f, "syntax error at offset {position}: {message}")
            }
            ExprError::Arity { position, function, expected, found } => write!(
                f,
                "function `{function}` at offset {position} takes {expected} argument(s), found {found}"
            ),
            ExprError::UnknownFunction { position, name } => {
                write!(f, "unknown function `{name}` at offset {position}")
            }
            ExprError::UnboundVariable { name } => write!(f, "unbound variable `{name}`"),
            ExprError::Domain { expr } => {
                write!(f, "evaluation of `{expr}` produced a non-finite value")
            }
            ExprError::DisallowedVariable { name, allowed } => write!(
                f,
                "variable `{name}` is not allowed here (expected only `{allowed}`)"
            ),
        }
    }
}

impl std::error::Error for ExprError {}

/// A parsed arithmetic expression.
///
/// Trees are finite and acyclic by construction, call arity is checked at
/// parse time, and every constant is a finite real.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Constant(f64),
    Variable(String),
    Negate(Box<ExprAst>),
    Binary {
        op: BinaryOp,
        left: Box<ExprAst>,
        right: Box<ExprAst>,
    },
    Call {
        function: Function,
        args: Vec<ExprAst>,
    },
}

impl ExprAst {
    pub(crate) fn binary(op: BinaryOp, left: ExprAst, right: ExprAst) -> ExprAst {
        ExprAst::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// True when the tree is exactly the bare variable `name`.
    pub fn is_variable(&self, name: &str) -> bool {
        matches!(self, ExprAst::Variable(v) if v == name)
    }

    /// The set of free variable names in the tree.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ExprAst::Constant(_) => {}
            ExprAst::Variable(name) => {
                out.insert(name.as_str());
            }
            ExprAst::Negate(inner) => inner.collect_variables(out),
            ExprAst::Binary { left, right, .. } => {
                left.collect_variables(out);
                right.collect_variables(out);
            }
            ExprAst::Call { args, .. } => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
        }
    }

    /// Evaluates the tree with the given variable bindings.
    ///
    /// Non-finite intermediate results (overflow, log of a non-positive
    /// value, sqrt of a negative value, division by zero) are reported as
    /// [`ExprError::Domain`] rather than propagated as NaN or infinity.
    pub fn evaluate(&self, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
        let value = match self {
            ExprAst::Constant(c) => *c,
            ExprAst::Variable(name) => bindings
                .iter()
                .find(|(var, _)| *var == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| ExprError::UnboundVariable { name: name.clone() })?,
            ExprAst::Negate(inner) => -inner.evaluate(bindings)?,
            ExprAst::Binary { op, left, right } => {
                let l = left.evaluate(bindings)?;
                let r = right.evaluate(bindings)?;
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => l / r,
                    BinaryOp::Pow => l.powf(r),
                }
            }
            ExprAst::Call { function, args } => {
                let a = args[0].evaluate(bindings)?;
                match function {
                    Function::Sin => a.sin(),
                    Function::Cos => a.cos(),
                    Function::Tan => a.tan(),
                    Function::Exp => a.exp(),
                    Function::Log => a.ln(),
                    Function::Sqrt => a.sqrt(),
                    Function::Abs => a.abs(),
                    Function::Pow => a.powf(args[1].evaluate(bindings)?),
                }
            }
        };
        if !value.is_finite() {
            return Err(ExprError::Domain { expr: self.to_string() });
        }
        Ok(value)
    }

    /// Evaluates a single-variable expression at `value`.
    pub fn eval_single(&self, var: &str, value: f64) -> Result<f64, ExprError> {
        self.evaluate(&[(var, value)])
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Constant(_) | ExprAst::Variable(_) | ExprAst::Call { .. } => 5,
            ExprAst::Binary { op: BinaryOp::Pow, .. } => 4,
            ExprAst::Negate(_) => 3,
            ExprAst::Binary { op: BinaryOp::Mul | BinaryOp::Div, .. } => 2,
            ExprAst::Binary { .. } => 1,
        }
    }

    fn fmt_child(&self, child: &ExprAst, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let _ = self;
        if child.precedence() < min_prec {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

/// Canonical text rendering. Re-parsing the rendered text of any tree that
/// came out of [`parse`] yields a structurally identical tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Constant(c) => write!(f, "{c}"),
            ExprAst::Variable(name) => write!(f, "{name}"),
            ExprAst::Negate(inner) => {
                write!(f, "-")?;
                self.fmt_child(inner, 4, f)
            }
            ExprAst::Binary { op, left, right } => {
                let prec = self.precedence();
                match op {
                    BinaryOp::Add | BinaryOp::Mul => {
                        self.fmt_child(left, prec, f)?;
                        write!(f, "{}", op.symbol())?;
                        self.fmt_child(right, prec, f)
                    }
                    BinaryOp::Sub | BinaryOp::Div => {
                        self.fmt_child(left, prec, f)?;
                        write!(f, "{}", op.symbol())?;
                        // Left-associative: the right operand needs parens at
                        // equal precedence, e.g. a-(b+c) and a/(b*c).
                        self.fmt_child(right, prec + 1, f)
                    }
                    BinaryOp::Pow => {
                        // Right-associative, and tighter than unary minus.
                        self.fmt_child(left, 5, f)?;
                        write!(f, "^")?;
                        self.fmt_child(right, 4, f)
                    }
                }
            }
            ExprAst::Call { function, args } => {
                write!(f, "{}(", function.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}
