//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, then `* /`, then unary minus,
//! then `^` (right-associative). So `-x^2` parses as `-(x^2)` and `2^3^2`
//! as `2^(3^2)`. The constants `pi` and `e` are folded to their nearest
//! doubles at parse time.

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinaryOp, ExprAst, ExprError, Function};

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<ExprAst, ExprError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ExprError::Syntax {
            position: 0,
            message: "empty expression".to_string(),
        });
    }
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.additive()?;
    if parser.pos != parser.tokens.len() {
        let tok = &parser.tokens[parser.pos];
        return Err(ExprError::Syntax {
            position: tok.position,
            message: format!("unexpected `{}`", tok.lexeme),
        });
    }
    Ok(ast)
}

/// Parses `source` and checks that `var` is the only free variable.
pub fn parse_single_var(source: &str, var: &str) -> Result<ExprAst, ExprError> {
    let ast = parse(source)?;
    for name in ast.variables() {
        if name != var {
            return Err(ExprError::DisallowedVariable {
                name: name.to_string(),
                allowed: var.to_string(),
            });
        }
    }
    Ok(ast)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_position(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.position + t.lexeme.len())
            .unwrap_or(0)
    }

    fn eat_operator(&mut self, symbols: &[&str]) -> Option<String> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Operator && symbols.contains(&tok.lexeme.as_str()) {
                let lexeme = tok.lexeme.clone();
                self.pos += 1;
                return Some(lexeme);
            }
        }
        None
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ExprError> {
        match self.peek() {
            Some(tok) if tok.kind == kind => {
                let tok = tok.clone();
                self.pos += 1;
                Ok(tok)
            }
            Some(tok) => Err(ExprError::Syntax {
                position: tok.position,
                message: format!("expected {what}, found `{}`", tok.lexeme),
            }),
            None => Err(ExprError::Syntax {
                position: self.end_position(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn additive(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.multiplicative()?;
        while let Some(op) = self.eat_operator(&["+", "-"]) {
            let rhs = self.multiplicative()?;
            let op = if op == "+" { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = ExprAst::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_operator(&["*", "/"]) {
            let rhs = self.unary()?;
            let op = if op == "*" { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = ExprAst::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if self.eat_operator(&["-"]).is_some() {
            let inner = self.unary()?;
            return Ok(ExprAst::Negate(Box::new(inner)));
        }
        if self.eat_operator(&["+"]).is_some() {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        if self.eat_operator(&["^"]).is_some() {
            // Right-associative; the exponent may carry its own unary minus.
            let exponent = self.unary()?;
            return Ok(ExprAst::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        let tok = match self.peek() {
            Some(tok) => tok.clone(),
            None => {
                return Err(ExprError::Syntax {
                    position: self.end_position(),
                    message: "expected a value, found end of input".to_string(),
                })
            }
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                let value: f64 = tok.lexeme.parse().map_err(|_| ExprError::Syntax {
                    position: tok.position,
                    message: format!("invalid number `{}`", tok.lexeme),
                })?;
                Ok(ExprAst::Constant(value))
            }
            TokenKind::LeftParen => {
                self.pos += 1;
                let inner = self.additive()?;
                self.expect(TokenKind::RightParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Identifier => {
                self.pos += 1;
                let follows_call = matches!(self.peek(), Some(t) if t.kind == TokenKind::LeftParen);
                if follows_call {
                    self.call(&tok)
                } else {
                    match tok.lexeme.as_str() {
                        "pi" => Ok(ExprAst::Constant(std::f64::consts::PI)),
                        "e" => Ok(ExprAst::Constant(std::f64::consts::E)),
                        name => Ok(ExprAst::Variable(name.to_string())),
                    }
                }
            }
            _ => Err(ExprError::Syntax {
                position: tok.position,
                message: format!("unexpected `{}`", tok.lexeme),
            }),
        }
    }

    fn call(&mut self, name_tok: &Token) -> Result<ExprAst, ExprError> {
        let function =
            Function::from_name(&name_tok.lexeme).ok_or_else(|| ExprError::UnknownFunction {
                position: name_tok.position,
                name: name_tok.lexeme.clone(),
            })?;
        self.expect(TokenKind::LeftParen, "`(`")?;
        let mut args = Vec::new();
        if !matches!(self.peek(), Some(t) if t.kind == TokenKind::RightParen) {
            args.push(self.additive()?);
            while matches!(self.peek(), Some(t) if t.kind == TokenKind::Comma) {
                self.pos += 1;
                args.push(self.additive()?);
            }
        }
        self.expect(TokenKind::RightParen, "`)`")?;
        if args.len() != function.arity() {
            return Err(ExprError::Arity {
                position: name_tok.position,
                function: function.name().to_string(),
                expected: function.arity(),
                found: args.len(),
            });
        }
        Ok(ExprAst::Call { function, args })
    }
}
