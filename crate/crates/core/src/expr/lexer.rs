//! Tokenizer for the expression grammar.

use super::ExprError;

/// Classification of a lexed token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LeftParen,
    RightParen,
    Comma,
}

/// One lexical token with its source offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

/// Splits `source` into tokens.
///
/// Numbers accept decimal and scientific notation (`2`, `0.5`, `.5`, `1e-2`),
/// identifiers are `[a-zA-Z][a-zA-Z0-9_]*`, and the operators are
/// `+ - * / ^ ( ) ,`. Any other non-whitespace character is a lexical error
/// reported with its offset.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }

        let start = i;
        match c {
            '0'..='9' | '.' => {
                let end = scan_number(bytes, start)?;
                let lexeme = &source[start..end];
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| ExprError::Lex { position: start, found: c })?;
                if !value.is_finite() {
                    return Err(ExprError::Syntax {
                        position: start,
                        message: format!("number `{lexeme}` is out of range"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number,
                    lexeme: lexeme.to_string(),
                    position: start,
                });
                i = end;
            }
            'a'..='z' | 'A'..='Z' => {
                let mut end = start + 1;
                while end < bytes.len()
                    && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Identifier,
                    lexeme: source[start..end].to_string(),
                    position: start,
                });
                i = end;
            }
            '+' | '-' | '*' | '/' | '^' => {
                tokens.push(Token {
                    kind: TokenKind::Operator,
                    lexeme: c.to_string(),
                    position: start,
                });
                i += 1;
            }
            '(' => {
                tokens.push(Token {
                    kind: TokenKind::LeftParen,
                    lexeme: "(".to_string(),
                    position: start,
                });
                i += 1;
            }
            ')' => {
                tokens.push(Token {
                    kind: TokenKind::RightParen,
                    lexeme: ")".to_string(),
                    position: start,
                });
                i += 1;
            }
            ',' => {
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    lexeme: ",".to_string(),
                    position: start,
                });
                i += 1;
            }
            _ => return Err(ExprError::Lex { position: start, found: c }),
        }
    }

    Ok(tokens)
}

/// Scans a number starting at `start`: digits, optional fraction, optional
/// exponent. A lone `.` with no digits on either side is rejected.
fn scan_number(bytes: &[u8], start: usize) -> Result<usize, ExprError> {
    let mut i = start;
    let mut saw_digit = false;

    while i < bytes.len() && bytes[i].is_ascii_digit() {
        saw_digit = true;
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            saw_digit = true;
            i += 1;
        }
    }
    if !saw_digit {
        return Err(ExprError::Lex {
            position: start,
            found: bytes[start] as char,
        });
    }
    // Exponent part: only consumed when it is actually followed by digits,
    // so `2e` lexes as the number 2 and the identifier e.
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut k = i + 1;
        if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
            k += 1;
        }
        if k < bytes.len() && bytes[k].is_ascii_digit() {
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            i = k;
        }
    }
    Ok(i)
}
