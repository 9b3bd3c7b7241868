//! Recursive-descent parser for the expression grammar in
//! `docs/grammar.md`. Byte positions in errors refer to the source
//! string.

use thiserror::Error;

use super::{Alphabet, BinaryOp, Bindings, Expr, UnaryOp};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at position {position}")]
    Lexical { ch: char, position: usize },
    #[error("malformed number at position {position}")]
    BadNumber { position: usize },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("unbalanced parentheses at position {position}")]
    UnbalancedParens { position: usize },
    #[error("exponent at position {position} is not a constant: {detail}")]
    NonConstantExponent { position: usize, detail: String },
    #[error("unexpected token `{found}` at position {position}")]
    UnexpectedToken { found: String, position: usize },
    #[error("unexpected end of input at position {position}")]
    UnexpectedEnd { position: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    position: usize,
}

fn lex(source: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let token = match c {
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '*' => Token::Star,
                    '/' => Token::Slash,
                    '^' => Token::Caret,
                    '(' => Token::LParen,
                    _ => Token::RParen,
                };
                tokens.push(Spanned { token, position: i });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::BadNumber { position: start })?;
                tokens.push(Spanned {
                    token: Token::Number(value),
                    position: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Spanned {
                    token: Token::Ident(source[start..i].to_string()),
                    position: start,
                });
            }
            other => {
                return Err(ParseError::Lexical {
                    ch: other,
                    position: i,
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    cursor: usize,
    alphabet: &'a Alphabet,
    source_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.cursor)
    }

    fn advance(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn end_position(&self) -> usize {
        self.source_len
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(spanned) = self.peek() {
            let op = match spanned.token {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(spanned) = self.peek() {
            let op = match spanned.token {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(spanned) = self.peek() {
            if spanned.token == Token::Minus {
                self.advance();
                let inner = self.unary()?;
                return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(spanned) = self.peek() {
            if spanned.token == Token::Caret {
                let caret_pos = spanned.position;
                self.advance();
                let exponent = self.unary()?;
                let value =
                    fold_exponent(&exponent).map_err(|detail| ParseError::NonConstantExponent {
                        position: caret_pos,
                        detail,
                    })?;
                return Ok(Expr::Pow(Box::new(base), value));
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let spanned = self.advance().ok_or(ParseError::UnexpectedEnd {
            position: self.end_position(),
        })?;
        match spanned.token {
            Token::Number(v) => Ok(Expr::Const(v)),
            Token::Ident(name) => {
                if let Some(spanned_next) = self.peek() {
                    if spanned_next.token == Token::LParen {
                        let func = match name.as_str() {
                            "sin" => Some(UnaryOp::Sin),
                            "cos" => Some(UnaryOp::Cos),
                            "exp" => Some(UnaryOp::Exp),
                            "sqrt" => Some(UnaryOp::Sqrt),
                            _ => None,
                        };
                        if let Some(op) = func {
                            let open = self.advance().expect("peeked");
                            let arg = self.expr()?;
                            self.expect_rparen(open.position)?;
                            return Ok(Expr::Unary(op, Box::new(arg)));
                        }
                    }
                }
                self.resolve_name(name, spanned.position)
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(spanned.position)?;
                Ok(inner)
            }
            other => Err(ParseError::UnexpectedToken {
                found: token_text(&other),
                position: spanned.position,
            }),
        }
    }

    fn resolve_name(&self, name: String, position: usize) -> Result<Expr, ParseError> {
        if self.alphabet.is_variable(&name) {
            Ok(Expr::Var(name))
        } else if self.alphabet.is_parameter(&name) {
            Ok(Expr::Param(name))
        } else {
            Err(ParseError::UnknownIdentifier { name, position })
        }
    }

    fn expect_rparen(&mut self, open_position: usize) -> Result<(), ParseError> {
        match self.advance() {
            Some(Spanned {
                token: Token::RParen,
                ..
            }) => Ok(()),
            _ => Err(ParseError::UnbalancedParens {
                position: open_position,
            }),
        }
    }
}

fn token_text(t: &Token) -> String {
    match t {
        Token::Number(v) => v.to_string(),
        Token::Ident(s) => s.clone(),
        Token::Plus => "+".into(),
        Token::Minus => "-".into(),
        Token::Star => "*".into(),
        Token::Slash => "/".into(),
        Token::Caret => "^".into(),
        Token::LParen => "(".into(),
        Token::RParen => ")".into(),
    }
}

fn fold_exponent(e: &Expr) -> Result<f64, String> {
    let free = e.free_names();
    if !free.is_empty() {
        let names: Vec<String> = free.into_iter().collect();
        return Err(format!("references {}", names.join(", ")));
    }
    match e.eval(&Bindings::new()) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("evaluates to non-finite value {v}")),
        Err(err) => Err(err.to_string()),
    }
}

/// Parses `source` against the declared alphabet. Whitespace is
/// insignificant; see the module docs for precedence and associativity.
pub fn parse(source: &str, alphabet: &Alphabet) -> Result<Expr, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        alphabet,
        source_len: source.len(),
    };
    let expr = parser.expr()?;
    if let Some(extra) = parser.peek() {
        if extra.token == Token::RParen {
            return Err(ParseError::UnbalancedParens {
                position: extra.position,
            });
        }
        return Err(ParseError::UnexpectedToken {
            found: token_text(&extra.token),
            position: extra.position,
        });
    }
    Ok(expr)
}
