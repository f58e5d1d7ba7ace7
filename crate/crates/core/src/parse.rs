//! Arithmetic expression parser shared by the variety and `W` grammars.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' ['-'] integer | '^' '(' ['-'] integer ')')?
//! atom  := integer | identifier | '(' expr ')'
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::Laurent;

/// A parse or validation error at a byte offset of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }

    pub(crate) fn shifted(mut self, by: usize) -> Self {
        self.offset += by;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(BigInt),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = src[start..i]
                .parse()
                .map_err(|_| ParseError::new(start, "bad integer"))?;
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError::new(i, format!("unexpected character '{}'", c)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = Expr { kind: ExprKind::Add(Box::new(lhs), Box::new(rhs)), pos };
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = Expr { kind: ExprKind::Sub(Box::new(lhs), Box::new(rhs)), pos };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = Expr { kind: ExprKind::Mul(Box::new(lhs), Box::new(rhs)), pos };
            } else if self.eat('/') {
                let rhs = self.unary()?;
                lhs = Expr { kind: ExprKind::Div(Box::new(lhs), Box::new(rhs)), pos };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), pos });
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let pos = self.pos();
        let n = match self.peek() {
            Some(Tok::Num(n)) => {
                let n: i64 = n
                    .try_into()
                    .map_err(|_| ParseError::new(pos, "exponent out of range"))?;
                self.at += 1;
                n
            }
            _ => return Err(ParseError::new(pos, "expected integer exponent")),
        };
        if paren && !self.eat(')') {
            return Err(ParseError::new(self.pos(), "expected ')'"));
        }
        Ok(if neg { -n } else { n })
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        let pos = self.pos();
        if self.eat('^') {
            let e = self.exponent()?;
            return Ok(Expr { kind: ExprKind::Pow(Box::new(base), e), pos });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(Expr { kind: ExprKind::Num(n), pos })
            }
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(Expr { kind: ExprKind::Var(s), pos })
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(ParseError::new(self.pos(), "expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Sym(c)) => Err(ParseError::new(pos, format!("unexpected '{}'", c))),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }
}

/// Parses a complete expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(ParseError::new(p.pos(), "unexpected trailing input"));
    }
    Ok(e)
}

impl Expr {
    /// Evaluates to a Laurent polynomial. `resolve` maps identifiers to
    /// variable indices. Division is allowed by nonzero constants only and
    /// negative powers by monomials only.
    pub fn to_laurent(
        &self,
        nvars: usize,
        resolve: &dyn Fn(&str) -> Option<usize>,
    ) -> Result<Laurent, ParseError> {
        Ok(match &self.kind {
            ExprKind::Num(n) => Laurent::constant(nvars, BigRational::from_integer(n.clone())),
            ExprKind::Var(name) => {
                let i = resolve(name)
                    .ok_or_else(|| ParseError::new(self.pos, format!("unknown variable '{}'", name)))?;
                Laurent::var(nvars, i, 1)
            }
            ExprKind::Add(a, b) => &a.to_laurent(nvars, resolve)? + &b.to_laurent(nvars, resolve)?,
            ExprKind::Sub(a, b) => &a.to_laurent(nvars, resolve)? - &b.to_laurent(nvars, resolve)?,
            ExprKind::Mul(a, b) => &a.to_laurent(nvars, resolve)? * &b.to_laurent(nvars, resolve)?,
            ExprKind::Neg(a) => -&a.to_laurent(nvars, resolve)?,
            ExprKind::Div(a, b) => {
                let num = a.to_laurent(nvars, resolve)?;
                let den = b.to_laurent(nvars, resolve)?;
                let inv = invert_monomial(&den)
                    .ok_or_else(|| ParseError::new(b.pos, "can only divide by a nonzero monomial"))?;
                &num * &inv
            }
            ExprKind::Pow(a, k) => {
                let base = a.to_laurent(nvars, resolve)?;
                if *k >= 0 {
                    base.pow(*k as u32)
                } else {
                    invert_monomial(&base)
                        .ok_or_else(|| ParseError::new(self.pos, "negative power of a non-monomial"))?
                        .pow(k.unsigned_abs() as u32)
                }
            }
        })
    }
}

pub(crate) fn invert_monomial(p: &Laurent) -> Option<Laurent> {
    let (e, c) = p.as_monomial()?;
    if c.is_zero() {
        return None;
    }
    Some(Laurent::monomial(e.iter().map(|x| -x).collect(), BigRational::one() / c))
}
