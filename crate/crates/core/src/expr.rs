//! Shared expression syntax for scalars, forms and rational functions.
//!
//! The same tokenizer and precedence rules serve two dialects: in form
//! expressions `^` is the wedge product (same precedence as `*`), in function
//! expressions `^` is an integer power binding tighter than products.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::scalar::{GaussianRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// byte offset into the input
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}", self.message, self.pos + 1)
    }
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Form,
    Function,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Imag,
    Ident(String, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// `*`, juxtaposition, and `^` in the form dialect
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, i64, usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = s[start..i].parse().expect("digits");
            out.push((Tok::Int(n), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(s[start..i].to_string()), start));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return err(start, format!("unexpected character '{}'", c)),
        };
        out.push((t, start));
        i += c.len_utf8();
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    dialect: Dialect,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.0.clone());
        self.at += 1;
        t
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Expr::Neg(Box::new(self.product()?))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen))
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Caret) if self.dialect == Dialect::Form => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    let p = self.pos();
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), p);
                }
                _ if self.starts_atom() => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.dialect == Dialect::Function {
            if let Some(Tok::Caret) = self.peek() {
                self.bump();
                let neg = if let Some(Tok::Minus) = self.peek() {
                    self.bump();
                    true
                } else {
                    false
                };
                let p = self.pos();
                match self.bump() {
                    Some(Tok::Int(n)) => {
                        let e: i64 = n.try_into().map_err(|_| ParseError { pos: p, message: "exponent too large".into() })?;
                        return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }, p));
                    }
                    _ => return err(p, "expected integer exponent"),
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let p = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::Ident(s)) if s == "i" => Ok(Expr::Imag),
            Some(Tok::Ident(s)) => Ok(Expr::Ident(s, p)),
            Some(Tok::LParen) => {
                let e = self.sum()?;
                let q = self.pos();
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => err(q, "expected ')'"),
                }
            }
            Some(t) => err(p, format!("unexpected token {}", tok_name(&t))),
            None => err(p, "unexpected end of input"),
        }
    }
}

fn tok_name(t: &Tok) -> &'static str {
    match t {
        Tok::Int(_) => "number",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "'+'",
        Tok::Minus => "'-'",
        Tok::Star => "'*'",
        Tok::Slash => "'/'",
        Tok::Caret => "'^'",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
    }
}

pub fn parse(s: &str, dialect: Dialect) -> Result<Expr, ParseError> {
    let toks = tokenize(s)?;
    let mut p = Parser { toks, at: 0, end: s.len(), dialect };
    if p.peek().is_none() {
        return err(0, "empty expression");
    }
    let e = p.sum()?;
    if p.at < p.toks.len() {
        let pos = p.pos();
        let t = p.toks[p.at].0.clone();
        return err(pos, format!("unexpected token {}", tok_name(&t)));
    }
    Ok(e)
}

/// Evaluation target for an expression tree; `Ctx` resolves identifiers.
pub trait Algebra: Sized + Clone {
    type Ctx;
    fn scalar(ctx: &Self::Ctx, c: GaussianRational) -> Self;
    fn ident(ctx: &Self::Ctx, name: &str, pos: usize) -> Result<Self, ParseError>;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError>;
    fn pow(&self, _e: i64, pos: usize) -> Result<Self, ParseError> {
        err(pos, "powers are not supported here")
    }
}

pub fn eval<A: Algebra>(e: &Expr, ctx: &A::Ctx) -> Result<A, ParseError> {
    Ok(match e {
        Expr::Int(n) => A::scalar(ctx, GaussianRational::real(Rational::from_integer(n.clone()))),
        Expr::Imag => A::scalar(ctx, GaussianRational::i()),
        Expr::Ident(s, p) => A::ident(ctx, s, *p)?,
        Expr::Neg(a) => eval::<A>(a, ctx)?.neg(),
        Expr::Add(a, b) => eval::<A>(a, ctx)?.add(&eval::<A>(b, ctx)?),
        Expr::Sub(a, b) => eval::<A>(a, ctx)?.add(&eval::<A>(b, ctx)?.neg()),
        Expr::Mul(a, b) => eval::<A>(a, ctx)?.mul(&eval::<A>(b, ctx)?),
        Expr::Div(a, b, p) => eval::<A>(a, ctx)?.div(&eval::<A>(b, ctx)?, *p)?,
        Expr::Pow(a, k, p) => eval::<A>(a, ctx)?.pow(*k, *p)?,
    })
}

impl Algebra for GaussianRational {
    type Ctx = ();
    fn scalar(_: &(), c: GaussianRational) -> Self {
        c
    }
    fn ident(_: &(), name: &str, pos: usize) -> Result<Self, ParseError> {
        err(pos, format!("unknown symbol '{}'", name))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError> {
        match o.inv() {
            Some(inv) => Ok(self * &inv),
            None => err(pos, "division by zero"),
        }
    }
    fn pow(&self, e: i64, pos: usize) -> Result<Self, ParseError> {
        let base = if e < 0 {
            match self.inv() {
                Some(v) => v,
                None => return err(pos, "division by zero"),
            }
        } else {
            self.clone()
        };
        Ok(base.pow(e.unsigned_abs() as u32))
    }
}

pub fn parse_scalar(s: &str) -> Result<GaussianRational, ParseError> {
    eval(&parse(s, Dialect::Function)?, &())
}

/// Integer-or-fraction check used by callers that want rational input.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let c = parse_scalar(s)?;
    if !c.im.is_zero() {
        return err(0, "expected a real number");
    }
    Ok(c.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("1/2 + 3/4 i").unwrap(), GaussianRational::new(rat(1, 2), rat(3, 4)));
        assert_eq!(parse_scalar("-i").unwrap(), -GaussianRational::i());
        assert_eq!(parse_scalar("(1+i)^2").unwrap(), GaussianRational::new(rat(0, 1), rat(2, 1)));
        assert_eq!(parse_scalar("2 i/4").unwrap(), GaussianRational::imag(rat(1, 2)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("e1^^e2", Dialect::Form).unwrap_err();
        assert_eq!(e.pos, 3);
        assert!(parse("(1 + 2", Dialect::Function).is_err());
        assert!(parse("", Dialect::Function).is_err());
        assert_eq!(parse("1 $ 2", Dialect::Function).unwrap_err().pos, 2);
    }
}
