//! Text syntax for super-symbols.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' integer)?
//! atom    := integer | 'I' | 'sqrt2' | 'hbar' | x<i> | p<i> | xi<i> | '(' sum ')'
//! ```
//!
//! Indices are 1-based. Division is allowed by coefficient-only expressions.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ring::{Field, Scalar};
use crate::symalg::{MetricSignature, SuperSymbol};

const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("variable `{name}` at {pos} exceeds dimension {n}")]
    Dimension { pos: usize, name: String, n: usize },
    #[error("division by zero or by a non-constant at {pos}")]
    BadDivision { pos: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    P(usize),
    Xi(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    I,
    Sqrt2,
    Hbar,
    /// A variable with its 1-based index and source position.
    Var(Var, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Divisor position kept for error reporting.
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push((Tok::Int(s.parse().expect("digits")), pos));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().map(|(_, c)| c).collect()), pos));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), pos));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos, msg: format!("unexpected character `{c}`") });
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
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.to_string() })
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                self.at += 1;
                let pos = self.pos();
                e = Expr::Div(Box::new(e), Box::new(self.unary()?), pos);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek() {
            Some(Tok::Int(k)) => {
                let k = u32::try_from(k.clone()).ok().filter(|k| *k <= MAX_EXPONENT);
                match k {
                    Some(k) => {
                        self.at += 1;
                        Ok(Expr::Pow(Box::new(base), k))
                    }
                    None => self.err(&format!("exponent must be at most {MAX_EXPONENT}")),
                }
            }
            _ => self.err("expected a non-negative integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.at += 1;
                Ok(Expr::Int(k))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                ident(&name, pos)
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Op(c)) => self.err(&format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn ident(name: &str, pos: usize) -> Result<Expr, ParseError> {
    match name {
        "I" => return Ok(Expr::I),
        "sqrt2" => return Ok(Expr::Sqrt2),
        "hbar" => return Ok(Expr::Hbar),
        _ => {}
    }
    let unknown = || ParseError::UnknownVariable { pos, name: name.to_string() };
    let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?;
    let (head, digits) = name.split_at(split);
    let idx: usize = digits.parse().map_err(|_| unknown())?;
    if idx == 0 || digits.starts_with('0') {
        return Err(unknown());
    }
    let v = match head {
        "x" => Var::X(idx),
        "p" => Var::P(idx),
        "xi" => Var::Xi(idx),
        _ => return Err(unknown()),
    };
    Ok(Expr::Var(v, pos))
}

/// Parses text into an expression tree without checking dimensions.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len() };
    let e = p.sum()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Evaluates in dimension `sig.dim()` with `hbar` substituted.
    pub fn eval<F: Field>(&self, sig: MetricSignature, hbar: &F) -> Result<SuperSymbol<F>, ParseError> {
        let c = |s: Scalar| Ok(SuperSymbol::constant(sig, F::from_scalar(&s)));
        match self {
            Expr::Int(k) => c(Scalar::from_rational(num_rational::BigRational::from_integer(k.clone()))),
            Expr::I => c(Scalar::i()),
            Expr::Sqrt2 => c(Scalar::sqrt2()),
            Expr::Hbar => Ok(SuperSymbol::constant(sig, hbar.clone())),
            Expr::Var(v, pos) => {
                let (name, i) = match v {
                    Var::X(i) => ("x", *i),
                    Var::P(i) => ("p", *i),
                    Var::Xi(i) => ("xi", *i),
                };
                if i > sig.dim() {
                    return Err(ParseError::Dimension { pos: *pos, name: format!("{name}{i}"), n: sig.dim() });
                }
                Ok(match v {
                    Var::X(_) => SuperSymbol::x(sig, i - 1),
                    Var::P(_) => SuperSymbol::p(sig, i - 1),
                    Var::Xi(_) => SuperSymbol::xi(sig, i - 1),
                })
            }
            Expr::Neg(a) => Ok(a.eval(sig, hbar)?.neg()),
            Expr::Add(a, b) => Ok(a.eval(sig, hbar)?.add(&b.eval(sig, hbar)?)),
            Expr::Sub(a, b) => Ok(a.eval(sig, hbar)?.sub(&b.eval(sig, hbar)?)),
            Expr::Mul(a, b) => Ok(a.eval(sig, hbar)?.mul(&b.eval(sig, hbar)?).expect("same signature")),
            Expr::Div(a, b, pos) => {
                let d = b.eval(sig, hbar)?;
                let bad = ParseError::BadDivision { pos: *pos };
                let inv = match (d.n_terms(), d.terms().next()) {
                    (0, _) => return Err(bad),
                    (1, Some((m, v))) if m.p_degree() + m.x_degree() + m.xi_degree() == 0 => {
                        v.inv().map_err(|_| bad)?
                    }
                    _ => return Err(bad),
                };
                Ok(a.eval(sig, hbar)?.scale(&inv))
            }
            Expr::Pow(a, k) => Ok(a.eval(sig, hbar)?.pow(*k)),
        }
    }
}

/// Parses a super-symbol; repeated odd variables multiply to zero.
pub fn parse_symbol<F: Field>(text: &str, sig: MetricSignature, hbar: &F) -> Result<SuperSymbol<F>, ParseError> {
    parse_expr(text)?.eval(sig, hbar)
}

impl fmt::Display for Expr {
    /// Fully parenthesized rendering; parses back to an equal tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(k) => write!(f, "{k}"),
            Expr::I => f.write_str("I"),
            Expr::Sqrt2 => f.write_str("sqrt2"),
            Expr::Hbar => f.write_str("hbar"),
            Expr::Var(Var::X(i), _) => write!(f, "x{i}"),
            Expr::Var(Var::P(i), _) => write!(f, "p{i}"),
            Expr::Var(Var::Xi(i), _) => write!(f, "xi{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b, _) => write!(f, "{a}/{b}"),
            Expr::Pow(a, k) => write!(f, "{a}^{k}"),
        }
    }
}
