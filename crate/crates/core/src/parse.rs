//! Shared lexer and polynomial/linear-form expression parser.
//!
//! Expressions are polynomials in the parameter `t` and linear in every other
//! identifier. The same machinery backs `Poly` strings, polyhedron
//! inequality lines and the Presburger formula DSL.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Zero};

use crate::error::{Error, Result};
use crate::qpoly::Poly;

pub const PARAM: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
    Colon,
    Comma,
    Pipe,
    /// Reserved word of the formula language.
    Kw(String),
}

pub(crate) fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().expect("digits")));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('=', Some('=')) => (Tok::Eq, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('^', _) => (Tok::Caret, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('|', _) => (Tok::Pipe, 1),
            _ => return Err(Error::Parse(format!("unexpected character {c:?}"))),
        };
        out.push(tok);
        i += len;
    }
    Ok(out)
}

/// `Σ coeff_v(t)·v + constant(t)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<String, Poly>,
    pub constant: Poly,
}

impl LinExpr {
    pub fn constant(p: Poly) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: p }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), Poly::one());
        LinExpr { terms, constant: Poly::zero() }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalize(mut self) -> Self {
        self.terms.retain(|_, p| !p.is_zero());
        self
    }

    pub fn add(&self, o: &LinExpr) -> LinExpr {
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            let e = terms.entry(k.clone()).or_insert_with(Poly::zero);
            *e = &*e + v;
        }
        LinExpr { terms, constant: &self.constant + &o.constant }.normalize()
    }

    pub fn neg(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn sub(&self, o: &LinExpr) -> LinExpr {
        self.add(&o.neg())
    }

    pub fn scale(&self, p: &Poly) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * p)).collect(),
            constant: &self.constant * p,
        }
        .normalize()
    }

    fn mul(&self, o: &LinExpr) -> Result<LinExpr> {
        match (self.is_constant(), o.is_constant()) {
            (true, _) => Ok(o.scale(&self.constant)),
            (_, true) => Ok(self.scale(&o.constant)),
            _ => Err(Error::Parse("product of two non-constant linear forms".into())),
        }
    }

    pub fn coeff(&self, var: &str) -> Poly {
        self.terms.get(var).cloned().unwrap_or_default()
    }
}

pub(crate) struct Parser<'a> {
    toks: &'a [Tok],
    pub(crate) pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [Tok]) -> Self {
        Parser { toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {t:?}, found {:?}", self.peek())))
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// expr := term (('+'|'-') term)*
    pub(crate) fn expr(&mut self) -> Result<LinExpr> {
        let mut acc = if self.eat(&Tok::Minus) {
            self.term()?.neg()
        } else {
            self.eat(&Tok::Plus);
            self.term()?
        };
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LinExpr> {
        let mut acc = self.power()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.power()?;
                acc = acc.mul(&rhs)?;
            } else if self.eat(&Tok::Slash) {
                let rhs = self.power()?;
                let c = rhs
                    .constant
                    .constant_value()
                    .filter(|c| rhs.is_constant() && !c.is_zero())
                    .ok_or_else(|| Error::Parse("division only by nonzero rational constants".into()))?;
                acc = acc.scale(&Poly::constant(BigRational::from_integer(1.into()) / c));
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen))
                && matches!(self.toks.get(self.pos.wrapping_sub(1)), Some(Tok::Num(_)))
            {
                // implicit product such as `2t` or `3(x+1)`
                let rhs = self.power()?;
                acc = acc.mul(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<LinExpr> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let k = match self.bump() {
                Some(Tok::Num(n)) => u32::try_from(n).map_err(|_| Error::Parse("exponent too large".into()))?,
                other => return Err(Error::Parse(format!("expected exponent, found {other:?}"))),
            };
            if !base.is_constant() {
                return Err(Error::Parse("only t-polynomials may be raised to a power".into()));
            }
            return Ok(LinExpr::constant(base.constant.pow(k)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<LinExpr> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(LinExpr::constant(Poly::constant(BigRational::from_integer(n)))),
            Some(Tok::Ident(name)) if name == PARAM => Ok(LinExpr::constant(Poly::t())),
            Some(Tok::Ident(name)) => Ok(LinExpr::var(&name)),
            Some(Tok::Minus) => Ok(self.power()?.neg()),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

pub fn parse_linexpr(src: &str) -> Result<LinExpr> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    let e = p.expr()?;
    if !p.at_end() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    Ok(e)
}

pub fn parse_poly(src: &str) -> Result<Poly> {
    let e = parse_linexpr(src)?;
    if !e.is_constant() {
        return Err(Error::Parse(format!("{src:?} mentions variables other than t")));
    }
    Ok(e.constant)
}
