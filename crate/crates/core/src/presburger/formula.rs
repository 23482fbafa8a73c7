//! Formula AST over indexed variable slots, and the text DSL.
//!
//! Slots `0..free` are the free variables; every quantifier owns one further
//! slot, numbered in textual order, so an inner quantifier always has a larger
//! slot than the quantifiers around it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, BigRational, Integer, One, Signed};

use crate::error::{Error, Result};
use crate::parse::{lex, LinExpr, Parser, Tok, PARAM};
use crate::qpoly::Poly;

const KEYWORDS: [&str; 7] = ["exists", "forall", "and", "or", "not", "true", "false"];

/// `Σ coeffs[i]·v_i ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub coeffs: Vec<Poly>,
    pub rhs: Poly,
}

impl Atom {
    /// The integer complement `Σ -coeffs[i]·v_i ≤ -rhs - 1`.
    pub fn negate(&self) -> Atom {
        Atom { coeffs: self.coeffs.iter().map(|c| -c).collect(), rhs: &(-&self.rhs) - &Poly::one() }
    }

    pub fn has_constant_normal(&self) -> bool {
        self.coeffs.iter().all(Poly::is_constant)
    }

    fn mentions(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quant {
    pub var: usize,
    /// Explicit range `var ≤ e`, stored as an atom whose `var` coefficient is a
    /// positive integer.
    pub bound: Option<Atom>,
    pub body: Box<Formula>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Quant),
    ForAll(Quant),
}

impl Formula {
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom(_) => true,
            Formula::And(v) | Formula::Or(v) => v.iter().all(Formula::is_quantifier_free),
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::Exists(_) | Formula::ForAll(_) => false,
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Const(_) => {}
                Formula::Atom(a) => out.push(a),
                Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| go(g, out)),
                Formula::Not(g) => go(g, out),
                Formula::Exists(q) | Formula::ForAll(q) => {
                    if let Some(b) = &q.bound {
                        out.push(b);
                    }
                    go(&q.body, out)
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Negation normal form; atoms absorb negation.
    pub fn nnf(&self) -> Formula {
        self.push_not(false)
    }

    fn push_not(&self, neg: bool) -> Formula {
        match (self, neg) {
            (Formula::Const(b), _) => Formula::Const(*b != neg),
            (Formula::Atom(a), false) => Formula::Atom(a.clone()),
            (Formula::Atom(a), true) => Formula::Atom(a.negate()),
            (Formula::Not(f), _) => f.push_not(!neg),
            (Formula::And(v), false) | (Formula::Or(v), true) => Formula::And(v.iter().map(|f| f.push_not(neg)).collect()),
            (Formula::Or(v), false) | (Formula::And(v), true) => Formula::Or(v.iter().map(|f| f.push_not(neg)).collect()),
            (Formula::Exists(q), false) | (Formula::ForAll(q), true) => Formula::Exists(q.map_body(|b| b.push_not(neg))),
            (Formula::ForAll(q), false) | (Formula::Exists(q), true) => Formula::ForAll(q.map_body(|b| b.push_not(neg))),
        }
    }
}

impl Quant {
    fn map_body(&self, f: impl FnOnce(&Formula) -> Formula) -> Quant {
        Quant { var: self.var, bound: self.bound.clone(), body: Box::new(f(&self.body)) }
    }
}

/// `S_t = {x ∈ N^free : formula(x, t)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub formula: Formula,
    /// One name per slot.
    pub names: Vec<String>,
    pub free: usize,
}

impl Family {
    pub fn new(formula: Formula, names: Vec<String>, free: usize) -> Result<Self> {
        let fam = Family { formula, names, free };
        fam.validate()?;
        Ok(fam)
    }

    pub fn dim(&self) -> usize {
        self.free
    }

    pub fn slots(&self) -> usize {
        self.names.len()
    }

    pub fn free_names(&self) -> &[String] {
        &self.names[..self.free]
    }

    fn validate(&self) -> Result<()> {
        let n = self.names.len();
        if self.free > n {
            return Err(Error::Invalid("more free variables than slots".into()));
        }
        let mut bound = BTreeSet::new();
        let mut scope: Vec<bool> = (0..n).map(|i| i < self.free).collect();
        self.check(&self.formula, &mut scope, &mut bound)?;
        if bound.len() != n - self.free {
            return Err(Error::Invalid("some quantifier slot is never bound".into()));
        }
        Ok(())
    }

    fn check(&self, f: &Formula, scope: &mut Vec<bool>, bound: &mut BTreeSet<usize>) -> Result<()> {
        let atom_ok = |a: &Atom, scope: &[bool]| -> Result<()> {
            if a.coeffs.len() != self.names.len() {
                return Err(Error::Dimension(format!("atom has {} coefficients, expected {}", a.coeffs.len(), self.names.len())));
            }
            if !a.coeffs.iter().chain([&a.rhs]).all(Poly::has_integer_coeffs) {
                return Err(Error::NotInteger("atom coefficients must be integer polynomials".into()));
            }
            match a.mentions().find(|&i| !scope[i]) {
                Some(i) => Err(Error::Invalid(format!("{} used outside its quantifier", self.names[i]))),
                None => Ok(()),
            }
        };
        match f {
            Formula::Const(_) => Ok(()),
            Formula::Atom(a) => atom_ok(a, scope),
            Formula::And(v) | Formula::Or(v) => v.iter().try_for_each(|g| self.check(g, scope, bound)),
            Formula::Not(g) => self.check(g, scope, bound),
            Formula::Exists(q) | Formula::ForAll(q) => {
                if q.var < self.free || q.var >= self.names.len() || !bound.insert(q.var) {
                    return Err(Error::Invalid(format!("slot {} cannot be quantified here", q.var)));
                }
                scope[q.var] = true;
                if let Some(b) = &q.bound {
                    atom_ok(b, scope)?;
                    let c = b.coeffs[q.var].constant_value().filter(Signed::is_positive);
                    if c.is_none() || b.mentions().any(|i| i > q.var) {
                        return Err(Error::Invalid(format!("malformed bound on {}", self.names[q.var])));
                    }
                }
                let r = self.check(&q.body, scope, bound);
                scope[q.var] = false;
                r
            }
        }
    }

    /// Parses the DSL, with an optional `vars: x, y` line fixing the free
    /// variable order; `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self> {
        let mut declared: Option<Vec<String>> = None;
        let mut body = String::new();
        for line in src.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some(rest) = line.strip_prefix("vars:") {
                if declared.is_some() {
                    return Err(Error::Parse("duplicate vars line".into()));
                }
                declared = Some(rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
            } else {
                body.push_str(line);
                body.push(' ');
            }
        }
        let toks: Vec<Tok> = lex(&body)?
            .into_iter()
            .map(|t| match t {
                Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => Tok::Kw(s),
                t => t,
            })
            .collect();
        if toks.is_empty() {
            return Err(Error::Parse("empty formula".into()));
        }
        let mut p = Parser::new(&toks);
        let pf = or(&mut p)?;
        if !p.at_end() {
            return Err(Error::Parse(format!("unexpected {:?}", p.peek())));
        }
        resolve(&pf, declared)
    }

    fn atom_text(&self, a: &Atom) -> String {
        let lhs = lin_text(&self.names, &a.coeffs, &Poly::zero());
        format!("{} <= {}", if lhs.is_empty() { "0".into() } else { lhs }, a.rhs)
    }

    fn text(&self, f: &Formula, out: &mut String) {
        let sub = |g: &Formula, out: &mut String| {
            let simple = matches!(g, Formula::Atom(_) | Formula::Const(_));
            if !simple {
                out.push('(');
            }
            self.text(g, out);
            if !simple {
                out.push(')');
            }
        };
        match f {
            Formula::Const(b) => out.push_str(if *b { "true" } else { "false" }),
            Formula::Atom(a) => out.push_str(&self.atom_text(a)),
            Formula::And(v) | Formula::Or(v) => {
                if v.is_empty() {
                    out.push_str(if matches!(f, Formula::And(_)) { "true" } else { "false" });
                }
                let sep = if matches!(f, Formula::And(_)) { " and " } else { " or " };
                for (i, g) in v.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    sub(g, out);
                }
            }
            Formula::Not(g) => {
                out.push_str("not ");
                sub(g, out);
            }
            Formula::Exists(q) | Formula::ForAll(q) => {
                out.push_str(if matches!(f, Formula::Exists(_)) { "exists " } else { "forall " });
                out.push_str(&self.names[q.var]);
                if let Some(b) = &q.bound {
                    let c = b.coeffs[q.var].clone();
                    let mut others = b.coeffs.clone();
                    others[q.var] = Poly::zero();
                    let e = lin_text(&self.names, &others.iter().map(|p| -p).collect::<Vec<_>>(), &b.rhs);
                    if c == Poly::one() {
                        out.push_str(&format!(" <= {e}"));
                    } else {
                        out.push_str(&format!(" <= ({e})/{c}"));
                    }
                }
                out.push_str(": ");
                self.text(&q.body, out);
            }
        }
    }
}

fn lin_text(names: &[String], coeffs: &[Poly], constant: &Poly) -> String {
    let mut out = String::new();
    for (name, c) in names.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let piece = match c.constant_value() {
            Some(v) => {
                let neg = v.is_negative();
                let a = v.abs();
                let body = if a.is_one() { name.clone() } else { format!("{a}*{name}") };
                (neg, body)
            }
            None => (false, format!("({c})*{name}")),
        };
        match (out.is_empty(), piece.0) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        out.push_str(&piece.1);
    }
    if !constant.is_zero() || out.is_empty() {
        if out.is_empty() {
            out = constant.to_string();
        } else {
            out.push_str(&format!(" + ({constant})"));
        }
    }
    out
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.text(&self.formula, &mut s);
        writeln!(f, "vars: {}", self.free_names().join(", "))?;
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug)]
enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

/// Name-based parse tree.
#[derive(Debug)]
enum Pf {
    Const(bool),
    Rel(LinExpr, Rel, LinExpr),
    And(Vec<Pf>),
    Or(Vec<Pf>),
    Not(Box<Pf>),
    Quant { exists: bool, name: String, bound: Option<LinExpr>, body: Box<Pf> },
}

fn kw(s: &str) -> Tok {
    Tok::Kw(s.into())
}

fn or(p: &mut Parser) -> Result<Pf> {
    let mut v = vec![and(p)?];
    while p.eat(&kw("or")) {
        v.push(and(p)?);
    }
    Ok(if v.len() == 1 { v.pop().expect("one") } else { Pf::Or(v) })
}

fn and(p: &mut Parser) -> Result<Pf> {
    let mut v = vec![unary(p)?];
    while p.eat(&kw("and")) {
        v.push(unary(p)?);
    }
    Ok(if v.len() == 1 { v.pop().expect("one") } else { Pf::And(v) })
}

fn unary(p: &mut Parser) -> Result<Pf> {
    if p.eat(&kw("not")) {
        return Ok(Pf::Not(Box::new(unary(p)?)));
    }
    let exists = match p.peek() {
        Some(Tok::Kw(k)) if k == "exists" => true,
        Some(Tok::Kw(k)) if k == "forall" => false,
        _ => return primary(p),
    };
    p.bump();
    let name = match p.bump() {
        Some(Tok::Ident(n)) if n != PARAM => n,
        other => return Err(Error::Parse(format!("expected a quantified variable, found {other:?}"))),
    };
    let bound = if p.eat(&Tok::Le) { Some(p.expr()?) } else { None };
    p.eat(&Tok::Colon);
    let body = or(p)?;
    Ok(Pf::Quant { exists, name, bound, body: Box::new(body) })
}

fn rel(t: Option<&Tok>) -> Option<Rel> {
    Some(match t? {
        Tok::Le => Rel::Le,
        Tok::Lt => Rel::Lt,
        Tok::Ge => Rel::Ge,
        Tok::Gt => Rel::Gt,
        Tok::Eq => Rel::Eq,
        Tok::Ne => Rel::Ne,
        _ => return None,
    })
}

fn chain(p: &mut Parser) -> Result<Pf> {
    let mut lhs = p.expr()?;
    let mut parts = Vec::new();
    while let Some(r) = rel(p.peek()) {
        p.bump();
        let rhs = p.expr()?;
        parts.push(Pf::Rel(lhs, r, rhs.clone()));
        lhs = rhs;
    }
    match parts.len() {
        0 => Err(Error::Parse(format!("expected a relation, found {:?}", p.peek()))),
        1 => Ok(parts.pop().expect("one")),
        _ => Ok(Pf::And(parts)),
    }
}

fn primary(p: &mut Parser) -> Result<Pf> {
    if p.eat(&kw("true")) {
        return Ok(Pf::Const(true));
    }
    if p.eat(&kw("false")) {
        return Ok(Pf::Const(false));
    }
    let save = p.pos;
    match chain(p) {
        Ok(f) => Ok(f),
        Err(e) => {
            p.pos = save;
            if !p.eat(&Tok::LParen) {
                return Err(e);
            }
            let f = or(p)?;
            p.expect(&Tok::RParen)?;
            Ok(f)
        }
    }
}

/// First-appearance order of free names, plus every quantified name in
/// textual order.
fn collect(f: &Pf, scope: &mut Vec<String>, free: &mut Vec<String>, quantified: &mut Vec<String>) -> Result<()> {
    let see = |e: &LinExpr, scope: &[String], free: &mut Vec<String>| {
        for name in e.terms.keys() {
            if !scope.contains(name) && !free.contains(name) {
                free.push(name.clone());
            }
        }
    };
    match f {
        Pf::Const(_) => {}
        Pf::Rel(l, _, r) => {
            see(l, scope, free);
            see(r, scope, free);
        }
        Pf::And(v) | Pf::Or(v) => {
            for g in v {
                collect(g, scope, free, quantified)?;
            }
        }
        Pf::Not(g) => collect(g, scope, free, quantified)?,
        Pf::Quant { name, bound, body, .. } => {
            if quantified.contains(name) {
                return Err(Error::Parse(format!("{name} is quantified twice")));
            }
            if let Some(b) = bound {
                if b.terms.contains_key(name) {
                    return Err(Error::Parse(format!("bound of {name} mentions {name}")));
                }
                see(b, scope, free);
            }
            quantified.push(name.clone());
            scope.push(name.clone());
            collect(body, scope, free, quantified)?;
            scope.pop();
        }
    }
    Ok(())
}

fn resolve(pf: &Pf, declared: Option<Vec<String>>) -> Result<Family> {
    let (mut seen, mut quantified) = (Vec::new(), Vec::new());
    collect(pf, &mut Vec::new(), &mut seen, &mut quantified)?;
    let free = match declared {
        Some(d) => {
            if let Some(x) = seen.iter().find(|x| !d.contains(x)) {
                return Err(Error::Parse(format!("{x} is not declared in the vars line")));
            }
            let uniq: BTreeSet<&String> = d.iter().collect();
            if uniq.len() != d.len() || d.iter().any(|x| x == PARAM) {
                return Err(Error::Parse("vars line repeats a name or names t".into()));
            }
            d
        }
        None => seen,
    };
    if let Some(x) = quantified.iter().find(|x| free.contains(x)) {
        return Err(Error::Parse(format!("{x} is both free and quantified")));
    }
    let names: Vec<String> = free.iter().chain(&quantified).cloned().collect();
    let slot: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let formula = build(pf, &slot, names.len())?;
    Family::new(formula, names, free.len())
}

/// `e ≤ 0` with integer coefficients, then shifted by `shift`.
fn le_zero(e: &LinExpr, slot: &BTreeMap<&str, usize>, n: usize, shift: i64) -> Atom {
    let den = e.terms.values().chain([&e.constant]).fold(BigInt::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
    let s = BigRational::from_integer(den);
    let mut coeffs = vec![Poly::zero(); n];
    for (name, c) in &e.terms {
        coeffs[slot[name.as_str()]] = c.scale(&s);
    }
    let rhs = &(-&e.constant.scale(&s)) + &Poly::from_int(shift);
    Atom { coeffs, rhs }
}

fn build(pf: &Pf, slot: &BTreeMap<&str, usize>, n: usize) -> Result<Formula> {
    Ok(match pf {
        Pf::Const(b) => Formula::Const(*b),
        Pf::Rel(l, r, rr) => {
            let d = l.sub(rr);
            let e = d.neg();
            let atom = |e: &LinExpr, shift| Formula::Atom(le_zero(e, slot, n, shift));
            match r {
                Rel::Le => atom(&d, 0),
                Rel::Lt => atom(&d, -1),
                Rel::Ge => atom(&e, 0),
                Rel::Gt => atom(&e, -1),
                Rel::Eq => Formula::And(vec![atom(&d, 0), atom(&e, 0)]),
                Rel::Ne => Formula::Or(vec![atom(&d, -1), atom(&e, -1)]),
            }
        }
        Pf::And(v) => Formula::And(v.iter().map(|g| build(g, slot, n)).collect::<Result<_>>()?),
        Pf::Or(v) => Formula::Or(v.iter().map(|g| build(g, slot, n)).collect::<Result<_>>()?),
        Pf::Not(g) => Formula::Not(Box::new(build(g, slot, n)?)),
        Pf::Quant { exists, name, bound, body } => {
            let var = slot[name.as_str()];
            let bound = bound.as_ref().map(|b| le_zero(&LinExpr::var(name).sub(b), slot, n, 0));
            let q = Quant { var, bound, body: Box::new(build(body, slot, n)?) };
            if *exists {
                Formula::Exists(q)
            } else {
                Formula::ForAll(q)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX_PA: &str = "exists y : 2*x + 2*y + 3 = 5*t and t < x and x <= y";

    #[test]
    fn parses_the_odd_family() {
        let f = Family::parse(EX_PA).unwrap();
        assert_eq!(f.names, vec!["x", "y"]);
        assert_eq!(f.free, 1);
        let Formula::Exists(q) = &f.formula else { panic!("{:?}", f.formula) };
        assert_eq!(q.var, 1);
        let Formula::And(parts) = &*q.body else { panic!() };
        assert_eq!(parts.len(), 3);
        // t < x becomes -x <= -t - 1
        assert_eq!(parts[1], Formula::Atom(Atom { coeffs: vec![Poly::from_int(-1), Poly::zero()], rhs: Poly::from_ints(&[-1, -1]) }));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            EX_PA,
            "vars: a, b\nnot (a <= 3 or b != 2*t) and forall z <= a + t: z + a >= 1",
            "true",
            "exists u <= (t + 1)/2 : 2*u = t",
            "x <= t^2 - 1 # comment",
        ] {
            let f = Family::parse(src).unwrap();
            let g = Family::parse(&f.to_string()).unwrap();
            assert_eq!(f, g, "{src} -> {f}");
        }
    }

    #[test]
    fn parenthesized_atoms_and_groups() {
        let f = Family::parse("(x + 1) <= 3 and (x >= 1 or (x <= 0))").unwrap();
        assert_eq!(f.free, 1);
        assert!(f.formula.is_quantifier_free());
    }

    #[test]
    fn rational_coefficients_are_cleared() {
        let f = Family::parse("x/2 <= t").unwrap();
        assert_eq!(f.formula, Formula::Atom(Atom { coeffs: vec![Poly::one()], rhs: Poly::from_ints(&[0, 2]) }));
    }

    #[test]
    fn scoping_errors() {
        assert!(Family::parse("exists y: y <= 1 and exists y: y <= 2").is_err());
        assert!(Family::parse("(exists y: y <= 1) and y <= 2").is_err());
        assert!(Family::parse("vars: x\nx + z <= 1").is_err());
        assert!(Family::parse("exists t: t <= 1").is_err());
        assert!(Family::parse("x * y <= 1").is_err());
        assert!(Family::parse("x <= 1 and").is_err());
    }

    #[test]
    fn nnf_pushes_through_quantifiers() {
        let f = Family::parse("not exists y: y <= x").unwrap();
        let Formula::ForAll(q) = f.formula.nnf() else { panic!() };
        assert_eq!(*q.body, Formula::Atom(Atom { coeffs: vec![Poly::one(), Poly::from_int(-1)], rhs: Poly::from_int(-1) }));
    }
}
