//! Bounded evaluation, containment boxes and enumeration at a fixed `t`.

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::formula::{Atom, Family, Formula};
use crate::error::{Error, Result};
use crate::linalg;
use crate::parampoly::fixed::Polyhedron;
use crate::ratgen::LatticeBox;

/// Disjunctive normal forms larger than this are not attempted.
const DNF_CAP: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    True,
    False,
    /// An unbounded quantifier was cut off at the search bound.
    BoundHit,
}

#[derive(Clone, Debug)]
struct NAtom {
    c: Vec<(usize, i128)>,
    b: i128,
}

impl NAtom {
    fn compile(a: &Atom, t: u64) -> Result<NAtom> {
        let big = |p: &crate::qpoly::Poly| p.eval_integer(t)?.to_i128().ok_or(Error::Overflow);
        let mut c = Vec::new();
        for (i, p) in a.coeffs.iter().enumerate() {
            let v = big(p)?;
            if v != 0 {
                c.push((i, v));
            }
        }
        Ok(NAtom { c, b: big(&a.rhs)? })
    }

    fn negate(&self) -> NAtom {
        NAtom { c: self.c.iter().map(|&(i, v)| (i, -v)).collect(), b: -self.b - 1 }
    }

    fn holds(&self, env: &[i128]) -> bool {
        self.c.iter().map(|&(i, v)| v * env[i]).sum::<i128>() <= self.b
    }

    /// Upper bound on slot `var` implied by this atom once every slot below
    /// `var` is assigned and the slots above are nonnegative.
    fn bound_on(&self, var: usize) -> Option<(i128, Vec<(usize, i128)>, i128)> {
        let cy = self.c.iter().find(|&&(i, _)| i == var)?.1;
        if cy <= 0 || self.c.iter().any(|&(i, v)| i > var && v < 0) {
            return None;
        }
        Some((cy, self.c.iter().filter(|&&(i, _)| i < var).copied().collect(), self.b))
    }
}

type Derived = (i128, Vec<(usize, i128)>, i128);

#[derive(Clone, Debug)]
enum Nf {
    Const(bool),
    Atom(NAtom),
    And(Vec<Nf>),
    Or(Vec<Nf>),
    Not(Box<Nf>),
    Quant { exists: bool, var: usize, bounds: Vec<Derived>, body: Box<Nf> },
}

/// Atoms implied by `f` (by `¬f` when `neg`), found along conjunctions and
/// existential bodies.
fn spine(f: &Formula, neg: bool, t: u64, out: &mut Vec<NAtom>) -> Result<()> {
    match (f, neg) {
        (Formula::Atom(a), _) => {
            let n = NAtom::compile(a, t)?;
            out.push(if neg { n.negate() } else { n });
        }
        (Formula::And(v), false) | (Formula::Or(v), true) => {
            for g in v {
                spine(g, neg, t, out)?;
            }
        }
        (Formula::Not(g), _) => spine(g, !neg, t, out)?,
        (Formula::Exists(q), false) | (Formula::ForAll(q), true) => {
            if let Some(b) = &q.bound {
                out.push(NAtom::compile(b, t)?);
            }
            spine(&q.body, neg, t, out)?;
        }
        _ => {}
    }
    Ok(())
}

fn compile(f: &Formula, t: u64) -> Result<Nf> {
    Ok(match f {
        Formula::Const(b) => Nf::Const(*b),
        Formula::Atom(a) => Nf::Atom(NAtom::compile(a, t)?),
        Formula::And(v) => Nf::And(v.iter().map(|g| compile(g, t)).collect::<Result<_>>()?),
        Formula::Or(v) => Nf::Or(v.iter().map(|g| compile(g, t)).collect::<Result<_>>()?),
        Formula::Not(g) => Nf::Not(Box::new(compile(g, t)?)),
        Formula::Exists(q) | Formula::ForAll(q) => {
            let exists = matches!(f, Formula::Exists(_));
            let mut atoms = Vec::new();
            spine(&q.body, !exists, t, &mut atoms)?;
            if let Some(b) = &q.bound {
                atoms.push(NAtom::compile(b, t)?);
            }
            let bounds = atoms.iter().filter_map(|a| a.bound_on(q.var)).collect();
            Nf::Quant { exists, var: q.var, bounds, body: Box::new(compile(&q.body, t)?) }
        }
    })
}

/// A family with `t` substituted.
pub struct Compiled {
    nf: Nf,
    slots: usize,
    free: usize,
    quant_bound: i128,
}

impl Compiled {
    pub fn new(fam: &Family, t: u64, quant_bound: u64) -> Result<Self> {
        Ok(Compiled { nf: compile(&fam.formula, t)?, slots: fam.slots(), free: fam.free, quant_bound: quant_bound.into() })
    }

    pub fn eval(&self, x: &[i64]) -> Membership {
        assert_eq!(x.len(), self.free, "point dimension");
        let mut env = vec![0i128; self.slots];
        for (e, &v) in env.iter_mut().zip(x) {
            *e = v.into();
        }
        if x.iter().any(|&v| v < 0) {
            return Membership::False;
        }
        self.go(&self.nf, &mut env)
    }

    fn go(&self, f: &Nf, env: &mut Vec<i128>) -> Membership {
        use Membership::*;
        match f {
            Nf::Const(b) => bool_m(*b),
            Nf::Atom(a) => bool_m(a.holds(env)),
            Nf::And(v) => {
                let mut hit = false;
                for g in v {
                    match self.go(g, env) {
                        False => return False,
                        BoundHit => hit = true,
                        True => {}
                    }
                }
                if hit {
                    BoundHit
                } else {
                    True
                }
            }
            Nf::Or(v) => {
                let mut hit = false;
                for g in v {
                    match self.go(g, env) {
                        True => return True,
                        BoundHit => hit = true,
                        False => {}
                    }
                }
                if hit {
                    BoundHit
                } else {
                    False
                }
            }
            Nf::Not(g) => match self.go(g, env) {
                True => False,
                False => True,
                BoundHit => BoundHit,
            },
            Nf::Quant { exists, var, bounds, body } => {
                let derived = bounds
                    .iter()
                    .map(|(cy, lower, b)| {
                        let s: i128 = lower.iter().map(|&(i, v)| v * env[i]).sum();
                        Integer::div_floor(&(b - s), cy)
                    })
                    .min();
                let (hi, cut) = match derived {
                    Some(h) => (h, false),
                    None => (self.quant_bound, true),
                };
                // the witness value decides an existential, a counterexample a universal
                let decisive = if *exists { True } else { False };
                let mut hit = cut;
                let mut y = 0;
                while y <= hi {
                    env[*var] = y;
                    match self.go(body, env) {
                        BoundHit => hit = true,
                        r if r == decisive => return r,
                        _ => {}
                    }
                    y += 1;
                }
                if hit {
                    BoundHit
                } else if *exists {
                    False
                } else {
                    True
                }
            }
        }
    }
}

fn bool_m(b: bool) -> Membership {
    if b {
        Membership::True
    } else {
        Membership::False
    }
}

/// Membership of `x` in `S_t`, with unbounded quantifiers searched over `[0, B]`.
pub fn eval_membership(fam: &Family, x: &[i64], t: u64, quant_bound: u64) -> Result<Membership> {
    if x.len() != fam.dim() {
        return Err(Error::Dimension(format!("point has {} coordinates, family has {}", x.len(), fam.dim())));
    }
    Ok(Compiled::new(fam, t, quant_bound)?.eval(x))
}

/// Over-approximating DNF of the NNF; `None` on a universal quantifier or
/// when the expansion exceeds the cap. Existential bounds become atoms.
pub(crate) fn dnf(f: &Formula) -> Option<Vec<Vec<Atom>>> {
    fn go(f: &Formula) -> Option<Vec<Vec<Atom>>> {
        let out = match f {
            Formula::Const(true) => vec![vec![]],
            Formula::Const(false) => vec![],
            Formula::Atom(a) => vec![vec![a.clone()]],
            Formula::Or(v) => {
                let mut out = Vec::new();
                for g in v {
                    out.extend(go(g)?);
                }
                out
            }
            Formula::And(v) => {
                let mut acc = vec![vec![]];
                for g in v {
                    let pieces = go(g)?;
                    let mut next = Vec::with_capacity(acc.len() * pieces.len());
                    for a in &acc {
                        for p in &pieces {
                            next.push(a.iter().chain(p).cloned().collect::<Vec<_>>());
                        }
                    }
                    if next.len() > DNF_CAP {
                        return None;
                    }
                    acc = next;
                }
                acc
            }
            Formula::Exists(q) => {
                let mut pieces = go(&q.body)?;
                if let Some(b) = &q.bound {
                    pieces.iter_mut().for_each(|p| p.push(b.clone()));
                }
                pieces
            }
            Formula::ForAll(_) | Formula::Not(_) => return None,
        };
        (out.len() <= DNF_CAP).then_some(out)
    }
    go(&f.nnf())
}

/// Rational projection of one DNF piece onto the free variables, as an
/// integer polyhedron; `None` when the piece is infeasible.
fn piece_polyhedron(piece: &[Atom], slots: usize, free: usize, t: u64) -> Result<Option<Polyhedron>> {
    let mut a: Vec<Vec<BigRational>> = Vec::new();
    let mut b: Vec<BigRational> = Vec::new();
    for atom in piece {
        a.push(atom.coeffs.iter().map(|p| p.eval_integer(t).map(BigRational::from_integer)).collect::<Result<_>>()?);
        b.push(BigRational::from_integer(atom.rhs.eval_integer(t)?));
    }
    for i in 0..slots {
        let mut row = vec![BigRational::zero(); slots];
        row[i] = -BigRational::one();
        a.push(row);
        b.push(BigRational::zero());
    }
    let Some((pa, pb)) = linalg::project(&a, &b, free) else { return Ok(None) };
    let mut ia = Vec::with_capacity(pa.len());
    let mut ib = Vec::with_capacity(pb.len());
    for (row, c) in pa.iter().zip(&pb) {
        let den = row.iter().chain([c]).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let s = BigRational::from_integer(den);
        ia.push(row.iter().map(|x| (x * &s).to_integer()).collect());
        ib.push((c * &s).to_integer());
    }
    let p = Polyhedron::new(free, ia, ib);
    Ok(p.is_feasible().then_some(p))
}

/// Feasible projected pieces at `t`, or `None` if no over-approximation is
/// available.
pub(crate) fn pieces_at(fam: &Family, t: u64) -> Result<Option<Vec<Polyhedron>>> {
    let Some(pieces) = dnf(&fam.formula) else { return Ok(None) };
    let mut out = Vec::new();
    for piece in &pieces {
        if let Some(p) = piece_polyhedron(piece, fam.slots(), fam.free, t)? {
            out.push(p);
        }
    }
    Ok(Some(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Containment {
    Empty,
    /// `S_t` lies in this box.
    Box(LatticeBox),
    /// Some piece of the over-approximation is unbounded.
    Unbounded,
    Unknown,
}

pub fn containing_box(fam: &Family, t: u64) -> Result<Containment> {
    let Some(pieces) = pieces_at(fam, t)? else { return Ok(Containment::Unknown) };
    if pieces.is_empty() {
        return Ok(Containment::Empty);
    }
    if fam.dim() == 0 {
        return Ok(Containment::Box(vec![]));
    }
    if pieces.iter().any(|p| p.recession_ray().is_some()) {
        return Ok(Containment::Unbounded);
    }
    let mut acc: Option<LatticeBox> = None;
    for p in &pieces {
        let Some(bx) = p.integer_box()? else { continue };
        let bx: LatticeBox = bx
            .iter()
            .map(|(l, h)| Ok((l.to_i64().ok_or(Error::Overflow)?, h.to_i64().ok_or(Error::Overflow)?)))
            .collect::<Result<_>>()?;
        acc = Some(match acc {
            None => bx,
            Some(a) => a.iter().zip(&bx).map(|(&(l1, h1), &(l2, h2))| (l1.min(l2), h1.max(h2))).collect(),
        });
    }
    Ok(acc.map_or(Containment::Empty, Containment::Box))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumeratedSet {
    /// Members in the box, lexicographically ordered.
    pub points: Vec<Vec<i64>>,
    /// The box searched.
    pub region: LatticeBox,
    /// Whether the box provably contains all of `S_t`.
    pub contained: bool,
}

fn box_points(bx: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &(lo, hi) in bx {
        out = out.into_iter().flat_map(|p| (lo..=hi).map(move |v| p.iter().copied().chain([v]).collect())).collect();
    }
    out
}

/// Members of `S_t` inside `bx`.
///
/// Errors with `Uncertified` if some point's membership hit the quantifier
/// bound.
pub fn enumerate_set(fam: &Family, t: u64, bx: &[(i64, i64)], quant_bound: u64) -> Result<EnumeratedSet> {
    if bx.len() != fam.dim() {
        return Err(Error::Dimension(format!("box has {} ranges, family has {} variables", bx.len(), fam.dim())));
    }
    let contained = match containing_box(fam, t)? {
        Containment::Empty => true,
        Containment::Box(c) => c.iter().zip(bx).all(|(&(l, h), &(bl, bh))| l > h || (bl <= l && h <= bh)),
        Containment::Unbounded | Containment::Unknown => false,
    };
    let c = Compiled::new(fam, t, quant_bound)?;
    let (head, tail) = match bx.split_first() {
        Some((h, rest)) => (Some(*h), rest),
        None => (None, bx),
    };
    let rest = box_points(tail);
    let rows: Vec<i64> = head.map_or(vec![], |(lo, hi)| (lo.max(0)..=hi).collect());
    let check = |p: Vec<i64>| -> Result<Option<Vec<i64>>> {
        match c.eval(&p) {
            Membership::True => Ok(Some(p)),
            Membership::False => Ok(None),
            Membership::BoundHit => Err(Error::Uncertified(format!("quantifier bound {quant_bound} hit at {p:?}, t = {t}"))),
        }
    };
    let points: Vec<Vec<i64>> = if head.is_none() {
        check(vec![])?.into_iter().collect()
    } else {
        let chunks: Vec<Vec<Vec<i64>>> = rows
            .par_iter()
            .map(|&x0| {
                rest.iter()
                    .filter_map(|r| check(std::iter::once(x0).chain(r.iter().copied()).collect()).transpose())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        chunks.into_iter().flatten().collect()
    };
    Ok(EnumeratedSet { points, region: bx.to_vec(), contained })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    Finite(u64),
    Infinite,
    Unknown,
}

/// Enumeration over the containing box when there is one, else over
/// `[0, box_bound]^d`, together with the cardinality it certifies.
pub fn sample_set(fam: &Family, t: u64, quant_bound: u64, box_bound: i64) -> Result<(EnumeratedSet, Cardinality)> {
    let d = fam.dim();
    let default: LatticeBox = vec![(0, box_bound); d];
    match containing_box(fam, t)? {
        Containment::Empty => Ok((EnumeratedSet { points: vec![], region: default, contained: true }, Cardinality::Finite(0))),
        Containment::Box(bx) => {
            let s = enumerate_set(fam, t, &bx, quant_bound)?;
            let n = s.points.len() as u64;
            Ok((s, Cardinality::Finite(n)))
        }
        Containment::Unbounded => {
            let s = enumerate_set(fam, t, &default, quant_bound)?;
            let card = if fam.formula.is_quantifier_free() && certified_infinite(fam, t, &s.points)? {
                Cardinality::Infinite
            } else {
                Cardinality::Unknown
            };
            Ok((s, card))
        }
        Containment::Unknown => Ok((enumerate_set(fam, t, &default, quant_bound)?, Cardinality::Unknown)),
    }
}

/// For a quantifier-free family the pieces are exact, so an unbounded piece
/// holding one of the found members holds infinitely many.
fn certified_infinite(fam: &Family, t: u64, found: &[Vec<i64>]) -> Result<bool> {
    let Some(pieces) = pieces_at(fam, t)? else { return Ok(false) };
    Ok(pieces.iter().filter(|p| p.recession_ray().is_some()).any(|p| {
        found.iter().any(|x| p.contains_int(&x.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> Family {
        Family::parse(s).unwrap()
    }

    const EX_PA: &str = "exists y : 2*x + 2*y + 3 = 5*t and t < x and x <= y";

    #[test]
    fn odd_family_membership() {
        let f = fam(EX_PA);
        assert_eq!(eval_membership(&f, &[6], 5, 10).unwrap(), Membership::False);
        assert_eq!(eval_membership(&f, &[8], 7, 10).unwrap(), Membership::True);
        // the existential is bounded by its own atoms, so a tiny search bound is harmless
        assert_eq!(eval_membership(&f, &[12], 11, 0).unwrap(), Membership::True);
    }

    #[test]
    fn odd_family_sets() {
        let f = fam(EX_PA);
        assert_eq!(containing_box(&f, 7).unwrap(), Containment::Box(vec![(8, 8)]));
        let (s, c) = sample_set(&f, 7, 200, 64).unwrap();
        assert_eq!(s.points, vec![vec![8]]);
        assert_eq!(c, Cardinality::Finite(1));
        assert_eq!(sample_set(&f, 5, 200, 64).unwrap().1, Cardinality::Finite(0));
        let (s, _) = sample_set(&f, 11, 200, 64).unwrap();
        assert_eq!(s.points, vec![vec![12], vec![13]]);
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(eval_membership(&fam("x <= t"), &[0], 9, 1).unwrap(), Membership::True);
        let f = fam("vars: x\nfalse");
        assert_eq!(containing_box(&f, 3).unwrap(), Containment::Empty);
        assert!(enumerate_set(&f, 3, &[(0, 5)], 10).unwrap().points.is_empty());
        let z = fam("0 <= 0");
        assert_eq!(z.dim(), 0);
        assert_eq!(sample_set(&z, 4, 10, 10).unwrap().1, Cardinality::Finite(1));
    }

    #[test]
    fn unbounded_quantifiers_report_hits() {
        let f = fam("vars: x\nexists y: y >= x + 500");
        assert_eq!(eval_membership(&f, &[0], 0, 100).unwrap(), Membership::BoundHit);
        // ¬(y ≥ 0) bounds y by -1, so this one is decided
        let g = fam("vars: x\nforall y: y >= 0");
        assert_eq!(eval_membership(&g, &[0], 0, 100).unwrap(), Membership::True);
        let g = fam("vars: x\nforall y: y >= 0 and x <= 5");
        assert_eq!(eval_membership(&g, &[0], 0, 100).unwrap(), Membership::BoundHit);
        let h = fam("vars: x\nforall y: y <= x");
        assert_eq!(eval_membership(&h, &[3], 0, 100).unwrap(), Membership::False);
        // ¬(y ≤ x) ∨ y ≤ x + 1 bounds y by x
        let k = fam("vars: x\nforall y: y <= x or y >= x + 1");
        assert_eq!(eval_membership(&k, &[3], 0, 100).unwrap(), Membership::True);
    }

    #[test]
    fn parity_existential() {
        let f = fam("exists y: 2*y = t");
        for t in 0..20 {
            let want = if t % 2 == 0 { Membership::True } else { Membership::False };
            assert_eq!(eval_membership(&f, &[], t, 0).unwrap(), want);
        }
    }

    #[test]
    fn infinite_is_certified_only_with_a_member() {
        let f = fam("x >= 0");
        assert_eq!(sample_set(&f, 2, 10, 8).unwrap().1, Cardinality::Infinite);
        let g = fam("x >= 100");
        assert_eq!(sample_set(&g, 2, 10, 8).unwrap().1, Cardinality::Unknown);
    }
}
