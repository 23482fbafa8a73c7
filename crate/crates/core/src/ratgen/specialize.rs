//! The value of a generating function at `x = (1, …, 1)` by eliminating one
//! variable at a time, differentiating numerator and denominator while both
//! vanish.

use std::collections::BTreeMap;

use num::{BigRational, One, Zero};
use serde::{Serialize, Serializer};

use super::GenFun;
use crate::error::{Error, Result};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::{rational_to_string, Poly, RationalFunction, ResidueClass};

/// Exponent coordinate type: `i64` at a fixed `t`, [`Poly`] for the
/// symbolic run. Coefficients live in `C`.
trait Coord: Clone + Ord {
    type C: Clone;
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn minus_one(&self) -> Self;
    fn c_one() -> Self::C;
    fn c_is_zero(c: &Self::C) -> bool;
    fn c_add(a: &Self::C, b: &Self::C) -> Self::C;
    fn c_mul(a: &Self::C, b: &Self::C) -> Self::C;
    fn c_neg(a: &Self::C) -> Self::C;
    fn c_times(c: &Self::C, e: &Self) -> Self::C;
}

impl Coord for i64 {
    type C = BigRational;
    fn zero() -> Self {
        0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn minus_one(&self) -> Self {
        self - 1
    }
    fn c_one() -> BigRational {
        BigRational::one()
    }
    fn c_is_zero(c: &BigRational) -> bool {
        c.is_zero()
    }
    fn c_add(a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn c_mul(a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn c_neg(a: &BigRational) -> BigRational {
        -a
    }
    fn c_times(c: &BigRational, e: &i64) -> BigRational {
        c * BigRational::from_integer((*e).into())
    }
}

impl Coord for Poly {
    type C = Poly;
    fn zero() -> Self {
        Poly::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn minus_one(&self) -> Self {
        self - &Poly::one()
    }
    fn c_one() -> Poly {
        Poly::one()
    }
    fn c_is_zero(c: &Poly) -> bool {
        c.is_zero()
    }
    fn c_add(a: &Poly, b: &Poly) -> Poly {
        a + b
    }
    fn c_mul(a: &Poly, b: &Poly) -> Poly {
        a * b
    }
    fn c_neg(a: &Poly) -> Poly {
        -a
    }
    fn c_times(c: &Poly, e: &Poly) -> Poly {
        c * e
    }
}

/// `Σ_j β_j x^{r_j}` with equal exponents merged and zero terms dropped.
struct Laurent<E: Coord>(BTreeMap<Vec<E>, E::C>);

impl<E: Coord> Laurent<E> {
    fn insert(&mut self, e: Vec<E>, c: &E::C) {
        match self.0.get_mut(&e) {
            Some(v) => {
                *v = E::c_add(v, c);
                if E::c_is_zero(v) {
                    self.0.remove(&e);
                }
            }
            None if !E::c_is_zero(c) => {
                self.0.insert(e, c.clone());
            }
            None => {}
        }
    }

    fn monomial(e: Vec<E>, c: E::C) -> Self {
        let mut l = Laurent(BTreeMap::new());
        l.insert(e, &c);
        l
    }

    /// `1 - x^b`.
    fn one_minus(b: &[E]) -> Self {
        let mut l = Self::monomial(vec![E::zero(); b.len()], E::c_one());
        l.insert(b.to_vec(), &E::c_neg(&E::c_one()));
        l
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Laurent(BTreeMap::new());
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                let e: Vec<E> = ea.iter().zip(eb).map(|(x, y)| x.add(y)).collect();
                out.insert(e, &E::c_mul(ca, cb));
            }
        }
        out
    }

    fn add_assign(&mut self, o: &Self) {
        for (e, c) in &o.0 {
            self.insert(e.clone(), c);
        }
    }

    fn substitute_one(&self, k: usize) -> Self {
        let mut out = Laurent(BTreeMap::new());
        for (e, c) in &self.0 {
            let mut e = e.clone();
            e[k] = E::zero();
            out.insert(e, c);
        }
        out
    }

    fn derivative(&self, k: usize) -> Self {
        let mut out = Laurent(BTreeMap::new());
        for (e, c) in &self.0 {
            let dc = E::c_times(c, &e[k]);
            let mut e = e.clone();
            e[k] = e[k].minus_one();
            out.insert(e, &dc);
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn constant(&self) -> Option<E::C> {
        self.0.values().next().cloned()
    }
}

enum Limit<C> {
    Finite { num: Option<C>, den: C },
    Infinite,
}

type Term<E> = (<E as Coord>::C, Vec<E>, Vec<Vec<E>>);

/// Common denominator, then elimination in `order`. `nonzero` is told about
/// every form the run relies on being nonzero.
fn limit<E: Coord>(
    d: usize,
    terms: &[Term<E>],
    order: &[usize],
    nonzero: &mut dyn FnMut(&Laurent<E>) -> Result<()>,
) -> Result<Limit<E::C>> {
    let mut mult: BTreeMap<Vec<E>, usize> = BTreeMap::new();
    for (_, _, dens) in terms {
        let mut here: BTreeMap<&Vec<E>, usize> = BTreeMap::new();
        for b in dens {
            *here.entry(b).or_default() += 1;
        }
        for (b, m) in here {
            let e = mult.entry(b.clone()).or_default();
            *e = (*e).max(m);
        }
    }
    let mut den = Laurent::monomial(vec![E::zero(); d], E::c_one());
    for (b, &m) in &mult {
        let f = Laurent::one_minus(b);
        for _ in 0..m {
            den = den.mul(&f);
        }
    }
    let mut num = Laurent(BTreeMap::new());
    for (c, q, dens) in terms {
        let mut part = Laurent::monomial(q.clone(), c.clone());
        for (b, &m) in &mult {
            let have = dens.iter().filter(|x| *x == b).count();
            let f = Laurent::one_minus(b);
            for _ in have..m {
                part = part.mul(&f);
            }
        }
        num.add_assign(&part);
    }
    for &k in order {
        loop {
            let n1 = num.substitute_one(k);
            let d1 = den.substitute_one(k);
            match (n1.is_zero(), d1.is_zero()) {
                (_, false) => {
                    nonzero(&d1)?;
                    num = n1;
                    den = d1;
                    break;
                }
                (false, true) => {
                    nonzero(&n1)?;
                    return Ok(Limit::Infinite);
                }
                (true, true) => {
                    num = num.derivative(k);
                    den = den.derivative(k);
                }
            }
        }
    }
    let den = den.constant().ok_or_else(|| Error::Invalid("denominator vanished".into()))?;
    Ok(Limit::Finite { num: num.constant(), den })
}

fn check_order(d: usize, order: &[usize]) -> Result<()> {
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..d).collect::<Vec<_>>() {
        return Err(Error::Invalid(format!("elimination order {order:?} is not a permutation of 0..{d}")));
    }
    Ok(())
}

/// Value at `x = 1`: a rational number or a pole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Count {
    Finite(BigRational),
    Infinite,
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(r) => s.serialize_str(&rational_to_string(r)),
            Count::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// [`specialize_count_with`] in index order.
pub fn specialize_count(g: &GenFun, t: u64) -> Result<Count> {
    specialize_count_with(g, t, &(0..g.dim).collect::<Vec<_>>())
}

pub fn specialize_count_with(g: &GenFun, t: u64, order: &[usize]) -> Result<Count> {
    check_order(g.dim, order)?;
    if t < g.threshold || !g.class.contains(t) {
        return Err(Error::Invalid(format!("t = {t} is outside {} past {}", g.class, g.threshold)));
    }
    let terms: Vec<Term<i64>> = g
        .terms
        .iter()
        .map(|term| Ok((term.coeff.clone(), term.num.eval(t)?, term.dens.iter().map(|b| b.eval(t)).collect::<Result<_>>()?)))
        .collect::<Result<_>>()?;
    match limit(g.dim, &terms, order, &mut |_| Ok(()))? {
        Limit::Infinite => Ok(Count::Infinite),
        Limit::Finite { num, den } => Ok(Count::Finite(num.map_or_else(BigRational::zero, |n| n / den))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SymbolicValue {
    Finite(RationalFunction),
    Infinite,
}

/// Value at `x = 1` as a function of `t` on the class of `g`, valid from
/// `threshold` on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolicCount {
    pub value: SymbolicValue,
    pub threshold: u64,
}

/// Class threshold past which the distinct exponents of `l` stay distinct
/// and pairwise ordered as they are eventually, and some coefficient is
/// nonzero.
fn distinct_threshold(l: &Laurent<Poly>, class: ResidueClass) -> Result<u64> {
    let keys: Vec<&Vec<Poly>> = l.0.keys().collect();
    let mut thr = 0;
    for w in keys.windows(2) {
        let diff = w[0].iter().zip(w[1]).map(|(a, b)| b - a).find(|p| !p.is_zero()).expect("distinct keys");
        thr = thr.max(sign_threshold(&diff, class)?);
    }
    let coeff = l.0.values().map(|c| sign_threshold(c, class)).collect::<Result<Vec<u64>>>()?;
    Ok(thr.max(coeff.into_iter().min().unwrap_or(0)))
}

/// The symbolic elimination: exponents stay polynomials in `t` and every
/// nonzero decision is certified past a threshold.
pub fn specialize_symbolic(g: &GenFun, order: &[usize]) -> Result<SymbolicCount> {
    check_order(g.dim, order)?;
    let terms: Vec<Term<Poly>> = g
        .terms
        .iter()
        .map(|term| (Poly::constant(term.coeff.clone()), term.num.coords.clone(), term.dens.iter().map(|b| b.coords.clone()).collect()))
        .collect();
    let mut threshold = g.threshold;
    let class = g.class;
    let out = limit(g.dim, &terms, order, &mut |l| {
        threshold = threshold.max(distinct_threshold(l, class)?);
        Ok(())
    })?;
    let value = match out {
        Limit::Infinite => SymbolicValue::Infinite,
        Limit::Finite { num, den } => {
            threshold = threshold.max(sign_threshold(&den, class)?);
            SymbolicValue::Finite(RationalFunction::new(num.unwrap_or_else(Poly::zero), den)?)
        }
    };
    Ok(SymbolicCount { value, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::rat;
    use crate::ratgen::{ExponentVector, GenFunTerm};

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::constant(v)
    }

    #[test]
    fn constant_one() {
        assert_eq!(specialize_count(&GenFun::one(2), 0).unwrap(), Count::Finite(rat(1)));
    }

    #[test]
    fn pole() {
        let g = GenFun::new(1, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0]), vec![ev(&[1])])]).unwrap();
        assert_eq!(specialize_count(&g, 0).unwrap(), Count::Infinite);
        assert_eq!(specialize_symbolic(&g, &[0]).unwrap().value, SymbolicValue::Infinite);
    }

    #[test]
    fn geometric_sum_symbolic() {
        // (1 - x^(t+1))/(1 - x) has value t + 1
        let g = GenFun::new(
            1,
            ResidueClass::ALL,
            0,
            vec![
                GenFunTerm::new(rat(1), ev(&[0]), vec![ev(&[1])]),
                GenFunTerm::new(rat(-1), ExponentVector::new(vec![Poly::from_ints(&[1, 1])]), vec![ev(&[1])]),
            ],
        )
        .unwrap();
        let s = specialize_symbolic(&g, &[0]).unwrap();
        assert_eq!(s.value, SymbolicValue::Finite(RationalFunction::from_poly(Poly::from_ints(&[1, 1]))));
        for t in 0..10 {
            assert_eq!(specialize_count(&g, t).unwrap(), Count::Finite(rat(t as i64 + 1)));
        }
    }

    #[test]
    fn bad_order() {
        assert!(specialize_count_with(&GenFun::one(2), 0, &[0, 0]).is_err());
    }
}
