//! Eventual sign analysis and threshold certification.
//!
//! Every threshold in the crate comes from the same recipe: a root bound
//! beyond which the sign of each relevant polynomial equals its eventual
//! sign, followed by an exact downward scan over the class members below the
//! bound. The scan finds the last failure, so the threshold is the smallest
//! one valid on the class.

use std::cmp::Ordering;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::poly::Poly;
use super::quasi::{QuasiPolynomial, ResidueClass};
use crate::error::{Error, Result};

/// Scans past this many points are refused instead of silently truncated.
pub const SCAN_CAP: u64 = 20_000_000;

/// Integer-scaled copy of a polynomial for fast sign evaluation.
#[derive(Clone, Debug)]
pub struct SignEval {
    big: Vec<BigInt>,
    small: Option<Vec<i128>>,
}

impl SignEval {
    pub fn new(p: &Poly) -> Self {
        let (_, big) = p.integer_scaled();
        let small = big.iter().map(|c| c.to_i128()).collect();
        SignEval { big, small }
    }

    fn small_sign(c: &[i128], t: u64) -> Option<i32> {
        let t = t as i128;
        let mut acc: i128 = 0;
        for k in c.iter().rev() {
            acc = acc.checked_mul(t)?.checked_add(*k)?;
        }
        Some(acc.signum() as i32)
    }

    pub fn sign_at(&self, t: u64) -> i32 {
        if let Some(s) = self.small.as_deref().and_then(|c| Self::small_sign(c, t)) {
            return s;
        }
        let tb = BigInt::from(t);
        let v = self.big.iter().rev().fold(BigInt::zero(), |acc, c| acc * &tb + c);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

fn ceil_root(r: &BigRational, k: u32) -> BigInt {
    // smallest x >= 0 with x^k >= r
    if !r.is_positive() {
        return BigInt::zero();
    }
    let mut hi = BigInt::one();
    while BigRational::from_integer(hi.pow(k)) < *r {
        hi *= 2;
    }
    let mut lo = BigInt::zero();
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        if BigRational::from_integer(mid.pow(k)) >= *r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Bound beyond which `p` has no real root: the smaller of the Cauchy and
/// Fujiwara bounds, as an integer.
pub fn root_bound(p: &Poly) -> BigInt {
    let Some(n) = p.degree() else {
        return BigInt::zero();
    };
    let cauchy = p.root_bound();
    if n == 0 {
        return cauchy;
    }
    let lead = p.leading().abs();
    let mut fuj = BigInt::zero();
    for k in 1..=n {
        let c = p.coeff(n - k).abs() / &lead;
        let c = if k == n { c / BigRational::from_integer(2.into()) } else { c };
        let x = ceil_root(&c, k as u32);
        if x > fuj {
            fuj = x;
        }
    }
    let fuj = fuj * 2 + 1;
    cauchy.min(fuj)
}

/// Smallest `T` such that `holds(t)` for every class member `t ≥ T`, given
/// that it holds for every member `≥ bound`.
pub fn class_threshold(class: ResidueClass, bound: &BigInt, holds: impl Fn(u64) -> bool) -> Result<u64> {
    let b = bound
        .to_u64()
        .filter(|&b| b <= SCAN_CAP)
        .ok_or_else(|| Error::Uncertified(format!("root bound {bound} exceeds scan cap")))?;
    if b <= class.residue {
        return Ok(0);
    }
    let top = b - 1 - (b - 1 + class.modulus - class.residue) % class.modulus;
    let mut t = top;
    loop {
        if !holds(t) {
            return Ok(t + 1);
        }
        if t < class.modulus + class.residue {
            return Ok(0);
        }
        t -= class.modulus;
    }
}

/// Smallest class threshold past which `sign p(t)` equals the eventual sign.
pub fn sign_threshold(p: &Poly, class: ResidueClass) -> Result<u64> {
    if p.is_zero() {
        return Ok(0);
    }
    let s = p.eventual_sign();
    let ev = SignEval::new(p);
    class_threshold(class, &root_bound(p), |t| ev.sign_at(t) == s)
}

/// Smallest class threshold past which every polynomial in `ps` has the
/// sign demanded by `ok` (a predicate on the sign, checked per point).
pub fn joint_threshold(ps: &[(Poly, fn(i32) -> bool)], class: ResidueClass) -> Result<u64> {
    let mut bound = BigInt::zero();
    for (p, ok) in ps {
        if !ok(p.eventual_sign()) {
            return Err(Error::Uncertified(format!("{p} never settles to the required sign")));
        }
        bound = bound.max(root_bound(p));
    }
    let evs: Vec<_> = ps.iter().map(|(p, ok)| (SignEval::new(p), *ok)).collect();
    class_threshold(class, &bound, |t| evs.iter().all(|(e, ok)| ok(e.sign_at(t))))
}

pub(crate) fn ser_ordering<S: serde::Serializer>(o: &Ordering, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match o {
        Ordering::Greater => "greater",
        Ordering::Less => "less",
        Ordering::Equal => "equal",
    })
}

/// Verdict of an eventual comparison on one residue class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassVerdict {
    pub residue: u64,
    #[serde(serialize_with = "ser_ordering")]
    pub ordering: Ordering,
    pub threshold: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// The same strict relation (or identity) on every class.
    Uniform {
        #[serde(serialize_with = "ser_ordering")]
        ordering: Ordering,
        threshold: u64,
    },
    /// Classes disagree; one verdict per residue modulo `period`.
    Classwise { period: u64, classes: Vec<ClassVerdict> },
}

impl Comparison {
    pub fn threshold(&self) -> u64 {
        match self {
            Comparison::Uniform { threshold, .. } => *threshold,
            Comparison::Classwise { classes, .. } => classes.iter().map(|c| c.threshold).max().unwrap_or(0),
        }
    }

    pub fn reversed(&self) -> Comparison {
        match self {
            Comparison::Uniform { ordering, threshold } => {
                Comparison::Uniform { ordering: ordering.reverse(), threshold: *threshold }
            }
            Comparison::Classwise { period, classes } => Comparison::Classwise {
                period: *period,
                classes: classes
                    .iter()
                    .map(|c| ClassVerdict { ordering: c.ordering.reverse(), ..c.clone() })
                    .collect(),
            },
        }
    }

    /// Ordering on the class of `t`, valid once `t` passes its threshold.
    pub fn ordering_at(&self, t: u64) -> Ordering {
        match self {
            Comparison::Uniform { ordering, .. } => *ordering,
            Comparison::Classwise { period, classes } => classes[(t % period) as usize].ordering,
        }
    }
}

/// Eventual comparison of `f` and `g` on every residue class of the period
/// of `f - g`, with certified thresholds.
pub fn compare_eventual(f: &QuasiPolynomial, g: &QuasiPolynomial) -> Result<Comparison> {
    let d = f - g;
    let mut classes = Vec::new();
    for (class, p) in d.classes() {
        let ordering = p.eventual_sign().cmp(&0);
        let threshold = sign_threshold(p, class)?;
        classes.push(ClassVerdict { residue: class.residue, ordering, threshold });
    }
    let first = classes[0].ordering;
    if classes.iter().all(|c| c.ordering == first) {
        let threshold = classes.iter().map(|c| c.threshold).max().unwrap_or(0);
        Ok(Comparison::Uniform { ordering: first, threshold })
    } else {
        Ok(Comparison::Classwise { period: d.period(), classes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(c: &[i64]) -> QuasiPolynomial {
        QuasiPolynomial::from_poly(Poly::from_ints(c))
    }

    #[test]
    fn square_dominates_linear() {
        let c = compare_eventual(&qp(&[0, 0, 1]), &qp(&[0, 1000])).unwrap();
        assert_eq!(c, Comparison::Uniform { ordering: Ordering::Greater, threshold: 1001 });
        for t in 1001..1600u64 {
            assert!(t * t > 1000 * t);
        }
    }

    #[test]
    fn identity_is_equal() {
        let f = qp(&[3, 1, 4]);
        assert_eq!(compare_eventual(&f, &f).unwrap(), Comparison::Uniform { ordering: Ordering::Equal, threshold: 0 });
    }

    #[test]
    fn linear_crossover() {
        let c = compare_eventual(&qp(&[4, 1]), &qp(&[1, 2])).unwrap();
        assert_eq!(c, Comparison::Uniform { ordering: Ordering::Less, threshold: 4 });
        assert_eq!(compare_eventual(&qp(&[1, 2]), &qp(&[4, 1])).unwrap(), c.reversed());
    }

    #[test]
    fn mixed_classes_are_reported_classwise() {
        let f = QuasiPolynomial::new(vec![Poly::t(), -Poly::t()]).unwrap();
        match compare_eventual(&f, &QuasiPolynomial::zero()).unwrap() {
            Comparison::Classwise { period, classes } => {
                assert_eq!(period, 2);
                assert_eq!(classes[0].ordering, Ordering::Greater);
                assert_eq!(classes[0].threshold, 1);
                assert_eq!(classes[1].ordering, Ordering::Less);
                assert_eq!(classes[1].threshold, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thresholds_are_minimal() {
        // (t-10)(t-20) > 0 for t > 20 and t < 10
        let p = &Poly::from_ints(&[-10, 1]) * &Poly::from_ints(&[-20, 1]);
        assert_eq!(sign_threshold(&p, ResidueClass::ALL).unwrap(), 21);
        assert_eq!(sign_threshold(&p, ResidueClass::new(2, 1)).unwrap(), 20);
        assert_eq!(sign_threshold(&p, ResidueClass::new(10, 0)).unwrap(), 21);
        assert_eq!(sign_threshold(&p, ResidueClass::new(10, 5)).unwrap(), 16);
        assert!(root_bound(&Poly::from_ints(&[-1_000_000, 0, 1])) < BigInt::from(3000));
    }
}
