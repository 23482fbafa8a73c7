use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::integer::lcm;
use num::{BigInt, BigRational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::Poly;
use crate::error::{Error, Result};

/// Residue class `t ≡ residue (mod modulus)`, parametrised by a local
/// variable `s ≥ 0` through `t = modulus·s + residue`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueClass {
    pub modulus: u64,
    pub residue: u64,
}

impl ResidueClass {
    pub const ALL: ResidueClass = ResidueClass { modulus: 1, residue: 0 };

    pub fn new(modulus: u64, residue: u64) -> Self {
        assert!(modulus > 0 && residue < modulus);
        ResidueClass { modulus, residue }
    }

    pub fn contains(&self, t: u64) -> bool {
        t % self.modulus == self.residue
    }

    /// Splits the local variable `s = k·u + j`.
    pub fn refine(&self, k: u64, j: u64) -> ResidueClass {
        ResidueClass {
            modulus: self.modulus * k,
            residue: self.residue + self.modulus * j,
        }
    }

    /// `p(t)` rewritten in the local variable: `p(modulus·s + residue)`.
    pub fn to_local(&self, p: &Poly) -> Poly {
        p.compose_linear(
            &BigRational::from_integer(self.modulus.into()),
            &BigRational::from_integer(self.residue.into()),
        )
    }

    /// Inverse of [`to_local`](Self::to_local): substitutes `s = (t - residue)/modulus`.
    pub fn to_global(&self, p: &Poly) -> Poly {
        let m = BigRational::from_integer(BigInt::from(self.modulus));
        let r = BigRational::from_integer(BigInt::from(self.residue));
        p.compose_linear(&(BigRational::from_integer(1.into()) / &m), &(-r / m))
    }

    /// Global threshold equivalent to "local variable `s ≥ ts`".
    pub fn lift_threshold(&self, ts: u64) -> u64 {
        if ts == 0 {
            0
        } else {
            self.modulus * (ts - 1) + self.residue + 1
        }
    }

    /// Members of the class in `[lo, hi)`.
    pub fn members(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> {
        let m = self.modulus;
        let first = if lo <= self.residue {
            self.residue
        } else {
            lo + (self.residue + m - lo % m) % m
        };
        (first..hi).step_by(m as usize)
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t ≡ {} mod {}", self.residue, self.modulus)
    }
}

/// A quasi-polynomial `g(t) = p_{t mod m}(t)` in canonical minimal-period form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuasiPolynomial {
    constituents: Vec<Poly>,
}

impl QuasiPolynomial {
    pub fn new(constituents: Vec<Poly>) -> Result<Self> {
        if constituents.is_empty() {
            return Err(Error::Invalid("quasi-polynomial needs period >= 1".into()));
        }
        Ok(Self::canonical(constituents))
    }

    fn canonical(constituents: Vec<Poly>) -> Self {
        let m = constituents.len();
        let d = (1..=m)
            .filter(|d| m % d == 0)
            .find(|&d| (d..m).all(|i| constituents[i] == constituents[i % d]))
            .unwrap_or(m);
        let mut constituents = constituents;
        constituents.truncate(d);
        QuasiPolynomial { constituents }
    }

    pub fn from_poly(p: Poly) -> Self {
        QuasiPolynomial { constituents: vec![p] }
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn constant(c: i64) -> Self {
        Self::from_poly(Poly::from_int(c))
    }

    /// Assembles a quasi-polynomial from global-variable polynomials, one per
    /// residue class, where the classes partition `N`.
    pub fn from_classes(pieces: &[(ResidueClass, Poly)]) -> Result<Self> {
        let period = pieces.iter().fold(1u64, |acc, (c, _)| lcm(acc, c.modulus));
        let mut slots: Vec<Option<Poly>> = vec![None; period as usize];
        for (class, p) in pieces {
            for r in class.members(0, period) {
                if slots[r as usize].replace(p.clone()).is_some() {
                    return Err(Error::Invalid(format!("overlapping residue classes at {r}")));
                }
            }
        }
        let constituents = slots
            .into_iter()
            .enumerate()
            .map(|(r, p)| p.ok_or_else(|| Error::Invalid(format!("residue {r} not covered"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(constituents))
    }

    pub fn period(&self) -> u64 {
        self.constituents.len() as u64
    }

    pub fn constituents(&self) -> &[Poly] {
        &self.constituents
    }

    pub fn constituent(&self, residue: u64) -> &Poly {
        &self.constituents[(residue % self.period()) as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.constituents.iter().all(Poly::is_zero)
    }

    pub fn eval(&self, t: u64) -> BigRational {
        self.constituent(t).eval_u64(t)
    }

    pub fn eval_integer(&self, t: u64) -> Result<BigInt> {
        self.constituent(t).eval_integer(t)
    }

    /// Constituents re-expanded to period `m` (a multiple of the period).
    pub fn lift(&self, m: u64) -> Vec<Poly> {
        debug_assert_eq!(m % self.period(), 0);
        (0..m).map(|i| self.constituent(i).clone()).collect()
    }

    pub fn is_integer_valued(&self) -> bool {
        let m = self.period();
        (0..m).all(|i| self.constituent(i).is_integer_valued_on(m, i))
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self::canonical(self.constituents.iter().map(f).collect())
    }

    pub fn zip_with(&self, o: &Self, f: impl Fn(&Poly, &Poly) -> Poly) -> Self {
        let m = lcm(self.period(), o.period());
        Self::canonical(
            (0..m)
                .map(|i| f(self.constituent(i), o.constituent(i)))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        self.map(|p| p.scale(c))
    }

    /// `(class, constituent)` pairs over the period.
    pub fn classes(&self) -> impl Iterator<Item = (ResidueClass, &Poly)> {
        let m = self.period();
        self.constituents
            .iter()
            .enumerate()
            .map(move |(i, p)| (ResidueClass::new(m, i as u64), p))
    }

    /// Maximum degree over constituents.
    pub fn degree(&self) -> Option<usize> {
        self.constituents.iter().filter_map(Poly::degree).max()
    }
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.period() == 1 {
            return write!(f, "{}", self.constituents[0]);
        }
        write!(f, "{{")?;
        for (i, p) in self.constituents.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{i}: {p}")?;
        }
        write!(f, "}} mod {}", self.period())
    }
}

impl fmt::Debug for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QP[{self}]")
    }
}

macro_rules! qp_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for &QuasiPolynomial {
            type Output = QuasiPolynomial;
            fn $m(self, rhs: &QuasiPolynomial) -> QuasiPolynomial {
                self.zip_with(rhs, |a, b| a.$m(b))
            }
        }
        impl $tr for QuasiPolynomial {
            type Output = QuasiPolynomial;
            fn $m(self, rhs: QuasiPolynomial) -> QuasiPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
qp_binop!(Add, add);
qp_binop!(Sub, sub);
qp_binop!(Mul, mul);

impl Neg for &QuasiPolynomial {
    type Output = QuasiPolynomial;
    fn neg(self) -> QuasiPolynomial {
        self.map(|p| -p)
    }
}

/// A quasi-polynomial that is only claimed for `t ≥ threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventualQP {
    pub qp: QuasiPolynomial,
    pub threshold: u64,
}

impl EventualQP {
    pub fn new(qp: QuasiPolynomial, threshold: u64) -> Self {
        EventualQP { qp, threshold }
    }

    pub fn exact(qp: QuasiPolynomial) -> Self {
        EventualQP { qp, threshold: 0 }
    }

    pub fn eval(&self, t: u64) -> BigRational {
        self.qp.eval(t)
    }
}

#[derive(Serialize, Deserialize)]
struct QpJson {
    period: u64,
    constituents: Vec<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<u64>,
}

impl QpJson {
    fn into_qp(self) -> Result<QuasiPolynomial> {
        if self.constituents.len() as u64 != self.period {
            return Err(Error::Parse(format!(
                "period {} but {} constituents",
                self.period,
                self.constituents.len()
            )));
        }
        QuasiPolynomial::new(self.constituents)
    }
}

impl Serialize for QuasiPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QpJson { period: self.period(), constituents: self.constituents.clone(), threshold: None }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuasiPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        QpJson::deserialize(d)?.into_qp().map_err(serde::de::Error::custom)
    }
}

impl Serialize for EventualQP {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QpJson {
            period: self.qp.period(),
            constituents: self.qp.constituents.clone(),
            threshold: Some(self.threshold),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EventualQP {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = QpJson::deserialize(d)?;
        let threshold = j.threshold.unwrap_or(0);
        Ok(EventualQP { qp: j.into_qp().map_err(serde::de::Error::custom)?, threshold })
    }
}

/// Parses either a QP JSON object or a bare polynomial string.
pub fn parse_qp(src: &str) -> Result<QuasiPolynomial> {
    let s = src.trim();
    if s.starts_with('{') {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    } else {
        Ok(QuasiPolynomial::from_poly(Poly::parse(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::poly::{rat, rat_frac};

    pub(crate) fn floor_half_plus() -> QuasiPolynomial {
        // floor((t+1)/2)
        QuasiPolynomial::new(vec![
            Poly::new(vec![rat(0), rat_frac(1, 2)]),
            Poly::new(vec![rat_frac(1, 2), rat_frac(1, 2)]),
        ])
        .unwrap()
    }

    #[test]
    fn eval_floor_example() {
        let q = floor_half_plus();
        assert_eq!(q.eval(7), rat(4));
        for t in 0..40u64 {
            assert_eq!(q.eval(t), rat(((t + 1) / 2) as i64));
        }
        assert!(q.is_integer_valued());
        assert_eq!(QuasiPolynomial::zero().eval(12345), rat(0));
    }

    #[test]
    fn eval_two_class() {
        let q = QuasiPolynomial::new(vec![Poly::from_ints(&[0, 0, 1]), Poly::from_ints(&[1, 0, 1])]).unwrap();
        assert_eq!(q.eval(5), rat(26));
        for t in 0..20 {
            let naive = if t % 2 == 0 { t * t } else { t * t + 1 };
            assert_eq!(q.eval(t), rat(naive as i64));
        }
    }

    #[test]
    fn ring_operations() {
        let f = floor_half_plus();
        let doubled = &f + &f;
        assert_eq!(doubled, QuasiPolynomial::new(vec![Poly::t(), Poly::from_ints(&[1, 1])]).unwrap());

        let g = QuasiPolynomial::new(vec![Poly::zero(), Poly::one()]).unwrap();
        let prod = &QuasiPolynomial::from_poly(Poly::t()) * &g;
        assert_eq!(prod, QuasiPolynomial::new(vec![Poly::zero(), Poly::t()]).unwrap());

        let two = QuasiPolynomial::constant(2);
        let r = &(&f * &two) - &QuasiPolynomial::from_poly(Poly::t());
        assert_eq!(r, QuasiPolynomial::new(vec![Poly::zero(), Poly::one()]).unwrap());
        for t in 0..=20 {
            assert_eq!(r.eval(t), f.eval(t) * rat(2) - rat(t as i64));
        }
    }

    #[test]
    fn canonical_minimal_period() {
        let q = QuasiPolynomial::new(vec![Poly::t(); 6]).unwrap();
        assert_eq!(q.period(), 1);
        let q = QuasiPolynomial::new(vec![Poly::zero(), Poly::one(), Poly::zero(), Poly::one()]).unwrap();
        assert_eq!(q.period(), 2);
        assert_eq!(QuasiPolynomial::new(q.lift(4)).unwrap(), q);
    }

    #[test]
    fn residue_class_maps_round_trip() {
        let c = ResidueClass::new(3, 2);
        let p = Poly::from_ints(&[1, -2, 5]);
        assert_eq!(c.to_global(&c.to_local(&p)), p);
        assert_eq!(c.members(4, 15).collect::<Vec<_>>(), vec![5, 8, 11, 14]);
        assert_eq!(c.refine(2, 1), ResidueClass::new(6, 5));
    }

    #[test]
    fn json_shape() {
        let q = floor_half_plus();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"period":2,"constituents":["1/2*t","1/2*t + 1/2"]}"#);
        assert_eq!(parse_qp(&s).unwrap(), q);
    }
}
