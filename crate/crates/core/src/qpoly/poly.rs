use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Univariate polynomial in `t` over the rationals, lowest degree first.
///
/// Trailing zero coefficients are always stripped, so the zero polynomial is
/// the empty coefficient vector and structural equality is polynomial
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p/q` with `q > 0`, the wire format for standalone rationals.
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn lcm_denominators<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigInt {
    it.fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Poly::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(rat(c))
    }

    /// `c * t^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` is the degree of the zero polynomial and orders below every
    /// natural degree.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    /// Sign of the polynomial for all sufficiently large `t`.
    pub fn eventual_sign(&self) -> i32 {
        match self.coeffs.last() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        lcm_denominators(self.coeffs.iter())
    }

    /// `(D, D·p)` with `D·p ∈ Z[t]`, `D > 0` minimal.
    pub fn integer_scaled(&self) -> (BigInt, Vec<BigInt>) {
        let d = self.denominator_lcm();
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(d.clone())).to_integer())
            .collect();
        (d, ints)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_int(&self, t: &BigInt) -> BigRational {
        self.eval(&BigRational::from_integer(t.clone()))
    }

    pub fn eval_u64(&self, t: u64) -> BigRational {
        self.eval_int(&BigInt::from(t))
    }

    /// Evaluates and insists on an integer result.
    pub fn eval_integer(&self, t: u64) -> Result<BigInt> {
        let v = self.eval_u64(t);
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(Error::NotInteger(rational_to_string(&v)))
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat(k as i64))
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `p(a·t + b)`.
    pub fn compose_linear(&self, a: &BigRational, b: &BigRational) -> Poly {
        let lin = Poly::new(vec![b.clone(), a.clone()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| &(&acc * &lin) + &Poly::constant(c.clone()))
    }

    pub fn compose(&self, inner: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| &(&acc * inner) + &Poly::constant(c.clone()))
    }

    /// Euclidean division in `Q[t]`: `self = q·g + r` with `deg r < deg g`.
    pub fn div_rem(&self, g: &Poly) -> Result<(Poly, Poly)> {
        let dg = g.degree().ok_or(Error::ZeroDivisor)?;
        let lead = g.leading();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![BigRational::zero(); rem.len().saturating_sub(dg)];
        while rem.len() > dg && !rem.is_empty() {
            let k = rem.len() - 1 - dg;
            let c = rem.last().unwrap() / &lead;
            for (i, gc) in g.coeffs.iter().enumerate() {
                rem[k + i] -= &c * gc;
            }
            quo[k] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((Poly::new(quo), Poly::new(rem)))
    }

    /// Monic greatest common divisor over `Q`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.leading();
        a.scale(&(BigRational::one() / l))
    }

    /// Upper bound on the absolute value of every real root (Cauchy).
    pub fn root_bound(&self) -> BigInt {
        let Some(n) = self.degree() else {
            return BigInt::zero();
        };
        let lead = self.coeffs[n].abs();
        let max = self.coeffs[..n]
            .iter()
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(BigRational::zero);
        (max + BigRational::one()).ceil().to_integer()
    }

    /// Integer-valuedness at every `t ≡ residue (mod modulus)`, `t ≥ 0`.
    ///
    /// `p(modulus·s + residue)` has degree `n`; integrality at `n + 1`
    /// consecutive `s` forces integrality everywhere by the binomial basis.
    pub fn is_integer_valued_on(&self, modulus: u64, residue: u64) -> bool {
        let n = self.degree().unwrap_or(0) as u64;
        (0..=n).all(|s| self.eval_u64(modulus * s + residue).is_integer())
    }

    pub fn to_ascii(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Poly> {
        crate::parse::parse_poly(s)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if k == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Poly::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Eventual order: compares values for all sufficiently large `t`.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).eventual_sign().cmp(&0)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_strips_zeros() {
        let p = Poly::new(vec![rat(1), rat(0), rat(0)]);
        assert_eq!(p, Poly::from_int(1));
        assert_eq!(Poly::new(vec![rat(0)]).degree(), None);
        assert!(Poly::zero().degree() < Some(0));
    }

    #[test]
    fn display_and_parse() {
        let p = Poly::new(vec![rat_frac(-5, 4), rat(3), rat_frac(1, 2)]);
        assert_eq!(p.to_string(), "1/2*t^2 + 3*t - 5/4");
        assert_eq!(Poly::parse("1/2*t^2 + 3*t - 5/4").unwrap(), p);
        assert_eq!(Poly::parse("-t").unwrap().to_string(), "-t");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn division_in_rationals() {
        let f = Poly::from_ints(&[0, 3, 1]);
        let g = Poly::from_ints(&[1, 2]);
        let (q, r) = f.div_rem(&g).unwrap();
        assert_eq!(q, Poly::new(vec![rat_frac(5, 4), rat_frac(1, 2)]));
        assert_eq!(r, Poly::constant(rat_frac(-5, 4)));
        assert_eq!(&(&q * &g) + &r, f);
        assert_eq!(f.div_rem(&Poly::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn compose_and_class_integrality() {
        let f = Poly::from_ints(&[0, 3, 1]);
        // t = 2s + 1
        let g = f.compose_linear(&rat(2), &rat(1));
        assert_eq!(g, Poly::from_ints(&[4, 10, 4]));
        let half = Poly::new(vec![rat_frac(1, 2), rat_frac(1, 2)]);
        assert!(half.is_integer_valued_on(2, 1));
        assert!(!half.is_integer_valued_on(2, 0));
    }

    #[test]
    fn root_bound_dominates_roots() {
        let p = Poly::from_ints(&[0, -1000, 1]);
        assert!(p.root_bound() > BigInt::from(1000));
    }
}
