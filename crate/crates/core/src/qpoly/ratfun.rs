use std::fmt;

use num::{BigInt, BigRational, Integer, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::Poly;
use crate::error::{Error, Result};

/// `numerator / denominator` with integer coefficients.
///
/// Canonical: common factors over `Q` cancelled, the joint content of both
/// sides removed and the denominator's leading coefficient positive.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

fn content(p: &Poly) -> BigInt {
    p.coeffs().iter().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (mut num, _) = num.div_rem(&g)?;
        let (mut den, _) = den.div_rem(&g)?;
        let l = num.denominator_lcm().lcm(&den.denominator_lcm());
        let l = BigRational::from_integer(l);
        num = num.scale(&l);
        den = den.scale(&l);
        let c = content(&num).gcd(&content(&den));
        let mut k = BigRational::from_integer(c).recip();
        if den.leading().is_negative() {
            k = -k;
        }
        Ok(RationalFunction { num: num.scale(&k), den: den.scale(&k) })
    }

    pub fn zero() -> Self {
        RationalFunction { num: Poly::zero(), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::new(p, Poly::one()).expect("unit denominator")
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial this equals, when the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly> {
        let d = self.den.constant_value()?;
        Some(self.num.scale(&d.recip()))
    }

    /// `None` at a pole.
    pub fn eval(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }

    pub fn eval_u64(&self, t: u64) -> Option<BigRational> {
        self.eval(&BigRational::from_integer(t.into()))
    }

    /// Sign for all large `t`.
    pub fn eventual_sign(&self) -> i32 {
        self.num.eventual_sign() * self.den.eventual_sign()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).expect("nonzero")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero")
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        Self::new(&self.num * p, self.den.clone()).expect("nonzero")
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Self::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match split_top_slash(s) {
            Some((n, d)) => Self::new(Poly::parse(n)?, Poly::parse(d)?),
            None => Ok(Self::from_poly(Poly::parse(s)?)),
        }
    }
}

fn split_top_slash(s: &str) -> Option<(&str, &str)> {
    // "(num)/(den)" as produced by Display
    let s = s.trim();
    if !s.starts_with('(') {
        return None;
    }
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let rest = s[i + 1..].trim_start();
                    return rest.strip_prefix('/').map(|d| (&s[..=i], d));
                }
            }
            _ => {}
        }
    }
    None
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_poly() {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "({})/({})", self.num, self.den),
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for RationalFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl From<Poly> for RationalFunction {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::poly::rat_frac;

    #[test]
    fn canonical_form() {
        let r = RationalFunction::new(Poly::from_ints(&[-2, 2]), Poly::from_ints(&[-4, 0, 4])).unwrap();
        // (2t-2)/(4t^2-4) = 1/(2t+2)
        assert_eq!(r.numerator(), &Poly::from_int(1));
        assert_eq!(r.denominator(), &Poly::from_ints(&[2, 2]));
        let s = RationalFunction::new(Poly::from_int(1), Poly::from_ints(&[-2, -2])).unwrap();
        assert_eq!(s, r.neg());
        assert_eq!(RationalFunction::parse(&r.to_string()).unwrap(), r);
        let h = RationalFunction::new(Poly::constant(rat_frac(-5, 4)), Poly::from_ints(&[1, 2])).unwrap();
        assert_eq!(h.to_string(), "(-5)/(8*t + 4)");
        assert!(RationalFunction::new(Poly::one(), Poly::zero()).is_err());
    }
}
