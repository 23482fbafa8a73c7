//! Rational generating functions whose exponents are polynomials in `t`:
//! construction from cones, polytopes and partition problems, lex-positive
//! normalization, box expansion, specialization at `x = 1` and lex-min
//! extraction.

mod cone;
pub(crate) use cone::brion_fixed;
mod expand;
mod lexmin;
mod specialize;

use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::{parse_rational, rational_to_string, Poly, ResidueClass};

pub use cone::{brion_polytope_genfun, cone_genfun, cone_genfun_at, vpf_genfun, ConeGenFun};
pub use expand::{expand_box, hadamard_box, BoxCoeffs, LatticeBox};
pub use lexmin::{lexmin_term, phi_matrix, transform_exponents, LexMin};
pub use specialize::{specialize_count, specialize_count_with, specialize_symbolic, Count, SymbolicCount, SymbolicValue};

/// Exponent vector with polynomial coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentVector {
    pub coords: Vec<Poly>,
}

impl ExponentVector {
    pub fn new(coords: Vec<Poly>) -> Self {
        ExponentVector { coords }
    }

    pub fn constant(v: &[i64]) -> Self {
        ExponentVector { coords: v.iter().map(|&c| Poly::from_int(c)).collect() }
    }

    pub fn zero(d: usize) -> Self {
        ExponentVector { coords: vec![Poly::zero(); d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Poly::is_zero)
    }

    pub fn eval(&self, t: u64) -> Result<Vec<i64>> {
        self.coords
            .iter()
            .map(|p| p.eval_integer(t)?.to_i64().ok_or(Error::Overflow))
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        ExponentVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ExponentVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        ExponentVector { coords: self.coords.iter().map(|a| -a).collect() }
    }

    pub fn is_integer_valued_on(&self, class: ResidueClass) -> bool {
        self.coords.iter().all(|p| p.is_integer_valued_on(class.modulus, class.residue))
    }

    /// Eventual lexicographic sign and the class threshold past which it
    /// holds; `None` for the zero vector.
    pub fn eventual_lex_sign(&self, class: ResidueClass) -> Result<Option<(i32, u64)>> {
        match self.coords.iter().find(|p| !p.is_zero()) {
            None => Ok(None),
            Some(p) => Ok(Some((p.eventual_sign(), sign_threshold(p, class)?))),
        }
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `coeff · x^num / Π (1 - x^den)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenFunTerm {
    pub coeff: BigRational,
    pub num: ExponentVector,
    pub dens: Vec<ExponentVector>,
}

impl GenFunTerm {
    pub fn new(coeff: BigRational, num: ExponentVector, dens: Vec<ExponentVector>) -> Self {
        GenFunTerm { coeff, num, dens }
    }

    pub fn monomial(num: ExponentVector) -> Self {
        GenFunTerm { coeff: BigRational::one(), num, dens: Vec::new() }
    }
}

/// Signed sum of terms, valid on one residue class of `t` past a
/// threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenFun {
    pub dim: usize,
    pub class: ResidueClass,
    pub threshold: u64,
    pub terms: Vec<GenFunTerm>,
}

fn monomial_string(e: &ExponentVector) -> String {
    let vars: Vec<String> = if e.dim() <= 3 {
        ["x", "y", "z"][..e.dim()].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=e.dim()).map(|i| format!("x{i}")).collect()
    };
    let parts: Vec<String> = e
        .coords
        .iter()
        .zip(&vars)
        .filter(|(p, _)| !p.is_zero())
        .map(|(p, v)| if *p == Poly::one() { v.clone() } else if p.is_constant() { format!("{v}^{p}") } else { format!("{v}^({p})") })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for GenFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let c = &term.coeff;
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let mono = monomial_string(&term.num);
            if a.is_one() {
                write!(f, "{mono}")?;
            } else if mono == "1" {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
            if !term.dens.is_empty() {
                let ds: Vec<String> = term.dens.iter().map(|b| format!("(1 - {})", monomial_string(b))).collect();
                write!(f, "/({})", ds.join("*"))?;
            }
        }
        Ok(())
    }
}

impl GenFun {
    pub fn new(dim: usize, class: ResidueClass, threshold: u64, terms: Vec<GenFunTerm>) -> Result<Self> {
        for term in &terms {
            let all = std::iter::once(&term.num).chain(&term.dens);
            for e in all {
                if e.dim() != dim {
                    return Err(Error::Dimension(format!("exponent {e} in a {dim}-dimensional generating function")));
                }
                if !e.is_integer_valued_on(class) {
                    return Err(Error::NotInteger(format!("exponent {e} on {class}")));
                }
            }
            if term.dens.iter().any(ExponentVector::is_zero) {
                return Err(Error::MixedSign);
            }
        }
        Ok(GenFun { dim, class, threshold, terms })
    }

    pub fn zero(dim: usize) -> Self {
        GenFun { dim, class: ResidueClass::ALL, threshold: 0, terms: Vec::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::monomial(ExponentVector::zero(dim))
    }

    pub fn monomial(e: ExponentVector) -> Self {
        GenFun { dim: e.dim(), class: ResidueClass::ALL, threshold: 0, terms: vec![GenFunTerm::monomial(e)] }
    }

    pub fn add(&self, o: &GenFun) -> Result<GenFun> {
        if self.dim != o.dim {
            return Err(Error::Dimension(format!("adding dimensions {} and {}", self.dim, o.dim)));
        }
        let class = if self.class == ResidueClass::ALL { o.class } else { self.class };
        if o.class != ResidueClass::ALL && o.class != class {
            return Err(Error::Invalid(format!("adding generating functions on {} and {}", self.class, o.class)));
        }
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Ok(GenFun { dim: self.dim, class, threshold: self.threshold.max(o.threshold), terms })
    }

    /// The rational function evaluated at a point `x` off its poles.
    pub fn eval_at(&self, t: u64, x: &[BigRational]) -> Result<Option<BigRational>> {
        let pow = |e: &[i64]| -> BigRational {
            e.iter().zip(x).fold(BigRational::one(), |acc, (&k, xi)| {
                let p = num::pow::pow(xi.clone(), k.unsigned_abs() as usize);
                if k < 0 {
                    acc / p
                } else {
                    acc * p
                }
            })
        };
        let mut acc = BigRational::zero();
        for term in &self.terms {
            let mut v = &term.coeff * pow(&term.num.eval(t)?);
            for b in &term.dens {
                let d = BigRational::one() - pow(&b.eval(t)?);
                if d.is_zero() {
                    return Ok(None);
                }
                v /= d;
            }
            acc += v;
        }
        Ok(Some(acc))
    }

    /// Rewrites every eventually lex-negative denominator exponent `b` by
    /// `1/(1 - x^b) = -x^{-b}/(1 - x^{-b})`, certifying each sign.
    pub fn normalize_lex_positive(&self) -> Result<GenFun> {
        let mut threshold = self.threshold;
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let mut coeff = term.coeff.clone();
            let mut num = term.num.clone();
            let mut dens = Vec::with_capacity(term.dens.len());
            for b in &term.dens {
                let (sign, thr) = b.eventual_lex_sign(self.class)?.ok_or(Error::MixedSign)?;
                threshold = threshold.max(thr);
                if sign < 0 {
                    coeff = -coeff;
                    num = num.sub(b);
                    dens.push(b.neg());
                } else {
                    dens.push(b.clone());
                }
            }
            terms.push(GenFunTerm { coeff, num, dens });
        }
        let out = GenFun { dim: self.dim, class: self.class, threshold, terms };
        let point = probe_point(self.dim);
        let first = self.class.members(threshold, u64::MAX).next().unwrap_or(threshold);
        for t in self.class.members(first, first + 3 * self.class.modulus) {
            if self.eval_at(t, &point)? != out.eval_at(t, &point)? {
                return Err(Error::Invalid(format!("normalization changed the function at t = {t}")));
            }
        }
        Ok(out)
    }

    /// True when every denominator exponent is lex-positive at `t`.
    pub fn is_normalized_at(&self, t: u64) -> Result<bool> {
        for term in &self.terms {
            for b in &term.dens {
                let v = b.eval(t)?;
                if v.iter().find(|&&c| c != 0).is_none_or(|&c| c < 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// A point where no nonzero monomial equals one: `x_k = p/q` for distinct
/// primes.
pub(crate) fn probe_point(d: usize) -> Vec<BigRational> {
    const PRIMES: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..d).map(|k| BigRational::new(PRIMES[2 * k % 8].into(), PRIMES[(2 * k + 1) % 8].into())).collect()
}

/// Generating functions per residue class of `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGenFun {
    pub period: u64,
    pub classes: Vec<GenFun>,
}

impl PeriodicGenFun {
    pub fn new(classes: Vec<GenFun>) -> Result<Self> {
        let period = classes.len() as u64;
        for (i, g) in classes.iter().enumerate() {
            if g.class != ResidueClass::new(period, i as u64) && g.class != ResidueClass::ALL {
                return Err(Error::Invalid(format!("class {i} carries {}", g.class)));
            }
        }
        Ok(PeriodicGenFun { period, classes })
    }

    pub fn at(&self, t: u64) -> &GenFun {
        &self.classes[(t % self.period) as usize]
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    num: Vec<String>,
    dens: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct ClassJson {
    modulus: u64,
    residue: u64,
}

#[derive(Serialize, Deserialize)]
struct GenFunJson {
    dim: usize,
    threshold: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<ClassJson>,
    terms: Vec<TermJson>,
}

fn ev_strings(e: &ExponentVector) -> Vec<String> {
    e.coords.iter().map(|p| p.to_string()).collect()
}

fn ev_parse(v: &[String]) -> Result<ExponentVector> {
    Ok(ExponentVector::new(v.iter().map(|s| Poly::parse(s)).collect::<Result<_>>()?))
}

impl Serialize for GenFun {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GenFunJson {
            dim: self.dim,
            threshold: self.threshold,
            class: (self.class != ResidueClass::ALL)
                .then_some(ClassJson { modulus: self.class.modulus, residue: self.class.residue }),
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: rational_to_string(&t.coeff),
                    num: ev_strings(&t.num),
                    dens: t.dens.iter().map(ev_strings).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenFun {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GenFunJson::deserialize(d)?;
        let class = match j.class {
            Some(c) if c.modulus > 0 && c.residue < c.modulus => ResidueClass::new(c.modulus, c.residue),
            Some(_) => return Err(D::Error::custom("invalid residue class")),
            None => ResidueClass::ALL,
        };
        let terms = j
            .terms
            .iter()
            .map(|t| {
                Ok(GenFunTerm {
                    coeff: parse_rational(&t.coeff)?,
                    num: ev_parse(&t.num)?,
                    dens: t.dens.iter().map(|b| ev_parse(b)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        GenFun::new(j.dim, class, j.threshold, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::rat;

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::constant(v)
    }

    #[test]
    fn already_positive_is_unchanged() {
        let g = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0, 0]), vec![ev(&[1, -1])])]).unwrap();
        assert_eq!(g.normalize_lex_positive().unwrap(), g);
    }

    #[test]
    fn negative_factor_flips() {
        let g = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0, 0]), vec![ev(&[-1, 1])])]).unwrap();
        let n = g.normalize_lex_positive().unwrap();
        assert_eq!(n.terms, vec![GenFunTerm::new(rat(-1), ev(&[1, -1]), vec![ev(&[1, -1])])]);
    }

    #[test]
    fn symbolic_flip_and_threshold() {
        // b = (t - 5, 1) is lex-negative for t < 5
        let b = ExponentVector::new(vec![Poly::from_ints(&[-5, 1]), Poly::one()]);
        let g = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0, 0]), vec![b.neg()])]).unwrap();
        let n = g.normalize_lex_positive().unwrap();
        assert_eq!(n.threshold, 6);
        assert_eq!(n.terms[0].dens[0], b);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let r = GenFun::new(1, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0]), vec![ev(&[0])])]);
        assert_eq!(r, Err(Error::MixedSign));
    }

    #[test]
    fn json_round_trip() {
        let g = GenFun::new(
            1,
            ResidueClass::new(2, 1),
            3,
            vec![
                GenFunTerm::new(rat(1), ExponentVector::new(vec![Poly::from_ints(&[1, 1])]), vec![ev(&[1])]),
                GenFunTerm::new(rat(-1), ExponentVector::new(vec![Poly::from_ints(&[3, 2])]), vec![ev(&[1])]),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"dim":1,"threshold":3,"class":{"modulus":2,"residue":1},"terms":[{"coeff":"1/1","num":["t + 1"],"dens":[["1"]]},{"coeff":"-1/1","num":["2*t + 3"],"dens":[["1"]]}]}"#
        );
        let back: GenFun = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.to_string(), "x^(t + 1)/((1 - x)) - x^(2*t + 3)/((1 - x))");
    }
}
