//! Monomial substitutions on exponents and the eventual lexicographically
//! minimal term.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::Serialize;

use super::{ExponentVector, GenFun, GenFunTerm};
use crate::error::{Error, Result};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::Poly;

/// Replaces every exponent `e` by `M·e`.
pub fn transform_exponents(g: &GenFun, m: &[Vec<i64>]) -> Result<GenFun> {
    if m.iter().any(|r| r.len() != g.dim) {
        return Err(Error::Dimension(format!("matrix rows must have length {}", g.dim)));
    }
    let apply = |e: &ExponentVector| {
        ExponentVector::new(
            m.iter()
                .map(|row| row.iter().zip(&e.coords).fold(Poly::zero(), |acc, (&c, p)| &acc + &(&Poly::from_int(c) * p)))
                .collect(),
        )
    };
    let terms = g
        .terms
        .iter()
        .map(|t| GenFunTerm::new(t.coeff.clone(), apply(&t.num), t.dens.iter().map(apply).collect()))
        .collect();
    GenFun::new(m.len(), g.class, g.threshold, terms)
}

/// `φ(x) = (-c·x, x_2, …, x_d)`.
pub fn phi_matrix(c: &[i64]) -> Vec<Vec<i64>> {
    let d = c.len();
    let mut m = vec![c.iter().map(|x| -x).collect::<Vec<_>>()];
    for i in 1..d {
        let mut row = vec![0; d];
        row[i] = 1;
        m.push(row);
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexMin {
    pub exponent: Vec<Poly>,
    #[serde(serialize_with = "crate::qpoly::poly::ser_rational")]
    pub coeff: BigRational,
    pub threshold: u64,
}

/// The eventual lex-min term of the expansion: the least numerator exponent
/// whose merged coefficient is nonzero, provided it is the least of all.
pub fn lexmin_term(g: &GenFun) -> Result<LexMin> {
    let mut threshold = g.threshold;
    for term in &g.terms {
        for b in &term.dens {
            match b.eventual_lex_sign(g.class)? {
                Some((s, thr)) if s > 0 => threshold = threshold.max(thr),
                Some(_) => return Err(Error::NotNormalized(b.eval(g.class.residue)?)),
                None => return Err(Error::MixedSign),
            }
        }
    }
    let mut merged: BTreeMap<&ExponentVector, BigRational> = BTreeMap::new();
    for term in &g.terms {
        *merged.entry(&term.num).or_insert_with(BigRational::zero) += &term.coeff;
    }
    let mut it = merged.iter();
    let Some((min, c)) = it.next() else { return Err(Error::Tie) };
    if c.is_zero() {
        return Err(Error::Tie);
    }
    for (other, _) in it {
        let diff = other.sub(min).coords.into_iter().find(|p| !p.is_zero()).expect("distinct exponents");
        threshold = threshold.max(sign_threshold(&diff, g.class)?);
    }
    Ok(LexMin { exponent: min.coords.clone(), coeff: c.clone(), threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::{rat, ResidueClass};
    use crate::ratgen::{cone_genfun_at, expand_box};

    #[test]
    fn identity_transform() {
        let g = cone_genfun_at(&[rat(0), rat(1)], &[vec![1, 0], vec![1, 2]]).unwrap();
        assert_eq!(transform_exponents(&g, &[vec![1, 0], vec![0, 1]]).unwrap(), g);
    }

    #[test]
    fn doubling_halves_density() {
        let g = GenFun::new(1, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ExponentVector::zero(1), vec![ExponentVector::constant(&[1])])])
            .unwrap();
        let h = transform_exponents(&g, &[vec![2]]).unwrap();
        assert_eq!(h.to_string(), "1/((1 - x^2))");
        let e = expand_box(&h, 0, &[(0, 9)]).unwrap();
        assert_eq!(e.keys().map(|k| k[0]).collect::<Vec<_>>(), vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn phi_negates_in_one_dimension() {
        assert_eq!(phi_matrix(&[1]), vec![vec![-1]]);
        assert_eq!(phi_matrix(&[2, 3]), vec![vec![-2, -3], vec![0, 1]]);
    }

    #[test]
    fn single_monomial() {
        let q = ExponentVector::new(vec![Poly::from_ints(&[0, 0, 1]), Poly::from_int(-2)]);
        let m = lexmin_term(&GenFun::monomial(q.clone())).unwrap();
        assert_eq!(m.exponent, q.coords);
    }

    #[test]
    fn cone_apex_is_minimal() {
        let g = cone_genfun_at(&[rat(0), rat(0)], &[vec![1, 0], vec![1, 2]]).unwrap();
        let m = lexmin_term(&g).unwrap();
        assert_eq!(m.exponent, vec![Poly::zero(), Poly::zero()]);
        let e = expand_box(&g, 0, &[(0, 5), (0, 5)]).unwrap();
        assert_eq!(e.keys().next(), Some(&vec![0, 0]));
    }

    #[test]
    fn cancelled_minimum_is_a_tie() {
        let one = ExponentVector::constant(&[1]);
        let g = GenFun::new(
            1,
            ResidueClass::ALL,
            0,
            vec![
                GenFunTerm::new(rat(1), ExponentVector::zero(1), vec![one.clone()]),
                GenFunTerm::new(rat(-1), ExponentVector::zero(1), vec![one]),
            ],
        )
        .unwrap();
        assert_eq!(lexmin_term(&g), Err(Error::Tie));
    }
}
