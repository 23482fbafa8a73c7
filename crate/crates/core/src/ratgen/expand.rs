//! Truncated Laurent expansion of a generating function on a lattice box.

use std::collections::{BTreeMap, HashMap};

use num::{BigRational, Zero};
use rayon::prelude::*;

use super::{GenFun, GenFunTerm};
use crate::error::{Error, Result};

/// Inclusive bounds `[lo_k, hi_k]` per coordinate.
pub type LatticeBox = Vec<(i64, i64)>;

/// Nonzero coefficients on a box, keyed by lattice point.
pub type BoxCoeffs = BTreeMap<Vec<i64>, BigRational>;

fn leading(b: &[i64]) -> Option<usize> {
    b.iter().position(|&c| c != 0).filter(|&k| b[k] > 0)
}

fn expand_term(term: &GenFunTerm, t: u64, bx: &[(i64, i64)]) -> Result<HashMap<Vec<i64>, BigRational>> {
    let q = term.num.eval(t)?;
    let mut dens: Vec<(usize, Vec<i64>)> = Vec::with_capacity(term.dens.len());
    for b in &term.dens {
        let v = b.eval(t)?;
        match leading(&v) {
            Some(l) => dens.push((l, v)),
            None => return Err(Error::NotNormalized(v)),
        }
    }
    dens.sort_by_key(|(l, _)| *l);
    let in_box = |s: &[i64], upto: usize| s[..upto].iter().zip(bx).all(|(x, (lo, hi))| lo <= x && x <= hi);
    let mut states: HashMap<Vec<i64>, BigRational> = HashMap::new();
    states.insert(q, term.coeff.clone());
    for (l, b) in &dens {
        // coordinates before l are final, coordinate l only grows from here
        let mut next: HashMap<Vec<i64>, BigRational> = HashMap::new();
        for (s, c) in states {
            if !in_box(&s, *l) || s[*l] > bx[*l].1 {
                continue;
            }
            let mut cur = s;
            while cur[*l] <= bx[*l].1 {
                *next.entry(cur.clone()).or_insert_with(BigRational::zero) += &c;
                for (x, y) in cur.iter_mut().zip(b) {
                    *x = x.checked_add(*y).ok_or(Error::Overflow)?;
                }
            }
        }
        states = next;
    }
    states.retain(|s, c| in_box(s, s.len()) && !c.is_zero());
    Ok(states)
}

/// Coefficients of the expansion of `g` at `t` restricted to `bx`.
pub fn expand_box(g: &GenFun, t: u64, bx: &[(i64, i64)]) -> Result<BoxCoeffs> {
    if bx.len() != g.dim {
        return Err(Error::Dimension(format!("box of dimension {} for a {}-dimensional function", bx.len(), g.dim)));
    }
    if t < g.threshold || !g.class.contains(t) {
        return Err(Error::Invalid(format!("t = {t} is outside {} past {}", g.class, g.threshold)));
    }
    let parts: Vec<HashMap<Vec<i64>, BigRational>> =
        g.terms.par_iter().map(|term| expand_term(term, t, bx)).collect::<Result<_>>()?;
    let mut out = BoxCoeffs::new();
    for part in parts {
        for (s, c) in part {
            *out.entry(s).or_insert_with(BigRational::zero) += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// Pointwise product of two box expansions.
pub fn hadamard_box(f: &GenFun, g: &GenFun, t: u64, bx: &[(i64, i64)]) -> Result<BoxCoeffs> {
    let ef = expand_box(f, t, bx)?;
    let eg = expand_box(g, t, bx)?;
    Ok(ef.into_iter().filter_map(|(s, a)| eg.get(&s).map(|b| (s, a * b))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::{rat, ResidueClass};
    use crate::ratgen::{ExponentVector, GenFunTerm};

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::constant(v)
    }

    fn series(g: &GenFun, n: i64) -> Vec<i64> {
        let e = expand_box(g, 0, &[(0, n)]).unwrap();
        (0..=n).map(|k| e.get(&vec![k]).map_or(0, |c| c.to_integer().try_into().unwrap())).collect()
    }

    #[test]
    fn empty_function_expands_to_zero() {
        assert!(expand_box(&GenFun::zero(2), 0, &[(0, 3), (0, 3)]).unwrap().is_empty());
    }

    #[test]
    fn hilbert_series_coefficients() {
        let g = GenFun::new(1, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0]), vec![ev(&[1]), ev(&[2]), ev(&[2])])])
            .unwrap();
        assert_eq!(series(&g, 4), vec![1, 1, 3, 3, 6]);
        let sq = hadamard_box(&g, &g, 0, &[(0, 4)]).unwrap();
        let v: Vec<BigRational> = (0..=4).map(|k| sq[&vec![k]].clone()).collect();
        assert_eq!(v, [1, 1, 9, 9, 36].map(rat).to_vec());
    }

    #[test]
    fn negative_leading_is_rejected() {
        let g = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0, 0]), vec![ev(&[0, -1])])]).unwrap();
        assert_eq!(expand_box(&g, 0, &[(0, 2), (0, 2)]), Err(Error::NotNormalized(vec![0, -1])));
    }

    #[test]
    fn mixed_sign_denominator_expands_downward() {
        // y^5/(1 - x y^-1) = Σ x^k y^(5-k)
        let g = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[0, 5]), vec![ev(&[1, -1])])]).unwrap();
        let e = expand_box(&g, 0, &[(0, 10), (-10, 10)]).unwrap();
        assert_eq!(e.len(), 11);
        assert!(e.keys().all(|s| s[0] + s[1] == 5));
    }
}
