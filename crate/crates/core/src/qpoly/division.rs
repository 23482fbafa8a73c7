//! Rounding and the two division statements: numeric (eventual range of the
//! remainder) and by degree (leading-coefficient reduction).

use num::integer::lcm;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::Serialize;

use super::order::joint_threshold;
use super::poly::Poly;
use super::quasi::{EventualQP, QuasiPolynomial, ResidueClass};
use super::ratfun::RationalFunction;
use super::DEFAULT_PERIOD_CAP;
use crate::error::{Error, Result};

/// `f/g = h + r` with `h` the polynomial part and `r` proper.
pub fn ratio_limit_poly(f: &Poly, g: &Poly) -> Result<(Poly, RationalFunction)> {
    let (h, r) = f.div_rem(g)?;
    Ok((h, RationalFunction::new(r, g.clone())?))
}

/// A class piece in the global variable: valid on `class` for `t ≥ threshold`.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub class: ResidueClass,
    pub poly: Poly,
    pub threshold: u64,
}

/// Minimal `m` with `h(t+m) - h(t)` integer-valued, so that the fractional
/// part of `h` on integers has period `m`.
fn frac_period(h: &Poly, cap: u64) -> Result<u64> {
    let d = h.denominator_lcm();
    let search = d.to_u64().map_or(cap, |d| d.min(cap));
    for m in 1..=search {
        if !(&d % m).is_zero() {
            continue;
        }
        let shifted = h.compose_linear(&BigRational::one(), &BigRational::from_integer(m.into()));
        if (&shifted - h).is_integer_valued_on(1, 0) {
            return Ok(m);
        }
    }
    Err(Error::PeriodBlowup { period: d.to_u64().unwrap_or(u64::MAX), cap })
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

fn positive(s: i32) -> bool {
    s > 0
}

fn nonnegative(s: i32) -> bool {
    s >= 0
}

/// Constituents and per-class thresholds of `⌊f/g⌋` over all `t ≥ 0`.
fn floor_pieces(f: &Poly, g: &Poly, cap: u64) -> Result<Vec<Piece>> {
    if g.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let (f, g) = if g.eventual_sign() < 0 { (-f, -g) } else { (f.clone(), g.clone()) };
    let (h, r) = f.div_rem(&g)?;
    let m = frac_period(&h, cap)?;
    let r_sign = r.eventual_sign();
    let mut out = Vec::with_capacity(m as usize);
    for i in 0..m {
        let phi = frac(&h.eval_u64(i));
        let c = if phi.is_zero() && r_sign < 0 { -BigRational::one() } else { BigRational::zero() };
        let q = &h + &Poly::constant(c - phi);
        let class = ResidueClass::new(m, i);
        let lower = &f - &(&q * &g);
        let upper = &(&(&q + &Poly::one()) * &g) - &f;
        let threshold = joint_threshold(
            &[(g.clone(), positive as fn(i32) -> bool), (lower, nonnegative), (upper, positive)],
            class,
        )?;
        out.push(Piece { class, poly: q, threshold });
    }
    Ok(out)
}

/// `⌊f/g⌋` restricted to `class`, returned as global-variable pieces on
/// subclasses of `class`.
pub(crate) fn floor_on_class(f: &Poly, g: &Poly, class: ResidueClass, cap: u64) -> Result<Vec<Piece>> {
    let fl = class.to_local(f);
    let gl = class.to_local(g);
    let local = floor_pieces(&fl, &gl, cap)?;
    local
        .into_iter()
        .map(|p| {
            let sub = class.refine(p.class.modulus, p.class.residue);
            if sub.modulus > cap {
                return Err(Error::PeriodBlowup { period: sub.modulus, cap });
            }
            Ok(Piece { class: sub, poly: class.to_global(&p.poly), threshold: class.lift_threshold(p.threshold) })
        })
        .collect()
}

pub(crate) fn assemble(pieces: &[(ResidueClass, Poly)], cap: u64) -> Result<QuasiPolynomial> {
    // over-refined splits are allowed as long as the canonical period fits
    let period = pieces.iter().fold(1u64, |acc, (c, _)| lcm(acc, c.modulus));
    if period > cap.saturating_mul(64) {
        return Err(Error::PeriodBlowup { period, cap });
    }
    let q = QuasiPolynomial::from_classes(pieces)?;
    if q.period() > cap {
        return Err(Error::PeriodBlowup { period: q.period(), cap });
    }
    Ok(q)
}

/// `⌊f(t)/g(t)⌋` as an eventual quasi-polynomial.
pub fn floor_ratio(f: &Poly, g: &Poly) -> Result<EventualQP> {
    floor_ratio_with(f, g, DEFAULT_PERIOD_CAP)
}

pub fn floor_ratio_with(f: &Poly, g: &Poly, cap: u64) -> Result<EventualQP> {
    let pieces = floor_pieces(f, g, cap)?;
    let threshold = pieces.iter().map(|p| p.threshold).max().unwrap_or(0);
    let qp = QuasiPolynomial::new(pieces.into_iter().map(|p| p.poly).collect())?;
    Ok(EventualQP::new(qp, threshold))
}

/// Numeric division: `f = q·g + r` with `0 ≤ r(t) < |g(t)|` for `t ≥ T`.
pub fn divmod_numeric(f: &QuasiPolynomial, g: &QuasiPolynomial) -> Result<(EventualQP, EventualQP)> {
    divmod_numeric_with(f, g, DEFAULT_PERIOD_CAP)
}

pub fn divmod_numeric_with(f: &QuasiPolynomial, g: &QuasiPolynomial, cap: u64) -> Result<(EventualQP, EventualQP)> {
    let m = lcm(f.period(), g.period());
    let mut qs = Vec::new();
    let mut rs = Vec::new();
    let mut threshold = 0;
    for i in 0..m {
        let (fi, gi) = (f.constituent(i), g.constituent(i));
        if gi.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let class = ResidueClass::new(m, i);
        for p in numeric_step(fi, gi, class, cap)? {
            threshold = threshold.max(p.threshold);
            let r = fi - &(&p.poly * gi);
            qs.push((p.class, p.poly));
            rs.push((p.class, r));
        }
    }
    Ok((EventualQP::new(assemble(&qs, cap)?, threshold), EventualQP::new(assemble(&rs, cap)?, threshold)))
}

/// Quotient pieces of the numeric division of `a` by `b` on `class`.
pub(crate) fn numeric_step(a: &Poly, b: &Poly, class: ResidueClass, cap: u64) -> Result<Vec<Piece>> {
    if b.eventual_sign() > 0 {
        floor_on_class(a, b, class, cap)
    } else {
        let mut ps = floor_on_class(a, &-b, class, cap)?;
        for p in &mut ps {
            p.poly = -&p.poly;
        }
        Ok(ps)
    }
}

/// Outcome of the degree division.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum DegreeDivision {
    /// `deg r < deg g` on every class.
    Reduced { q: EventualQP, r: EventualQP },
    /// Some class met a constant quotient step with non-integral ratio; the
    /// pair is the best reached under `(deg, |lead|)`.
    Unreduced { q: EventualQP, r: EventualQP, classes: Vec<u64> },
}

impl DegreeDivision {
    pub fn pair(&self) -> (&EventualQP, &EventualQP) {
        match self {
            DegreeDivision::Reduced { q, r } | DegreeDivision::Unreduced { q, r, .. } => (q, r),
        }
    }
}

struct DegState {
    class: ResidueClass,
    q: Poly,
    r: Poly,
}

/// Degree division by leading-coefficient reduction with residue-class
/// splitting. The identity `f = q·g + r` holds for every `t`.
pub fn divmod_degree(f: &QuasiPolynomial, g: &QuasiPolynomial) -> Result<DegreeDivision> {
    divmod_degree_with(f, g, DEFAULT_PERIOD_CAP)
}

pub fn divmod_degree_with(f: &QuasiPolynomial, g: &QuasiPolynomial, cap: u64) -> Result<DegreeDivision> {
    let m = lcm(f.period(), g.period());
    let mut done = Vec::new();
    let mut unreduced = Vec::new();
    for i in 0..m {
        let gi = g.constituent(i);
        let n = match gi.degree() {
            None => return Err(Error::ZeroDivisor),
            Some(0) => return Err(Error::DegreeZero),
            Some(n) => n,
        };
        let mut stack = vec![DegState { class: ResidueClass::new(m, i), q: Poly::zero(), r: f.constituent(i).clone() }];
        while let Some(mut st) = stack.pop() {
            loop {
                let Some(dr) = st.r.degree().filter(|&d| d >= n) else {
                    done.push(st);
                    break;
                };
                let k = (dr - n) as u32;
                let c = st.r.leading() / gi.leading();
                let rho = BigRational::from_integer(st.class.residue.into());
                if k == 0 {
                    if c.is_integer() {
                        st.q = &st.q + &Poly::constant(c.clone());
                        st.r = &st.r - &gi.scale(&c);
                        continue;
                    }
                    let c0 = c.trunc();
                    st.q = &st.q + &Poly::constant(c0.clone());
                    st.r = &st.r - &gi.scale(&c0);
                    unreduced.push(st.class.residue);
                    done.push(st);
                    break;
                }
                // c·(t-ρ)^k is integer-valued on the class iff c·M^k ∈ Z
                let mk = BigRational::from_integer(BigInt::from(st.class.modulus).pow(k));
                let scaled = &c * &mk;
                if !scaled.is_integer() {
                    let l = scaled.denom().to_u64().ok_or(Error::PeriodBlowup { period: u64::MAX, cap })?;
                    let modulus = st.class.modulus.checked_mul(l).filter(|&p| p <= cap);
                    if modulus.is_none() {
                        return Err(Error::PeriodBlowup { period: st.class.modulus.saturating_mul(l), cap });
                    }
                    for j in (0..l).rev() {
                        stack.push(DegState { class: st.class.refine(l, j), q: st.q.clone(), r: st.r.clone() });
                    }
                    break;
                }
                let term = Poly::new(vec![-rho, BigRational::one()]).pow(k).scale(&c);
                st.r = &st.r - &(&term * gi);
                st.q = &st.q + &term;
            }
        }
    }
    let qs: Vec<_> = done.iter().map(|s| (s.class, s.q.clone())).collect();
    let rs: Vec<_> = done.iter().map(|s| (s.class, s.r.clone())).collect();
    let q = EventualQP::exact(assemble(&qs, cap)?);
    let r = EventualQP::exact(assemble(&rs, cap)?);
    if unreduced.is_empty() {
        Ok(DegreeDivision::Reduced { q, r })
    } else {
        unreduced.sort_unstable();
        unreduced.dedup();
        Ok(DegreeDivision::Unreduced { q, r, classes: unreduced })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::poly::{rat, rat_frac};
    use num::{Integer, Signed};

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    fn qp(c: &[i64]) -> QuasiPolynomial {
        QuasiPolynomial::from_poly(p(c))
    }

    fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
        a.div_floor(b)
    }

    fn check_floor(f: &Poly, g: &Poly, e: &EventualQP, span: u64) {
        for t in e.threshold..e.threshold + span {
            let a = f.eval_integer(t).unwrap();
            let b = g.eval_integer(t).unwrap();
            assert_eq!(e.qp.eval_integer(t).unwrap(), floor_div(&a, &b), "t = {t}");
        }
    }

    #[test]
    fn floor_of_linear_over_constant() {
        let f = p(&[-3, 5]);
        let g = p(&[4]);
        let e = floor_ratio(&f, &g).unwrap();
        assert_eq!(e.qp.period(), 4);
        assert_eq!(e.threshold, 0);
        check_floor(&f, &g, &e, 200);
        assert_eq!(floor_ratio(&Poly::t(), &Poly::one()).unwrap(), EventualQP::exact(qp(&[0, 1])));
    }

    #[test]
    fn floor_of_quadratic_ratio() {
        let f = p(&[1, 0, 1]);
        let g = p(&[1, 2]);
        let e = floor_ratio(&f, &g).unwrap();
        check_floor(&f, &g, &e, 501);
        assert!(floor_ratio(&f, &Poly::zero()).is_err());
    }

    #[test]
    fn floor_with_negative_divisor() {
        let f = p(&[7, 3]);
        let g = p(&[5, -2]);
        let e = floor_ratio(&f, &g).unwrap();
        check_floor(&f, &g, &e, 300);
    }

    #[test]
    fn limit_polynomial() {
        let (h, r) = ratio_limit_poly(&p(&[0, 3, 1]), &p(&[1, 2])).unwrap();
        assert_eq!(h, Poly::new(vec![rat_frac(5, 4), rat_frac(1, 2)]));
        assert_eq!(r, RationalFunction::new(Poly::constant(rat_frac(-5, 4)), p(&[1, 2])).unwrap());
        let (h, r) = ratio_limit_poly(&p(&[2, 1]), &p(&[2, 1])).unwrap();
        assert_eq!(h, Poly::one());
        assert!(r.is_zero());
        // 2·((t-2)/2)·(t^2-2t+2) over 2(t^2-2t+2)
        let q = p(&[2, -2, 1]);
        let (h, r) = ratio_limit_poly(&(&p(&[-2, 1]) * &q), &q.scale(&rat(2))).unwrap();
        assert_eq!(h, Poly::new(vec![rat(-1), rat_frac(1, 2)]));
        assert!(r.is_zero());
    }

    #[test]
    fn numeric_division_examples() {
        let (q, r) = divmod_numeric(&qp(&[-3, 2]), &qp(&[0, 1])).unwrap();
        assert_eq!(q.qp, qp(&[1]));
        assert_eq!(r.qp, qp(&[-3, 1]));
        assert_eq!(q.threshold, 3);

        let f = qp(&[1, 5]);
        let (q, r) = divmod_numeric(&f, &f).unwrap();
        assert_eq!(q.qp, qp(&[1]));
        assert_eq!(r.qp, QuasiPolynomial::zero());

        let f = qp(&[0, 3, 1]);
        let g = qp(&[1, 2]);
        let (q, r) = divmod_numeric(&f, &g).unwrap();
        let t0 = q.threshold.max(r.threshold);
        for t in t0..t0 + 500 {
            let (ft, gt) = (f.eval(t), g.eval(t));
            let (qt, rt) = (q.eval(t), r.eval(t));
            assert_eq!(&qt * &gt + &rt, ft);
            assert!(!rt.is_negative() && rt < gt.abs());
            assert!(qt.is_integer());
        }
        assert_eq!(divmod_numeric(&f, &QuasiPolynomial::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn degree_division_examples() {
        match divmod_degree(&qp(&[-3, 2]), &qp(&[0, 1])).unwrap() {
            DegreeDivision::Reduced { q, r } => {
                assert_eq!(q.qp, qp(&[2]));
                assert_eq!(r.qp, qp(&[-3]));
            }
            other => panic!("{other:?}"),
        }
        let g = qp(&[1, -3, 2]);
        let f = g.scale(&rat(7));
        match divmod_degree(&f, &g).unwrap() {
            DegreeDivision::Reduced { q, r } => {
                assert_eq!(q.qp, qp(&[7]));
                assert!(r.qp.is_zero());
            }
            other => panic!("{other:?}"),
        }
        let d = divmod_degree(&qp(&[6, 5]), &qp(&[1, 2])).unwrap();
        assert!(matches!(d, DegreeDivision::Unreduced { .. }));
        let (q, r) = d.pair();
        assert_eq!(q.qp, qp(&[2]));
        assert_eq!(r.qp, qp(&[4, 1]));
        assert_eq!(divmod_degree(&qp(&[1, 1]), &qp(&[3])), Err(Error::DegreeZero));
    }

    #[test]
    fn degree_division_splits_classes() {
        // t^2 by 2t: quotient t/2 is integer-valued only on even t
        let f = qp(&[0, 0, 1]);
        let g = qp(&[0, 2]);
        let d = divmod_degree(&f, &g).unwrap();
        let (q, r) = d.pair();
        assert!(q.qp.is_integer_valued());
        assert!(r.qp.is_integer_valued());
        assert_eq!(&(&q.qp * &g) + &r.qp, f);
    }
}
