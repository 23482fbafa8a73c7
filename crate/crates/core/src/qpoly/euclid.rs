use num::integer::lcm;
use serde::Serialize;

use super::division::{assemble, numeric_step};
use super::order::sign_threshold;
use super::poly::Poly;
use super::quasi::{EventualQP, QuasiPolynomial, ResidueClass};
use super::DEFAULT_PERIOD_CAP;
use crate::error::{Error, Result};

/// Euclid's loop is bounded; each numeric step strictly shrinks `(deg, |lead|)`
/// after at most two rounds, so hitting this means a bug rather than a hard input.
const MAX_STEPS: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdResult {
    pub d: EventualQP,
    pub p: EventualQP,
    pub q: EventualQP,
}

#[derive(Clone)]
struct Row {
    val: Poly,
    p: Poly,
    q: Poly,
}

impl Row {
    fn minus(&self, k: &Poly, o: &Row) -> Row {
        Row { val: &self.val - &(k * &o.val), p: &self.p - &(k * &o.p), q: &self.q - &(k * &o.q) }
    }

    fn negate(&self) -> Row {
        Row { val: -&self.val, p: -&self.p, q: -&self.q }
    }
}

struct State {
    class: ResidueClass,
    a: Row,
    b: Row,
    steps: usize,
}

/// Per-class gcd with Bézout witnesses.
///
/// Runs Euclid with numeric remainders; the quotients are integer-valued on
/// their classes, so `gcd(a, b)` is invariant and `d = p·f + q·g` holds as a
/// polynomial identity. Only the sign of the final row needs a threshold.
pub fn gcd_bezout(f: &QuasiPolynomial, g: &QuasiPolynomial) -> Result<GcdResult> {
    gcd_bezout_with(f, g, DEFAULT_PERIOD_CAP)
}

pub fn gcd_bezout_with(f: &QuasiPolynomial, g: &QuasiPolynomial, cap: u64) -> Result<GcdResult> {
    let m = lcm(f.period(), g.period());
    let mut ds = Vec::new();
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    let mut threshold = 0;
    for i in 0..m {
        let mut stack = vec![State {
            class: ResidueClass::new(m, i),
            a: Row { val: f.constituent(i).clone(), p: Poly::one(), q: Poly::zero() },
            b: Row { val: g.constituent(i).clone(), p: Poly::zero(), q: Poly::one() },
            steps: 0,
        }];
        while let Some(st) = stack.pop() {
            if st.b.val.is_zero() {
                let a = if st.a.val.eventual_sign() < 0 { st.a.negate() } else { st.a };
                threshold = threshold.max(sign_threshold(&a.val, st.class)?);
                ds.push((st.class, a.val));
                ps.push((st.class, a.p));
                qs.push((st.class, a.q));
                continue;
            }
            if st.steps >= MAX_STEPS {
                return Err(Error::Invalid(format!("Euclid did not terminate on {}", st.class)));
            }
            for piece in numeric_step(&st.a.val, &st.b.val, st.class, cap)? {
                let r = st.a.minus(&piece.poly, &st.b);
                stack.push(State { class: piece.class, a: st.b.clone(), b: r, steps: st.steps + 1 });
            }
        }
    }
    Ok(GcdResult {
        d: EventualQP::new(assemble(&ds, cap)?, threshold),
        p: EventualQP::new(assemble(&ps, cap)?, threshold),
        q: EventualQP::new(assemble(&qs, cap)?, threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Integer;

    fn qp(c: &[i64]) -> QuasiPolynomial {
        QuasiPolynomial::from_poly(Poly::from_ints(c))
    }

    fn check(f: &QuasiPolynomial, g: &QuasiPolynomial, r: &GcdResult, upto: u64) {
        // symbolic identity per class
        let lhs = &(&r.p.qp * f) + &(&r.q.qp * g);
        assert_eq!(lhs, r.d.qp);
        for t in r.d.threshold..upto {
            let (a, b) = (f.eval_integer(t).unwrap(), g.eval_integer(t).unwrap());
            assert_eq!(r.d.qp.eval_integer(t).unwrap(), a.gcd(&b), "t = {t}");
        }
    }

    #[test]
    fn seven_divides_example() {
        let (f, g) = (qp(&[1, 2]), qp(&[6, 5]));
        let r = gcd_bezout(&f, &g).unwrap();
        let want = QuasiPolynomial::new((0..7).map(|i| Poly::from_int(if i == 3 { 7 } else { 1 })).collect()).unwrap();
        assert_eq!(r.d.qp, want);
        check(&f, &g, &r, 300);
    }

    #[test]
    fn equal_arguments() {
        let f = qp(&[2, 1]);
        let r = gcd_bezout(&f, &f).unwrap();
        assert_eq!(r.d.qp, f);
        assert_eq!(&r.p.qp + &r.q.qp, QuasiPolynomial::constant(1));
    }

    #[test]
    fn shift_by_three() {
        let (f, g) = (qp(&[0, 1]), qp(&[3, 1]));
        let r = gcd_bezout(&f, &g).unwrap();
        assert_eq!(r.d.qp, QuasiPolynomial::new(vec![Poly::from_int(3), Poly::one(), Poly::one()]).unwrap());
        check(&f, &g, &r, 301);
    }
}
