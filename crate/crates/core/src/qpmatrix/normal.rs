//! Symbolic normal forms by class-splitting Euclidean pivoting.
//!
//! The work is carried out per residue class with global-variable
//! polynomial entries. Every quotient is integer-valued on its class, so the
//! transforms stay unimodular and the identities hold for every `t`; only
//! signs and reduction ranges need thresholds.

use num::{BigInt, One, Signed};
use serde::Serialize;

use super::intnf;
use super::QPMatrix;
use crate::error::{Error, Result};
use crate::qpoly::division::{assemble, numeric_step, Piece};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::{Poly, ResidueClass, DEFAULT_PERIOD_CAP};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalFormConfig {
    pub max_dim: usize,
    pub period_cap: u64,
    /// Number of consecutive `t ≥ T` checked against the integer oracle.
    pub cross_checks: u64,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        NormalFormConfig { max_dim: 6, period_cap: DEFAULT_PERIOD_CAP, cross_checks: 50 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmithForm {
    pub u: QPMatrix,
    pub d: QPMatrix,
    pub v: QPMatrix,
    pub threshold: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HermiteForm {
    pub u: QPMatrix,
    pub h: QPMatrix,
    pub threshold: u64,
}

const MAX_ROUNDS: usize = 4096;

/// Row-major polynomial matrix in the global variable.
#[derive(Clone)]
struct Mat {
    r: usize,
    c: usize,
    e: Vec<Poly>,
}

impl Mat {
    fn identity(n: usize) -> Mat {
        Mat { r: n, c: n, e: (0..n * n).map(|k| if k / n == k % n { Poly::one() } else { Poly::zero() }).collect() }
    }

    fn at(&self, i: usize, j: usize) -> &Poly {
        &self.e[i * self.c + j]
    }

    fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.e[i * self.c + j] = p;
    }

    /// row_i -= q·row_k
    fn row_sub(&mut self, i: usize, k: usize, q: &Poly) {
        for j in 0..self.c {
            let v = self.at(i, j) - &(q * self.at(k, j));
            self.set(i, j, v);
        }
    }

    /// col_j -= q·col_k
    fn col_sub(&mut self, j: usize, k: usize, q: &Poly) {
        for i in 0..self.r {
            let v = self.at(i, j) - &(q * self.at(i, k));
            self.set(i, j, v);
        }
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.c {
                self.e.swap(a * self.c + j, b * self.c + j);
            }
        }
    }

    fn col_swap(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.r {
                self.e.swap(i * self.c + a, i * self.c + b);
            }
        }
    }

    fn row_neg(&mut self, i: usize) {
        for j in 0..self.c {
            let v = -self.at(i, j);
            self.set(i, j, v);
        }
    }

    fn col_neg(&mut self, j: usize) {
        for i in 0..self.r {
            let v = -self.at(i, j);
            self.set(i, j, v);
        }
    }
}

/// Eventual absolute value; polynomials order by their eventual values.
fn size_key(p: &Poly) -> Poly {
    if p.eventual_sign() < 0 {
        -p
    } else {
        p.clone()
    }
}

#[derive(Clone)]
struct Work {
    class: ResidueClass,
    a: Mat,
    left: Mat,
    right: Mat,
    threshold: u64,
    rounds: usize,
}

impl Work {
    fn with_class(&self, class: ResidueClass) -> Work {
        Work { class, ..self.clone() }
    }

    fn tick(&mut self) -> Result<()> {
        self.rounds += 1;
        if self.rounds > MAX_ROUNDS {
            return Err(Error::Invalid(format!("normal form did not converge on {}", self.class)));
        }
        Ok(())
    }
}

enum Step {
    /// One piece covering the whole class; apply and continue.
    Whole(Piece),
    /// The class splits; the caller re-queues the pieces.
    Split(Vec<Piece>),
}

fn quotient(a: &Poly, b: &Poly, class: ResidueClass, cap: u64) -> Result<Step> {
    let mut ps = numeric_step(a, b, class, cap)?;
    if ps.len() == 1 && ps[0].class == class {
        Ok(Step::Whole(ps.pop().expect("one piece")))
    } else {
        Ok(Step::Split(ps))
    }
}

fn initial_works(a: &QPMatrix, rows_left: usize, cols_right: usize) -> Vec<Work> {
    let m = a.period();
    (0..m)
        .rev()
        .map(|i| Work {
            class: ResidueClass::new(m, i),
            a: Mat { r: a.rows, c: a.cols, e: a.entries.iter().map(|q| q.constituent(i).clone()).collect() },
            left: Mat::identity(rows_left),
            right: Mat::identity(cols_right),
            threshold: 0,
            rounds: 0,
        })
        .collect()
}

fn check_dims(a: &QPMatrix, cfg: &NormalFormConfig) -> Result<()> {
    let got = a.rows.max(a.cols);
    if got > cfg.max_dim {
        return Err(Error::DimensionCap { got, cap: cfg.max_dim });
    }
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if a.entries.iter().any(|q| !q.is_integer_valued()) {
        return Err(Error::Invalid("normal forms need integer-valued entries".into()));
    }
    Ok(())
}

fn assemble_mat(done: &[Work], pick: impl Fn(&Work) -> &Mat, cap: u64) -> Result<QPMatrix> {
    let first = pick(&done[0]);
    let (r, c) = (first.r, first.c);
    let mut entries = Vec::with_capacity(r * c);
    for k in 0..r * c {
        let pieces: Vec<(ResidueClass, Poly)> = done.iter().map(|w| (w.class, pick(w).e[k].clone())).collect();
        entries.push(assemble(&pieces, cap)?);
    }
    QPMatrix::new(r, c, entries)
}

/// Advances an SNF computation on one class until it finishes or splits.
fn smith_run(mut w: Work, cap: u64, queue: &mut Vec<Work>, done: &mut Vec<Work>) -> Result<()> {
    let (r, c) = (w.a.r, w.a.c);
    // split pieces restart from k = 0; settled pivots are fixed points
    let mut k = 0;
    'outer: while k < r.min(c) {
        w.tick()?;
        let pivot = (k..r)
            .flat_map(|i| (k..c).map(move |j| (i, j)))
            .filter(|&(i, j)| !w.a.at(i, j).is_zero())
            .min_by(|&(i1, j1), &(i2, j2)| {
                size_key(w.a.at(i1, j1)).cmp(&size_key(w.a.at(i2, j2))).then((i1, j1).cmp(&(i2, j2)))
            });
        let Some((pi, pj)) = pivot else { break };
        w.a.row_swap(k, pi);
        w.left.row_swap(k, pi);
        w.a.col_swap(k, pj);
        w.right.col_swap(k, pj);
        let p = w.a.at(k, k).clone();
        for i in k + 1..r {
            if w.a.at(i, k).is_zero() {
                continue;
            }
            match quotient(w.a.at(i, k), &p, w.class, cap)? {
                Step::Whole(q) => {
                    w.a.row_sub(i, k, &q.poly);
                    w.left.row_sub(i, k, &q.poly);
                }
                Step::Split(ps) => {
                    for q in ps {
                        let mut s = w.with_class(q.class);
                        s.a.row_sub(i, k, &q.poly);
                        s.left.row_sub(i, k, &q.poly);
                        queue.push(s);
                    }
                    return Ok(());
                }
            }
        }
        for j in k + 1..c {
            if w.a.at(k, j).is_zero() {
                continue;
            }
            match quotient(w.a.at(k, j), &p, w.class, cap)? {
                Step::Whole(q) => {
                    w.a.col_sub(j, k, &q.poly);
                    w.right.col_sub(j, k, &q.poly);
                }
                Step::Split(ps) => {
                    for q in ps {
                        let mut s = w.with_class(q.class);
                        s.a.col_sub(j, k, &q.poly);
                        s.right.col_sub(j, k, &q.poly);
                        queue.push(s);
                    }
                    return Ok(());
                }
            }
        }
        if (k + 1..r).any(|i| !w.a.at(i, k).is_zero()) || (k + 1..c).any(|j| !w.a.at(k, j).is_zero()) {
            continue;
        }
        // divisibility of the trailing block by the pivot
        for i in k + 1..r {
            for j in k + 1..c {
                let e = w.a.at(i, j);
                if e.is_zero() {
                    continue;
                }
                let pieces = numeric_step(e, &p, w.class, cap)?;
                let divides = |q: &Piece| (e - &(&q.poly * &p)).is_zero();
                if pieces.len() > 1 || pieces[0].class != w.class {
                    if pieces.iter().all(divides) {
                        continue;
                    }
                    for q in pieces {
                        queue.push(w.with_class(q.class));
                    }
                    return Ok(());
                }
                if !divides(&pieces[0]) {
                    let neg = -Poly::one();
                    w.a.row_sub(k, i, &neg);
                    w.left.row_sub(k, i, &neg);
                    continue 'outer;
                }
            }
        }
        if w.a.at(k, k).eventual_sign() < 0 {
            w.a.row_neg(k);
            w.left.row_neg(k);
        }
        w.threshold = w.threshold.max(sign_threshold(w.a.at(k, k), w.class)?);
        k += 1;
    }
    done.push(w);
    Ok(())
}

fn check_smith(a: &QPMatrix, f: &SmithForm, n: u64) -> Result<()> {
    for t in f.threshold..f.threshold + n {
        let at = a.eval_integer(t)?;
        let (u, d, v) = (f.u.eval_integer(t)?, f.d.eval_integer(t)?, f.v.eval_integer(t)?);
        let (_, want, _) = intnf::smith(&at);
        if d != want {
            return Err(Error::CrossCheck { t, detail: format!("symbolic D {d:?} vs oracle {want:?}") });
        }
        if intnf::mul(&intnf::mul(&u, &at), &v) != d {
            return Err(Error::CrossCheck { t, detail: "U·A·V != D".into() });
        }
        if intnf::det(&u).abs() != BigInt::one() || intnf::det(&v).abs() != BigInt::one() {
            return Err(Error::CrossCheck { t, detail: "transform not unimodular".into() });
        }
    }
    Ok(())
}

/// Smith normal form `U·A·V = D` valid for `t ≥ T`, cross-checked against
/// the integer oracle.
pub fn smith_normal_form(a: &QPMatrix, cfg: &NormalFormConfig) -> Result<SmithForm> {
    check_dims(a, cfg)?;
    let mut queue = initial_works(a, a.rows, a.cols);
    let mut done = Vec::new();
    while let Some(w) = queue.pop() {
        smith_run(w, cfg.period_cap, &mut queue, &mut done)?;
    }
    let threshold = done.iter().map(|w| w.threshold).max().unwrap_or(0);
    let form = SmithForm {
        u: assemble_mat(&done, |w| &w.left, cfg.period_cap)?,
        d: assemble_mat(&done, |w| &w.a, cfg.period_cap)?,
        v: assemble_mat(&done, |w| &w.right, cfg.period_cap)?,
        threshold,
    };
    check_smith(a, &form, cfg.cross_checks)?;
    Ok(form)
}

fn hermite_run(mut w: Work, cap: u64, queue: &mut Vec<Work>, done: &mut Vec<Work>) -> Result<()> {
    let (r, c) = (w.a.r, w.a.c);
    let mut k = 0;
    for i in 0..r {
        if k == c {
            break;
        }
        loop {
            w.tick()?;
            let pivot = (k..c)
                .filter(|&j| !w.a.at(i, j).is_zero())
                .min_by(|&j1, &j2| size_key(w.a.at(i, j1)).cmp(&size_key(w.a.at(i, j2))).then(j1.cmp(&j2)));
            let Some(pj) = pivot else { break };
            w.a.col_swap(k, pj);
            w.right.col_swap(k, pj);
            let p = w.a.at(i, k).clone();
            let mut dirty = false;
            for j in k + 1..c {
                if w.a.at(i, j).is_zero() {
                    continue;
                }
                match quotient(w.a.at(i, j), &p, w.class, cap)? {
                    Step::Whole(q) => {
                        w.a.col_sub(j, k, &q.poly);
                        w.right.col_sub(j, k, &q.poly);
                        dirty |= !w.a.at(i, j).is_zero();
                    }
                    Step::Split(ps) => {
                        for q in ps {
                            let mut s = w.with_class(q.class);
                            s.a.col_sub(j, k, &q.poly);
                            s.right.col_sub(j, k, &q.poly);
                            queue.push(s);
                        }
                        return Ok(());
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        if w.a.at(i, k).is_zero() {
            continue;
        }
        if w.a.at(i, k).eventual_sign() < 0 {
            w.a.col_neg(k);
            w.right.col_neg(k);
        }
        let p = w.a.at(i, k).clone();
        w.threshold = w.threshold.max(sign_threshold(&p, w.class)?);
        for j in 0..k {
            let e = w.a.at(i, j).clone();
            match quotient(&e, &p, w.class, cap)? {
                Step::Whole(q) => {
                    w.threshold = w.threshold.max(q.threshold);
                    w.a.col_sub(j, k, &q.poly);
                    w.right.col_sub(j, k, &q.poly);
                }
                Step::Split(ps) => {
                    // the subclasses resume from the current state; finished
                    // rows are fixed points of the loop
                    for q in ps {
                        queue.push(w.with_class(q.class));
                    }
                    return Ok(());
                }
            }
        }
        k += 1;
    }
    done.push(w);
    Ok(())
}

fn check_hermite(a: &QPMatrix, f: &HermiteForm, n: u64) -> Result<()> {
    for t in f.threshold..f.threshold + n {
        let at = a.eval_integer(t)?;
        let (u, h) = (f.u.eval_integer(t)?, f.h.eval_integer(t)?);
        let (_, want) = intnf::hermite(&at);
        if h != want {
            return Err(Error::CrossCheck { t, detail: format!("symbolic H {h:?} vs oracle {want:?}") });
        }
        if intnf::mul(&at, &u) != h {
            return Err(Error::CrossCheck { t, detail: "A·U != H".into() });
        }
        if intnf::det(&u).abs() != BigInt::one() {
            return Err(Error::CrossCheck { t, detail: "transform not unimodular".into() });
        }
    }
    Ok(())
}

/// Column-style Hermite form `H = A·U` valid for `t ≥ T`, cross-checked
/// against the integer oracle.
pub fn hermite_normal_form(a: &QPMatrix, cfg: &NormalFormConfig) -> Result<HermiteForm> {
    check_dims(a, cfg)?;
    let mut queue = initial_works(a, 0, a.cols);
    let mut done = Vec::new();
    while let Some(w) = queue.pop() {
        hermite_run(w, cfg.period_cap, &mut queue, &mut done)?;
    }
    let threshold = done.iter().map(|w| w.threshold).max().unwrap_or(0);
    let form = HermiteForm {
        u: assemble_mat(&done, |w| &w.right, cfg.period_cap)?,
        h: assemble_mat(&done, |w| &w.a, cfg.period_cap)?,
        threshold,
    };
    check_hermite(a, &form, cfg.cross_checks)?;
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpmatrix::parse_qp_matrix;
    use crate::qpoly::QuasiPolynomial;

    fn cfg() -> NormalFormConfig {
        NormalFormConfig::default()
    }

    #[test]
    fn diagonal_coprime_pair() {
        let a = parse_qp_matrix("t, 0; 0, t+1").unwrap();
        let f = smith_normal_form(&a, &cfg()).unwrap();
        assert_eq!(f.d.get(0, 0), &QuasiPolynomial::constant(1));
        assert_eq!(f.d.get(1, 1).constituent(0), &Poly::from_ints(&[0, 1, 1]));
        assert_eq!(f.d.period(), 1);
    }

    #[test]
    fn single_entry_is_fixed() {
        let a = parse_qp_matrix("2t+1").unwrap();
        let f = smith_normal_form(&a, &cfg()).unwrap();
        assert_eq!(f.d, a);
        let h = hermite_normal_form(&a, &cfg()).unwrap();
        assert_eq!(h.h, a);
    }

    #[test]
    fn column_gcd_has_period_seven() {
        let a = parse_qp_matrix("2t+1; 5t+6").unwrap();
        let f = smith_normal_form(&a, &cfg()).unwrap();
        assert_eq!(f.d.get(0, 0).period(), 7);
        for t in f.threshold..f.threshold + 100 {
            let g = num::integer::gcd(2 * t + 1, 5 * t + 6);
            assert_eq!(f.d.get(0, 0).eval_integer(t).unwrap(), BigInt::from(g));
        }
    }

    #[test]
    fn hermite_row_gcd() {
        let a = parse_qp_matrix("t, t+3").unwrap();
        let h = hermite_normal_form(&a, &cfg()).unwrap();
        let piv = h.h.get(0, 0);
        assert_eq!(piv.period(), 3);
        for t in h.threshold..h.threshold + 60 {
            assert_eq!(piv.eval_integer(t).unwrap(), BigInt::from(num::integer::gcd(t, t + 3)));
        }
        assert!(h.h.get(0, 1).is_zero());
    }

    #[test]
    fn hermite_reduces_left_entries() {
        let a = parse_qp_matrix("2, 0; t, 1").unwrap();
        let h = hermite_normal_form(&a, &cfg()).unwrap();
        assert_eq!(h.h.get(0, 0), &QuasiPolynomial::constant(2));
        assert_eq!(h.h.get(1, 1), &QuasiPolynomial::constant(1));
        assert!(h.h.get(1, 0).is_zero());
        let id = QPMatrix::identity(3);
        assert_eq!(hermite_normal_form(&id, &cfg()).unwrap().h, id);
    }

    #[test]
    fn dimension_cap() {
        let a = QPMatrix::identity(7);
        assert_eq!(smith_normal_form(&a, &cfg()).unwrap_err(), Error::DimensionCap { got: 7, cap: 6 });
    }

    #[test]
    fn mixed_three_by_three() {
        let a = parse_qp_matrix("t, 2, 0; 0, t, 2; 2, 0, t").unwrap();
        let f = smith_normal_form(&a, &cfg()).unwrap();
        assert!(f.d.period() <= 4);
        hermite_normal_form(&a, &cfg()).unwrap();
        let b = parse_qp_matrix("t, 2, 1; 4, t^2, 3; t+2, 0, 2t").unwrap();
        assert!(matches!(smith_normal_form(&b, &cfg()), Err(Error::PeriodBlowup { .. })));
    }
}
