//! Small dense linear algebra over the rationals.

use num::{BigRational, One, Signed, Zero};

pub type RatMat = Vec<Vec<BigRational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let v = &f * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &RatMat) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Unique solution of `a·x = b` for square nonsingular `a`.
pub fn solve(a: &RatMat, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: RatMat = a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    let piv = rref(&mut m);
    if piv.len() != n || piv.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Basis of the right null space.
pub fn nullspace(a: &RatMat, cols: usize) -> Vec<Vec<BigRational>> {
    let mut m = a.clone();
    let piv = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Smallest integer vector on the ray of `v`.
pub fn primitive(v: &[BigRational]) -> Vec<num::BigInt> {
    use num::Integer;
    let l = v.iter().fold(num::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<num::BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(num::BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

type Rows = Vec<(Vec<BigRational>, BigRational)>;

fn eliminate(rows: Rows, k: usize) -> Rows {
    let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for (r, c) in rows {
        if r[k].is_positive() {
            pos.push((r, c));
        } else if r[k].is_negative() {
            neg.push((r, c));
        } else {
            rest.push((r, c));
        }
    }
    for (rp, cp) in &pos {
        for (rn, cn) in &neg {
            let (fp, fn_) = (-&rn[k], rp[k].clone());
            let mut r: Vec<BigRational> = rp.iter().zip(rn).map(|(x, y)| x * &fp + y * &fn_).collect();
            let mut c = cp * &fp + cn * &fn_;
            if let Some(s) = r.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
                r.iter_mut().for_each(|x| *x /= &s);
                c /= &s;
            }
            if !rest.contains(&(r.clone(), c.clone())) {
                rest.push((r, c));
            }
        }
    }
    rest
}

/// Feasibility of `{x : a·x ≤ b}` by Fourier–Motzkin elimination.
pub fn feasible(a: &RatMat, b: &[BigRational]) -> bool {
    let d = a.first().map_or(0, Vec::len);
    let mut rows: Rows = a.iter().cloned().zip(b.iter().cloned()).collect();
    for k in 0..d {
        rows = eliminate(rows, k);
    }
    rows.iter().all(|(_, c)| !c.is_negative())
}

/// Rational projection of `{x : a·x ≤ b}` onto its first `keep` coordinates.
/// Rows left without variables are dropped when satisfied; `None` if one fails.
pub fn project(a: &RatMat, b: &[BigRational], keep: usize) -> Option<(RatMat, Vec<BigRational>)> {
    let d = a.first().map_or(0, Vec::len);
    let mut rows: Rows = a.iter().cloned().zip(b.iter().cloned()).collect();
    for k in (keep..d).rev() {
        rows = eliminate(rows, k);
    }
    let mut out: Rows = Vec::new();
    for (r, c) in rows {
        let r: Vec<BigRational> = r[..keep].to_vec();
        if r.iter().all(Zero::is_zero) {
            if c.is_negative() {
                return None;
            }
        } else if !out.contains(&(r.clone(), c.clone())) {
            out.push((r, c));
        }
    }
    Some(out.into_iter().unzip())
}
