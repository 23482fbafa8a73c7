//! Plain integer normal forms, used as oracles for the symbolic ones.

use num::{BigInt, Integer, One, Signed, Zero};

pub type IntMat = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IntMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mul(a: &IntMat, b: &IntMat) -> IntMat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination.
pub fn det(a: &IntMat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn row_sub(a: &mut IntMat, i: usize, k: usize, q: &BigInt) {
    for j in 0..a[i].len() {
        let v = &a[k][j] * q;
        a[i][j] -= v;
    }
}

fn col_sub(a: &mut IntMat, j: usize, k: usize, q: &BigInt) {
    for row in a.iter_mut() {
        let v = &row[k] * q;
        row[j] -= v;
    }
}

fn col_swap(a: &mut IntMat, i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

/// `(U, D, V)` with `U·A·V = D`, `D` diagonal, nonnegative, `d_i | d_{i+1}`.
pub fn smith(a: &IntMat) -> (IntMat, IntMat, IntMat) {
    let r = a.len();
    let c = a.first().map_or(0, Vec::len);
    let mut d = a.clone();
    let mut u = identity(r);
    let mut v = identity(c);
    for k in 0..r.min(c) {
        loop {
            let Some((pi, pj)) = (k..r)
                .flat_map(|i| (k..c).map(move |j| (i, j)))
                .filter(|&(i, j)| !d[i][j].is_zero())
                .min_by(|&(i1, j1), &(i2, j2)| d[i1][j1].abs().cmp(&d[i2][j2].abs()).then((i1, j1).cmp(&(i2, j2))))
            else {
                return (u, d, v);
            };
            d.swap(k, pi);
            u.swap(k, pi);
            col_swap(&mut d, k, pj);
            col_swap(&mut v, k, pj);
            let mut dirty = false;
            for i in k + 1..r {
                if !d[i][k].is_zero() {
                    let q = d[i][k].div_floor(&d[k][k]);
                    row_sub(&mut d, i, k, &q);
                    row_sub(&mut u, i, k, &q);
                    dirty |= !d[i][k].is_zero();
                }
            }
            for j in k + 1..c {
                if !d[k][j].is_zero() {
                    let q = d[k][j].div_floor(&d[k][k]);
                    col_sub(&mut d, j, k, &q);
                    col_sub(&mut v, j, k, &q);
                    dirty |= !d[k][j].is_zero();
                }
            }
            if dirty {
                continue;
            }
            let bad = (k + 1..r).find(|&i| (k + 1..c).any(|j| !(&d[i][j] % &d[k][k]).is_zero()));
            if let Some(i) = bad {
                let one = -BigInt::one();
                row_sub(&mut d, k, i, &one);
                row_sub(&mut u, k, i, &one);
                continue;
            }
            if d[k][k].is_negative() {
                for x in d[k].iter_mut() {
                    *x = -&*x;
                }
                for x in u[k].iter_mut() {
                    *x = -&*x;
                }
            }
            break;
        }
    }
    (u, d, v)
}

/// `(U, H)` with `H = A·U` in column-style Hermite form: lower echelon,
/// positive pivots, entries left of a pivot reduced into `[0, pivot)`.
pub fn hermite(a: &IntMat) -> (IntMat, IntMat) {
    let r = a.len();
    let c = a.first().map_or(0, Vec::len);
    let mut h = a.clone();
    let mut u = identity(c);
    let mut k = 0;
    for i in 0..r {
        if k == c {
            break;
        }
        loop {
            let Some(pj) = (k..c)
                .filter(|&j| !h[i][j].is_zero())
                .min_by(|&j1, &j2| h[i][j1].abs().cmp(&h[i][j2].abs()).then(j1.cmp(&j2)))
            else {
                break;
            };
            col_swap(&mut h, k, pj);
            col_swap(&mut u, k, pj);
            let mut dirty = false;
            for j in k + 1..c {
                if !h[i][j].is_zero() {
                    let q = h[i][j].div_floor(&h[i][k]);
                    col_sub(&mut h, j, k, &q);
                    col_sub(&mut u, j, k, &q);
                    dirty |= !h[i][j].is_zero();
                }
            }
            if !dirty {
                break;
            }
        }
        if h[i][k].is_zero() {
            continue;
        }
        if h[i][k].is_negative() {
            negate_col(&mut h, k);
            negate_col(&mut u, k);
        }
        for j in 0..k {
            let q = h[i][j].div_floor(&h[i][k]);
            if !q.is_zero() {
                col_sub(&mut h, j, k, &q);
                col_sub(&mut u, j, k, &q);
            }
        }
        k += 1;
    }
    (u, h)
}

fn negate_col(a: &mut IntMat, k: usize) {
    for row in a.iter_mut() {
        row[k] = -&row[k];
    }
}
