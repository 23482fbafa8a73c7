//! A parametric polyhedron frozen at one value of `t`: exact vertex
//! enumeration, boundedness, edges and lattice-point enumeration.

use std::collections::BTreeSet;

use num::{BigInt, BigRational, Integer, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, RatMat};

/// `{x ∈ R^d : a·x ≤ b}` with integer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    pub dim: usize,
    pub a: Vec<Vec<BigInt>>,
    pub b: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub point: Vec<BigRational>,
    /// Rows satisfied with equality.
    pub tight: BTreeSet<usize>,
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl Polyhedron {
    pub fn new(dim: usize, a: Vec<Vec<BigInt>>, b: Vec<BigInt>) -> Self {
        Polyhedron { dim, a, b }
    }

    fn ra(&self) -> RatMat {
        self.a.iter().map(|r| r.iter().cloned().map(BigRational::from_integer).collect()).collect()
    }

    fn rb(&self) -> Vec<BigRational> {
        self.b.iter().cloned().map(BigRational::from_integer).collect()
    }

    /// Row value `a_i·x - b_i` (nonpositive inside).
    pub fn slack(&self, i: usize, x: &[BigRational]) -> BigRational {
        let ai: Vec<BigRational> = self.a[i].iter().cloned().map(BigRational::from_integer).collect();
        linalg::dot(&ai, x) - BigRational::from_integer(self.b[i].clone())
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        (0..self.a.len()).all(|i| !self.slack(i, x).is_positive())
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        self.a.iter().zip(&self.b).all(|(r, bi)| r.iter().zip(x).fold(BigInt::zero(), |acc, (c, v)| acc + c * v) <= *bi)
    }

    pub fn is_feasible(&self) -> bool {
        linalg::feasible(&self.ra(), &self.rb())
    }

    /// Vertices in lexicographic order of their coordinates.
    pub fn vertices(&self) -> Vec<Vertex> {
        let a = self.ra();
        let b = self.rb();
        let mut pts: BTreeSet<Vec<BigRational>> = BTreeSet::new();
        for s in subsets(a.len(), self.dim) {
            let sa: RatMat = s.iter().map(|&i| a[i].clone()).collect();
            let sb: Vec<BigRational> = s.iter().map(|&i| b[i].clone()).collect();
            if let Some(x) = linalg::solve(&sa, &sb) {
                if self.contains(&x) {
                    pts.insert(x);
                }
            }
        }
        pts.into_iter()
            .map(|point| {
                let tight = (0..a.len()).filter(|&i| self.slack(i, &point).is_zero()).collect();
                Vertex { point, tight }
            })
            .collect()
    }

    /// A nonzero recession direction, if any (the polyhedron is assumed
    /// nonempty).
    pub fn recession_ray(&self) -> Option<Vec<BigRational>> {
        let a = self.ra();
        if self.dim == 0 {
            return None;
        }
        if linalg::rank(&a) < self.dim {
            return linalg::nullspace(&a, self.dim).into_iter().next();
        }
        for s in subsets(a.len(), self.dim - 1) {
            let sa: RatMat = s.iter().map(|&i| a[i].clone()).collect();
            let ns = linalg::nullspace(&sa, self.dim);
            if ns.len() != 1 {
                continue;
            }
            for y in [ns[0].clone(), ns[0].iter().map(|x| -x).collect()] {
                if a.iter().all(|r| !linalg::dot(r, &y).is_positive()) {
                    return Some(y);
                }
            }
        }
        None
    }

    pub fn is_bounded(&self) -> bool {
        !self.is_feasible() || self.recession_ray().is_none()
    }

    /// Rows tight on the whole polyhedron (its implicit equalities), given
    /// the vertex list of a bounded polyhedron.
    pub fn implicit_equalities(verts: &[Vertex]) -> BTreeSet<usize> {
        let mut it = verts.iter();
        let Some(first) = it.next() else { return BTreeSet::new() };
        it.fold(first.tight.clone(), |acc, v| acc.intersection(&v.tight).copied().collect())
    }

    /// Dimension of the affine hull of a bounded nonempty polyhedron.
    pub fn affine_dim(verts: &[Vertex]) -> usize {
        let Some(v0) = verts.first() else { return 0 };
        let diffs: RatMat = verts[1..].iter().map(|v| v.point.iter().zip(&v0.point).map(|(x, y)| x - y).collect()).collect();
        if diffs.is_empty() {
            0
        } else {
            linalg::rank(&diffs)
        }
    }

    /// Index pairs of adjacent vertices (rank of the common tight rows is
    /// `dim - 1`).
    pub fn edges(&self, verts: &[Vertex]) -> Vec<(usize, usize)> {
        let a = self.ra();
        let mut out = Vec::new();
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                let common: RatMat = verts[i].tight.intersection(&verts[j].tight).map(|&k| a[k].clone()).collect();
                if !common.is_empty() && linalg::rank(&common) == self.dim - 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Integer box `[lo_k, hi_k]` containing a bounded polyhedron.
    pub fn integer_box(&self) -> Result<Option<Vec<(BigInt, BigInt)>>> {
        if !self.is_feasible() {
            return Ok(None);
        }
        if self.recession_ray().is_some() {
            return Err(Error::Unbounded);
        }
        let verts = self.vertices();
        if verts.is_empty() {
            return Ok(None);
        }
        Ok(Some(
            (0..self.dim)
                .map(|k| {
                    let lo = verts.iter().map(|v| v.point[k].ceil().to_integer()).min().expect("vertex");
                    let hi = verts.iter().map(|v| v.point[k].floor().to_integer()).max().expect("vertex");
                    (lo, hi)
                })
                .collect(),
        ))
    }

    /// Calls `f` on every lattice point, in lexicographic order.
    pub fn for_each_point(&self, mut f: impl FnMut(&[i64])) -> Result<()> {
        let Some(bx) = self.integer_box()? else { return Ok(()) };
        let small = IntRows::new(self)?;
        let bx: Vec<(i64, i64)> = bx
            .iter()
            .map(|(l, h)| Ok((l.to_i64().ok_or(Error::Overflow)?, h.to_i64().ok_or(Error::Overflow)?)))
            .collect::<Result<_>>()?;
        let mut cur = vec![0i64; self.dim];
        small.walk(&bx, 0, &mut cur, &mut f);
        Ok(())
    }

    pub fn count_points(&self) -> Result<u64> {
        let Some(bx) = self.integer_box()? else { return Ok(0) };
        let small = IntRows::new(self)?;
        let bx: Vec<(i64, i64)> = bx
            .iter()
            .map(|(l, h)| Ok((l.to_i64().ok_or(Error::Overflow)?, h.to_i64().ok_or(Error::Overflow)?)))
            .collect::<Result<_>>()?;
        let mut cur = vec![0i64; self.dim];
        Ok(small.count(&bx, 0, &mut cur))
    }

    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        self.for_each_point(|p| out.push(p.to_vec()))?;
        Ok(out)
    }
}

/// Machine-integer copy of the rows for enumeration.
struct IntRows {
    a: Vec<Vec<i128>>,
    b: Vec<i128>,
}

fn div_floor(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

impl IntRows {
    fn new(p: &Polyhedron) -> Result<Self> {
        let conv = |x: &BigInt| x.to_i128().filter(|v| v.abs() < 1 << 60).ok_or(Error::Overflow);
        Ok(IntRows {
            a: p.a.iter().map(|r| r.iter().map(conv).collect()).collect::<Result<_>>()?,
            b: p.b.iter().map(conv).collect::<Result<_>>()?,
        })
    }

    /// Range of coordinate `k` given the earlier ones, from rows whose only
    /// remaining nonzero coefficient is at `k`; other rows are checked when
    /// the point is complete.
    fn range(&self, bx: &[(i64, i64)], k: usize, cur: &[i64]) -> (i128, i128) {
        let (mut lo, mut hi) = (bx[k].0 as i128, bx[k].1 as i128);
        for (r, &b) in self.a.iter().zip(&self.b) {
            if r[k] == 0 || r[k + 1..].iter().any(|&c| c != 0) {
                continue;
            }
            let rest: i128 = (0..k).map(|j| r[j] * cur[j] as i128).sum();
            let rhs = b - rest;
            if r[k] > 0 {
                hi = hi.min(div_floor(rhs, r[k]));
            } else {
                lo = lo.max(div_ceil(rhs, r[k]));
            }
        }
        (lo, hi)
    }

    fn ok(&self, cur: &[i64]) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(r, &b)| r.iter().zip(cur).map(|(&c, &x)| c * x as i128).sum::<i128>() <= b)
    }

    fn walk(&self, bx: &[(i64, i64)], k: usize, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
        let (lo, hi) = self.range(bx, k, cur);
        for x in lo..=hi {
            cur[k] = x as i64;
            if k + 1 == cur.len() {
                if self.ok(cur) {
                    f(cur);
                }
            } else {
                self.walk(bx, k + 1, cur, f);
            }
        }
    }

    fn count(&self, bx: &[(i64, i64)], k: usize, cur: &mut Vec<i64>) -> u64 {
        let (lo, hi) = self.range(bx, k, cur);
        if lo > hi {
            return 0;
        }
        if k + 1 == cur.len() {
            // every row touching the last coordinate went into the range
            let rest_ok = self.a.iter().zip(&self.b).all(|(r, &b)| {
                r[k] != 0 || r[..k].iter().zip(cur.iter()).map(|(&c, &x)| c * x as i128).sum::<i128>() <= b
            });
            return if rest_ok { (hi - lo + 1) as u64 } else { 0 };
        }
        let mut total = 0;
        for x in lo..=hi {
            cur[k] = x as i64;
            total += self.count(bx, k + 1, cur);
        }
        total
    }
}
