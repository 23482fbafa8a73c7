//! Exact convex hulls of lattice points and the integer hull of `P_t`,
//! with a per-class fit of the hull vertices.

use std::cmp::Ordering;

use num::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::ParamPolyhedron;
use crate::error::{Error, Result};
use crate::qpoly::{interpolate, Poly, ResidueClass};

type P2 = (i128, i128);

fn cross(o: P2, a: P2, b: P2) -> i128 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain without collinear points, counter-clockwise.
fn hull2(mut pts: Vec<P2>) -> Vec<P2> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

type P3 = [i128; 3];

fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: P3, b: P3) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Projects coplanar points onto two coordinates without collapsing them.
fn planar_hull(pts: &[P3], normal: P3) -> Vec<P3> {
    let drop = (0..3).max_by_key(|&k| normal[k].abs()).expect("axis");
    let keep: Vec<usize> = (0..3).filter(|&k| k != drop).collect();
    let h = hull2(pts.iter().map(|p| (p[keep[0]], p[keep[1]])).collect());
    pts.iter().filter(|p| h.contains(&(p[keep[0]], p[keep[1]]))).copied().collect()
}

fn hull3(pts: &[P3]) -> Vec<P3> {
    let base = pts[0];
    let dirs: Vec<P3> = pts.iter().map(|&p| sub3(p, base)).collect();
    let normal = dirs.iter().flat_map(|&a| dirs.iter().map(move |&b| cross3(a, b))).find(|n| *n != [0, 0, 0]);
    let Some(n0) = normal else {
        // collinear
        let mut s = pts.to_vec();
        s.sort_unstable();
        return if s.len() > 1 { vec![s[0], s[s.len() - 1]] } else { s };
    };
    if pts.iter().all(|&p| dot3(n0, sub3(p, base)) == 0) {
        return planar_hull(pts, n0);
    }
    // a hull vertex is an endpoint of its fiber along every axis
    let cand: Vec<P3> = pts
        .iter()
        .copied()
        .filter(|p| {
            (0..3).all(|k| {
                let fiber = pts.iter().filter(|q| (0..3).all(|j| j == k || q[j] == p[j]));
                let (mut lo, mut hi) = (p[k], p[k]);
                for q in fiber {
                    lo = lo.min(q[k]);
                    hi = hi.max(q[k]);
                }
                p[k] == lo || p[k] == hi
            })
        })
        .collect();
    let mut verts: Vec<P3> = Vec::new();
    let c = cand.len();
    for i in 0..c {
        for j in i + 1..c {
            for k in j + 1..c {
                let n = cross3(sub3(cand[j], cand[i]), sub3(cand[k], cand[i]));
                if n == [0, 0, 0] {
                    continue;
                }
                let (mut pos, mut neg) = (false, false);
                let mut face = Vec::new();
                for &q in &cand {
                    match dot3(n, sub3(q, cand[i])).cmp(&0) {
                        Ordering::Greater => pos = true,
                        Ordering::Less => neg = true,
                        Ordering::Equal => face.push(q),
                    }
                    if pos && neg {
                        break;
                    }
                }
                if pos && neg {
                    continue;
                }
                for v in planar_hull(&face, n) {
                    if !verts.contains(&v) {
                        verts.push(v);
                    }
                }
            }
        }
    }
    verts.sort_unstable();
    verts
}

/// Vertices of the convex hull of lattice points in dimension 1 to 3, in
/// lexicographic order.
pub fn convex_hull_vertices(points: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let Some(first) = points.first() else { return Err(Error::Empty) };
    let d = first.len();
    let mut out: Vec<Vec<i64>> = match d {
        1 => {
            let lo = points.iter().map(|p| p[0]).min().expect("nonempty");
            let hi = points.iter().map(|p| p[0]).max().expect("nonempty");
            if lo == hi {
                vec![vec![lo]]
            } else {
                vec![vec![lo], vec![hi]]
            }
        }
        2 => hull2(points.iter().map(|p| (p[0] as i128, p[1] as i128)).collect())
            .into_iter()
            .map(|(x, y)| vec![x as i64, y as i64])
            .collect(),
        3 => {
            let mut pts: Vec<P3> = points.iter().map(|p| [p[0] as i128, p[1] as i128, p[2] as i128]).collect();
            pts.sort_unstable();
            pts.dedup();
            hull3(&pts).into_iter().map(|p| p.iter().map(|&x| x as i64).collect()).collect()
        }
        _ => return Err(Error::Dimension(format!("hulls need dimension 1..=3, got {d}"))),
    };
    out.sort_unstable();
    Ok(out)
}

/// Vertices of the convex hull of `P_t ∩ Z^d`.
pub fn integer_hull_vertices(p: &ParamPolyhedron, t: u64) -> Result<Vec<Vec<i64>>> {
    let pts = p.at(t)?.lattice_points()?;
    convex_hull_vertices(&pts)
}

/// Counter-clockwise order around the centroid, starting from the
/// direction of the positive first axis; lexicographic in 1D and 3D.
fn canonical_order(mut verts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    if verts.first().map_or(0, Vec::len) != 2 {
        verts.sort_unstable();
        return verts;
    }
    let n = verts.len() as i128;
    let (sx, sy) = verts.iter().fold((0i128, 0i128), |(a, b), v| (a + v[0] as i128, b + v[1] as i128));
    // n·v - sum keeps the centroid exact
    let rel = |v: &Vec<i64>| (n * v[0] as i128 - sx, n * v[1] as i128 - sy);
    let half = |(x, y): P2| if y > 0 || (y == 0 && x >= 0) { 0 } else { 1 };
    verts.sort_by(|a, b| {
        let (pa, pb) = (rel(a), rel(b));
        half(pa).cmp(&half(pb)).then_with(|| 0.cmp(&(pa.0 * pb.1 - pa.1 * pb.0))).then_with(|| a.cmp(b))
    });
    verts
}

#[derive(Clone, Debug, Serialize)]
pub struct HullVertex {
    /// One polynomial per coordinate, valid on the class past `threshold`.
    pub coords: Vec<Poly>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassHull {
    pub residue: u64,
    pub vertices: Vec<HullVertex>,
    pub threshold: u64,
    pub holdout_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HullFit {
    pub period: u64,
    pub classes: Vec<ClassHull>,
    pub fit: (u64, u64),
    pub holdout: (u64, u64),
}

impl HullFit {
    /// The fitted hull at `t`, in canonical order.
    pub fn eval(&self, t: u64) -> Option<Vec<Vec<BigRational>>> {
        let c = &self.classes[(t % self.period) as usize];
        (t >= c.threshold).then(|| c.vertices.iter().map(|v| v.coords.iter().map(|p| p.eval_u64(t)).collect()).collect())
    }
}

/// Lowest-degree polynomial agreeing with a tail of `pts` of length at
/// least `deg + 2` that starts within the first `max_skip` points.
fn fit_tail(pts: &[(u64, BigRational)], max_degree: usize, max_skip: usize) -> Option<(Poly, usize)> {
    for d in 0..=max_degree {
        if pts.len() < d + 2 {
            return None;
        }
        let p = interpolate(&pts[pts.len() - d - 1..]);
        let mut start = pts.len() - d - 1;
        while start > 0 && p.eval_u64(pts[start - 1].0) == pts[start - 1].1 {
            start -= 1;
        }
        if pts.len() - start >= d + 2 && start <= max_skip {
            return Some((p, start));
        }
    }
    None
}

/// Fits the integer-hull vertices of `P_t` per residue class.
pub fn integer_hull_fit(
    p: &ParamPolyhedron,
    fit: (u64, u64),
    holdout: (u64, u64),
    max_period: u64,
    max_degree: usize,
) -> Result<HullFit> {
    let ts: Vec<u64> = (fit.0..=holdout.1).collect();
    let hulls: Vec<(u64, Vec<Vec<i64>>)> = ts
        .par_iter()
        .map(|&t| Ok((t, canonical_order(integer_hull_vertices(p, t)?))))
        .collect::<Result<_>>()?;
    let in_fit = |t: u64| t >= fit.0 && t <= fit.1;
    let mut unstable: Vec<u64> = Vec::new();
    'period: for m in 1..=max_period {
        let mut classes = Vec::new();
        for r in 0..m {
            let class = ResidueClass::new(m, r);
            let seq: Vec<&(u64, Vec<Vec<i64>>)> = hulls.iter().filter(|(t, _)| class.contains(*t) && in_fit(*t)).collect();
            let Some(last) = seq.last() else { continue 'period };
            let k = last.1.len();
            // the count must settle: find the tail with the final count
            let start = seq.iter().rposition(|(_, h)| h.len() != k).map_or(0, |i| i + 1);
            if seq.len() - start < 3 {
                unstable = seq.iter().map(|(t, h)| (*t, h.len())).filter(|&(_, n)| n != k).map(|(t, _)| t).collect();
                continue 'period;
            }
            let tail = &seq[start..];
            let dim = p.dim();
            let mut vertices = Vec::new();
            let mut first = 0usize;
            for j in 0..k {
                let mut coords = Vec::new();
                for c in 0..dim {
                    let pts: Vec<(u64, BigRational)> =
                        tail.iter().map(|(t, h)| (*t, BigRational::from_integer(h[j][c].into()))).collect();
                    let Some((poly, s)) = fit_tail(&pts, max_degree, pts.len() / 2) else { continue 'period };
                    first = first.max(s);
                    coords.push(poly);
                }
                vertices.push(HullVertex { coords });
            }
            let threshold = tail[first].0;
            let hold: Vec<&(u64, Vec<Vec<i64>>)> =
                hulls.iter().filter(|(t, _)| class.contains(*t) && *t >= holdout.0 && *t <= holdout.1).collect();
            if hold.is_empty() {
                continue 'period;
            }
            for (t, h) in &hold {
                let fitted: Vec<Vec<BigRational>> =
                    vertices.iter().map(|v| v.coords.iter().map(|q| q.eval_u64(*t)).collect()).collect();
                let actual: Vec<Vec<BigRational>> =
                    h.iter().map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
                if fitted != actual {
                    continue 'period;
                }
            }
            classes.push(ClassHull { residue: r, vertices, threshold, holdout_checked: hold.len() });
        }
        return Ok(HullFit { period: m, classes, fit, holdout });
    }
    if !unstable.is_empty() {
        return Err(Error::UnstableVertexCount(unstable));
    }
    Err(Error::NoFit { max_period, max_degree })
}
