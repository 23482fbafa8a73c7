//! Vertices of `P_t` as rational functions of `t`, valid past a certified
//! threshold.

use serde::Serialize;

use super::fixed::subsets;
use super::ParamPolyhedron;
use crate::error::{Error, Result};
use crate::qpmatrix::{solve_square, PolyMatrix};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::{RationalFunction, ResidueClass};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexDescription {
    pub coords: Vec<RationalFunction>,
    pub active_facets: Vec<usize>,
    pub threshold: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinatorialType {
    pub vertices: Vec<VertexDescription>,
    pub threshold: u64,
    /// A recession direction exists past the threshold.
    pub unbounded: bool,
}

/// Smallest `T` past which `r(t)` is nonzero with its eventual sign.
fn ratfun_threshold(r: &RationalFunction) -> Result<u64> {
    let p = r.numerator() * r.denominator();
    Ok(sign_threshold(&p, ResidueClass::ALL)?.max(sign_threshold(r.denominator(), ResidueClass::ALL)?))
}

/// Enumerates `d`-subsets of the facets, solves each over `Q(t)` and keeps
/// the solutions that eventually satisfy every inequality.
pub fn vertices_symbolic(p: &ParamPolyhedron) -> Result<CombinatorialType> {
    let (a, b) = p.rows();
    let d = p.dim();
    if a.len() > 12 + 2 * d {
        return Err(Error::Dimension(format!("{} facets exceed the cap of 12", a.len())));
    }
    let mut found: Vec<VertexDescription> = Vec::new();
    for s in subsets(a.len(), d) {
        let am = PolyMatrix::new(d, d, s.iter().flat_map(|&i| a[i].clone()).collect())?;
        let bm = PolyMatrix::column(s.iter().map(|&i| b[i].clone()).collect())?;
        let det = am.det()?;
        let x = match solve_square(&am, &bm) {
            Ok(x) => x,
            Err(Error::Singular) => continue,
            Err(e) => return Err(e),
        };
        if found.iter().any(|v| v.coords == x) {
            continue;
        }
        let mut threshold = sign_threshold(&det, ResidueClass::ALL)?;
        let mut active = Vec::new();
        let mut feasible = true;
        for (i, (row, bi)) in a.iter().zip(&b).enumerate() {
            // residual b_i - a_i·x, nonnegative inside
            let mut res = RationalFunction::from_poly(bi.clone());
            for (c, xj) in row.iter().zip(&x) {
                res = res.sub(&xj.mul_poly(c));
            }
            if res.is_zero() {
                active.push(i);
                continue;
            }
            if res.eventual_sign() < 0 {
                feasible = false;
                break;
            }
            threshold = threshold.max(ratfun_threshold(&res)?);
        }
        if feasible {
            found.push(VertexDescription { coords: x, active_facets: active, threshold });
        }
    }
    found.sort_by(|u, v| {
        let key = |w: &VertexDescription| w.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        key(u).cmp(&key(v))
    });
    let threshold = found.iter().map(|v| v.threshold).max().unwrap_or(0);
    let sample = p.at(threshold.max(1) * 2 + 7)?;
    if found.is_empty() && !sample.is_feasible() {
        return Err(Error::Empty);
    }
    let unbounded = sample.is_feasible() && sample.recession_ray().is_some();
    Ok(CombinatorialType { vertices: found, threshold, unbounded })
}

impl CombinatorialType {
    /// Re-derives the vertices of `P_t` numerically and compares them with
    /// the symbolic ones.
    pub fn spot_check(&self, p: &ParamPolyhedron, t: u64) -> Result<bool> {
        let tq = num::BigRational::from_integer(t.into());
        let mut symbolic: Vec<Vec<num::BigRational>> = Vec::new();
        for v in &self.vertices {
            let pt: Option<Vec<_>> = v.coords.iter().map(|c| c.eval(&tq)).collect();
            let pt = pt.ok_or_else(|| Error::Invalid(format!("vertex undefined at t = {t}")))?;
            if !symbolic.contains(&pt) {
                symbolic.push(pt);
            }
        }
        symbolic.sort();
        let numeric: Vec<_> = p.at(t)?.vertices().into_iter().map(|v| v.point).collect();
        Ok(symbolic == numeric)
    }
}
