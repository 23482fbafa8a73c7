//! Parametric polyhedra `P_t = {x : A(t)x ≤ b(t)}`: symbolic vertices,
//! lattice-point counts, Ehrhart fits and integer hulls.

pub mod fixed;
mod hull;
mod symbolic;

use std::collections::BTreeMap;

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parse::{lex, Parser, Tok, PARAM};
use crate::qpmatrix::PolyMatrix;
use crate::qpoly::{fit_integer_oracle, FitReport, FitSearch, Poly};

pub use fixed::{Polyhedron, Vertex};
pub use hull::{convex_hull_vertices, integer_hull_fit, integer_hull_vertices, ClassHull, HullFit, HullVertex};
pub use symbolic::{vertices_symbolic, CombinatorialType, VertexDescription};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPolyhedron {
    pub a: PolyMatrix,
    pub b: PolyMatrix,
    /// Conjoin `x ≥ 0`.
    pub nonneg: bool,
    pub vars: Vec<String>,
}

impl ParamPolyhedron {
    pub fn new(a: PolyMatrix, b: PolyMatrix, nonneg: bool) -> Result<Self> {
        if b.cols != 1 || b.rows != a.rows {
            return Err(Error::Dimension(format!("A is {}x{}, b is {}x{}", a.rows, a.cols, b.rows, b.cols)));
        }
        if a.cols == 0 || a.cols > 3 {
            return Err(Error::Dimension(format!("dimension {} outside 1..=3", a.cols)));
        }
        let vars = (1..=a.cols).map(|i| format!("x{i}")).collect();
        Ok(ParamPolyhedron { a, b, nonneg, vars })
    }

    /// `t·P` for the constant polytope `{x : a·x ≤ b}`.
    pub fn dilation(a: &[Vec<i64>], b: &[i64], nonneg: bool) -> Result<Self> {
        let d = a.first().map_or(0, Vec::len);
        let am = PolyMatrix::from_ints(a.len(), d, &a.concat())?;
        let bm = PolyMatrix::column(b.iter().map(|&c| Poly::from_ints(&[0, c])).collect())?;
        Self::new(am, bm, nonneg)
    }

    pub fn dim(&self) -> usize {
        self.a.cols
    }

    /// All rows, the nonnegativity rows last.
    pub fn rows(&self) -> (Vec<Vec<Poly>>, Vec<Poly>) {
        let d = self.dim();
        let mut a: Vec<Vec<Poly>> = (0..self.a.rows).map(|i| self.a.row(i).to_vec()).collect();
        let mut b: Vec<Poly> = (0..self.b.rows).map(|i| self.b.get(i, 0).clone()).collect();
        if self.nonneg {
            for k in 0..d {
                a.push((0..d).map(|j| if j == k { -Poly::one() } else { Poly::zero() }).collect());
                b.push(Poly::zero());
            }
        }
        (a, b)
    }

    pub fn at(&self, t: u64) -> Result<Polyhedron> {
        let (a, b) = self.rows();
        let a = a.iter().map(|r| r.iter().map(|p| p.eval_integer(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        let b = b.iter().map(|p| p.eval_integer(t)).collect::<Result<_>>()?;
        Ok(Polyhedron::new(self.dim(), a, b))
    }

    /// `A` constant and `b(t) = t·b₀`.
    pub fn dilation_base(&self) -> Option<Polyhedron> {
        let (a, b) = self.rows();
        let a0: Option<Vec<Vec<BigInt>>> = a
            .iter()
            .map(|r| r.iter().map(|p| p.constant_value().map(|c| c.to_integer())).collect())
            .collect();
        let b0: Option<Vec<BigInt>> = b
            .iter()
            .map(|p| (p.coeff(0).is_zero() && p.degree().is_none_or(|d| d <= 1)).then(|| p.coeff(1).to_integer()))
            .collect();
        Some(Polyhedron::new(self.dim(), a0?, b0?))
    }

    /// Parses one constraint per line: `lhs (<=|>=|=) rhs`, plus optional
    /// `nonneg` and `vars: a, b` lines; `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self> {
        let mut vars: Option<Vec<String>> = None;
        let mut nonneg = false;
        let mut cons: Vec<(BTreeMap<String, Poly>, Poly, Tok)> = Vec::new();
        for raw in src.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "nonneg" {
                nonneg = true;
                continue;
            }
            if let Some(rest) = line.strip_prefix("vars:") {
                vars = Some(rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
                continue;
            }
            let toks = lex(line)?;
            let mut p = Parser::new(&toks);
            let lhs = p.expr()?;
            let rel = p.bump().ok_or_else(|| Error::Parse(format!("missing relation in {line:?}")))?;
            if !matches!(rel, Tok::Le | Tok::Ge | Tok::Eq) {
                return Err(Error::Parse(format!("polyhedra take <=, >= or =, found {rel:?}")));
            }
            let rhs = p.expr()?;
            if !p.at_end() {
                return Err(Error::Parse(format!("trailing input in {line:?}")));
            }
            let e = lhs.sub(&rhs);
            cons.push((e.terms, -&e.constant, rel));
        }
        let vars = match vars {
            Some(v) => v,
            None => default_vars(cons.iter().flat_map(|(m, _, _)| m.keys().cloned()))?,
        };
        let d = vars.len();
        let mut ar = Vec::new();
        let mut br = Vec::new();
        for (terms, rhs, rel) in cons {
            if let Some(v) = terms.keys().find(|v| !vars.contains(v) && v.as_str() != PARAM) {
                return Err(Error::Parse(format!("unknown variable {v}")));
            }
            let row: Vec<Poly> = vars.iter().map(|v| terms.get(v).cloned().unwrap_or_else(Poly::zero)).collect();
            let neg: Vec<Poly> = row.iter().map(|p| -p).collect();
            match rel {
                Tok::Le => {
                    ar.extend(row);
                    br.push(rhs);
                }
                Tok::Ge => {
                    ar.extend(neg);
                    br.push(-&rhs);
                }
                _ => {
                    ar.extend(row);
                    br.push(rhs.clone());
                    ar.extend(neg);
                    br.push(-&rhs);
                }
            }
        }
        let rows = br.len();
        let mut p = ParamPolyhedron::new(PolyMatrix::new(rows, d, ar)?, PolyMatrix::column(br)?, nonneg)?;
        p.vars = vars;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vars: {}\n", self.vars.join(", "));
        for i in 0..self.a.rows {
            let lhs: Vec<String> = self
                .a
                .row(i)
                .iter()
                .zip(&self.vars)
                .filter(|(p, _)| !p.is_zero())
                .map(|(p, v)| format!("({p})*{v}"))
                .collect();
            let lhs = if lhs.is_empty() { "0".to_string() } else { lhs.join(" + ") };
            out.push_str(&format!("{lhs} <= {}\n", self.b.get(i, 0)));
        }
        if self.nonneg {
            out.push_str("nonneg\n");
        }
        out
    }
}

/// `x1..xd` by index, else `x, y, z`, else first appearance.
fn default_vars(names: impl Iterator<Item = String>) -> Result<Vec<String>> {
    let mut seen: Vec<String> = Vec::new();
    for n in names {
        if n != PARAM && !seen.contains(&n) {
            seen.push(n);
        }
    }
    let indexed: Option<Vec<usize>> = seen.iter().map(|n| n.strip_prefix('x').and_then(|k| k.parse().ok())).collect();
    if let Some(mut idx) = indexed.filter(|v| !v.is_empty()) {
        idx.sort_unstable();
        let d = *idx.last().expect("nonempty");
        if d == 0 || d > 3 {
            return Err(Error::Dimension(format!("variable x{d} outside x1..x3")));
        }
        return Ok((1..=d).map(|i| format!("x{i}")).collect());
    }
    let xyz = ["x", "y", "z"];
    if seen.iter().all(|n| xyz.contains(&n.as_str())) {
        let d = seen.iter().map(|n| xyz.iter().position(|x| x == n).expect("xyz") + 1).max().unwrap_or(0);
        return Ok(xyz[..d].iter().map(|s| s.to_string()).collect());
    }
    Ok(seen)
}

/// `|P_t ∩ Z^d|`.
pub fn count_points(p: &ParamPolyhedron, t: u64) -> Result<u64> {
    p.at(t)?.count_points()
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodClaim {
    /// Smallest `m` with `m·P` integral.
    pub vertex_denominator_lcm: u64,
    pub fitted_period: u64,
    pub equal: bool,
    pub divides: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EhrhartReport {
    pub fit: FitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_claim: Option<PeriodClaim>,
}

/// Fit-and-verify of `t ↦ |P_t ∩ Z^d|`.
pub fn ehrhart_fit(p: &ParamPolyhedron, search: &FitSearch) -> Result<EhrhartReport> {
    let fit = fit_integer_oracle(|t| count_points(p, t).ok().and_then(|c| c.to_i128()), search)?;
    let period_claim = match p.dilation_base() {
        Some(base) => {
            let verts = base.vertices();
            let l = verts
                .iter()
                .flat_map(|v| v.point.iter().map(|x| x.denom().clone()))
                .fold(BigInt::one(), |acc, d| acc.lcm(&d));
            let l = l.to_u64().ok_or(Error::Overflow)?;
            let m = fit.result.qp.period();
            Some(PeriodClaim { vertex_denominator_lcm: l, fitted_period: m, equal: l == m, divides: l % m == 0 })
        }
        None => None,
    };
    Ok(EhrhartReport { fit, period_claim })
}


#[cfg(test)]
mod geometry_tests {
    use super::tests::TWIST;
    use super::*;
    use crate::qpoly::{rat_frac, RationalFunction};
    use num::BigRational;

    fn rf(p: &[(i64, i64)]) -> RationalFunction {
        RationalFunction::from_poly(Poly::new(p.iter().map(|&(n, d)| rat_frac(n, d)).collect()))
    }

    #[test]
    fn box_vertices() {
        let p = ParamPolyhedron::parse("x1 <= t\nx2 <= t\nnonneg").unwrap();
        let ct = vertices_symbolic(&p).unwrap();
        assert_eq!(ct.vertices.len(), 4);
        assert!(!ct.unbounded);
        for t in 1..12 {
            assert!(ct.spot_check(&p, t).unwrap());
        }
    }

    #[test]
    fn twist_vertices() {
        let p = ParamPolyhedron::parse(TWIST).unwrap();
        let ct = vertices_symbolic(&p).unwrap();
        let got: Vec<Vec<RationalFunction>> = ct.vertices.iter().map(|v| v.coords.clone()).collect();
        // (x, y) with x = ±(t-2)/2, y = ±t/2 and the rotated pair
        let a = rf(&[(-1, 1), (1, 2)]);
        let b = rf(&[(0, 1), (1, 2)]);
        let want = [
            vec![a.neg(), b.clone()],
            vec![a.clone(), b.neg()],
            vec![b.clone(), a.clone()],
            vec![b.neg(), a.neg()],
        ];
        assert_eq!(got.len(), 4);
        for w in &want {
            assert!(got.contains(w), "missing {w:?}");
        }
        for t in ct.threshold.max(2)..ct.threshold + 20 {
            assert!(ct.spot_check(&p, t).unwrap());
        }
    }

    #[test]
    fn sven_ray_matches_numeric_vertices() {
        let p = ParamPolyhedron::parse("2*y - x <= -t\nx - y <= 2*t\nnonneg").unwrap();
        let ct = vertices_symbolic(&p).unwrap();
        for t in 5..=20u64.max(ct.threshold) {
            if t >= ct.threshold {
                assert!(ct.spot_check(&p, t).unwrap(), "t = {t}");
            }
        }
    }

    #[test]
    fn twist_octagon_at_five() {
        let p = ParamPolyhedron::parse(TWIST).unwrap();
        let h = integer_hull_vertices(&p, 5).unwrap();
        assert_eq!(h.len(), 8);
        let pts = p.at(5).unwrap().lattice_points().unwrap();
        for v in &h {
            assert!(pts.contains(v));
        }
    }

    #[test]
    fn hull_of_lattice_box() {
        let p = ParamPolyhedron::parse("x1 <= 3\nx2 <= 2\nnonneg").unwrap();
        assert_eq!(integer_hull_vertices(&p, 0).unwrap(), vec![vec![0, 0], vec![0, 2], vec![3, 0], vec![3, 2]]);
    }

    #[test]
    fn cube_hull_has_eight_corners() {
        let p = ParamPolyhedron::parse("x1 <= t\nx2 <= t\nx3 <= t\nnonneg").unwrap();
        assert_eq!(integer_hull_vertices(&p, 3).unwrap().len(), 8);
        let q = ParamPolyhedron::parse("x1 + x2 + x3 <= t\nnonneg").unwrap();
        assert_eq!(integer_hull_vertices(&q, 4).unwrap().len(), 4);
    }

    #[test]
    fn twist_hull_fit() {
        let p = ParamPolyhedron::parse(TWIST).unwrap();
        let f = integer_hull_fit(&p, (3, 40), (41, 60), 4, 3).unwrap();
        assert_eq!(f.period, 2);
        assert_eq!(f.classes[0].vertices.len(), 4);
        assert_eq!(f.classes[1].vertices.len(), 8);
        assert!(f.classes.iter().all(|c| c.holdout_checked == 10));
        let v = f.eval(51).unwrap();
        let h = integer_hull_vertices(&p, 51).unwrap();
        let mut hv: Vec<Vec<BigRational>> = h.iter().map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        let mut vv = v.clone();
        hv.sort();
        vv.sort();
        assert_eq!(hv, vv);
    }
}
