//! Generating functions of simplicial cones by fundamental-parallelepiped
//! enumeration, Brion sums over vertex cones and vector partition
//! functions.

use num::{BigRational, Integer, One, Signed, ToPrimitive};

use super::{ExponentVector, GenFun, GenFunTerm};
use crate::error::{Error, Result};
use crate::linalg;
use crate::parampoly::fixed::{subsets, Polyhedron};
use crate::parampoly::ParamPolyhedron;
use crate::qpoly::{interpolate, Poly, RationalFunction, ResidueClass};

const DET_CAP: u128 = 1_000_000;
const BOX_CAP: u128 = 10_000_000;

fn det(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

/// `adj` with `m · adj = det(m) · I`.
fn adjugate(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i128>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = s * det(&minor);
        }
    }
    adj
}

/// Lattice points of `v + {Σ μ_j u_j : 0 ≤ μ_j < 1}` for linearly
/// independent `u_j`.
fn parallelepiped_points(apex: &[BigRational], gens: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let d = apex.len();
    let k = gens.len();
    let ratgens: Vec<Vec<BigRational>> =
        gens.iter().map(|g| g.iter().map(|&c| BigRational::from_integer(c.into())).collect()).collect();
    if gens.iter().any(|g| g.len() != d) {
        return Err(Error::Dimension(format!("cone generators must have dimension {d}")));
    }
    if linalg::rank(&ratgens) < k {
        return Err(Error::NotSimplicial);
    }
    // columns are generators
    let u = |i: usize, j: usize| gens[j][i] as i128;
    let (rows, minor, dm) = subsets(d, k)
        .into_iter()
        .map(|r| {
            let m: Vec<Vec<i128>> = r.iter().map(|&i| (0..k).map(|j| u(i, j)).collect()).collect();
            let dm = det(&m);
            (r, m, dm)
        })
        .filter(|x| x.2 != 0)
        .min_by_key(|x| x.2.unsigned_abs())
        .ok_or(Error::NotSimplicial)?;
    if dm.unsigned_abs() > DET_CAP {
        return Err(Error::VolumeCap { size: dm.unsigned_abs(), cap: DET_CAP });
    }
    let adj = adjugate(&minor);
    let l = apex.iter().fold(num::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let lv: Vec<i128> = apex
        .iter()
        .map(|x| (x * BigRational::from_integer(l.clone())).to_integer().to_i128().ok_or(Error::Overflow))
        .collect::<Result<_>>()?;
    let l = l.to_i128().ok_or(Error::Overflow)?;
    let ranges: Vec<(i128, i128)> = rows
        .iter()
        .map(|&i| {
            let neg: i128 = (0..k).map(|j| u(i, j).min(0)).sum();
            let pos: i128 = (0..k).map(|j| u(i, j).max(0)).sum();
            (Integer::div_ceil(&(lv[i] + l * neg), &l), Integer::div_floor(&(lv[i] + l * pos), &l))
        })
        .collect();
    let size = ranges.iter().fold(1u128, |acc, (lo, hi)| acc.saturating_mul((hi - lo + 1).max(0) as u128));
    if size > BOX_CAP {
        return Err(Error::VolumeCap { size, cap: BOX_CAP });
    }
    let big_d = dm * l;
    let mut out = Vec::new();
    let mut sr = vec![0i128; k];
    let mut idx: Vec<i128> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return Ok(out);
    }
    'outer: loop {
        sr.copy_from_slice(&idx);
        // m = adj · (L s_R - L v_R) = μ · det · L
        let w: Vec<i128> = (0..k).map(|a| l * sr[a] - lv[rows[a]]).collect();
        let m: Vec<i128> = (0..k).map(|a| (0..k).map(|b| adj[a][b] * w[b]).sum()).collect();
        let inside = m.iter().all(|&mj| if big_d > 0 { 0 <= mj && mj < big_d } else { big_d < mj && mj <= 0 });
        if inside {
            let mut s = vec![0i64; d];
            let mut ok = true;
            for i in 0..d {
                if let Some(a) = rows.iter().position(|&r| r == i) {
                    s[i] = sr[a] as i64;
                    continue;
                }
                // D·s_i = det·L v_i + Σ_j u_ij m_j
                let num: i128 = dm * lv[i] + (0..k).map(|j| u(i, j) * m[j]).sum::<i128>();
                if num % big_d != 0 {
                    ok = false;
                    break;
                }
                s[i] = (num / big_d) as i64;
            }
            if ok {
                out.push(s);
            }
        }
        for a in (0..k).rev() {
            if idx[a] < ranges[a].1 {
                idx[a] += 1;
                continue 'outer;
            }
            idx[a] = ranges[a].0;
        }
        break;
    }
    out.sort_unstable();
    Ok(out)
}

/// Generating function of `v + cone(U)` at one value of `t`; the
/// denominators are the generators as given (not normalized).
pub fn cone_genfun_at(apex: &[BigRational], gens: &[Vec<i64>]) -> Result<GenFun> {
    let pts = parallelepiped_points(apex, gens)?;
    let dens: Vec<ExponentVector> = gens.iter().map(|g| ExponentVector::constant(g)).collect();
    let terms = pts.iter().map(|s| GenFunTerm::new(BigRational::one(), ExponentVector::constant(s), dens.clone())).collect();
    GenFun::new(apex.len(), ResidueClass::ALL, 0, terms)
}

/// A cone generating function over a residue class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeGenFun {
    /// The parallelepiped points follow polynomials on the class; fitted and
    /// checked on `verified`.
    Symbolic { gf: GenFun, verified: Vec<u64> },
    /// No pattern found; one numeric function per sampled `t`.
    PerT(Vec<(u64, GenFun)>),
}

/// Lowest-degree polynomial through the first few samples that matches
/// them all.
fn fit_all(pts: &[(u64, BigRational)]) -> Option<Poly> {
    (0..pts.len().div_ceil(2)).map(|deg| interpolate(&pts[..=deg])).find(|p| pts.iter().all(|(t, v)| p.eval_u64(*t) == *v))
}

/// Cone with a polynomial-in-`t` apex and generators, sampled on the class
/// members in `window`.
pub fn cone_genfun(
    apex: &[RationalFunction],
    gens: &[ExponentVector],
    class: ResidueClass,
    window: (u64, u64),
) -> Result<ConeGenFun> {
    let ts: Vec<u64> = class.members(window.0, window.1 + 1).collect();
    if ts.is_empty() {
        return Err(Error::Invalid(format!("no member of {class} in {window:?}")));
    }
    let mut per_t = Vec::with_capacity(ts.len());
    for &t in &ts {
        let v: Vec<BigRational> = apex
            .iter()
            .map(|c| c.eval_u64(t).ok_or_else(|| Error::Invalid(format!("apex undefined at t = {t}"))))
            .collect::<Result<_>>()?;
        let u: Vec<Vec<i64>> = gens.iter().map(|g| g.eval(t)).collect::<Result<_>>()?;
        per_t.push((t, parallelepiped_points(&v, &u)?));
    }
    let n = per_t[0].1.len();
    let d = apex.len();
    let symbolic = (ts.len() >= 3 && per_t.iter().all(|(_, p)| p.len() == n))
        .then(|| {
            (0..n)
                .map(|j| {
                    let coords = (0..d)
                        .map(|c| {
                            let pts: Vec<(u64, BigRational)> =
                                per_t.iter().map(|(t, p)| (*t, BigRational::from_integer(p[j][c].into()))).collect();
                            fit_all(&pts).filter(|q| q.is_integer_valued_on(class.modulus, class.residue))
                        })
                        .collect::<Option<Vec<Poly>>>()?;
                    Some(ExponentVector::new(coords))
                })
                .collect::<Option<Vec<_>>>()
        })
        .flatten();
    match symbolic {
        Some(nums) => {
            let terms = nums.into_iter().map(|q| GenFunTerm::new(BigRational::one(), q, gens.to_vec())).collect();
            Ok(ConeGenFun::Symbolic { gf: GenFun::new(d, class, ts[0], terms)?, verified: ts })
        }
        None => Ok(ConeGenFun::PerT(
            per_t
                .into_iter()
                .map(|(t, pts)| {
                    let dens: Vec<ExponentVector> = gens.iter().map(|g| Ok(ExponentVector::constant(&g.eval(t)?))).collect::<Result<_>>()?;
                    let terms = pts.iter().map(|s| GenFunTerm::new(BigRational::one(), ExponentVector::constant(s), dens.clone())).collect();
                    Ok((t, GenFun::new(d, ResidueClass::ALL, 0, terms)?))
                })
                .collect::<Result<_>>()?,
        )),
    }
}

/// Brion's sum over the vertex cones of `P_t`, normalized lex-positive.
pub fn brion_polytope_genfun(p: &ParamPolyhedron, t: u64) -> Result<GenFun> {
    brion_fixed(&p.at(t)?)
}

pub(crate) fn brion_fixed(poly: &Polyhedron) -> Result<GenFun> {
    let d = poly.dim;
    if !poly.is_feasible() {
        return Ok(GenFun::zero(d));
    }
    if poly.recession_ray().is_some() {
        return Err(Error::Unbounded);
    }
    let verts = poly.vertices();
    if verts.iter().any(|v| v.point.iter().any(Signed::is_negative)) {
        return Err(Error::NegativeOrthant);
    }
    let k = Polyhedron::affine_dim(&verts);
    if k == 0 {
        let v = &verts[0].point;
        if !v.iter().all(BigRational::is_integer) {
            return Ok(GenFun::zero(d));
        }
        let s: Vec<i64> = v.iter().map(|x| x.to_integer().to_i64().ok_or(Error::Overflow)).collect::<Result<_>>()?;
        return Ok(GenFun::monomial(ExponentVector::constant(&s)));
    }
    let edges = poly.edges(&verts);
    let mut total = GenFun::zero(d);
    for (i, v) in verts.iter().enumerate() {
        let rays: Vec<Vec<i64>> = edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .map(|j| {
                let diff: Vec<BigRational> = verts[j].point.iter().zip(&v.point).map(|(w, x)| w - x).collect();
                linalg::primitive(&diff).iter().map(|c| c.to_i64().ok_or(Error::Overflow)).collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        if rays.len() != k {
            return Err(Error::NotSimple);
        }
        let cone = cone_genfun_at(&v.point, &rays).map_err(|e| if e == Error::NotSimplicial { Error::NotSimple } else { e })?;
        total = total.add(&cone)?;
    }
    total.normalize_lex_positive()
}

/// `1/Π(1 - y^{a_i})` in dimension `n`.
pub fn vpf_genfun(gens: &[Vec<u64>]) -> Result<GenFun> {
    let n = gens.first().map_or(1, Vec::len);
    let dens: Vec<ExponentVector> = gens
        .iter()
        .map(|a| ExponentVector::new(a.iter().map(|&c| Poly::from_int(c as i64)).collect()))
        .collect();
    if dens.iter().any(|b| b.is_zero()) {
        return Err(Error::Invalid("zero generator".into()));
    }
    GenFun::new(n, ResidueClass::ALL, 0, vec![GenFunTerm::new(BigRational::one(), ExponentVector::zero(n), dens)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::rat;
    use crate::ratgen::expand_box;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&c| rat(c)).collect()
    }

    #[test]
    fn skew_cone_numerator() {
        let g = cone_genfun_at(&q(&[0, 0]), &[vec![1, 0], vec![1, 2]]).unwrap();
        let nums: Vec<Vec<i64>> = g.terms.iter().map(|t| t.num.eval(0).unwrap()).collect();
        assert_eq!(nums, vec![vec![0, 0], vec![1, 1]]);
        // oracle: points λ1(1,0) + λ2(1,2) with λ ≥ 0 are y even, x ≥ y/2 ... or y odd, x ≥ (y+1)/2
        let e = expand_box(&g, 0, &[(0, 8), (0, 8)]).unwrap();
        for x in 0..=8i64 {
            for y in 0..=8i64 {
                let inside = 2 * x >= y;
                assert_eq!(e.contains_key(&vec![x, y]), inside, "({x}, {y})");
            }
        }
    }

    #[test]
    fn unit_cone() {
        let g = cone_genfun_at(&q(&[0, 0, 0]), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(g.to_string(), "1/((1 - x)*(1 - y)*(1 - z))");
    }

    #[test]
    fn dependent_generators() {
        assert_eq!(cone_genfun_at(&q(&[0, 0]), &[vec![1, 1], vec![2, 2]]), Err(Error::NotSimplicial));
    }

    #[test]
    fn rational_apex_ray() {
        // 1/2 + λ(1) ∩ Z starts at 1
        let g = cone_genfun_at(&[BigRational::new(1.into(), 2.into())], &[vec![1]]).unwrap();
        assert_eq!(g.to_string(), "x/((1 - x))");
    }

    #[test]
    fn segment_by_brion() {
        let p = ParamPolyhedron::parse("x + y = 1000\nnonneg\n").unwrap();
        let g = brion_polytope_genfun(&p, 0).unwrap();
        assert_eq!(g.to_string(), "y^1000/((1 - x*y^-1)) - x^1001*y^-1/((1 - x*y^-1))");
        let e = expand_box(&g, 0, &[(0, 1000), (0, 1000)]).unwrap();
        assert_eq!(e.len(), 1001);
        assert!(e.iter().all(|(s, c)| s[0] + s[1] == 1000 && *c == rat(1)));
    }

    #[test]
    fn single_point() {
        let p = ParamPolyhedron::parse("x <= 0\nnonneg\n").unwrap();
        assert_eq!(brion_polytope_genfun(&p, 3).unwrap().to_string(), "1");
    }

    #[test]
    fn pyramid_is_not_simple() {
        let p = ParamPolyhedron::parse("x + z <= 2\nx - z >= 0\ny + z <= 2\ny - z >= 0\nnonneg\n").unwrap();
        assert_eq!(brion_polytope_genfun(&p, 0), Err(Error::NotSimple));
    }

    #[test]
    fn negative_orthant() {
        let p = ParamPolyhedron::parse("x >= -1\nx <= 1\n").unwrap();
        assert_eq!(brion_polytope_genfun(&p, 0), Err(Error::NegativeOrthant));
    }

    #[test]
    fn symbolic_ray_apex() {
        let apex = vec![RationalFunction::from_poly(Poly::from_ints(&[1, 1]))];
        let c = cone_genfun(&apex, &[ExponentVector::constant(&[2])], ResidueClass::ALL, (0, 10)).unwrap();
        let ConeGenFun::Symbolic { gf, verified } = c else { panic!("expected a symbolic cone") };
        assert_eq!(verified.len(), 11);
        assert_eq!(gf.to_string(), "x^(t + 1)/((1 - x^2)) + x^(t + 2)/((1 - x^2))");
    }

    #[test]
    fn vpf_two_dimensional() {
        let g = vpf_genfun(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let e = expand_box(&g, 0, &[(0, 2), (0, 2)]).unwrap();
        // λ3 ∈ {0, 1, 2} fixes λ1 = λ2 = 2 - λ3
        assert_eq!(e[&vec![2, 2]], rat(3));
    }
}
