//! Matrices over quasi-polynomials and integer polynomials: symbolic Smith
//! and Hermite normal forms with mandatory integer cross-checks, and Cramer
//! solves returning rational functions.

pub mod intnf;
mod normal;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qpoly::{parse_qp, Poly, QuasiPolynomial, RationalFunction};

pub use normal::{hermite_normal_form, smith_normal_form, HermiteForm, NormalFormConfig, SmithForm};

/// Row-major matrix of quasi-polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<QuasiPolynomial>,
}

impl QPMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<QuasiPolynomial>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, entries.len())));
        }
        Ok(QPMatrix { rows, cols, entries })
    }

    pub fn from_polys(rows: usize, cols: usize, entries: &[Poly]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().cloned().map(QuasiPolynomial::from_poly).collect())
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| QuasiPolynomial::constant(if k / n == k % n { 1 } else { 0 }))
            .collect();
        QPMatrix { rows: n, cols: n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &QuasiPolynomial {
        &self.entries[i * self.cols + j]
    }

    /// Least common multiple of the entry periods.
    pub fn period(&self) -> u64 {
        self.entries.iter().fold(1, |acc, e| num::integer::lcm(acc, e.period()))
    }

    pub fn eval_integer(&self, t: u64) -> Result<intnf::IntMat> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_integer(t)).collect())
            .collect()
    }

    pub fn mul(&self, o: &QPMatrix) -> Result<QPMatrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut entries = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = QuasiPolynomial::zero();
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * o.get(k, j));
                }
                entries.push(acc);
            }
        }
        QPMatrix::new(self.rows, o.cols, entries)
    }
}

/// Row-major matrix of integer-coefficient polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, entries.len())));
        }
        if let Some(p) = entries.iter().find(|p| !p.has_integer_coeffs()) {
            return Err(Error::Invalid(format!("entry {p} has non-integer coefficients")));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn from_ints(rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&c| Poly::from_int(c)).collect())
    }

    pub fn column(entries: Vec<Poly>) -> Result<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Poly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn eval_integer(&self, t: u64) -> Result<intnf::IntMat> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_integer(t)).collect())
            .collect()
    }

    /// Laplace expansion along the first row.
    pub fn det(&self) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let idx: Vec<usize> = (0..self.cols).collect();
        Ok(laplace(self, 0, &idx))
    }
}

fn laplace(m: &PolyMatrix, row: usize, cols: &[usize]) -> Poly {
    if cols.is_empty() {
        return Poly::one();
    }
    let mut acc = Poly::zero();
    for (k, &c) in cols.iter().enumerate() {
        let e = m.get(row, c);
        if e.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = &laplace(m, row + 1, &rest) * e;
        acc = if k % 2 == 0 { &acc + &minor } else { &acc - &minor };
    }
    acc
}

/// Cramer's rule over `Q(t)`.
pub fn solve_square(a: &PolyMatrix, b: &PolyMatrix) -> Result<Vec<RationalFunction>> {
    if a.rows != a.cols || b.rows != a.rows || b.cols != 1 {
        return Err(Error::Dimension(format!("solve needs d×d and d×1, got {}x{} and {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let d = a.det()?;
    if d.is_zero() {
        return Err(Error::Singular);
    }
    let n = a.rows;
    (0..n)
        .map(|i| {
            let mut ai = a.clone();
            for r in 0..n {
                ai.entries[r * n + i] = b.entries[r].clone();
            }
            RationalFunction::new(ai.det()?, d.clone())
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct MatJson<E> {
    rows: usize,
    cols: usize,
    entries: Vec<E>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Str(String),
    Int(i64),
    Qp(serde_json::Value),
}

fn entry_qp(e: EntryJson) -> Result<QuasiPolynomial> {
    match e {
        EntryJson::Str(s) => parse_qp(&s),
        EntryJson::Int(n) => Ok(QuasiPolynomial::constant(n)),
        EntryJson::Qp(v) => serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string())),
    }
}

impl Serialize for QPMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|q| {
                if q.period() == 1 {
                    serde_json::Value::String(q.constituent(0).to_string())
                } else {
                    serde_json::to_value(q).expect("qp json")
                }
            })
            .collect();
        MatJson { rows: self.rows, cols: self.cols, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QPMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MatJson::<EntryJson>::deserialize(d)?;
        let entries = m.entries.into_iter().map(entry_qp).collect::<Result<Vec<_>>>().map_err(D::Error::custom)?;
        QPMatrix::new(m.rows, m.cols, entries).map_err(D::Error::custom)
    }
}

impl Serialize for PolyMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<String> = self.entries.iter().map(|p| p.to_string()).collect();
        MatJson { rows: self.rows, cols: self.cols, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MatJson::<EntryJson>::deserialize(d)?;
        let entries = m
            .entries
            .into_iter()
            .map(|e| match e {
                EntryJson::Str(s) => Poly::parse(&s),
                EntryJson::Int(n) => Ok(Poly::from_int(n)),
                EntryJson::Qp(_) => Err(Error::Parse("polynomial matrix entries must be strings".into())),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        PolyMatrix::new(m.rows, m.cols, entries).map_err(D::Error::custom)
    }
}

/// Parses a QP matrix from JSON or from rows separated by `;` with entries
/// separated by `,` (e.g. `"t, 0; 0, t+1"`).
pub fn parse_qp_matrix(src: &str) -> Result<QPMatrix> {
    let s = src.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
    }
    let rows: Vec<Vec<QuasiPolynomial>> = s
        .split(';')
        .map(|r| r.split(',').map(|e| Poly::parse(e).map(QuasiPolynomial::from_poly)).collect())
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    QPMatrix::new(rows.len(), cols, rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::{rat, rat_frac};

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn solve_identity() {
        let a = PolyMatrix::from_ints(2, 2, &[1, 0, 0, 1]).unwrap();
        let b = PolyMatrix::column(vec![p(&[1, 1]), p(&[0, 0, 3])]).unwrap();
        let x = solve_square(&a, &b).unwrap();
        assert_eq!(x[0].as_poly().unwrap(), p(&[1, 1]));
        assert_eq!(x[1].as_poly().unwrap(), p(&[0, 0, 3]));
        let s = PolyMatrix::from_ints(2, 2, &[1, 2, 2, 4]).unwrap();
        assert_eq!(solve_square(&s, &b), Err(Error::Singular));
    }

    #[test]
    fn twisted_facet_pair() {
        // 2x + (2t-2)y = t^2-2t+2, (2-2t)x + 2y = -(t^2-2t+2)
        let q = p(&[2, -2, 1]);
        let a = PolyMatrix::new(2, 2, vec![p(&[2]), p(&[-2, 2]), p(&[2, -2]), p(&[2])]).unwrap();
        let b = PolyMatrix::column(vec![q.clone(), -&q]).unwrap();
        let x = solve_square(&a, &b).unwrap();
        assert_eq!(x[0].as_poly().unwrap(), Poly::new(vec![rat(0), rat_frac(1, 2)]));
        assert_eq!(x[1].as_poly().unwrap(), Poly::new(vec![rat(-1), rat_frac(1, 2)]));
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = parse_qp_matrix("t, 0; 0, t+1").unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":["t","0","0","t + 1"]}"#);
        let back: QPMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
