//! Frobenius numbers of parametric numerical semigroups.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num::integer::gcd;
use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::props::{FamilyReport, NamedFit, PeriodicSet, Property, Sample, Verdict, WitnessCheck};
use crate::error::{Error, Result};
use crate::qpoly::order::sign_threshold;
use crate::qpoly::{fit_integer_oracle, gcd_bezout, FitSearch, Poly, QuasiPolynomial, ResidueClass};

/// Smallest generators above this are refused.
pub const GENERATOR_CAP: u64 = 1_000_000;

/// Certificates are checked by a direct scan only below this.
const SCAN_LIMIT: i128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemigroupSpec {
    pub generators: Vec<Poly>,
    /// All generators are positive for `t ≥ positive_from`.
    pub positive_from: u64,
}

impl SemigroupSpec {
    pub fn new(generators: Vec<Poly>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("no generators".into()));
        }
        let mut positive_from = 0;
        for g in &generators {
            if !g.has_integer_coeffs() {
                return Err(Error::NotInteger(format!("generator {g}")));
            }
            if g.eventual_sign() <= 0 {
                return Err(Error::Invalid(format!("generator {g} is not eventually positive")));
            }
            positive_from = positive_from.max(sign_threshold(g, ResidueClass::ALL)?);
        }
        Ok(SemigroupSpec { generators, positive_from })
    }

    pub fn values(&self, t: u64) -> Result<Vec<u64>> {
        self.generators
            .iter()
            .map(|g| {
                let v = g.eval_integer(t)?;
                match v.to_u64() {
                    Some(x) if x > 0 => Ok(x),
                    _ => Err(Error::NonPositiveGenerator(t)),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frobenius {
    Number(i128),
    NotCoprime,
    /// 1 is a generator, so every natural number is representable.
    AllCovered,
}

impl Frobenius {
    /// Oracle value: the number itself, `-1` when nothing is missing.
    pub fn value(&self) -> Option<i128> {
        match self {
            Frobenius::Number(n) => Some(*n),
            Frobenius::AllCovered => Some(-1),
            Frobenius::NotCoprime => None,
        }
    }
}

/// Least representable number in each residue class modulo the smallest
/// generator, by Dijkstra over the residues.
fn apery(values: &[u64]) -> Vec<u64> {
    let a = *values.iter().min().expect("nonempty");
    let mut dist = vec![u64::MAX; a as usize];
    dist[0] = 0;
    let mut heap = BinaryHeap::from([Reverse((0u64, 0u64))]);
    while let Some(Reverse((d, r))) = heap.pop() {
        if d > dist[r as usize] {
            continue;
        }
        for &g in values {
            let nr = (r + g) % a;
            let nd = d + g;
            if nd < dist[nr as usize] {
                dist[nr as usize] = nd;
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    dist
}

pub fn frobenius_of(values: &[u64]) -> Result<Frobenius> {
    let a = *values.iter().min().ok_or_else(|| Error::Invalid("no generators".into()))?;
    if a == 0 {
        return Err(Error::Invalid("zero generator".into()));
    }
    if a > GENERATOR_CAP {
        return Err(Error::GeneratorCap(format!("smallest generator {a} exceeds {GENERATOR_CAP}")));
    }
    if values.iter().fold(0, |g, &v| gcd(g, v)) != 1 {
        return Ok(Frobenius::NotCoprime);
    }
    if a == 1 {
        return Ok(Frobenius::AllCovered);
    }
    let dist = apery(values);
    let top = *dist.iter().max().expect("nonempty");
    Ok(Frobenius::Number(i128::from(top) - i128::from(a)))
}

pub fn frobenius_number(s: &SemigroupSpec, t: u64) -> Result<Frobenius> {
    frobenius_of(&s.values(t)?)
}

/// Representability of `0..=n` by a direct scan.
fn representable_upto(values: &[u64], n: usize) -> Vec<bool> {
    let mut ok = vec![false; n + 1];
    ok[0] = true;
    for m in 1..=n {
        ok[m] = values.iter().any(|&g| (g as usize) <= m && ok[m - g as usize]);
    }
    ok
}

/// `F` is missing while `F + 1, …, F + a_min` are all representable.
pub fn certify(values: &[u64], f: i128) -> Option<bool> {
    let a = i128::from(*values.iter().min()?);
    let top = f + a;
    if top > SCAN_LIMIT || f < -1 {
        return None;
    }
    let ok = representable_upto(values, top as usize);
    let missing = f == -1 || !ok[f as usize];
    Some(missing && ((f + 1)..=top).all(|m| ok[m as usize]))
}

/// Coprimality classes from chained gcds, then a fit of the Frobenius number
/// over the coprime classes.
pub fn frobenius_fit(s: &SemigroupSpec, search: &FitSearch) -> Result<FamilyReport> {
    let mut d = QuasiPolynomial::from_poly(s.generators[0].clone());
    let mut threshold = s.positive_from;
    for g in &s.generators[1..] {
        let r = gcd_bezout(&d, &QuasiPolynomial::from_poly(g.clone()))?;
        threshold = threshold.max(r.d.threshold);
        d = r.d.qp;
    }
    let coprime: Vec<u64> = (0..d.period()).filter(|&i| d.constituent(i) == &Poly::one()).collect();
    let existence = PeriodicSet { period: d.period(), residues: coprime.clone(), threshold, fit: None };

    let lo = search.probe_floor.min(search.fit.0).min(search.holdout.0).max(s.positive_from);
    let hi = search.fit.1.max(search.holdout.1);
    let obs: Vec<(u64, Result<(Vec<u64>, Frobenius)>)> = (lo..=hi)
        .into_par_iter()
        .map(|t| (t, s.values(t).and_then(|v| frobenius_of(&v).map(|f| (v, f)))))
        .collect();
    let mut table = Vec::with_capacity(obs.len());
    for (t, r) in obs {
        table.push((t, r?));
    }
    let at = |t: u64| (t >= lo && t <= hi).then(|| &table[(t - lo) as usize].1);

    let mut notes = Vec::new();
    let mut checks = Vec::new();
    let mut samples = Vec::new();
    for (t, (_, f)) in &table {
        let value = match f {
            Frobenius::Number(n) => n.to_string(),
            Frobenius::NotCoprime => "not_coprime".into(),
            Frobenius::AllCovered => "all_covered".into(),
        };
        samples.push(Sample { t: *t, value: Some(value) });
        if *t >= threshold {
            let predicted = coprime.contains(&(t % d.period()));
            checks.push(WitnessCheck { t: *t, what: "coprimality class".into(), passed: predicted == (f != &Frobenius::NotCoprime) });
        }
    }

    let mut fits = Vec::new();
    let mut verdict = Verdict::Supported;
    if coprime.is_empty() {
        notes.push("generators are never coprime past the threshold".into());
    } else {
        match fit_integer_oracle(|t| at(t).and_then(|(_, f)| f.value()), search) {
            Ok(fit) => {
                for r in &fit.holdout {
                    let (v, _) = at(r.t).expect("holdout sampled");
                    let f = r.fitted.to_integer().to_i128().filter(|_| r.fitted.is_integer());
                    match f.and_then(|f| certify(v, f)) {
                        Some(ok) => checks.push(WitnessCheck { t: r.t, what: "frobenius certificate".into(), passed: ok }),
                        None => notes.push(format!("certificate skipped at t = {}", r.t)),
                    }
                }
                if !fit.holdout_exact() {
                    verdict = Verdict::RefutedInWindow;
                }
                fits.push(NamedFit { name: "frobenius".into(), report: fit });
            }
            Err(Error::NoFit { .. }) => {
                verdict = Verdict::RefutedInWindow;
                notes.push("no quasi-polynomial within the fit bounds".into());
            }
            Err(e) => return Err(e),
        }
    }
    if checks.iter().any(|c| !c.passed) {
        verdict = Verdict::RefutedInWindow;
    }
    Ok(FamilyReport {
        property: Property::Frobenius,
        verdict,
        search: search.clone(),
        existence: Some(existence),
        fits,
        samples,
        checks,
        gf_checks: vec![],
        notes,
    })
}
