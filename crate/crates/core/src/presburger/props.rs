//! Empirical checkers for Properties 1–4 over a window of `t`.

use num::{BigRational, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{pieces_at, sample_set, Cardinality, Compiled, Membership};
use super::formula::Family;
use crate::error::{Error, Result};
use crate::qpoly::{fit_integer_oracle, FitReport, FitSearch, Poly};
use crate::ratgen::brion_fixed;
use crate::ratgen::{expand_box, lexmin_term, specialize_count, Count, GenFun, PeriodicGenFun};

pub const DEFAULT_QUANT_BOUND: u64 = 200;
pub const DEFAULT_BOX_BOUND: i64 = 64;

/// Property 4 checks at most this many `t`, split between both ends.
const GF_SAMPLES: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    #[serde(rename = "1")]
    P1,
    #[serde(rename = "2")]
    P2,
    #[serde(rename = "3")]
    P3,
    #[serde(rename = "3a")]
    P3a,
    #[serde(rename = "3b")]
    P3b,
    #[serde(rename = "4")]
    P4,
    #[serde(rename = "frobenius")]
    Frobenius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supported,
    RefutedInWindow,
    Inconclusive,
}

impl Verdict {
    fn and(self, o: Verdict) -> Verdict {
        use Verdict::*;
        match (self, o) {
            (RefutedInWindow, _) | (_, RefutedInWindow) => RefutedInWindow,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Supported,
        }
    }
}

/// `{t ≥ threshold : t mod period ∈ residues}`.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicSet {
    pub period: u64,
    pub residues: Vec<u64>,
    pub threshold: u64,
    /// The 0/1 indicator fit it was read from, when it came from sampling.
    pub fit: Option<FitReport>,
}

impl PeriodicSet {
    pub fn contains(&self, t: u64) -> bool {
        t >= self.threshold && self.residues.contains(&(t % self.period))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub report: FitReport,
}

/// Observation at one `t`; `None` when it could not be certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub t: u64,
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub t: u64,
    pub what: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GfCheck {
    pub t: u64,
    /// Expansion on the enumeration box equals the indicator of the members.
    pub box_agree: bool,
    pub count: Count,
    pub enumerated: Cardinality,
    pub lexmin: Option<Vec<i64>>,
    pub enumerated_lexmin: Option<Vec<i64>>,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub search: FitSearch,
    /// Nonemptiness, finiteness or coprimality, depending on the property.
    pub existence: Option<PeriodicSet>,
    pub fits: Vec<NamedFit>,
    pub samples: Vec<Sample>,
    pub checks: Vec<WitnessCheck>,
    pub gf_checks: Vec<GfCheck>,
    pub notes: Vec<String>,
}

impl FamilyReport {
    fn new(property: Property, search: &FitSearch) -> Self {
        FamilyReport {
            property,
            verdict: Verdict::Supported,
            search: search.clone(),
            existence: None,
            fits: vec![],
            samples: vec![],
            checks: vec![],
            gf_checks: vec![],
            notes: vec![],
        }
    }

    pub fn fit(&self, name: &str) -> Option<&FitReport> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.report)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckConfig {
    pub search: FitSearch,
    /// Range `[0, B]` for quantifiers with no derivable bound.
    pub quant_bound: u64,
    /// Enumeration box `[0, box_bound]^d` when no containing box is known.
    pub box_bound: i64,
}

impl CheckConfig {
    pub fn new(search: FitSearch) -> Self {
        CheckConfig { search, quant_bound: DEFAULT_QUANT_BOUND, box_bound: DEFAULT_BOX_BOUND }
    }

    fn range(&self) -> (u64, u64) {
        let s = &self.search;
        (s.probe_floor.min(s.fit.0).min(s.holdout.0), s.fit.1.max(s.holdout.1))
    }

    fn window(&self) -> impl Iterator<Item = u64> {
        let s = &self.search;
        s.fit.0.min(s.holdout.0)..=s.fit.1.max(s.holdout.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Lexicographically least member.
    Any,
    /// Maximizer of `c·x`, least among ties.
    Argmax(Vec<i64>),
    /// The `k` least members.
    KDistinct(usize),
}

struct Obs {
    points: Vec<Vec<i64>>,
    contained: bool,
    card: Cardinality,
}

impl Obs {
    fn nonempty(&self) -> Option<bool> {
        if !self.points.is_empty() {
            Some(true)
        } else if self.contained {
            Some(false)
        } else {
            None
        }
    }
}

struct Observations {
    lo: u64,
    obs: Vec<Obs>,
    notes: Vec<String>,
}

impl Observations {
    fn get(&self, t: u64) -> Option<&Obs> {
        t.checked_sub(self.lo).and_then(|i| self.obs.get(i as usize))
    }
}

fn observe(fam: &Family, cfg: &CheckConfig) -> Result<Observations> {
    let (lo, hi) = cfg.range();
    let raw: Vec<Result<(Obs, Option<String>)>> = (lo..=hi)
        .into_par_iter()
        .map(|t| match sample_set(fam, t, cfg.quant_bound, cfg.box_bound) {
            Ok((s, card)) => Ok((Obs { points: s.points, contained: s.contained, card }, None)),
            Err(Error::Uncertified(m)) => Ok((Obs { points: vec![], contained: false, card: Cardinality::Unknown }, Some(m))),
            Err(e) => Err(e),
        })
        .collect();
    let mut obs = Vec::with_capacity(raw.len());
    let mut notes = Vec::new();
    for r in raw {
        let (o, note) = r?;
        obs.push(o);
        notes.extend(note);
    }
    Ok(Observations { lo, obs, notes })
}

fn periodic_from(fit: FitReport) -> PeriodicSet {
    let qp = &fit.result.qp;
    let residues = (0..qp.period()).filter(|&i| qp.constituent(i) == &Poly::one()).collect();
    PeriodicSet { period: qp.period(), residues, threshold: fit.result.threshold, fit: Some(fit) }
}

/// Eventual periodicity of a 0/1 indicator: a degree-0 fit that keeps the
/// holdout requirement of the configured search.
fn indicator_fit(
    report: &mut FamilyReport,
    cfg: &CheckConfig,
    what: &str,
    ind: impl Fn(u64) -> Option<bool> + Sync,
) -> Result<Option<PeriodicSet>> {
    let mut search = cfg.search.clone().bounds(cfg.search.max_period, 0);
    search.min_holdout = Some(cfg.search.needed_holdout());
    let unknown = cfg.window().filter(|&t| ind(t).is_none()).count();
    if unknown > 0 {
        report.verdict = report.verdict.and(Verdict::Inconclusive);
        report.notes.push(format!("{what} undetermined at {unknown} sampled t"));
    }
    match fit_integer_oracle(|t| ind(t).map(i128::from), &search) {
        Ok(fit) => Ok(Some(periodic_from(fit))),
        Err(Error::NoFit { .. }) => {
            report.verdict = report.verdict.and(if unknown > 0 { Verdict::Inconclusive } else { Verdict::RefutedInWindow });
            report.notes.push(format!("{what} is not periodic within the fit bounds"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn named_fit(
    report: &mut FamilyReport,
    search: &FitSearch,
    name: String,
    oracle: impl Fn(u64) -> Option<i128> + Sync,
) -> Result<bool> {
    match fit_integer_oracle(oracle, search) {
        Ok(fit) => {
            report.fits.push(NamedFit { name, report: fit });
            Ok(true)
        }
        Err(Error::NoFit { .. }) => {
            report.verdict = report.verdict.and(Verdict::RefutedInWindow);
            report.notes.push(format!("{name}: no quasi-polynomial within the fit bounds"));
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

fn point_text(p: &[i64]) -> String {
    format!("({})", p.iter().map(i64::to_string).collect::<Vec<_>>().join(", "))
}

/// Property 1: the `t` with `S_t` nonempty.
pub fn check_property1(fam: &Family, cfg: &CheckConfig) -> Result<FamilyReport> {
    let obs = observe(fam, cfg)?;
    let mut report = FamilyReport::new(Property::P1, &cfg.search);
    report.notes.extend(obs.notes.iter().cloned());
    let ind = |t: u64| obs.get(t).and_then(Obs::nonempty);
    report.samples = cfg.window().map(|t| Sample { t, value: ind(t).map(|b| u8::from(b).to_string()) }).collect();
    report.existence = indicator_fit(&mut report, cfg, "nonemptiness", ind)?;
    Ok(report)
}

/// Property 2: finiteness classes and the cardinality on finite `t`.
pub fn check_property2(fam: &Family, cfg: &CheckConfig) -> Result<FamilyReport> {
    let obs = observe(fam, cfg)?;
    let mut report = FamilyReport::new(Property::P2, &cfg.search);
    report.notes.extend(obs.notes.iter().cloned());
    let card = |t: u64| obs.get(t).map_or(Cardinality::Unknown, |o| o.card);
    report.samples = cfg
        .window()
        .map(|t| {
            let value = match card(t) {
                Cardinality::Finite(n) => Some(n.to_string()),
                Cardinality::Infinite => Some("infinite".into()),
                Cardinality::Unknown => None,
            };
            Sample { t, value }
        })
        .collect();
    let finite = |t: u64| match card(t) {
        Cardinality::Finite(_) => Some(true),
        Cardinality::Infinite => Some(false),
        Cardinality::Unknown => None,
    };
    report.existence = indicator_fit(&mut report, cfg, "finiteness", finite)?;
    if report.existence.as_ref().is_some_and(|e| e.residues.is_empty()) {
        report.notes.push("never finite".into());
    }
    if cfg.window().any(|t| finite(t) == Some(true)) {
        let oracle = |t: u64| match card(t) {
            Cardinality::Finite(n) => Some(i128::from(n)),
            _ => None,
        };
        named_fit(&mut report, &cfg.search, "cardinality".into(), oracle)?;
    }
    Ok(report)
}

fn select(o: &Obs, variant: &Witness) -> Option<Option<Vec<Vec<i64>>>> {
    if !o.contained {
        return None;
    }
    Some(match variant {
        Witness::Any => o.points.first().map(|p| vec![p.clone()]),
        Witness::KDistinct(k) => (o.points.len() >= *k).then(|| o.points[..*k].to_vec()),
        Witness::Argmax(c) => {
            let mut best: Option<(i128, &Vec<i64>)> = None;
            for p in &o.points {
                let v: i128 = c.iter().zip(p).map(|(&a, &x)| i128::from(a) * i128::from(x)).sum();
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, p));
                }
            }
            best.map(|(_, p)| vec![p.clone()])
        }
    })
}

/// Properties 3, 3a and 3b: canonical witnesses, fitted coordinatewise and
/// checked for membership on the holdout.
pub fn check_property3(fam: &Family, variant: &Witness, cfg: &CheckConfig) -> Result<FamilyReport> {
    let d = fam.dim();
    let (property, k) = match variant {
        Witness::Any => (Property::P3, 1),
        Witness::Argmax(c) => {
            if c.len() != d || c.iter().all(|&x| x == 0) {
                return Err(Error::Invalid(format!("objective must be a nonzero vector of length {d}")));
            }
            (Property::P3a, 1)
        }
        Witness::KDistinct(k) => {
            if *k == 0 {
                return Err(Error::Invalid("k must be positive".into()));
            }
            (Property::P3b, *k)
        }
    };
    let obs = observe(fam, cfg)?;
    let mut report = FamilyReport::new(property, &cfg.search);
    report.notes.extend(obs.notes.iter().cloned());
    let (lo, hi) = cfg.range();
    let chosen: Vec<Option<Option<Vec<Vec<i64>>>>> = (lo..=hi).map(|t| obs.get(t).and_then(|o| select(o, variant))).collect();
    let at = |t: u64| t.checked_sub(lo).and_then(|i| chosen.get(i as usize)).cloned().flatten();
    report.samples = cfg
        .window()
        .map(|t| {
            let value = at(t).map(|w| match w {
                Some(ws) => ws.iter().map(|p| point_text(p)).collect::<Vec<_>>().join(" "),
                None => "none".into(),
            });
            Sample { t, value }
        })
        .collect();
    report.existence = indicator_fit(&mut report, cfg, "witness existence", |t| at(t).map(|w| w.is_some()))?;
    if !cfg.window().any(|t| matches!(at(t), Some(Some(_)))) {
        report.notes.push("no witness in the window".into());
        return Ok(report);
    }
    let mut names = Vec::new();
    let mut all_fit = true;
    for i in 0..k {
        for j in 0..d {
            let name = if k == 1 { fam.names[j].clone() } else { format!("{}[{}]", fam.names[j], i + 1) };
            let oracle = |t: u64| at(t).flatten().map(|w| i128::from(w[i][j]));
            all_fit &= named_fit(&mut report, &cfg.search, name.clone(), oracle)?;
            names.push(name);
        }
    }
    if !all_fit {
        return Ok(report);
    }
    let compiled: Vec<(u64, Compiled)> = (cfg.search.holdout.0..=cfg.search.holdout.1)
        .filter(|&t| matches!(at(t), Some(Some(_))))
        .map(|t| Ok((t, Compiled::new(fam, t, cfg.quant_bound)?)))
        .collect::<Result<_>>()?;
    for (t, c) in &compiled {
        let mut pts = Vec::with_capacity(k);
        for i in 0..k {
            let p: Option<Vec<i64>> = (0..d)
                .map(|j| {
                    let v = report.fits[i * d + j].report.result.eval(*t);
                    natural(&v)
                })
                .collect();
            pts.push(p);
        }
        let members = pts.iter().all(|p| p.as_ref().is_some_and(|p| c.eval(p) == Membership::True));
        let mut distinct = pts.clone();
        distinct.sort();
        distinct.dedup();
        let passed = members && distinct.len() == k;
        report.checks.push(WitnessCheck { t: *t, what: "fitted witnesses are distinct members".into(), passed });
        if !passed {
            report.verdict = Verdict::RefutedInWindow;
        }
    }
    Ok(report)
}

fn natural(v: &BigRational) -> Option<i64> {
    (v.is_integer() && !v.is_negative()).then(|| v.to_integer().to_i64()).flatten()
}

fn sample_ts(ts: Vec<u64>) -> Vec<u64> {
    if ts.len() <= GF_SAMPLES {
        return ts;
    }
    let h = GF_SAMPLES / 2;
    ts[..h].iter().chain(&ts[ts.len() - h..]).copied().collect()
}

/// The generating function of a quantifier-free conjunction with constant
/// normals at `t`, by Brion's theorem.
fn construct_at(fam: &Family, t: u64) -> Result<GenFun> {
    let pieces = pieces_at(fam, t)?.ok_or_else(|| Error::Invalid("formula has no polyhedral decomposition".into()))?;
    match pieces.as_slice() {
        [] => Ok(GenFun::zero(fam.dim())),
        [p] => brion_fixed(p),
        _ => Err(Error::Invalid("formula is not a single conjunction".into())),
    }
}

fn constructible(fam: &Family) -> std::result::Result<(), String> {
    if !fam.formula.is_quantifier_free() {
        return Err("formula has quantifiers; supply a candidate".into());
    }
    if !fam.formula.atoms().iter().all(|a| a.has_constant_normal()) {
        return Err("atom normals depend on t; supply a candidate".into());
    }
    match super::eval::dnf(&fam.formula) {
        Some(p) if p.len() <= 1 => Ok(()),
        _ => Err("formula is not a single conjunction; supply a candidate".into()),
    }
}

/// Property 4: verifies `candidate`, or one built by Brion's theorem, against
/// enumeration at sampled `t`.
pub fn check_property4(fam: &Family, candidate: Option<&PeriodicGenFun>, cfg: &CheckConfig) -> Result<FamilyReport> {
    let mut report = FamilyReport::new(Property::P4, &cfg.search);
    if let Some(c) = candidate {
        if c.classes.iter().any(|g| g.dim != fam.dim()) {
            return Err(Error::Dimension("candidate dimension differs from the family".into()));
        }
    } else if let Err(why) = constructible(fam) {
        report.verdict = Verdict::Inconclusive;
        report.notes.push(why);
        return Ok(report);
    }
    let ts: Vec<u64> = cfg.window().filter(|&t| candidate.is_none_or(|c| t >= c.at(t).threshold)).collect();
    let ts = sample_ts(ts);
    let results: Vec<Result<Option<GfCheck>>> = ts
        .par_iter()
        .map(|&t| {
            let gf = match candidate {
                Some(c) => c.at(t).clone(),
                None => match construct_at(fam, t) {
                    Ok(g) => g,
                    Err(Error::Unbounded | Error::NotSimple) => return Ok(None),
                    Err(e) => return Err(e),
                },
            };
            let (set, card) = match sample_set(fam, t, cfg.quant_bound, cfg.box_bound) {
                Ok(x) => x,
                Err(Error::Uncertified(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            gf_check(&gf, t, &set.points, &set.region, card).map(Some)
        })
        .collect();
    for (t, r) in ts.iter().zip(results) {
        match r? {
            Some(c) => {
                report.samples.push(Sample { t: *t, value: Some(count_text(&c.count)) });
                report.gf_checks.push(c);
            }
            None => report.notes.push(format!("no check at t = {t}")),
        }
    }
    report.verdict = if report.gf_checks.is_empty() {
        Verdict::Inconclusive
    } else if report.gf_checks.iter().all(|c| c.agree) {
        Verdict::Supported
    } else {
        Verdict::RefutedInWindow
    };
    if candidate.is_none() {
        report.notes.push("candidate built per t by Brion's theorem".into());
    }
    Ok(report)
}

fn count_text(c: &Count) -> String {
    match c {
        Count::Finite(r) if r.is_integer() => r.to_integer().to_string(),
        Count::Finite(r) => r.to_string(),
        Count::Infinite => "infinite".into(),
    }
}

fn gf_check(gf: &GenFun, t: u64, points: &[Vec<i64>], region: &[(i64, i64)], card: Cardinality) -> Result<GfCheck> {
    let coeffs = expand_box(gf, t, region)?;
    let box_agree = coeffs.len() == points.len() && points.iter().all(|p| coeffs.get(p).is_some_and(|c| c == &BigRational::from_integer(1.into())));
    let count = specialize_count(gf, t)?;
    let count_agree = match card {
        Cardinality::Finite(n) => Some(count == Count::Finite(BigRational::from_integer(n.into()))),
        Cardinality::Infinite => Some(count == Count::Infinite),
        Cardinality::Unknown => None,
    };
    let enumerated_lexmin = match card {
        Cardinality::Finite(_) => points.first().cloned(),
        _ => None,
    };
    let lexmin = match lexmin_term(gf) {
        Ok(m) if m.threshold <= t => Some(m.exponent.iter().map(|p| p.eval_integer(t)?.to_i64().ok_or(Error::Overflow)).collect::<Result<Vec<i64>>>()?),
        Ok(_) | Err(Error::Tie) => None,
        Err(e) => return Err(e),
    };
    let lexmin_agree = match (&lexmin, &enumerated_lexmin) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    };
    let agree = box_agree && count_agree != Some(false) && lexmin_agree;
    Ok(GfCheck { t, box_agree, count, enumerated: card, lexmin, enumerated_lexmin, agree })
}
