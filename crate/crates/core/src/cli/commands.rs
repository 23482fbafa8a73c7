use num::{BigInt, BigRational, Integer, Signed, Zero};
use serde_json::{json, Value};

use super::{read, CheckArgs, CliError, Command, GfArgs, GfOp, MatrixArgs, Outcome, PresburgerCmd, PropertyArg, QpolyOp, RunConfig, Series, SeriesRow};
use crate::error::Error;
use crate::parampoly::{count_points, ehrhart_fit, integer_hull_fit, integer_hull_vertices, ParamPolyhedron};
use crate::presburger::{
    check_property1, check_property2, check_property3, check_property4, frobenius_fit, Cardinality, CheckConfig, Family,
    FamilyReport, SemigroupSpec, Witness,
};
use crate::qpmatrix::intnf::{self, IntMat};
use crate::qpmatrix::{hermite_normal_form, parse_qp_matrix, smith_normal_form, NormalFormConfig, QPMatrix};
use crate::qpoly::{
    divmod_degree, divmod_numeric, floor_ratio, gcd_bezout, parse_qp, EventualQP, FitReport, Poly, QuasiPolynomial,
};
use crate::ratgen::{brion_polytope_genfun, expand_box, specialize_count, Count, GenFun, PeriodicGenFun};

/// Brion cross-checks are sampled at most this many times.
const BRION_SAMPLES: u64 = 12;

pub(super) fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Qpoly { op, operands } => qpoly(*op, operands, cfg),
        Command::Snf(m) => normal_form(m, cfg, true),
        Command::Hnf(m) => normal_form(m, cfg, false),
        Command::Ehrhart(p) => ehrhart(&ParamPolyhedron::parse(&read(&p.input)?)?, cfg),
        Command::Hull(p) => hull(&ParamPolyhedron::parse(&read(&p.input)?)?, cfg),
        Command::Frobenius { generators } => frobenius(generators, cfg),
        Command::Presburger { action: PresburgerCmd::Check(c) } => presburger(c, cfg),
        Command::Gf(g) => gf(g, cfg),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Io(e.to_string()))
}

fn ts(cfg: &RunConfig) -> impl Iterator<Item = u64> {
    cfg.window.0..=cfg.window.1
}

fn fit_series(name: &str, fit: &FitReport) -> Series {
    let rows = fit
        .samples
        .iter()
        .map(|(t, v)| SeriesRow { t: *t, value: v.clone(), fitted: (*t >= fit.result.threshold).then(|| fit.result.eval(*t)) })
        .collect();
    Series { name: name.into(), rows }
}

fn integer_at(q: &QuasiPolynomial, t: u64) -> Option<BigInt> {
    q.eval_integer(t).ok()
}

fn past(e: &EventualQP, t: u64) -> Option<BigRational> {
    (t >= e.threshold).then(|| e.eval(t))
}

fn qpoly(op: QpolyOp, operands: &[String], cfg: &RunConfig) -> Result<Outcome, CliError> {
    if operands.len() != 2 {
        return Err(CliError::Usage(format!("qpoly takes two operands, got {}", operands.len())));
    }
    let f = parse_qp(&operands[0])?;
    let g = parse_qp(&operands[1])?;
    let series = |name: &str, value: &dyn Fn(u64) -> Option<BigRational>, fitted: &dyn Fn(u64) -> Option<BigRational>| Series {
        name: name.into(),
        rows: ts(cfg).map(|t| SeriesRow { t, value: value(t), fitted: fitted(t) }).collect(),
    };
    let out = match op {
        QpolyOp::Add | QpolyOp::Sub | QpolyOp::Mul => {
            let apply = |a: &BigRational, b: &BigRational| match op {
                QpolyOp::Add => a + b,
                QpolyOp::Sub => a - b,
                _ => a * b,
            };
            let r = match op {
                QpolyOp::Add => &f + &g,
                QpolyOp::Sub => &f - &g,
                _ => &f * &g,
            };
            let s = series("result", &|t| Some(apply(&f.eval(t), &g.eval(t))), &|t| Some(r.eval(t)));
            Outcome { result: json!({ "result": to_value(&r)? }), series: vec![s] }
        }
        QpolyOp::Divmod => {
            let (q, r) = divmod_numeric(&f, &g)?;
            // Euclidean division of the evaluated integers
            let direct = |t: u64| {
                let (a, b) = (integer_at(&f, t)?, integer_at(&g, t)?);
                if b.is_zero() {
                    return None;
                }
                let q = a.div_floor(&b.abs()) * b.signum();
                let r = &a - &q * &b;
                Some((BigRational::from_integer(q), BigRational::from_integer(r)))
            };
            let sq = series("quotient", &|t| direct(t).map(|x| x.0), &|t| past(&q, t));
            let sr = series("remainder", &|t| direct(t).map(|x| x.1), &|t| past(&r, t));
            Outcome { result: json!({ "q": to_value(&q)?, "r": to_value(&r)? }), series: vec![sq, sr] }
        }
        QpolyOp::Divdeg => {
            let d = divmod_degree(&f, &g)?;
            let (q, r) = d.pair();
            let s = series("identity", &|t| Some(f.eval(t)), &|t| Some(q.eval(t) * g.eval(t) + r.eval(t)));
            Outcome { result: to_value(&d)?, series: vec![s] }
        }
        QpolyOp::Gcd => {
            let res = gcd_bezout(&f, &g)?;
            let bezout = &(&res.p.qp * &f) + &(&res.q.qp * &g);
            let direct = |t: u64| Some(BigRational::from_integer(integer_at(&f, t)?.gcd(&integer_at(&g, t)?)));
            let s = series("gcd", &direct, &|t| past(&res.d, t));
            Outcome {
                result: json!({ "gcd": to_value(&res)?, "bezout_identity": bezout == res.d.qp }),
                series: vec![s],
            }
        }
        QpolyOp::Floor => {
            let poly = |q: &QuasiPolynomial| -> Result<Poly, CliError> {
                if q.period() != 1 {
                    return Err(CliError::Usage("floor takes polynomials".into()));
                }
                Ok(q.constituent(0).clone())
            };
            let (fp, gp) = (poly(&f)?, poly(&g)?);
            let e = floor_ratio(&fp, &gp)?;
            let direct = |t: u64| {
                let b = gp.eval_u64(t);
                (!b.is_zero()).then(|| BigRational::from_integer((fp.eval_u64(t) / b).floor().to_integer()))
            };
            let s = series("floor", &direct, &|t| past(&e, t));
            Outcome { result: json!({ "floor": to_value(&e)? }), series: vec![s] }
        }
    };
    Ok(out)
}

/// Echelon pivots: first nonzero entry of each column, multiplied.
fn pivot_product(m: &IntMat) -> BigInt {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).filter_map(|j| m.iter().map(|row| &row[j]).find(|x| !x.is_zero()).cloned()).product()
}

fn normal_form(m: &MatrixArgs, cfg: &RunConfig, smith: bool) -> Result<Outcome, CliError> {
    let text = match (&m.input, &m.matrix) {
        (Some(p), _) => read(p)?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(CliError::Usage("give --input or --matrix".into())),
    };
    let a: QPMatrix = parse_qp_matrix(&text)?;
    let nf = NormalFormConfig::default();
    let (result, threshold, form): (Value, u64, Box<dyn Fn(u64) -> Result<IntMat, Error>>) = if smith {
        let s = smith_normal_form(&a, &nf)?;
        let d = s.d.clone();
        (to_value(&s)?, s.threshold, Box::new(move |t| d.eval_integer(t)))
    } else {
        let h = hermite_normal_form(&a, &nf)?;
        let hm = h.h.clone();
        (to_value(&h)?, h.threshold, Box::new(move |t| hm.eval_integer(t)))
    };
    let mut rows = Vec::new();
    let mut agree = 0u64;
    let mut disagree = Vec::new();
    for t in ts(cfg) {
        let num = a.eval_integer(t)?;
        let oracle = if smith { intnf::smith(&num).1 } else { intnf::hermite(&num).1 };
        let fitted = if t >= threshold { Some(form(t)?) } else { None };
        if let Some(fm) = &fitted {
            if *fm == oracle {
                agree += 1;
            } else {
                disagree.push(t);
            }
        }
        rows.push(SeriesRow {
            t,
            value: Some(BigRational::from_integer(pivot_product(&oracle))),
            fitted: fitted.map(|fm| BigRational::from_integer(pivot_product(&fm))),
        });
    }
    Ok(Outcome {
        result: json!({ "form": result, "oracle_agree": agree, "oracle_disagree": disagree }),
        series: vec![Series { name: "pivots".into(), rows }],
    })
}

fn ehrhart(p: &ParamPolyhedron, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = ehrhart_fit(p, &cfg.search())?;
    let (lo, hi) = cfg.window;
    let step = ((hi - lo) / BRION_SAMPLES).max(1);
    let mut brion = Vec::new();
    for t in (lo..=hi).step_by(step as usize).take(BRION_SAMPLES as usize) {
        let count = count_points(p, t)?;
        let entry = match brion_polytope_genfun(p, t).and_then(|g| specialize_count(&g, t)) {
            Ok(c) => {
                let agree = c == Count::Finite(BigRational::from_integer(count.into()));
                json!({ "t": t, "count": count, "brion": to_value(&c)?, "agree": agree })
            }
            Err(e) => json!({ "t": t, "count": count, "skipped": e.kind() }),
        };
        brion.push(entry);
    }
    Ok(Outcome {
        result: json!({ "ehrhart": to_value(&report)?, "brion": brion }),
        series: vec![fit_series("count", &report.fit)],
    })
}

fn hull(p: &ParamPolyhedron, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.search();
    let h = integer_hull_fit(p, s.fit, s.holdout, cfg.max_period, cfg.max_degree)?;
    let mut rows = Vec::new();
    for t in ts(cfg) {
        let n = integer_hull_vertices(p, t)?.len();
        rows.push(SeriesRow {
            t,
            value: Some(BigRational::from_integer(n.into())),
            fitted: h.eval(t).map(|v| BigRational::from_integer(v.len().into())),
        });
    }
    Ok(Outcome { result: to_value(&h)?, series: vec![Series { name: "vertices".into(), rows }] })
}

fn frobenius(generators: &[String], cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gens = generators.iter().map(|g| Poly::parse(g)).collect::<Result<Vec<_>, _>>()?;
    let s = SemigroupSpec::new(gens)?;
    let r = frobenius_fit(&s, &cfg.search())?;
    Ok(Outcome { result: to_value(&r)?, series: report_series(&r) })
}

fn report_series(r: &FamilyReport) -> Vec<Series> {
    let mut out = Vec::new();
    if let Some(fit) = r.existence.as_ref().and_then(|e| e.fit.as_ref()) {
        out.push(fit_series("existence", fit));
    }
    for f in &r.fits {
        let name: String = f.name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        out.push(fit_series(&name, &f.report));
    }
    if !r.gf_checks.is_empty() {
        let rows = r
            .gf_checks
            .iter()
            .map(|c| SeriesRow {
                t: c.t,
                value: match c.enumerated {
                    Cardinality::Finite(n) => Some(BigRational::from_integer(n.into())),
                    _ => None,
                },
                fitted: match &c.count {
                    Count::Finite(q) => Some(q.clone()),
                    Count::Infinite => None,
                },
            })
            .collect();
        out.push(Series { name: "gf_count".into(), rows });
    }
    out
}

fn load_gf(text: &str) -> Result<PeriodicGenFun, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let parsed = if v.get("classes").is_some() {
        serde_json::from_value::<PeriodicGenFun>(v)
    } else {
        serde_json::from_value::<GenFun>(v).map(|g| PeriodicGenFun { period: 1, classes: vec![g] })
    };
    let pg = parsed.map_err(|e| Error::Parse(e.to_string()))?;
    if pg.period != pg.classes.len() as u64 {
        return Err(Error::Parse(format!("period {} with {} classes", pg.period, pg.classes.len())).into());
    }
    Ok(PeriodicGenFun::new(pg.classes)?)
}

fn presburger(c: &CheckArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let fam = Family::parse(&read(&c.input)?)?;
    let mut check = CheckConfig::new(cfg.search());
    check.quant_bound = cfg.quant_bound;
    check.box_bound = c.box_bound;
    let r = match c.property {
        PropertyArg::P1 => check_property1(&fam, &check)?,
        PropertyArg::P2 => check_property2(&fam, &check)?,
        PropertyArg::P3 => check_property3(&fam, &Witness::Any, &check)?,
        PropertyArg::P3a => {
            let obj = c.objective.clone().ok_or_else(|| CliError::Usage("property 3a needs --objective".into()))?;
            check_property3(&fam, &Witness::Argmax(obj), &check)?
        }
        PropertyArg::P3b => {
            let k = c.k.ok_or_else(|| CliError::Usage("property 3b needs --k".into()))?;
            check_property3(&fam, &Witness::KDistinct(k), &check)?
        }
        PropertyArg::P4 => {
            let cand = match &c.candidate {
                Some(p) => Some(load_gf(&read(p)?)?),
                None => None,
            };
            check_property4(&fam, cand.as_ref(), &check)?
        }
    };
    Ok(Outcome { result: to_value(&r)?, series: report_series(&r) })
}

fn parse_box(s: &str) -> Result<Vec<(i64, i64)>, CliError> {
    s.split(';')
        .map(|part| {
            let v: Vec<&str> = part.split(',').map(str::trim).collect();
            match v.as_slice() {
                [a, b] => match (a.parse(), b.parse()) {
                    (Ok(a), Ok(b)) if a <= b => Ok((a, b)),
                    _ => Err(CliError::Usage(format!("bad box range {part:?}"))),
                },
                _ => Err(CliError::Usage(format!("bad box range {part:?}"))),
            }
        })
        .collect()
}

fn gf(a: &GfArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pg = load_gf(&read(&a.input)?)?;
    let bx = a.bx.as_deref().map(parse_box).transpose()?;
    let window: Vec<u64> = match a.t {
        Some(t) => vec![t],
        None => ts(cfg).collect(),
    };
    let defined = |t: u64| {
        let g = pg.at(t);
        (t >= g.threshold && g.class.contains(t)).then_some(g)
    };
    match a.op {
        GfOp::Normalize => {
            let classes = pg.classes.iter().map(GenFun::normalize_lex_positive).collect::<Result<Vec<_>, _>>()?;
            let normalized = PeriodicGenFun { period: pg.period, classes };
            // evaluation at a fixed rational point is unchanged by the rewrite
            let point: Vec<BigRational> = (0..pg.classes[0].dim).map(|k| BigRational::new(1.into(), (k as i64 + 2).into())).collect();
            let mut rows = Vec::new();
            for &t in &window {
                let Some(g) = defined(t) else { continue };
                let n = normalized.at(t);
                let fitted = if t >= n.threshold { n.eval_at(t, &point)? } else { None };
                rows.push(SeriesRow { t, value: g.eval_at(t, &point)?, fitted });
            }
            Ok(Outcome {
                result: json!({ "normalized": to_value(&normalized)? }),
                series: vec![Series { name: "probe".into(), rows }],
            })
        }
        GfOp::Expand | GfOp::Specialize => {
            if matches!(a.op, GfOp::Expand) && bx.is_none() {
                return Err(CliError::Usage("gf expand needs --box".into()));
            }
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for &t in &window {
                let Some(g) = defined(t) else { continue };
                let count = specialize_count(g, t)?;
                let mut entry = json!({ "t": t, "count": to_value(&count)? });
                let mut total = None;
                if let Some(bx) = &bx {
                    let coeffs = expand_box(g, t, bx)?;
                    total = Some(coeffs.values().fold(BigRational::zero(), |acc, c| acc + c));
                    if matches!(a.op, GfOp::Expand) {
                        let list: Vec<Value> = coeffs.iter().map(|(p, c)| json!([p, crate::qpoly::rational_to_string(c)])).collect();
                        entry["coefficients"] = Value::Array(list);
                    }
                }
                let fitted = match count {
                    Count::Finite(q) => Some(q),
                    Count::Infinite => None,
                };
                rows.push(SeriesRow { t, value: total, fitted });
                entries.push(entry);
            }
            Ok(Outcome { result: json!({ "samples": entries }), series: vec![Series { name: "count".into(), rows }] })
        }
    }
}
