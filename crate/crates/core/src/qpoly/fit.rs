//! Fit-and-verify: recover an eventual quasi-polynomial from oracle samples
//! and validate it on a disjoint holdout window.

use num::{BigRational, One};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::poly::{rational_to_string, Poly};
use super::quasi::{EventualQP, QuasiPolynomial};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PERIOD: u64 = 60;
pub const DEFAULT_MAX_DEGREE: usize = 6;

/// Fit bounds and windows. Windows are inclusive and must not overlap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FitSearch {
    pub max_period: u64,
    pub max_degree: usize,
    pub fit: (u64, u64),
    pub holdout: (u64, u64),
    /// The fitted tail of each class may start this far past `fit.0`.
    pub max_skip: u64,
    /// Backward threshold probing stops here.
    pub probe_floor: u64,
    /// Defined holdout points required per class; `None` means `max_degree + 2`.
    pub min_holdout: Option<usize>,
}

impl FitSearch {
    pub fn new(fit: (u64, u64), holdout: (u64, u64)) -> Self {
        FitSearch {
            max_period: DEFAULT_MAX_PERIOD,
            max_degree: DEFAULT_MAX_DEGREE,
            fit,
            holdout,
            max_skip: (fit.1.saturating_sub(fit.0)) / 2,
            probe_floor: 0,
            min_holdout: None,
        }
    }

    /// Default windows: fitting `[t0, t0 + 4·M·(D+2))`, holdout of equal size.
    pub fn from_start(t0: u64) -> Self {
        let w = 4 * DEFAULT_MAX_PERIOD * (DEFAULT_MAX_DEGREE as u64 + 2);
        Self::new((t0, t0 + w - 1), (t0 + w, t0 + 2 * w - 1))
    }

    /// Splits `[lo, hi]` into a fitting part and a trailing holdout third.
    pub fn split(lo: u64, hi: u64) -> Self {
        let n = hi - lo + 1;
        let h = (n / 3).max(1);
        Self::new((lo, hi - h), (hi - h + 1, hi))
    }

    pub fn bounds(mut self, max_period: u64, max_degree: usize) -> Self {
        self.max_period = max_period;
        self.max_degree = max_degree;
        self
    }

    pub fn needed_holdout(&self) -> usize {
        self.min_holdout.unwrap_or(self.max_degree + 2)
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.fit;
        let (c, d) = self.holdout;
        if a > b || c > d || !(b < c || d < a) {
            return Err(Error::Invalid(format!("bad fit/holdout windows {:?} {:?}", self.fit, self.holdout)));
        }
        if self.max_period == 0 {
            return Err(Error::Invalid("max_period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub t: u64,
    pub value: BigRational,
    pub fitted: BigRational,
}

impl Residual {
    pub fn residual(&self) -> BigRational {
        &self.value - &self.fitted
    }
}

impl Serialize for Residual {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct R {
            t: u64,
            value: String,
            fitted: String,
            residual: String,
        }
        R {
            t: self.t,
            value: rational_to_string(&self.value),
            fitted: rational_to_string(&self.fitted),
            residual: rational_to_string(&self.residual()),
        }
        .serialize(s)
    }
}

/// A successful fit with its evidence.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub result: EventualQP,
    /// Period the search settled on; `result` may canonicalize lower.
    pub fitted_period: u64,
    /// Minimal degree per residue of `fitted_period`; `None` for classes with no samples.
    pub degrees: Vec<Option<usize>>,
    pub undefined_classes: Vec<u64>,
    pub search: FitSearch,
    #[serde(serialize_with = "ser_samples")]
    pub samples: Vec<(u64, Option<BigRational>)>,
    pub holdout: Vec<Residual>,
}

fn ser_samples<S: Serializer>(v: &[(u64, Option<BigRational>)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<(u64, Option<String>)> = v.iter().map(|(t, x)| (*t, x.as_ref().map(rational_to_string))).collect();
    flat.serialize(s)
}

impl FitReport {
    pub fn holdout_exact(&self) -> bool {
        self.holdout.iter().all(|r| r.value == r.fitted)
    }
}

/// Newton interpolation through distinct abscissae.
pub fn interpolate(points: &[(u64, BigRational)]) -> Poly {
    let n = points.len();
    let xs: Vec<BigRational> = points.iter().map(|(t, _)| BigRational::from_integer((*t).into())).collect();
    let mut dd: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
        }
    }
    let mut acc = Poly::zero();
    for i in (0..n).rev() {
        let lin = Poly::new(vec![-xs[i].clone(), BigRational::one()]);
        acc = &(&acc * &lin) + &Poly::constant(dd[i].clone());
    }
    acc
}

struct ClassFit {
    poly: Poly,
    degree: Option<usize>,
    /// Smallest class member from which every defined sample matched.
    start: Option<u64>,
}

fn fit_class(pts: &[(u64, BigRational)], search: &FitSearch) -> Option<ClassFit> {
    if pts.is_empty() {
        return Some(ClassFit { poly: Poly::zero(), degree: None, start: None });
    }
    let limit = search.fit.0 + search.max_skip;
    for d in 0..=search.max_degree {
        if pts.len() < d + 2 {
            return None;
        }
        let p = interpolate(&pts[pts.len() - d - 1..]);
        let mut k = pts.len();
        while k > 0 && p.eval_u64(pts[k - 1].0) == pts[k - 1].1 {
            k -= 1;
        }
        if pts.len() - k >= d + 2 && pts[k].0 <= limit {
            let degree = p.degree();
            return Some(ClassFit { poly: p, degree: Some(degree.unwrap_or(0)), start: Some(pts[k].0) });
        }
    }
    None
}

/// Searches periods `1..=M` and degrees `0..=D` for an eventual
/// quasi-polynomial matching `oracle` on the fit window and the holdout.
///
/// `oracle` may be partial; undefined samples are skipped, and classes with no
/// defined sample get a zero constituent and are listed as undefined.
pub fn fit_eventual_qp<F>(oracle: F, search: &FitSearch) -> Result<FitReport>
where
    F: Fn(u64) -> Option<BigRational> + Sync,
{
    search.validate()?;
    let lo = search.fit.0.min(search.holdout.0);
    let hi = search.fit.1.max(search.holdout.1);
    let samples: Vec<(u64, Option<BigRational>)> = (lo..=hi).into_par_iter().map(|t| (t, oracle(t))).collect();
    let value = |t: u64| samples[(t - lo) as usize].1.clone();
    let in_fit = |t: u64| t >= search.fit.0 && t <= search.fit.1;
    let in_hold = |t: u64| t >= search.holdout.0 && t <= search.holdout.1;
    let need = search.needed_holdout();

    'periods: for m in 1..=search.max_period {
        let mut classes = Vec::with_capacity(m as usize);
        for i in 0..m {
            let hold_count = (lo..=hi).filter(|&t| t % m == i && in_hold(t) && value(t).is_some()).count();
            let pts: Vec<(u64, BigRational)> =
                (lo..=hi).filter(|&t| t % m == i && in_fit(t)).filter_map(|t| value(t).map(|v| (t, v))).collect();
            if pts.is_empty() {
                if hold_count > 0 {
                    continue 'periods;
                }
            } else if hold_count < need {
                // a partial oracle can leave a larger period with more points per class
                continue 'periods;
            }
            match fit_class(&pts, search) {
                Some(c) => classes.push(c),
                None => continue 'periods,
            }
        }
        let mut holdout = Vec::new();
        for t in search.holdout.0..=search.holdout.1 {
            if let Some(v) = value(t) {
                let fitted = classes[(t % m) as usize].poly.eval_u64(t);
                if fitted != v {
                    continue 'periods;
                }
                holdout.push(Residual { t, value: v, fitted });
            }
        }
        // refine thresholds backward below the fitted tails
        let mut threshold = 0u64;
        for c in &classes {
            let Some(mut start) = c.start else { continue };
            while start >= m && start - m >= search.probe_floor {
                let t = start - m;
                let v = if t >= lo { value(t) } else { oracle(t) };
                match v {
                    Some(v) if v == c.poly.eval_u64(t) => start = t,
                    _ => break,
                }
            }
            if start >= m {
                threshold = threshold.max(start - m + 1);
            }
        }
        let undefined_classes = (0..m).filter(|&i| classes[i as usize].start.is_none()).collect();
        let degrees = classes.iter().map(|c| c.degree).collect();
        let qp = QuasiPolynomial::new(classes.into_iter().map(|c| c.poly).collect())?;
        return Ok(FitReport {
            result: EventualQP::new(qp, threshold),
            fitted_period: m,
            degrees,
            undefined_classes,
            search: search.clone(),
            samples,
            holdout,
        });
    }
    Err(Error::NoFit { max_period: search.max_period, max_degree: search.max_degree })
}

/// Convenience for integer-valued oracles.
pub fn fit_integer_oracle<F>(oracle: F, search: &FitSearch) -> Result<FitReport>
where
    F: Fn(u64) -> Option<i128> + Sync,
{
    fit_eventual_qp(|t| oracle(t).map(|v| BigRational::from_integer(v.into())), search)
}
