//! C ABI over `quasipoly`.
//!
//! Objects cross the boundary as opaque heap handles released by their
//! `*_free` function. Every fallible call returns `QP_OK` or a nonzero
//! status; library failures use the stable codes of `quasipoly::Error::code`
//! and the message is available from `qp_last_error` on the same thread.
//! Strings returned through `char **` are owned by the caller and released
//! with `qp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use quasipoly::parampoly::{count_points, ehrhart_fit, ParamPolyhedron};
use quasipoly::presburger::{
    check_property1, check_property2, check_property3, check_property4, frobenius_of, CheckConfig, Family, Frobenius,
    Witness,
};
use quasipoly::qpoly::{floor_ratio, gcd_bezout, parse_qp, rational_to_string, FitSearch, QuasiPolynomial};
use quasipoly::Error;

pub const QP_OK: i32 = 0;
/// A required pointer argument was null.
pub const QP_ERR_NULL: i32 = -1;
/// A string argument was not UTF-8.
pub const QP_ERR_UTF8: i32 = -2;
/// The library panicked; this is a bug.
pub const QP_ERR_PANIC: i32 = -3;

pub const QP_FROBENIUS_NUMBER: i32 = 0;
pub const QP_FROBENIUS_NOT_COPRIME: i32 = 1;
pub const QP_FROBENIUS_ALL_COVERED: i32 = 2;

/// A quasi-polynomial in `t`.
pub struct QpQuasiPoly(QuasiPolynomial);

/// A parametric polyhedron `{x : A(t)x ≤ b(t)}`.
pub struct QpPolyhedron(ParamPolyhedron);

/// A parametric Presburger family.
pub struct QpFamily(Family);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Null,
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QP_OK,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument");
            QP_ERR_NULL
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not UTF-8");
            QP_ERR_UTF8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            e.code()
        }
        Err(_) => {
            set_error("internal panic");
            QP_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = CString::new(s).map_err(|_| Fail::Utf8)?.into_raw();
    Ok(())
}

unsafe fn get<'a, T>(h: *const T) -> Result<&'a T, Fail> {
    h.as_ref().ok_or(Fail::Null)
}

unsafe fn put_u64(out: *mut u64, v: u64) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = v;
    Ok(())
}

/// Message of the last failure on this thread; valid until the next call.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a polynomial string or quasi-polynomial JSON.
///
/// # Safety
/// `src` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_quasipoly_parse(src: *const c_char, out: *mut *mut QpQuasiPoly) -> i32 {
    guard(|| put(out, QpQuasiPoly(parse_qp(text(src)?)?)))
}

/// # Safety
/// `h` comes from this library or is null.
#[no_mangle]
pub unsafe extern "C" fn qp_quasipoly_free(h: *mut QpQuasiPoly) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn qp_quasipoly_period(h: *const QpQuasiPoly) -> u64 {
    h.as_ref().map_or(0, |q| q.0.period())
}

/// Display form, e.g. `{0: t; 1: t + 1} mod 2`.
///
/// # Safety
/// `h` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_quasipoly_to_string(h: *const QpQuasiPoly, out: *mut *mut c_char) -> i32 {
    guard(|| put_string(out, get(h)?.0.to_string()))
}

/// Value at `t` as `p/q`.
///
/// # Safety
/// `h` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_quasipoly_eval(h: *const QpQuasiPoly, t: u64, out: *mut *mut c_char) -> i32 {
    guard(|| put_string(out, rational_to_string(&get(h)?.0.eval(t))))
}

/// Per-class gcd `d = p·f + q·g`, valid for `t ≥ *threshold`.
///
/// # Safety
/// `f`, `g` are live handles; every out pointer is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_gcd(
    f: *const QpQuasiPoly,
    g: *const QpQuasiPoly,
    d: *mut *mut QpQuasiPoly,
    p: *mut *mut QpQuasiPoly,
    q: *mut *mut QpQuasiPoly,
    threshold: *mut u64,
) -> i32 {
    guard(|| {
        if d.is_null() || p.is_null() || q.is_null() || threshold.is_null() {
            return Err(Fail::Null);
        }
        let r = gcd_bezout(&get(f)?.0, &get(g)?.0)?;
        put_u64(threshold, r.d.threshold.max(r.p.threshold).max(r.q.threshold))?;
        put(d, QpQuasiPoly(r.d.qp))?;
        put(p, QpQuasiPoly(r.p.qp))?;
        put(q, QpQuasiPoly(r.q.qp))
    })
}

/// `⌊f(t)/g(t)⌋` for polynomials `f`, `g`.
///
/// # Safety
/// `f`, `g` are live handles; out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn qp_floor_ratio(
    f: *const QpQuasiPoly,
    g: *const QpQuasiPoly,
    out: *mut *mut QpQuasiPoly,
    threshold: *mut u64,
) -> i32 {
    guard(|| {
        let (f, g) = (&get(f)?.0, &get(g)?.0);
        if f.period() != 1 || g.period() != 1 {
            return Err(Error::Invalid("floor_ratio takes polynomials".into()).into());
        }
        let e = floor_ratio(f.constituent(0), g.constituent(0))?;
        put_u64(threshold, e.threshold)?;
        put(out, QpQuasiPoly(e.qp))
    })
}

/// Parses polyhedron text, one inequality per line.
///
/// # Safety
/// `src` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_polyhedron_parse(src: *const c_char, out: *mut *mut QpPolyhedron) -> i32 {
    guard(|| put(out, QpPolyhedron(ParamPolyhedron::parse(text(src)?)?)))
}

/// # Safety
/// `h` comes from this library or is null.
#[no_mangle]
pub unsafe extern "C" fn qp_polyhedron_free(h: *mut QpPolyhedron) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `|P_t ∩ Z^d|`.
///
/// # Safety
/// `h` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_count_points(h: *const QpPolyhedron, t: u64, out: *mut u64) -> i32 {
    guard(|| put_u64(out, count_points(&get(h)?.0, t)?))
}

/// Fits the lattice-point count over `[t0, t1]`, holding out the last third.
///
/// # Safety
/// `h` is a live handle; out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn qp_ehrhart_fit(
    h: *const QpPolyhedron,
    t0: u64,
    t1: u64,
    out: *mut *mut QpQuasiPoly,
    threshold: *mut u64,
) -> i32 {
    guard(|| {
        if t0 >= t1 {
            return Err(Error::Invalid("window needs t0 < t1".into()).into());
        }
        let r = ehrhart_fit(&get(h)?.0, &FitSearch::split(t0, t1))?;
        put_u64(threshold, r.fit.result.threshold)?;
        put(out, QpQuasiPoly(r.fit.result.qp))
    })
}

/// Frobenius number of fixed generators. `*kind` receives one of the
/// `QP_FROBENIUS_*` values; `*out` is set only for `QP_FROBENIUS_NUMBER`.
///
/// # Safety
/// `gens` points to `n` values; out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn qp_frobenius(gens: *const u64, n: usize, out: *mut i64, kind: *mut i32) -> i32 {
    guard(|| {
        if gens.is_null() || out.is_null() || kind.is_null() {
            return Err(Fail::Null);
        }
        match frobenius_of(std::slice::from_raw_parts(gens, n))? {
            Frobenius::Number(f) => {
                *out = i64::try_from(f).map_err(|_| Error::Overflow)?;
                *kind = QP_FROBENIUS_NUMBER;
            }
            Frobenius::NotCoprime => *kind = QP_FROBENIUS_NOT_COPRIME,
            Frobenius::AllCovered => *kind = QP_FROBENIUS_ALL_COVERED,
        }
        Ok(())
    })
}

/// Parses a formula in the family DSL.
///
/// # Safety
/// `src` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_family_parse(src: *const c_char, out: *mut *mut QpFamily) -> i32 {
    guard(|| put(out, QpFamily(Family::parse(text(src)?)?)))
}

/// # Safety
/// `h` comes from this library or is null.
#[no_mangle]
pub unsafe extern "C" fn qp_family_free(h: *mut QpFamily) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs a property checker over `[t0, t1]` and returns the report as JSON.
/// `property` is one of `"1"`, `"2"`, `"3"` or `"4"`; property 4 constructs
/// its own candidate.
///
/// # Safety
/// `h` is a live handle; `property` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qp_family_check(
    h: *const QpFamily,
    property: *const c_char,
    t0: u64,
    t1: u64,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let fam = &get(h)?.0;
        if t0 >= t1 {
            return Err(Error::Invalid("window needs t0 < t1".into()).into());
        }
        let cfg = CheckConfig::new(FitSearch::split(t0, t1));
        let r = match text(property)? {
            "1" => check_property1(fam, &cfg)?,
            "2" => check_property2(fam, &cfg)?,
            "3" => check_property3(fam, &Witness::Any, &cfg)?,
            "4" => check_property4(fam, None, &cfg)?,
            other => return Err(Error::Invalid(format!("unknown property {other:?}")).into()),
        };
        let json = serde_json::to_string(&r).map_err(|e| Error::Invalid(e.to_string()))?;
        put_string(out, json)
    })
}

