use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use quasipoly_ffi::*;

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    qp_string_free(s);
    out
}

unsafe fn qp(src: &str) -> *mut QpQuasiPoly {
    let c = CString::new(src).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(qp_quasipoly_parse(c.as_ptr(), &mut h), QP_OK);
    h
}

#[test]
fn gcd_through_the_abi() {
    unsafe {
        let (f, g) = (qp("2*t+1"), qp("5*t+6"));
        let (mut d, mut p, mut q, mut thr) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 0u64);
        assert_eq!(qp_gcd(f, g, &mut d, &mut p, &mut q, &mut thr), QP_OK);
        assert_eq!(qp_quasipoly_period(d), 7);
        let mut s = ptr::null_mut();
        assert_eq!(qp_quasipoly_eval(d, 10, &mut s), QP_OK);
        assert_eq!(take(s), "7/1");
        assert_eq!(qp_quasipoly_eval(d, 11, &mut s), QP_OK);
        assert_eq!(take(s), "1/1");
        assert_eq!(qp_quasipoly_to_string(d, &mut s), QP_OK);
        assert_eq!(take(s), "{0: 1; 1: 1; 2: 1; 3: 7; 4: 1; 5: 1; 6: 1} mod 7");
        for h in [f, g, d, p, q] {
            qp_quasipoly_free(h);
        }
    }
}

#[test]
fn floor_ratio_through_the_abi() {
    unsafe {
        let (f, g) = (qp("5*t - 3"), qp("4"));
        let (mut out, mut thr) = (ptr::null_mut(), 0u64);
        assert_eq!(qp_floor_ratio(f, g, &mut out, &mut thr), QP_OK);
        assert_eq!(qp_quasipoly_period(out), 4);
        for t in 1..40u64 {
            let mut s = ptr::null_mut();
            qp_quasipoly_eval(out, t, &mut s);
            assert_eq!(take(s), format!("{}/1", (5 * t - 3) / 4));
        }
        for h in [f, g, out] {
            qp_quasipoly_free(h);
        }
    }
}

#[test]
fn polyhedron_counts_and_fit() {
    let twist = CString::new(
        "2*x + (2*t-2)*y <= t^2 - 2*t + 2\n2*x + (2*t-2)*y >= -(t^2 - 2*t + 2)\n\
         (2-2*t)*x + 2*y <= t^2 - 2*t + 2\n(2-2*t)*x + 2*y >= -(t^2 - 2*t + 2)\n",
    )
    .unwrap();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(qp_polyhedron_parse(twist.as_ptr(), &mut p), QP_OK);
        let mut n = 0u64;
        assert_eq!(qp_count_points(p, 5, &mut n), QP_OK);
        assert_eq!(n, 17);
        assert_eq!(qp_count_points(p, 4, &mut n), QP_OK);
        assert_eq!(n, 13);
        let (mut fit, mut thr) = (ptr::null_mut(), 0u64);
        assert_eq!(qp_ehrhart_fit(p, 3, 60, &mut fit, &mut thr), QP_OK);
        let mut s = ptr::null_mut();
        qp_quasipoly_to_string(fit, &mut s);
        assert_eq!(take(s), "{0: t^2 - 2*t + 5; 1: t^2 - 2*t + 2} mod 2");
        qp_quasipoly_free(fit);
        qp_polyhedron_free(p);
    }
}

#[test]
fn frobenius_kinds() {
    unsafe {
        let (mut f, mut kind) = (0i64, -1i32);
        assert_eq!(qp_frobenius([4u64, 7].as_ptr(), 2, &mut f, &mut kind), QP_OK);
        assert_eq!((f, kind), (17, QP_FROBENIUS_NUMBER));
        assert_eq!(qp_frobenius([4u64, 6].as_ptr(), 2, &mut f, &mut kind), QP_OK);
        assert_eq!(kind, QP_FROBENIUS_NOT_COPRIME);
        assert_eq!(qp_frobenius([1u64, 6].as_ptr(), 2, &mut f, &mut kind), QP_OK);
        assert_eq!(kind, QP_FROBENIUS_ALL_COVERED);
    }
}

#[test]
fn family_report_json() {
    let src = CString::new("exists y : 2*x + 2*y + 3 = 5*t and t < x and x <= y").unwrap();
    let prop = CString::new("1").unwrap();
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(qp_family_parse(src.as_ptr(), &mut fam), QP_OK);
        let mut s = ptr::null_mut();
        assert_eq!(qp_family_check(fam, prop.as_ptr(), 3, 120, &mut s), QP_OK);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["verdict"], "supported");
        assert_eq!(v["existence"]["residues"], serde_json::json!([1]));
        qp_family_free(fam);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let bad = CString::new("2*t +").unwrap();
        let mut h = ptr::null_mut();
        let code = qp_quasipoly_parse(bad.as_ptr(), &mut h);
        assert_eq!(code, quasipoly::Error::Parse(String::new()).code());
        assert!(h.is_null());
        let msg = CStr::from_ptr(qp_last_error()).to_str().unwrap();
        assert!(msg.starts_with("parse error"), "{msg}");

        assert_eq!(qp_quasipoly_parse(ptr::null(), &mut h), QP_ERR_NULL);
        let mut n = 0u64;
        assert_eq!(qp_count_points(ptr::null(), 1, &mut n), QP_ERR_NULL);

        let unb = CString::new("x1 - x2 <= t\nnonneg").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(qp_polyhedron_parse(unb.as_ptr(), &mut p), QP_OK);
        assert_eq!(qp_count_points(p, 3, &mut n), quasipoly::Error::Unbounded.code());
        qp_polyhedron_free(p);

        let invalid = [0xffu8, 0];
        assert_eq!(qp_quasipoly_parse(invalid.as_ptr() as *const c_char, &mut h), QP_ERR_UTF8);
        qp_quasipoly_free(ptr::null_mut());
        qp_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/quasipoly.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["qp_quasipoly_parse", "qp_gcd", "qp_ehrhart_fit", "qp_family_check", "typedef struct QpQuasiPoly"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"quasipoly.h\"\nint main(void) { return qp_last_error() == 0; }\n").unwrap();
    let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-I").arg(header.parent().unwrap()).arg(&src).output() else {
        eprintln!("no C compiler; header syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
