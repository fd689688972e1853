use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dissoc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    dissoc_string_free(p);
    s
}

unsafe fn last_error() -> String {
    let p = dissoc_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn parse(text: &str) -> *mut DissocExpr {
    let mut e = ptr::null_mut();
    assert_eq!(dissoc_expr_parse(c(text).as_ptr(), &mut e), DissocStatus::Ok);
    e
}

unsafe fn uniform_half(names: &[&str]) -> *mut DissocProbs {
    let p = dissoc_probs_new();
    for n in names {
        assert_eq!(dissoc_probs_set(p, c(n).as_ptr(), c("1/2").as_ptr()), DissocStatus::Ok);
    }
    p
}

#[test]
fn parse_format_round_trip() {
    unsafe {
        let e = parse("x1&x3|x1&x4|x2&x4");
        let mut out = ptr::null_mut();
        assert_eq!(dissoc_expr_format(e, &mut out), DissocStatus::Ok);
        assert_eq!(take_string(out), "x1&x3 | x1&x4 | x2&x4");
        dissoc_expr_free(e);
    }
}

#[test]
fn eval_reports_rational_text() {
    unsafe {
        let e = parse("x | y");
        let mut p = ptr::null_mut();
        assert_eq!(dissoc_probs_parse(c("x = 1/3\ny = 1/2\n").as_ptr(), &mut p), DissocStatus::Ok);
        let mut value = 0.0;
        let mut text = ptr::null_mut();
        assert_eq!(dissoc_eval(e, p, &mut value, &mut text), DissocStatus::Ok);
        assert!((value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(take_string(text), "2/3");
        assert_eq!(dissoc_eval(e, p, &mut value, ptr::null_mut()), DissocStatus::Ok);
        dissoc_probs_free(p);
        dissoc_expr_free(e);
    }
}

#[test]
fn bound_summary_for_example_dnf() {
    unsafe {
        let e = parse("x1&x3|x1&x4|x2&x4");
        let p = uniform_half(&["x1", "x2", "x3", "x4"]);
        let mut summary = std::mem::zeroed::<DissocBoundSummary>();
        let mut text = ptr::null_mut();
        let status = dissoc_bound(e, c("x4").as_ptr(), DissocDirection::Upper, p, &mut summary, &mut text);
        assert_eq!(status, DissocStatus::Ok);
        assert_eq!(take_string(text), "exact=1/2 bound=17/32");
        assert_eq!(summary.exact, 0.5);
        assert_eq!(summary.bound, 17.0 / 32.0);
        assert_eq!(summary.gap, 1.0 / 32.0);
        assert!(!summary.tight);
        assert!(summary.is_exact);
        assert_eq!(summary.kind, DissocTemplateKind::Disjunctive);
        assert_eq!(summary.n, 2);
        dissoc_probs_free(p);
        dissoc_expr_free(e);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(dissoc_expr_parse(c("x &").as_ptr(), &mut e), DissocStatus::ParseError);
        assert!(e.is_null());
        assert!(last_error().contains("syntax error"));

        assert_eq!(dissoc_expr_parse(ptr::null(), &mut e), DissocStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(dissoc_expr_parse(bad.as_ptr().cast(), &mut e), DissocStatus::InvalidUtf8);

        let p = dissoc_probs_new();
        assert_eq!(dissoc_probs_set(p, c("x").as_ptr(), c("3/2").as_ptr()), DissocStatus::ParseError);
        assert_eq!(dissoc_probs_set(p, c("x y").as_ptr(), c("1").as_ptr()), DissocStatus::ParseError);

        let e = parse("x&y | !x&z");
        let mut summary = std::mem::zeroed::<DissocBoundSummary>();
        let status = dissoc_bound(e, c("x").as_ptr(), DissocDirection::Lower, p, &mut summary, ptr::null_mut());
        assert_eq!(status, DissocStatus::Precondition);
        dissoc_expr_free(e);

        let e = parse("x");
        let mut value = 0.0;
        assert_eq!(dissoc_eval(e, p, &mut value, ptr::null_mut()), DissocStatus::Precondition);
        assert!(last_error().contains("`x`"));
        assert_eq!(dissoc_probs_set(p, c("x").as_ptr(), c("1").as_ptr()), DissocStatus::Ok);
        assert!(dissoc_last_error().is_null());
        dissoc_expr_free(e);
        dissoc_probs_free(p);
    }
}

#[test]
fn symmetric_assignments() {
    unsafe {
        let mut out = [0.0f64; 3];
        let s = dissoc_assign_symmetric(DissocTemplateKind::Conjunctive, DissocDirection::Upper, 0.125, 3, out.as_mut_ptr());
        assert_eq!(s, DissocStatus::Ok);
        for v in out {
            assert!((v - 0.5).abs() < 1e-12);
        }
        let s = dissoc_assign_symmetric(DissocTemplateKind::Disjunctive, DissocDirection::Upper, 0.3, 3, out.as_mut_ptr());
        assert_eq!(s, DissocStatus::Ok);
        assert_eq!(out, [0.3; 3]);
        let s = dissoc_assign_symmetric(DissocTemplateKind::Disjunctive, DissocDirection::Lower, 1.5, 3, out.as_mut_ptr());
        assert_eq!(s, DissocStatus::Precondition);
        let s = dissoc_assign_symmetric(DissocTemplateKind::Disjunctive, DissocDirection::Lower, 0.5, 0, out.as_mut_ptr());
        assert_eq!(s, DissocStatus::Precondition);
        let s = dissoc_assign_symmetric(DissocTemplateKind::Disjunctive, DissocDirection::Lower, 0.5, 1, ptr::null_mut());
        assert_eq!(s, DissocStatus::NullArgument);
    }
}

#[test]
fn null_handles_are_safe_to_free() {
    unsafe {
        dissoc_expr_free(ptr::null_mut());
        dissoc_probs_free(ptr::null_mut());
        dissoc_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(dissoc_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
