//! C interface to `dissoc`.
//!
//! Every fallible function returns a [`DissocStatus`]. On failure the message
//! is available from [`dissoc_last_error`] on the same thread. Strings handed
//! out by this library must be released with [`dissoc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dissoc::bounds::{assign_symmetric, compute_bound, Direction, PlanChoice};
use dissoc::dissociation::TemplateKind;
use dissoc::{eval_shannon, format_expr, parse_expr, parse_probs, Error, Expr, Prob, ProbAssignment};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissocStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// The input does not meet a documented precondition.
    Precondition = 4,
    /// An internal check failed. Indicates a bug.
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissocDirection {
    Upper = 0,
    Lower = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissocTemplateKind {
    Disjunctive = 0,
    Conjunctive = 1,
}

/// Parsed expression. Opaque.
pub struct DissocExpr {
    inner: Expr,
}

/// Variable probabilities. Opaque.
pub struct DissocProbs {
    inner: ProbAssignment,
}

/// Result of [`dissoc_bound`]. Values are rounded to double; the exact
/// rationals are available as text through `out_text`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissocBoundSummary {
    pub exact: f64,
    pub bound: f64,
    /// `bound - exact`
    pub gap: f64,
    pub tight: bool,
    /// True when every value was computed in rational arithmetic.
    pub is_exact: bool,
    pub kind: DissocTemplateKind,
    /// Number of fresh copies.
    pub n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DissocStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let root = e.root();
        let status = if root.is_internal() {
            DissocStatus::Internal
        } else if root.is_parse() {
            DissocStatus::ParseError
        } else {
            DissocStatus::Precondition
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DissocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DissocStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside dissoc");
            DissocStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DissocStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DissocStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(DissocStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(DissocStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dissoc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dissoc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dissoc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text` into a new expression stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dissoc_expr_parse(text: *const c_char, out: *mut *mut DissocExpr) -> DissocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let inner = parse_expr(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(DissocExpr { inner }));
        Ok(())
    })
}

/// Re-parseable text for `expr`. Free the result with [`dissoc_string_free`].
///
/// # Safety
/// `expr` must come from [`dissoc_expr_parse`]; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dissoc_expr_format(expr: *const DissocExpr, out: *mut *mut c_char) -> DissocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let e = ref_arg(expr, "expr")?;
        *out = to_c_string(format_expr(&e.inner));
        Ok(())
    })
}

/// # Safety
/// `expr` must be null or come from [`dissoc_expr_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dissoc_expr_free(expr: *mut DissocExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Empty probability assignment.
#[no_mangle]
pub extern "C" fn dissoc_probs_new() -> *mut DissocProbs {
    Box::into_raw(Box::new(DissocProbs {
        inner: ProbAssignment::new(),
    }))
}

/// Parses a probability file's contents (`name = value` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dissoc_probs_parse(text: *const c_char, out: *mut *mut DissocProbs) -> DissocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let inner = parse_probs(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(DissocProbs { inner }));
        Ok(())
    })
}

/// Sets `name` to `value`, given as `a/b`, an integer or a decimal.
///
/// # Safety
/// `probs` must come from this library; the strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dissoc_probs_set(
    probs: *mut DissocProbs,
    name: *const c_char,
    value: *const c_char,
) -> DissocStatus {
    guard(|| {
        let probs = probs
            .as_mut()
            .ok_or_else(|| Failure(DissocStatus::NullArgument, "probs is null".into()))?;
        let name = str_arg(name, "name")?;
        let text = str_arg(value, "value")?;
        if !dissoc::parser::is_identifier(name) {
            return Err(Failure(DissocStatus::ParseError, format!("`{name}` is not an identifier")));
        }
        let value: Prob = text
            .trim()
            .parse()
            .map_err(|e| Failure(DissocStatus::ParseError, format!("{e}")))?;
        probs.inner.set(name, value)?;
        Ok(())
    })
}

/// # Safety
/// `probs` must be null or come from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dissoc_probs_free(probs: *mut DissocProbs) {
    if !probs.is_null() {
        drop(Box::from_raw(probs));
    }
}

/// Probability of `expr`. `out_text`, if not null, receives the value as
/// `a/b` when exact or as a decimal otherwise.
///
/// # Safety
/// Handles must come from this library; `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dissoc_eval(
    expr: *const DissocExpr,
    probs: *const DissocProbs,
    out_value: *mut f64,
    out_text: *mut *mut c_char,
) -> DissocStatus {
    guard(|| {
        out_arg(out_value, "out_value")?;
        let e = ref_arg(expr, "expr")?;
        let p = ref_arg(probs, "probs")?;
        let value = eval_shannon(&e.inner, &p.inner)?;
        *out_value = value.to_f64();
        if !out_text.is_null() {
            *out_text = to_c_string(value.to_string());
        }
        Ok(())
    })
}

/// Bound on `expr` by dissociating `var` with the symmetric assignment.
/// `out_text`, if not null, receives `exact=<v> bound=<v>` with rationals
/// where the computation stayed exact.
///
/// # Safety
/// Handles must come from this library; `var` must be NUL-terminated and
/// `out` valid.
#[no_mangle]
pub unsafe extern "C" fn dissoc_bound(
    expr: *const DissocExpr,
    var: *const c_char,
    direction: DissocDirection,
    probs: *const DissocProbs,
    out: *mut DissocBoundSummary,
    out_text: *mut *mut c_char,
) -> DissocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let e = ref_arg(expr, "expr")?;
        let p = ref_arg(probs, "probs")?;
        let var = str_arg(var, "var")?;
        let o = compute_bound(&e.inner, var, direction.into(), &p.inner, &PlanChoice::Symmetric)?;
        let r = &o.report;
        *out = DissocBoundSummary {
            exact: r.exact.to_f64(),
            bound: r.bound.to_f64(),
            gap: r.gap.to_f64(),
            tight: r.tight,
            is_exact: r.exact.is_exact() && r.bound.is_exact(),
            kind: match o.template.kind {
                TemplateKind::Disjunctive => DissocTemplateKind::Disjunctive,
                TemplateKind::Conjunctive => DissocTemplateKind::Conjunctive,
            },
            n: o.template.n(),
        };
        if !out_text.is_null() {
            *out_text = to_c_string(format!("exact={} bound={}", r.exact, r.bound));
        }
        Ok(())
    })
}

/// Writes the symmetric statically-tight assignment for `n` copies of a
/// variable with probability `p` into `out[0..n]`.
///
/// # Safety
/// `out` must point to at least `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dissoc_assign_symmetric(
    kind: DissocTemplateKind,
    direction: DissocDirection,
    p: f64,
    n: usize,
    out: *mut f64,
) -> DissocStatus {
    guard(|| {
        out_arg(out, "out")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Failure(DissocStatus::Precondition, format!("p = {p} is outside [0, 1]")));
        }
        if n == 0 {
            return Err(Failure(DissocStatus::Precondition, "n must be at least 1".into()));
        }
        let kind = match kind {
            DissocTemplateKind::Disjunctive => TemplateKind::Disjunctive,
            DissocTemplateKind::Conjunctive => TemplateKind::Conjunctive,
        };
        let values = assign_symmetric(kind, direction.into(), &Prob::approx(p), n);
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, v) in dst.iter_mut().zip(values) {
            *d = v.to_f64();
        }
        Ok(())
    })
}

impl From<DissocDirection> for Direction {
    fn from(d: DissocDirection) -> Self {
        match d {
            DissocDirection::Upper => Direction::Upper,
            DissocDirection::Lower => Direction::Lower,
        }
    }
}
