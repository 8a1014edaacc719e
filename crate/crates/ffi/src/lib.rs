//! C ABI over tamelab. Sources are opaque handles; every call returns a
//! status code and stores a message retrievable with `tl_last_error`.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use tamelab::analysis::{exact_mean, CostKind, Method};
use tamelab::error::Error;
use tamelab::source::SourceModel;
use tamelab::tameness::{classify, ClassifyBudget};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedSource = 3,
    Numeric = 4,
    Panic = 5,
}

/// Cost functional.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlCost {
    TrieSize = 0,
    TriePathLength = 1,
    BstSymbolCost = 2,
}

/// Exact-mean method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlMethod {
    Alternating = 0,
    Direct = 1,
    Rice = 2,
}

/// Opaque source handle.
pub struct TlSource {
    inner: SourceModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> TlStatus {
    match err {
        Error::InvalidConfig(_) => TlStatus::InvalidArgument,
        Error::UnsupportedSource(_) => TlStatus::UnsupportedSource,
        _ => TlStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TlStatus>) -> TlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            TlStatus::Panic
        }
    }
}

fn fail(err: Error) -> TlStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> TlStatus {
    set_error(format!("{what} is null"));
    TlStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, TlStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        TlStatus::InvalidArgument
    })
}

unsafe fn source_ref<'a>(p: *const TlSource) -> Result<&'a SourceModel, TlStatus> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("source"))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), TlStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn new_source(inner: SourceModel, out: *mut *mut TlSource) -> Result<(), TlStatus> {
    write_out(out, Box::into_raw(Box::new(TlSource { inner })), "out")
}

fn cstring(s: String) -> Result<*mut c_char, TlStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        set_error("string contains an interior NUL");
        TlStatus::Numeric
    })
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a built-in source by name, e.g. "uniform-binary" or "gauss".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_source_builtin(name: *const c_char, out: *mut *mut TlSource) -> TlStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let src = SourceModel::builtin(name).ok_or_else(|| {
            set_error(format!("unknown built-in source '{name}'"));
            TlStatus::InvalidArgument
        })?;
        new_source(src, out)
    })
}

/// Parses a source from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_source_from_json(json: *const c_char, out: *mut *mut TlSource) -> TlStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let src = SourceModel::from_json(text).map_err(fail)?;
        new_source(src, out)
    })
}

/// Builds a memoryless source from `len` probabilities summing to one.
///
/// # Safety
/// `probs` must point to `len` doubles and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_source_memoryless(probs: *const f64, len: usize, out: *mut *mut TlSource) -> TlStatus {
    guard(|| {
        if probs.is_null() {
            return Err(null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len);
        let src = SourceModel::memoryless(p).map_err(fail)?;
        new_source(src, out)
    })
}

/// Releases a source. NULL is ignored.
///
/// # Safety
/// `source` must come from a `tl_source_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tl_source_free(source: *mut TlSource) {
    if !source.is_null() {
        drop(Box::from_raw(source));
    }
}

/// Entropy h of the source.
///
/// # Safety
/// `source` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_entropy(source: *const TlSource, out: *mut f64) -> TlStatus {
    guard(|| {
        let h = source_ref(source)?.entropy().map_err(fail)?;
        write_out(out, h, "out")
    })
}

/// Dirichlet series Lambda(s) at s = re + i im.
///
/// # Safety
/// `source` must be a live handle; `out_re` and `out_im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tl_dirichlet_series(
    source: *const TlSource,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> TlStatus {
    guard(|| {
        let v = source_ref(source)?
            .lambda_series(Complex64::new(re, im), 1e-12)
            .map_err(fail)?;
        write_out(out_re, v.value.re, "out_re")?;
        write_out(out_im, v.value.im, "out_im")
    })
}

/// Exact expected cost over `n` independent words. `abs_error` may be NULL.
///
/// # Safety
/// `source` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_exact_mean(
    source: *const TlSource,
    cost: TlCost,
    n: u64,
    method: TlMethod,
    out: *mut f64,
    abs_error: *mut f64,
) -> TlStatus {
    guard(|| {
        let kind = match cost {
            TlCost::TrieSize => CostKind::R,
            TlCost::TriePathLength => CostKind::C,
            TlCost::BstSymbolCost => CostKind::B,
        };
        let method = match method {
            TlMethod::Alternating => Method::Alternating,
            TlMethod::Direct => Method::Direct,
            TlMethod::Rice => Method::Rice,
        };
        let r = exact_mean(kind, source_ref(source)?, n, method).map_err(fail)?;
        if !abs_error.is_null() {
            abs_error.write(r.certified_abs_error);
        }
        write_out(out, r.value, "out")
    })
}

/// Tameness report as a JSON string; release it with `tl_string_free`.
///
/// # Safety
/// `source` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_classify_json(source: *const TlSource, seed: u64, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let budget = ClassifyBudget {
            seed,
            ..ClassifyBudget::default()
        };
        let report = classify(source_ref(source)?, &budget);
        let text = serde_json::to_string(&report.to_json()).map_err(|e| {
            set_error(e.to_string());
            TlStatus::Numeric
        })?;
        write_out(out, cstring(text)?, "out")
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
