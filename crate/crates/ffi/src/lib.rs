//! C ABI over the document driver, circles and strand algebras.
//!
//! Every function returns a `BfcStatus`; results come back through out
//! pointers. Objects are opaque handles released with their `_free`
//! function, and strings returned to the caller are released with
//! `bfc_string_free`. On any status other than OK or FAIL, `bfc_last_error`
//! describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use bfcalc::algebra::{verify_dga, DgAlgebra};
use bfcalc::cli::{execute_args, render, run_document, Status};
use bfcalc::doc::Document;
use bfcalc::pmc::PointedMatchedCircle;
use bfcalc::strand::build_dga;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfcStatus {
    /// The call succeeded and the checked property holds.
    Ok = 0,
    /// The call succeeded and the checked property fails.
    Fail = 1,
    InputError = 2,
    NullPointer = 3,
    Internal = 4,
    Utf8 = 5,
}

/// A parsed document.
pub struct BfcDocument(Document);

/// A pointed matched circle, valid or not.
pub struct BfcPmc(PointedMatchedCircle);

pub struct BfcAlgebra(Arc<DgAlgebra>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

type Outcome = Result<BfcStatus, (BfcStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> BfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            BfcStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BfcStatus, String)> {
    if p.is_null() {
        return Err((BfcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (BfcStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BfcStatus, String)> {
    p.as_ref().ok_or((BfcStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), (BfcStatus, String)> {
    if p.is_null() {
        Err((BfcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn status_of(s: Status) -> BfcStatus {
    match s {
        Status::Pass => BfcStatus::Ok,
        Status::Fail => BfcStatus::Fail,
        Status::Error => BfcStatus::InputError,
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, (BfcStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (BfcStatus::Internal, "report contains a nul byte".into()))
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bfc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bfc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_document_parse(text: *const c_char, out: *mut *mut BfcDocument) -> BfcStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let doc = Document::parse(text).map_err(|e| (BfcStatus::InputError, e.to_string()))?;
        *out = Box::into_raw(Box::new(BfcDocument(doc)));
        Ok(BfcStatus::Ok)
    })
}

/// Executes every RUN line. `report` receives the rendered reports, JSON
/// when `json` is true. Returns OK, FAIL or INPUT_ERROR as the command-line
/// driver would exit.
///
/// # Safety
/// `doc` must be a live handle; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_document_run(doc: *const BfcDocument, json: bool, report: *mut *mut c_char) -> BfcStatus {
    guard(|| {
        out_ptr(report, "report")?;
        *report = ptr::null_mut();
        let doc = handle(doc, "doc")?;
        let (reports, status) = run_document(&doc.0);
        *report = into_c_string(render(&reports, status, json))?;
        Ok(status_of(status))
    })
}

/// Executes one command line, e.g. `algebra verify A_T --budget 100`,
/// against the document.
///
/// # Safety
/// `doc` must be a live handle, `command` a nul-terminated string and
/// `report` writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_document_execute(
    doc: *const BfcDocument,
    command: *const c_char,
    json: bool,
    report: *mut *mut c_char,
) -> BfcStatus {
    guard(|| {
        out_ptr(report, "report")?;
        *report = ptr::null_mut();
        let doc = handle(doc, "doc")?;
        let args: Vec<String> = str_arg(command, "command")?.split_whitespace().map(String::from).collect();
        let r = execute_args(&doc.0, &args);
        let status = r.status;
        *report = into_c_string(render(&[r], status, json))?;
        Ok(status_of(status))
    })
}

/// # Safety
/// `doc` must come from `bfc_document_parse` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bfc_document_free(doc: *mut BfcDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Builds a matching from `2 * pair_count` points laid out as consecutive
/// pairs. Malformed matchings are rejected; degenerate ones are accepted
/// and reported by `bfc_pmc_is_valid`.
///
/// # Safety
/// `points` must hold `2 * pair_count` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_pmc_new(
    genus: usize,
    points: *const u8,
    pair_count: usize,
    out: *mut *mut BfcPmc,
) -> BfcStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if points.is_null() {
            return Err((BfcStatus::NullPointer, "points is null".into()));
        }
        let flat = std::slice::from_raw_parts(points, 2 * pair_count);
        let pairs: Vec<(u8, u8)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        let c = PointedMatchedCircle::from_matching(genus, &pairs).map_err(|e| (BfcStatus::InputError, e.to_string()))?;
        *out = Box::into_raw(Box::new(BfcPmc(c)));
        Ok(BfcStatus::Ok)
    })
}

/// Writes whether surgery on all pairs leaves one circle.
///
/// # Safety
/// `pmc` must be a live handle; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_pmc_is_valid(pmc: *const BfcPmc, valid: *mut bool) -> BfcStatus {
    guard(|| {
        out_ptr(valid, "valid")?;
        *valid = handle(pmc, "pmc")?.0.validate();
        Ok(BfcStatus::Ok)
    })
}

/// # Safety
/// `pmc` must come from `bfc_pmc_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bfc_pmc_free(pmc: *mut BfcPmc) {
    if !pmc.is_null() {
        drop(Box::from_raw(pmc));
    }
}

/// Strand algebra of a valid circle.
///
/// # Safety
/// `pmc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_algebra_strand(pmc: *const BfcPmc, out: *mut *mut BfcAlgebra) -> BfcStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let c = &handle(pmc, "pmc")?.0;
        if !c.validate() {
            return Err((BfcStatus::InputError, format!("matching {c} is not a valid circle")));
        }
        *out = Box::into_raw(Box::new(BfcAlgebra(Arc::new(build_dga(c, "A")))));
        Ok(BfcStatus::Ok)
    })
}

/// # Safety
/// `alg` must be a live handle; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfc_algebra_dim(alg: *const BfcAlgebra, dim: *mut usize) -> BfcStatus {
    guard(|| {
        out_ptr(dim, "dim")?;
        *dim = handle(alg, "alg")?.0.dim();
        Ok(BfcStatus::Ok)
    })
}

/// Checks the DGA axioms with the given sample budget. Returns OK when all
/// pass and FAIL otherwise.
///
/// # Safety
/// `alg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bfc_algebra_verify(alg: *const BfcAlgebra, sample_budget: usize) -> BfcStatus {
    guard(|| {
        let report = verify_dga(&handle(alg, "alg")?.0, sample_budget);
        match report.checks.iter().find(|c| !c.passed()) {
            None => Ok(BfcStatus::Ok),
            Some(c) => {
                set_error(format!("{} fails at {:?}", c.name, c.witness));
                Ok(BfcStatus::Fail)
            }
        }
    })
}

/// # Safety
/// `alg` must come from `bfc_algebra_strand` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bfc_algebra_free(alg: *mut BfcAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}
