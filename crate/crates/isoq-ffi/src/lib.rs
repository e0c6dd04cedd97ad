//! C ABI for the engine: opaque handles to normal forms, JSON-out entry
//! points for suite reports and dimension checks, and integer error codes.
//!
//! Conventions:
//! - Every fallible function returns an [`IsoqStatus`]; `ISOQ_OK` is zero.
//! - On any non-zero status, a thread-local message is available through
//!   [`isoq_last_error`] until the next call on the same thread.
//! - Strings returned by the library are NUL-terminated UTF-8 owned by the
//!   caller; release them with [`isoq_string_free`].  Handles are released
//!   with [`isoq_combo_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use isoq::diagrams::parse_term;
use isoq::functor::dimension_check;
use isoq::report::{combo_json, run_suite};
use isoq::rewrite::{normalize, normalize_affine, LinearCombo};
use isoq::scalars::ScalarMode;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IsoqStatus {
    /// Success.
    IsoqOk = 0,
    /// A pointer argument was null or a string was not valid UTF-8.
    IsoqBadArgument = 1,
    /// The term or object word did not parse or was ill-typed.
    IsoqParseError = 2,
    /// Evaluation failed (for example a boundary mismatch).
    IsoqEvalError = 3,
    /// A resource bound was exceeded.
    IsoqResourceError = 4,
    /// A verification check failed (the report still describes it).
    IsoqCheckFailed = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Opaque handle to a normal form (a linear combination of basis diagrams).
pub struct IsoqCombo {
    inner: LinearCombo,
}

fn read_str<'a>(p: *const c_char) -> Result<&'a str, IsoqStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(IsoqStatus::IsoqBadArgument);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        IsoqStatus::IsoqBadArgument
    })
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn classify(msg: &str) -> IsoqStatus {
    if msg.contains("resource") || msg.contains("bound") {
        IsoqStatus::IsoqResourceError
    } else {
        IsoqStatus::IsoqEvalError
    }
}

/// The last error message raised on this thread, or null if none.  The
/// returned string must be released with `isoq_string_free`.
#[no_mangle]
pub extern "C" fn isoq_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Release a string returned by the library.  Null is ignored.
#[no_mangle]
pub extern "C" fn isoq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Normalize the term `text` and store a handle to the result in `out`.
/// With `affine` non-zero, open tokens and strand decorations are allowed
/// and intermediate decoration labels are capped at `zebra_bound`.
#[no_mangle]
pub extern "C" fn isoq_normalize(
    text: *const c_char,
    affine: i32,
    zebra_bound: i64,
    out: *mut *mut IsoqCombo,
) -> IsoqStatus {
    clear_error();
    if out.is_null() {
        set_error("null output pointer");
        return IsoqStatus::IsoqBadArgument;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let term = match parse_term(text, ScalarMode::AbstractZ) {
        Ok(t) => t,
        Err(e) => {
            set_error(format!("cannot parse term: {e}"));
            return IsoqStatus::IsoqParseError;
        }
    };
    let combo = if affine != 0 {
        normalize_affine(&term, zebra_bound)
    } else {
        normalize(&term)
    };
    match combo {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(IsoqCombo { inner })) };
            IsoqStatus::IsoqOk
        }
        Err(e) => {
            let msg = e.to_string();
            let status = classify(&msg);
            set_error(msg);
            status
        }
    }
}

/// Number of basis diagrams in the normal form.
#[no_mangle]
pub extern "C" fn isoq_combo_term_count(combo: *const IsoqCombo) -> usize {
    if combo.is_null() {
        return 0;
    }
    unsafe { &*combo }.inner.terms.len()
}

/// JSON rendering of the normal form; release with `isoq_string_free`.
/// Returns null if the handle is null.
#[no_mangle]
pub extern "C" fn isoq_combo_json(combo: *const IsoqCombo) -> *mut c_char {
    if combo.is_null() {
        return ptr::null_mut();
    }
    let v = combo_json(&unsafe { &*combo }.inner);
    to_c_string(serde_json::to_string_pretty(&v).unwrap_or_default())
}

/// Release a normal-form handle.  Null is ignored.
#[no_mangle]
pub extern "C" fn isoq_combo_free(combo: *mut IsoqCombo) {
    if !combo.is_null() {
        drop(unsafe { Box::from_raw(combo) });
    }
}

/// Run the named verification suite (`core`, `derived`, `affine`,
/// `algebras`, `chiral`, or `central`) with the given size parameters and
/// store the JSON report in `out_json`.  Returns `IsoqOk` when every check
/// passes and `IsoqCheckFailed` when some check fails; the report is written
/// in both cases.
#[no_mangle]
pub extern "C" fn isoq_verify(
    suite: *const c_char,
    n: i64,
    s: usize,
    m: u32,
    r: usize,
    out_json: *mut *mut c_char,
) -> IsoqStatus {
    clear_error();
    if out_json.is_null() {
        set_error("null output pointer");
        return IsoqStatus::IsoqBadArgument;
    }
    let suite = match read_str(suite) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match run_suite(suite, n, s, m, r) {
        Ok(rep) => {
            unsafe { *out_json = to_c_string(rep.to_json()) };
            if rep.passed {
                IsoqStatus::IsoqOk
            } else {
                set_error(format!("suite {suite} has failing checks"));
                IsoqStatus::IsoqCheckFailed
            }
        }
        Err(msg) => {
            let status = if msg.starts_with("unknown suite") {
                IsoqStatus::IsoqBadArgument
            } else {
                classify(&msg)
            };
            set_error(msg);
            status
        }
    }
}

/// Compare the expected and computed dimension of the morphism space from
/// object word `x` to object word `y` under the size-`n` realization.
/// `out_expected` and `out_rank` receive the two counts and `out_certified`
/// is non-zero when the strand count is within the faithful range.  Returns
/// `IsoqCheckFailed` when the counts disagree.
#[no_mangle]
pub extern "C" fn isoq_dim(
    x: *const c_char,
    y: *const c_char,
    n: i64,
    out_expected: *mut u64,
    out_rank: *mut u64,
    out_certified: *mut i32,
) -> IsoqStatus {
    clear_error();
    if out_expected.is_null() || out_rank.is_null() || out_certified.is_null() {
        set_error("null output pointer");
        return IsoqStatus::IsoqBadArgument;
    }
    let xw = match read_str(x).and_then(|t| {
        isoq::diagrams::ObjectWord::parse(t).map_err(|e| {
            set_error(format!("bad source word: {e}"));
            IsoqStatus::IsoqParseError
        })
    }) {
        Ok(w) => w,
        Err(s) => return s,
    };
    let yw = match read_str(y).and_then(|t| {
        isoq::diagrams::ObjectWord::parse(t).map_err(|e| {
            set_error(format!("bad target word: {e}"));
            IsoqStatus::IsoqParseError
        })
    }) {
        Ok(w) => w,
        Err(s) => return s,
    };
    match dimension_check(&xw, &yw, n) {
        Ok(rep) => {
            unsafe {
                *out_expected = rep.expected as u64;
                *out_rank = rep.rank as u64;
                *out_certified = rep.certified as i32;
            }
            if rep.matches() {
                IsoqStatus::IsoqOk
            } else {
                set_error("expected dimension and computed rank disagree");
                IsoqStatus::IsoqCheckFailed
            }
        }
        Err(e) => {
            let msg = e.to_string();
            let status = classify(&msg);
            set_error(msg);
            status
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn normalize_roundtrip_through_the_c_abi() {
        let text = c("x+ ; x-");
        let mut handle: *mut IsoqCombo = ptr::null_mut();
        let status = isoq_normalize(text.as_ptr(), 0, 16, &mut handle);
        assert_eq!(status, IsoqStatus::IsoqOk);
        assert_eq!(isoq_combo_term_count(handle), 1);
        let json = isoq_combo_json(handle);
        let rendered = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        assert!(rendered.contains("\"domain\": \"^^\""));
        isoq_string_free(json);
        isoq_combo_free(handle);
    }

    #[test]
    fn parse_errors_set_the_thread_local_message() {
        let text = c("x+ ;");
        let mut handle: *mut IsoqCombo = ptr::null_mut();
        let status = isoq_normalize(text.as_ptr(), 0, 16, &mut handle);
        assert_eq!(status, IsoqStatus::IsoqParseError);
        let err = isoq_last_error();
        assert!(!err.is_null());
        let msg = unsafe { CStr::from_ptr(err) }.to_str().unwrap().to_owned();
        assert!(msg.contains("parse"), "unexpected message: {msg}");
        isoq_string_free(err);
    }

    #[test]
    fn verify_core_passes_and_reports_json() {
        let suite = c("core");
        let mut json: *mut c_char = ptr::null_mut();
        let status = isoq_verify(suite.as_ptr(), 1, 0, 1, 1, &mut json);
        assert_eq!(status, IsoqStatus::IsoqOk);
        let rendered = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        assert!(rendered.contains("\"suite\": \"core\""));
        assert!(rendered.contains("\"passed\": true"));
        isoq_string_free(json);
        let bogus = c("bogus");
        let status = isoq_verify(bogus.as_ptr(), 1, 0, 1, 1, &mut json);
        assert_eq!(status, IsoqStatus::IsoqBadArgument);
    }

    #[test]
    fn dimension_check_through_the_c_abi() {
        let x = c("^^");
        let y = c("^^");
        let (mut expected, mut rank, mut certified) = (0u64, 0u64, 0i32);
        let status = isoq_dim(
            x.as_ptr(),
            y.as_ptr(),
            2,
            &mut expected,
            &mut rank,
            &mut certified,
        );
        assert_eq!(status, IsoqStatus::IsoqOk);
        assert_eq!(expected, 8);
        assert_eq!(rank, 8);
        assert_eq!(certified, 1);
    }
}
