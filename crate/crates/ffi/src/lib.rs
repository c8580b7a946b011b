//! C interface to the experiment runner.
//!
//! Configs and reports cross the boundary as opaque handles. Every entry
//! point returns a [`TlStatus`]; on failure the message is kept per thread
//! and can be read with [`tl_last_error`]. Strings handed out by the library
//! must be released with [`tl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tamperlab::cli::{self, ExperimentConfig, SuiteReport};
use tamperlab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    HashMismatch = 4,
    DimensionCap = 5,
    OutOfRange = 6,
    Io = 7,
    Numerical = 8,
    Panic = 9,
}

/// Parsed experiment configuration.
pub struct TlConfig(ExperimentConfig);

/// Result of one suite run.
pub struct TlReport(SuiteReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> TlStatus {
    match e {
        LabError::InvalidConfig(_) | LabError::InvalidParameter(_) => TlStatus::InvalidConfig,
        LabError::HashMismatch { .. } => TlStatus::HashMismatch,
        LabError::DimensionCap { .. } | LabError::EnumerationTooLarge(_) => TlStatus::DimensionCap,
        LabError::Io(_) => TlStatus::Io,
        _ => TlStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TlStatus, String)>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside tamperlab".into());
            TlStatus::Panic
        }
    }
}

fn lab(e: LabError) -> (TlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TlStatus, String) {
    (TlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (TlStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON experiment config.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_config_from_json(json: *const c_char, out: *mut *mut TlConfig) -> TlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_json(read_str(json, "json")?).map_err(lab)?;
        cfg.check_basic().map_err(lab)?;
        *out = Box::into_raw(Box::new(TlConfig(cfg)));
        Ok(())
    })
}

/// Creates the default config of a suite.
///
/// # Safety
/// `suite` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_config_new(suite: *const c_char, seed: u64, out: *mut *mut TlConfig) -> TlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = ExperimentConfig::new(read_str(suite, "suite")?);
        cfg.seed = seed;
        cfg.check_basic().map_err(lab)?;
        *out = Box::into_raw(Box::new(TlConfig(cfg)));
        Ok(())
    })
}

/// Hex SHA-256 of the run-determining fields. Free with [`tl_string_free`].
///
/// # Safety
/// `cfg` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_config_hash(cfg: *const TlConfig, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c(cfg.0.hash());
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`tl_config_from_json`] or [`tl_config_new`] and not
/// be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tl_config_free(cfg: *mut TlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs a suite with `workers` threads. A violated check is not an error:
/// the call succeeds and [`tl_report_passed`] reports it.
///
/// # Safety
/// `cfg` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_run(cfg: *const TlConfig, workers: usize, out: *mut *mut TlReport) -> TlStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rep = cli::run_suite_with(&cfg.0, workers.max(1)).map_err(lab)?;
        *out = Box::into_raw(Box::new(TlReport(rep)));
        Ok(())
    })
}

/// 1 if every check passed, 0 otherwise, -1 for a null handle.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn tl_report_passed(report: *const TlReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.passed as i32)
}

/// Number of checks, 0 for a null handle.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn tl_report_check_count(report: *const TlReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.checks.len())
}

/// Value, bound and pass flag of check `index`.
///
/// # Safety
/// `report` must come from this library; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_report_check(
    report: *const TlReport,
    index: usize,
    value: *mut f64,
    bound: *mut f64,
    passed: *mut i32,
) -> TlStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if value.is_null() || bound.is_null() || passed.is_null() {
            return Err(null("out"));
        }
        let c = r.0.checks.get(index).ok_or_else(|| (TlStatus::OutOfRange, format!("check {index} of {}", r.0.checks.len())))?;
        *value = c.value;
        *bound = c.bound;
        *passed = c.passed as i32;
        Ok(())
    })
}

/// Name of check `index`. Free with [`tl_string_free`].
///
/// # Safety
/// `report` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_report_check_name(report: *const TlReport, index: usize, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = r.0.checks.get(index).ok_or_else(|| (TlStatus::OutOfRange, format!("check {index} of {}", r.0.checks.len())))?;
        *out = to_c(c.name.clone());
        Ok(())
    })
}

/// Full report as JSON. Free with [`tl_string_free`].
///
/// # Safety
/// `report` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_report_to_json(report: *const TlReport, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&r.0).map_err(|e| (TlStatus::Io, e.to_string()))?;
        *out = to_c(text);
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`tl_run`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tl_report_free(report: *mut TlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Re-runs a JSON report and sets `matches` to 1 when every value agrees.
/// An edited config yields [`TlStatus::HashMismatch`].
///
/// # Safety
/// `json` must be a nul-terminated string and `matches` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_replay_json(json: *const c_char, matches: *mut i32) -> TlStatus {
    guard(|| {
        if matches.is_null() {
            return Err(null("matches"));
        }
        let stored: SuiteReport =
            serde_json::from_str(read_str(json, "json")?).map_err(|e| (TlStatus::InvalidConfig, e.to_string()))?;
        let outcome = cli::replay(&stored).map_err(lab)?;
        *matches = outcome.matches() as i32;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
