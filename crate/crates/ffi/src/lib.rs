//! C ABI for the bounds engine, so other languages can bind it.
//!
//! Conventions:
//!
//! * Handles (`EbSeries`, `EbBoundSeries`) are opaque pointers created and
//!   released by this library. Never free them with anything but the
//!   matching `eb_*_free`.
//! * Functions return an [`EbStatus`]; `EB_STATUS_OK` is zero. On any other
//!   status, [`eb_last_error`] returns a NUL-terminated message owned by a
//!   thread-local slot, valid until the next failing call on that thread.
//! * Inputs are NUL-terminated UTF-8 strings. The run-config JSON is the
//!   same schema the CLI uses.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use epibounds::bounds::{compute_bound_series, BoundMethod, BoundSeries};
use epibounds::config::RunConfig;
use epibounds::error::Error;
use epibounds::ingest::{analysis_window, parse_region_series, RegionSeries, RepairMode};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad configuration (JSON schema, unknown method name, missing section).
    Config = 3,
    /// The feed failed validation (malformed rows, broken invariants).
    Data = 4,
    /// The data refute the maintained assumptions (crossed bounds).
    Inconsistency = 5,
    /// Filesystem problem.
    Io = 6,
    /// Index out of range.
    OutOfRange = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

/// Opaque handle: a validated surveillance series plus its run config.
pub struct EbSeries {
    _private: [u8; 0],
}

/// Opaque handle: a computed per-date bound series.
pub struct EbBoundSeries {
    _private: [u8; 0],
}

struct SeriesHandle {
    series: RegionSeries,
    config: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EbStatus {
    match err {
        Error::Config(_) => EbStatus::Config,
        Error::Inconsistency(_) => EbStatus::Inconsistency,
        Error::Io(_) => EbStatus::Io,
        Error::InFile { source, .. } => status_of(source),
        _ => EbStatus::Data,
    }
}

fn fail(err: &Error) -> EbStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Last error message for this thread. Never NULL; empty before any error.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, EbStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(EbStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        EbStatus::InvalidUtf8
    })
}

fn guarded<F: FnOnce() -> EbStatus>(body: F) -> EbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            EbStatus::Panic
        }
    }
}

fn load_series(csv_text: &str, config_json: &str) -> Result<SeriesHandle, Error> {
    let config = RunConfig::from_json(config_json)?;
    let spec = config.series_spec()?;
    let parsed = parse_region_series(csv_text.as_bytes(), &spec, RepairMode::Reject)?;
    let series = analysis_window(&parsed.series, config.window_threshold())?;
    Ok(SeriesHandle { series, config })
}

/// Parse a surveillance CSV (text) against a run config (JSON) and return a
/// series handle through `out`. The analysis window from the config is
/// applied. On error `out` is untouched.
///
/// # Safety
/// `csv_text` and `config_json` must be NUL-terminated strings; `out` must
/// be a valid pointer to pointer storage.
#[no_mangle]
pub unsafe extern "C" fn eb_series_parse(
    csv_text: *const c_char,
    config_json: *const c_char,
    out: *mut *mut EbSeries,
) -> EbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return EbStatus::NullArgument;
        }
        let (csv_text, config_json) = match (cstr(csv_text), cstr(config_json)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match load_series(csv_text, config_json) {
            Ok(handle) => {
                *out = Box::into_raw(Box::new(handle)).cast::<EbSeries>();
                EbStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Like [`eb_series_parse`] but reads the CSV from a file path.
///
/// # Safety
/// `csv_path` and `config_json` must be NUL-terminated strings; `out` must
/// be a valid pointer to pointer storage.
#[no_mangle]
pub unsafe extern "C" fn eb_series_load_csv(
    csv_path: *const c_char,
    config_json: *const c_char,
    out: *mut *mut EbSeries,
) -> EbStatus {
    guarded(|| {
        let path = match cstr(csv_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                set_error(&format!("{path}: {e}"));
                return EbStatus::Io;
            }
        };
        let Ok(text) = CString::new(text) else {
            set_error("CSV contains NUL bytes");
            return EbStatus::Data;
        };
        eb_series_parse(text.as_ptr(), config_json, out)
    })
}

/// Number of dates in the series. NULL yields 0.
///
/// # Safety
/// `series` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eb_series_len(series: *const EbSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series.cast::<SeriesHandle>()).series.len()
}

/// Release a series handle. NULL is a no-op.
///
/// # Safety
/// `series` must be NULL or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eb_series_free(series: *mut EbSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series.cast::<SeriesHandle>()));
    }
}

/// Compute a bound series with the handle's configured assumptions.
/// `method` is one of `worst_case`, `testing_monotone`, `temporal_envelope`
/// (alias `envelope`), `asym_refined`.
///
/// # Safety
/// `series` must be a live handle, `method` a NUL-terminated string, `out`
/// valid pointer storage.
#[no_mangle]
pub unsafe extern "C" fn eb_bounds_compute(
    series: *const EbSeries,
    method: *const c_char,
    out: *mut *mut EbBoundSeries,
) -> EbStatus {
    guarded(|| {
        if series.is_null() || out.is_null() {
            set_error("null pointer argument");
            return EbStatus::NullArgument;
        }
        let method = match cstr(method) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let method: BoundMethod = match method.parse() {
            Ok(m) => m,
            Err(e) => {
                set_error(&e);
                return EbStatus::Config;
            }
        };
        let handle = &*series.cast::<SeriesHandle>();
        let cfg = match handle.config.assumption_config(None, None) {
            Ok(cfg) => cfg,
            Err(e) => return fail(&e),
        };
        match compute_bound_series(&handle.series, &cfg, method) {
            Ok(bounds) => {
                *out = Box::into_raw(Box::new(bounds)).cast::<EbBoundSeries>();
                EbStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of dates in a bound series. NULL yields 0.
///
/// # Safety
/// `bounds` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eb_bounds_len(bounds: *const EbBoundSeries) -> usize {
    if bounds.is_null() {
        return 0;
    }
    (*bounds.cast::<BoundSeries>()).len()
}

/// Fetch the interval at `index`. Any output pointer may be NULL to skip
/// that field.
///
/// # Safety
/// `bounds` must be a live handle; non-NULL outputs must be valid storage.
#[no_mangle]
pub unsafe extern "C" fn eb_bounds_get(
    bounds: *const EbBoundSeries,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
    clamped: *mut bool,
) -> EbStatus {
    guarded(|| {
        if bounds.is_null() {
            set_error("null pointer argument");
            return EbStatus::NullArgument;
        }
        let series = &*bounds.cast::<BoundSeries>();
        let Some(interval) = series.intervals.get(index) else {
            set_error(&format!(
                "index {index} out of range for {} dates",
                series.len()
            ));
            return EbStatus::OutOfRange;
        };
        if !lo.is_null() {
            *lo = interval.lo;
        }
        if !hi.is_null() {
            *hi = interval.hi;
        }
        if !clamped.is_null() {
            *clamped = interval.clamped;
        }
        EbStatus::Ok
    })
}

/// Write the ISO-8601 date at `index` into `buf` (NUL-terminated). `buf_len`
/// must be at least 11.
///
/// # Safety
/// `bounds` must be a live handle; `buf` must point to `buf_len` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn eb_bounds_date(
    bounds: *const EbBoundSeries,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> EbStatus {
    guarded(|| {
        if bounds.is_null() || buf.is_null() {
            set_error("null pointer argument");
            return EbStatus::NullArgument;
        }
        let series = &*bounds.cast::<BoundSeries>();
        let Some(date) = series.dates.get(index) else {
            set_error(&format!(
                "index {index} out of range for {} dates",
                series.len()
            ));
            return EbStatus::OutOfRange;
        };
        let text = date.format("%Y-%m-%d").to_string();
        if buf_len < text.len() + 1 {
            set_error("date buffer too small (need 11 bytes)");
            return EbStatus::OutOfRange;
        }
        std::ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        EbStatus::Ok
    })
}

/// Release a bound-series handle. NULL is a no-op.
///
/// # Safety
/// `bounds` must be NULL or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eb_bounds_free(bounds: *mut EbBoundSeries) {
    if !bounds.is_null() {
        drop(Box::from_raw(bounds.cast::<BoundSeries>()));
    }
}
