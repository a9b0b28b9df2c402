//! C ABI over the secrecy outage library.
//!
//! Objects are opaque handles created by `ns_*_new`/`ns_config_*` and
//! released with the matching `*_free`. Every call returns an [`NsStatus`];
//! on failure [`ns_last_error`] describes the problem for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noma_secrecy::error::Error;
use noma_secrecy::experiment::apply_overrides;
use noma_secrecy::model::{Scenario, SystemConfig, Validated};
use noma_secrecy::montecarlo::estimate_sop_mc;
use noma_secrecy::sop::SopEngine;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Numerical = 3,
    InvalidArgument = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsScenario {
    ExternalN = 0,
    ExternalM = 1,
    ExternalPair = 2,
    Internal = 3,
}

impl From<NsScenario> for Scenario {
    fn from(s: NsScenario) -> Scenario {
        match s {
            NsScenario::ExternalN => Scenario::ExternalN,
            NsScenario::ExternalM => Scenario::ExternalM,
            NsScenario::ExternalPair => Scenario::ExternalPair,
            NsScenario::Internal => Scenario::Internal,
        }
    }
}

/// A validated system configuration.
pub struct NsConfig {
    inner: Validated,
}

/// Analytic evaluator bound to one configuration.
pub struct NsEngine {
    inner: SopEngine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: NsStatus, msg: impl Into<String>) -> NsStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::Config(_) => NsStatus::InvalidConfig,
        Error::Numerical(_) => NsStatus::Numerical,
        _ => NsStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NsStatus>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(NsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, NsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NsStatus> {
    p.as_ref().ok_or_else(|| fail(NsStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), NsStatus> {
    if p.is_null() {
        Err(fail(NsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ns_config_default(out: *mut *mut NsConfig) -> NsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let inner = lift(SystemConfig::default().validate().map_err(Error::from))?;
        *out = Box::into_raw(Box::new(NsConfig { inner }));
        Ok(())
    })
}

/// Creates a configuration from a JSON object. Keys that are absent keep
/// their default values; unknown keys are rejected.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_config_from_json(json: *const c_char, out: *mut *mut NsConfig) -> NsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if json.is_null() {
            return Err(fail(NsStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(NsStatus::InvalidArgument, "json is not valid UTF-8"))?;
        let map = match serde_json::from_str::<serde_json::Value>(text) {
            Ok(serde_json::Value::Object(m)) => m,
            Ok(_) => return Err(fail(NsStatus::InvalidConfig, "expected a JSON object")),
            Err(e) => return Err(fail(NsStatus::InvalidConfig, e.to_string())),
        };
        let cfg = apply_overrides(&SystemConfig::default(), &map)
            .map_err(|e| fail(NsStatus::InvalidConfig, e.to_string()))?;
        let inner = lift(cfg.validate().map_err(Error::from))?;
        *out = Box::into_raw(Box::new(NsConfig { inner }));
        Ok(())
    })
}

/// Sets the legitimate-user transmit SNR in dB.
///
/// # Safety
/// `cfg` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ns_config_set_rho_db(cfg: *mut NsConfig, rho_db: f64) -> NsStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| fail(NsStatus::NullPointer, "cfg is null"))?;
        if !rho_db.is_finite() {
            return Err(fail(NsStatus::InvalidConfig, "rho_db must be finite"));
        }
        c.inner = c.inner.with_rho_db(rho_db);
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`ns_config_default`] or [`ns_config_from_json`],
/// or be null. It must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ns_config_free(cfg: *mut NsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds an analytic engine for a configuration. The configuration is
/// copied; it may be freed independently.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_engine_new(cfg: *const NsConfig, out: *mut *mut NsEngine) -> NsStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        out_ptr(out, "out")?;
        let inner = lift(SopEngine::new(&c.inner))?;
        *out = Box::into_raw(Box::new(NsEngine { inner }));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from [`ns_engine_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ns_engine_free(engine: *mut NsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Exact SOP, clamped to `[0, 1]`.
///
/// # Safety
/// `engine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_sop_exact(engine: *const NsEngine, scenario: NsScenario, out: *mut f64) -> NsStatus {
    guard(|| {
        let e = deref(engine, "engine")?;
        out_ptr(out, "out")?;
        *out = lift(e.inner.exact(scenario.into()))?.value;
        Ok(())
    })
}

/// High-SNR SOP, clamped to `[0, 1]`.
///
/// # Safety
/// `engine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_sop_asymptotic(engine: *const NsEngine, scenario: NsScenario, out: *mut f64) -> NsStatus {
    guard(|| {
        let e = deref(engine, "engine")?;
        out_ptr(out, "out")?;
        *out = lift(e.inner.asymptotic(scenario.into()))?.value;
        Ok(())
    })
}

/// Monte Carlo SOP and its 95% half width. Deterministic for a seed.
///
/// # Safety
/// `cfg` must be a live handle; `value` and `ci_half_width` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_sop_monte_carlo(
    cfg: *const NsConfig,
    scenario: NsScenario,
    iterations: u64,
    seed: u64,
    value: *mut f64,
    ci_half_width: *mut f64,
) -> NsStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        out_ptr(value, "value")?;
        out_ptr(ci_half_width, "ci_half_width")?;
        let est = lift(estimate_sop_mc(&c.inner, scenario.into(), iterations, seed))?;
        *value = est.value;
        *ci_half_width = est.ci_half_width;
        Ok(())
    })
}
