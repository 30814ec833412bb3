//! C ABI over the edgecache evaluators.
//!
//! Every fallible call returns an [`EdgecacheStatus`]; on failure the message
//! is available from [`edgecache_last_error`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`edgecache_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgecache::brute_force::{exact_expected_load, EnumerationBudget};
use edgecache::load_analytic;
use edgecache::simulator::monte_carlo;
use edgecache::{Error, Popularity, Population, Scenario, Scheme};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgecacheStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AnalyticUnavailable = 3,
    BudgetExceeded = 4,
    Panic = 5,
}

/// Values accepted by the `scheme` parameters.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgecacheScheme {
    Mds = 0,
    Ecc = 1,
}

/// Opaque scenario handle.
pub struct EdgecacheScenario {
    inner: Scenario,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgecacheLoadReport {
    pub mean_load: f64,
    pub normalized_mean: f64,
    /// NaN when `has_std_error` is 0 (a single trial).
    pub std_error: f64,
    pub has_std_error: u8,
    pub trials: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EdgecacheStatus {
    match err {
        Error::AnalyticUnavailable => EdgecacheStatus::AnalyticUnavailable,
        Error::BudgetExceeded { .. } => EdgecacheStatus::BudgetExceeded,
        _ => EdgecacheStatus::InvalidArgument,
    }
}

fn fail(status: EdgecacheStatus, msg: &str) -> EdgecacheStatus {
    set_last_error(msg);
    status
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), EdgecacheStatus>) -> EdgecacheStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => EdgecacheStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(EdgecacheStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

fn check<T>(r: edgecache::Result<T>) -> Result<T, EdgecacheStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn scheme_of(raw: u32) -> Result<Scheme, EdgecacheStatus> {
    match raw {
        0 => Ok(Scheme::Mds),
        1 => Ok(Scheme::Ecc),
        other => Err(fail(EdgecacheStatus::InvalidArgument, &format!("unknown scheme {other}"))),
    }
}

unsafe fn scenario_ref<'a>(handle: *const EdgecacheScenario) -> Result<&'a Scenario, EdgecacheStatus> {
    // SAFETY: caller passes null or a live handle from edgecache_scenario_new.
    unsafe { handle.as_ref() }
        .map(|h| &h.inner)
        .ok_or_else(|| fail(EdgecacheStatus::NullPointer, "scenario handle is null"))
}

fn non_null<T>(p: *mut T, what: &str) -> Result<*mut T, EdgecacheStatus> {
    if p.is_null() {
        Err(fail(EdgecacheStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(p)
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) {
    let c = CString::new(s).expect("rendered numbers contain no NUL");
    // SAFETY: `out` checked non-null by the caller.
    unsafe { *out = c.into_raw() };
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn edgecache_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a scenario. `zipf_alpha <= 0` selects uniform requests.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edgecache_scenario_new(
    n_files: u32,
    n_fragments: u32,
    cache_size: u32,
    u_b: u32,
    u_w: u32,
    u_2: u32,
    zipf_alpha: f64,
    out: *mut *mut EdgecacheScenario,
) -> EdgecacheStatus {
    guard(|| {
        let out = non_null(out, "out")?;
        let popularity = if zipf_alpha > 0.0 {
            Popularity::Zipf { alpha: zipf_alpha }
        } else if zipf_alpha.is_nan() {
            return Err(fail(EdgecacheStatus::InvalidArgument, "zipf exponent is NaN"));
        } else {
            Popularity::Uniform
        };
        let pop = check(Population::new(n_files, u_b, u_w, u_2))?;
        let inner = check(Scenario::new(pop, n_fragments, cache_size, popularity))?;
        // SAFETY: `out` is non-null and valid for writes per the contract.
        unsafe { *out = Box::into_raw(Box::new(EdgecacheScenario { inner })) };
        Ok(())
    })
}

/// Releases a scenario; null is ignored.
///
/// # Safety
/// `handle` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edgecache_scenario_free(handle: *mut EdgecacheScenario) {
    if !handle.is_null() {
        // SAFETY: handle came from Box::into_raw in edgecache_scenario_new.
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Closed-form expected backhaul packets, rounded to `double`.
///
/// # Safety
/// `handle` must be null or live; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edgecache_analytic_load(
    handle: *const EdgecacheScenario,
    scheme: u32,
    out: *mut f64,
) -> EdgecacheStatus {
    guard(|| {
        let s = unsafe { scenario_ref(handle) }?;
        let out = non_null(out, "out")?;
        let load = check(load_analytic::load(s, scheme_of(scheme)?))?;
        unsafe { *out = load.total.to_f64() };
        Ok(())
    })
}

/// Closed-form expected backhaul packets as an exact rational `"n/d"`.
///
/// # Safety
/// `handle` must be null or live; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edgecache_analytic_load_exact(
    handle: *const EdgecacheScenario,
    scheme: u32,
    out: *mut *mut c_char,
) -> EdgecacheStatus {
    guard(|| {
        let s = unsafe { scenario_ref(handle) }?;
        let out = non_null(out, "out")?;
        let load = check(load_analytic::load(s, scheme_of(scheme)?))?;
        unsafe { write_string(out, load.total.to_string()) };
        Ok(())
    })
}

/// Exact expected load by enumerating every request vector, as `"n/d"`.
/// `max_states = 0` uses the default budget.
///
/// # Safety
/// `handle` must be null or live; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edgecache_exact_expected_load(
    handle: *const EdgecacheScenario,
    scheme: u32,
    max_states: u64,
    out: *mut *mut c_char,
) -> EdgecacheStatus {
    guard(|| {
        let s = unsafe { scenario_ref(handle) }?;
        let out = non_null(out, "out")?;
        let budget = if max_states == 0 { EnumerationBudget::default() } else { EnumerationBudget::new(max_states) };
        let load = check(exact_expected_load(s, scheme_of(scheme)?, budget))?;
        unsafe { write_string(out, load.to_string()) };
        Ok(())
    })
}

/// Monte Carlo estimate over `trials` seeded realizations.
///
/// # Safety
/// `handle` must be null or live; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edgecache_monte_carlo(
    handle: *const EdgecacheScenario,
    scheme: u32,
    trials: u64,
    seed: u64,
    out: *mut EdgecacheLoadReport,
) -> EdgecacheStatus {
    guard(|| {
        let s = unsafe { scenario_ref(handle) }?;
        let out = non_null(out, "out")?;
        let r = check(monte_carlo(s, scheme_of(scheme)?, trials, seed))?;
        let report = EdgecacheLoadReport {
            mean_load: r.mean_load,
            normalized_mean: r.normalized_mean,
            std_error: r.std_error.unwrap_or(f64::NAN),
            has_std_error: r.std_error.is_some() as u8,
            trials: r.trials,
            seed: r.seed,
        };
        unsafe { *out = report };
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edgecache_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in write_string.
        drop(unsafe { CString::from_raw(s) });
    }
}
