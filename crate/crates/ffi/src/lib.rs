//! C interface to `flownet`.
//!
//! Scenarios are opaque handles created from a JSON document and released
//! with `flownet_scenario_free`. Every fallible call returns a
//! `FlownetStatus`; on failure `flownet_last_error_message` describes the
//! most recent error on the calling thread. Strings returned by the library
//! are released with `flownet_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flownet::commands::{run_resilience, run_simulate, ResilienceArgs, SimulateArgs};
use flownet::dynamics::{network_limit_flow, FixedPointConfig};
use flownet::scenario::{Scenario, ScenarioError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlownetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The scenario document failed to parse or validate.
    InvalidScenario = 3,
    /// A computation failed (non-convergence, unstable integration, ...).
    RuntimeError = 4,
    /// The output buffer is shorter than the number of links.
    BufferTooSmall = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Opaque scenario handle.
pub struct FlownetScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn guard(f: impl FnOnce() -> Result<(), (FlownetStatus, String)>) -> FlownetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FlownetStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FlownetStatus::Panic
        }
    }
}

fn null(what: &str) -> (FlownetStatus, String) {
    (FlownetStatus::NullPointer, format!("{what} is null"))
}

unsafe fn scenario_ref<'a>(handle: *const FlownetScenario) -> Result<&'a Scenario, (FlownetStatus, String)> {
    handle.as_ref().map(|h| &h.inner).ok_or_else(|| null("scenario handle"))
}

unsafe fn output_slice<'a>(buf: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], (FlownetStatus, String)> {
    if buf.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err((FlownetStatus::BufferTooSmall, format!("buffer holds {len} values, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(buf, needed))
}

/// Parses and validates a scenario document. On success `*out` receives a
/// handle owned by the caller.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flownet_scenario_from_json(json: *const c_char, out: *mut *mut FlownetScenario) -> FlownetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (FlownetStatus::InvalidUtf8, e.to_string()))?;
        let inner = Scenario::from_json(text).map_err(|e: ScenarioError| {
            let status = if e.is_validation() { FlownetStatus::InvalidScenario } else { FlownetStatus::RuntimeError };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(FlownetScenario { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from `flownet_scenario_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn flownet_scenario_free(handle: *mut FlownetScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of links; output buffers must hold at least this many values.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flownet_scenario_link_count(handle: *const FlownetScenario, out: *mut usize) -> FlownetStatus {
    guard(|| {
        let sc = scenario_ref(handle)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sc.network.link_count();
        Ok(())
    })
}

/// Minimum origin-destination cut capacity of the unperturbed network.
///
/// # Safety
/// `handle` must be a live handle and `capacity` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flownet_min_cut(handle: *const FlownetScenario, capacity: *mut f64) -> FlownetStatus {
    guard(|| {
        let sc = scenario_ref(handle)?;
        let capacity = capacity.as_mut().ok_or_else(|| null("capacity"))?;
        *capacity = sc.network.min_cut().map_err(|e| (FlownetStatus::RuntimeError, e.to_string()))?.capacity;
        Ok(())
    })
}

/// Limit flow for constant inflow `inflow`, written in link order.
///
/// # Safety
/// `handle` must be a live handle and `flows` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn flownet_limit_flow(
    handle: *const FlownetScenario,
    inflow: f64,
    flows: *mut f64,
    len: usize,
) -> FlownetStatus {
    guard(|| {
        let sc = scenario_ref(handle)?;
        let out = output_slice(flows, len, sc.network.link_count())?;
        let net = sc.effective_network();
        let limit = network_limit_flow(&net, &sc.policy, inflow, &FixedPointConfig::default())
            .map_err(|e| (FlownetStatus::RuntimeError, e.to_string()))?;
        out.copy_from_slice(&limit.flows);
        Ok(())
    })
}

/// Simulates the scenario and writes the terminal flow in link order.
/// A non-positive `horizon` keeps the scenario's own horizon.
///
/// # Safety
/// `handle` must be a live handle and `flows` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn flownet_simulate_terminal_flow(
    handle: *const FlownetScenario,
    horizon: f64,
    flows: *mut f64,
    len: usize,
) -> FlownetStatus {
    guard(|| {
        let sc = scenario_ref(handle)?;
        let out = output_slice(flows, len, sc.network.link_count())?;
        let args = SimulateArgs { horizon: (horizon > 0.0).then_some(horizon), dt: None };
        let (_, report) = run_simulate(sc, &args);
        match report.summary {
            Some(s) => {
                out.copy_from_slice(&s.terminal_flow);
                Ok(())
            }
            None => Err((FlownetStatus::RuntimeError, report.error.unwrap_or_default())),
        }
    })
}

/// Weak-resilience report as a JSON string, to be released with
/// `flownet_string_free`. `samples == 0` keeps the default sample count.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flownet_resilience_json(
    handle: *const FlownetScenario,
    seed: u64,
    samples: usize,
    out: *mut *mut c_char,
) -> FlownetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sc = scenario_ref(handle)?;
        let args = ResilienceArgs { alphas: None, samples: (samples > 0).then_some(samples), seed: Some(seed), jobs: None };
        let report = run_resilience(sc, &args).map_err(|e| (FlownetStatus::RuntimeError, e.to_string()))?;
        let json = serde_json::to_string(&report).map_err(|e| (FlownetStatus::RuntimeError, e.to_string()))?;
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn flownet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn flownet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn flownet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
