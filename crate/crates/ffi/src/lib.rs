//! C interface to the planner and simulator.
//!
//! Every function returns a [`CfiStatus`]. On failure a message is available from
//! [`cfi_last_error`] until the next call on the same thread. Handles are owned by the
//! caller and released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use cfi_core::model::{build_topology, default_params, plan_from_text, plan_to_text, DemandScenario, SignalPlan};
use cfi_core::pipeline::{optimize, Model};
use cfi_core::sim::{run_simulation, SimMetrics};
use cfi_core::step2::Step2Options;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoPlan = 3,
    Parse = 4,
    Simulation = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfiModel {
    Proposed = 0,
    Benchmark = 1,
}

/// Demand scenario handle.
pub struct CfiScenario(DemandScenario);

/// Signal plan handle.
pub struct CfiPlan(SignalPlan);

/// Simulation result handle.
pub struct CfiMetrics(SimMetrics);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CfiCounters {
    pub generated: u64,
    pub discharged: u64,
    pub in_network: u64,
    pub denied: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (CfiStatus, String)>) -> CfiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfiStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CfiStatus::Panic
        }
    }
}

fn null(what: &str) -> (CfiStatus, String) {
    (CfiStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CfiStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn cfi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a scenario from a total demand (veh/h) and eight movement shares summing to one.
///
/// # Safety
/// `shares` must point to eight doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_scenario_new(
    id: u32,
    total_demand: f64,
    shares: *const f64,
    out: *mut *mut CfiScenario,
) -> CfiStatus {
    guard(|| {
        if shares.is_null() {
            return Err(null("shares"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let mut s = [0.0; 8];
        s.copy_from_slice(std::slice::from_raw_parts(shares, 8));
        let sc = DemandScenario::new(id, total_demand, s).map_err(|e| (CfiStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(CfiScenario(sc)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`cfi_scenario_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_scenario_free(s: *mut CfiScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Builds a plan with the chosen model. `time_limit` is the offset solver limit in seconds.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_optimize(
    scenario: *const CfiScenario,
    model: CfiModel,
    time_limit: f64,
    out: *mut *mut CfiPlan,
) -> CfiStatus {
    guard(|| {
        let sc = deref(scenario, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(time_limit > 0.0 && time_limit.is_finite()) {
            return Err((CfiStatus::InvalidArgument, "time_limit must be positive".into()));
        }
        let model = match model {
            CfiModel::Proposed => Model::Proposed,
            CfiModel::Benchmark => Model::Benchmark,
        };
        let opts = Step2Options {
            time_limit: Duration::from_secs_f64(time_limit),
            ..Step2Options::default()
        };
        let res = optimize(model, &sc.0, &build_topology(), &default_params(), &opts);
        let plan = res.plan.ok_or_else(|| {
            (
                CfiStatus::NoPlan,
                res.message.unwrap_or_else(|| format!("no plan ({})", res.status)),
            )
        })?;
        *out = Box::into_raw(Box::new(CfiPlan(plan)));
        Ok(())
    })
}

/// Parses a plan in the text format produced by [`cfi_plan_to_text`].
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_from_text(text: *const c_char, out: *mut *mut CfiPlan) -> CfiStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (CfiStatus::Parse, "plan text is not UTF-8".into()))?;
        let plan = plan_from_text(s).map_err(|e| (CfiStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(CfiPlan(plan)));
        Ok(())
    })
}

/// Serializes a plan. Release the string with [`cfi_string_free`].
///
/// # Safety
/// `plan` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_to_text(plan: *const CfiPlan, out: *mut *mut c_char) -> CfiStatus {
    guard(|| {
        let p = deref(plan, "plan")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(plan_to_text(&p.0)).map_err(|_| (CfiStatus::InvalidArgument, "embedded NUL".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `plan` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_cycle(plan: *const CfiPlan, out: *mut i64) -> CfiStatus {
    guard(|| {
        let p = deref(plan, "plan")?;
        *out.as_mut().ok_or_else(|| null("out"))? = p.0.cycle;
        Ok(())
    })
}

/// Green seconds of `movement` at `intersection`.
///
/// # Safety
/// `plan` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_green(plan: *const CfiPlan, intersection: u32, movement: u32, out: *mut i64) -> CfiStatus {
    guard(|| {
        let p = deref(plan, "plan")?;
        let g = p.0.green(intersection as usize, movement as usize).ok_or_else(|| {
            (
                CfiStatus::InvalidArgument,
                format!("movement {movement} is not served at intersection {intersection}"),
            )
        })?;
        *out.as_mut().ok_or_else(|| null("out"))? = g;
        Ok(())
    })
}

/// # Safety
/// `plan` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_offset(plan: *const CfiPlan, intersection: u32, out: *mut i64) -> CfiStatus {
    guard(|| {
        let p = deref(plan, "plan")?;
        let th =
            p.0.offset(intersection as usize)
                .ok_or_else(|| (CfiStatus::InvalidArgument, format!("no intersection {intersection}")))?;
        *out.as_mut().ok_or_else(|| null("out"))? = th;
        Ok(())
    })
}

/// # Safety
/// `plan` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_plan_free(plan: *mut CfiPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Simulates `plan` on `scenario` for `horizon` seconds with Poisson arrivals.
///
/// # Safety
/// `plan` and `scenario` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_simulate(
    plan: *const CfiPlan,
    scenario: *const CfiScenario,
    seed: u64,
    horizon: f64,
    step: f64,
    out: *mut *mut CfiMetrics,
) -> CfiStatus {
    guard(|| {
        let p = deref(plan, "plan")?;
        let sc = deref(scenario, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = run_simulation(&p.0, &sc.0, &build_topology(), &default_params(), seed, horizon, step)
            .map_err(|e| (CfiStatus::Simulation, e.to_string()))?;
        *out = Box::into_raw(Box::new(CfiMetrics(m)));
        Ok(())
    })
}

/// Average delay (s/veh) and time-average queue (veh).
///
/// # Safety
/// `metrics` must be a live handle; output pointers may be null to skip a value.
#[no_mangle]
pub unsafe extern "C" fn cfi_metrics_summary(metrics: *const CfiMetrics, delay: *mut f64, queue: *mut f64) -> CfiStatus {
    guard(|| {
        let m = deref(metrics, "metrics")?;
        if let Some(d) = delay.as_mut() {
            *d = m.0.avg_delay;
        }
        if let Some(q) = queue.as_mut() {
            *q = m.0.avg_queue;
        }
        Ok(())
    })
}

/// Mean delay of one movement (1..=8).
///
/// # Safety
/// `metrics` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_metrics_movement_delay(metrics: *const CfiMetrics, movement: u32, out: *mut f64) -> CfiStatus {
    guard(|| {
        let m = deref(metrics, "metrics")?;
        let d =
            m.0.delay_of(movement as usize)
                .ok_or_else(|| (CfiStatus::InvalidArgument, format!("no movement {movement}")))?;
        *out.as_mut().ok_or_else(|| null("out"))? = d;
        Ok(())
    })
}

/// # Safety
/// `metrics` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfi_metrics_counters(metrics: *const CfiMetrics, out: *mut CfiCounters) -> CfiStatus {
    guard(|| {
        let m = deref(metrics, "metrics")?;
        let c = m.0.counters;
        *out.as_mut().ok_or_else(|| null("out"))? = CfiCounters {
            generated: c.generated,
            discharged: c.discharged,
            in_network: c.in_network,
            denied: c.denied,
        };
        Ok(())
    })
}

/// # Safety
/// `metrics` must come from [`cfi_simulate`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_metrics_free(metrics: *mut CfiMetrics) {
    if !metrics.is_null() {
        drop(Box::from_raw(metrics));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
