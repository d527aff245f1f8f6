//! C ABI over `spe-core`: scenarios and trajectories behind opaque handles,
//! status codes for every call and a thread-local last-error message.
//!
//! Handles returned through out-pointers are owned by the caller and released
//! with the matching `*_free` function. Strings returned by the library are
//! released with [`spe_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spe_core::diagnostics::{invariants_report, scaling_constants};
use spe_core::io::to_json;
use spe_core::scenario::{Resolved, ScenarioSpec};
use spe_core::scheme::run;
use spe_core::{SpeError, Trajectory};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidData = 2,
    AssumptionViolation = 3,
    Blowup = 4,
    ParseError = 5,
    IoError = 6,
    NullPointer = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// A resolved scenario: grid, data and solver configuration.
pub struct SpeScenario {
    inner: Resolved,
}

/// A completed run.
pub struct SpeTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SpeError) -> SpeStatus {
    match e {
        SpeError::InvalidArgument(_) => SpeStatus::InvalidArgument,
        SpeError::InvalidData(_) => SpeStatus::InvalidData,
        SpeError::AssumptionViolation(_) => SpeStatus::AssumptionViolation,
        SpeError::Blowup { .. } => SpeStatus::Blowup,
        SpeError::Parse(_) => SpeStatus::ParseError,
        SpeError::Io(_) => SpeStatus::IoError,
    }
}

fn fail(status: SpeStatus, msg: impl Into<String>) -> SpeStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), SpeStatus>) -> SpeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SpeStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: spe_core::Result<T>) -> Result<T, SpeStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SpeStatus> {
    if p.is_null() {
        return Err(fail(SpeStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SpeStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), SpeStatus> {
    if p.is_null() {
        Err(fail(SpeStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message describing the most recent failure on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn spe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and resolves a scenario from JSON text. Sample-file paths are
/// resolved against `base_dir`, or the working directory when it is NULL.
///
/// # Safety
/// `json` and a non-NULL `base_dir` must be NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn spe_scenario_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut SpeScenario,
) -> SpeStatus {
    guard(|| {
        nonnull(out, "out")?;
        let text = str_arg(json, "json")?;
        let dir = if base_dir.is_null() { "." } else { str_arg(base_dir, "base_dir")? };
        let spec = lift(ScenarioSpec::from_json(text))?;
        let inner = lift(spec.resolve(Path::new(dir)))?;
        *out = Box::into_raw(Box::new(SpeScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or a handle from [`spe_scenario_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spe_scenario_free(scenario: *mut SpeScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of grid nodes of the scenario.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spe_scenario_node_count(scenario: *const SpeScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.grid.node_count())
}

/// Integrates the scenario to its final time.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spe_run(scenario: *const SpeScenario, out: *mut *mut SpeTrajectory) -> SpeStatus {
    guard(|| {
        nonnull(scenario, "scenario")?;
        nonnull(out, "out")?;
        let s = &(*scenario).inner;
        let inner = lift(run(&s.u0, &s.g, &s.config))?;
        *out = Box::into_raw(Box::new(SpeTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `traj` must be NULL or a handle from [`spe_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_free(traj: *mut SpeTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored snapshots.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_snapshot_count(traj: *const SpeTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.snapshots.len())
}

/// Time of snapshot `index`.
///
/// # Safety
/// `traj` must be a live handle; `t` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_snapshot_time(traj: *const SpeTrajectory, index: usize, t: *mut f64) -> SpeStatus {
    guard(|| {
        nonnull(traj, "traj")?;
        nonnull(t, "t")?;
        let s = snapshot(&*traj, index)?;
        *t = s.t;
        Ok(())
    })
}

fn snapshot(traj: &SpeTrajectory, index: usize) -> Result<&spe_core::State, SpeStatus> {
    traj.inner.snapshots.get(index).ok_or_else(|| {
        fail(SpeStatus::OutOfRange, format!("snapshot {index} of {}", traj.inner.snapshots.len()))
    })
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), SpeStatus> {
    nonnull(buf, "buf")?;
    if len < values.len() {
        return Err(fail(SpeStatus::OutOfRange, format!("buffer holds {len} values, {} needed", values.len())));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Copies `u` at snapshot `index` into `buf`, which holds `len` doubles
/// (at least the node count).
///
/// # Safety
/// `traj` must be a live handle; `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_copy_u(
    traj: *const SpeTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> SpeStatus {
    guard(|| {
        nonnull(traj, "traj")?;
        copy_out(snapshot(&*traj, index)?.u.values(), buf, len)
    })
}

/// Copies the primitive `P` at snapshot `index` into `buf`.
///
/// # Safety
/// As [`spe_trajectory_copy_u`].
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_copy_p(
    traj: *const SpeTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> SpeStatus {
    guard(|| {
        nonnull(traj, "traj")?;
        copy_out(snapshot(&*traj, index)?.p.values(), buf, len)
    })
}

/// Invariants report of the run as a JSON array; free with [`spe_string_free`].
/// `all_pass` receives 1 when every check passed and 0 otherwise.
///
/// # Safety
/// `traj` must be a live handle; `out` and `all_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spe_trajectory_invariants_json(
    traj: *const SpeTrajectory,
    out: *mut *mut c_char,
    all_pass: *mut i32,
) -> SpeStatus {
    guard(|| {
        nonnull(traj, "traj")?;
        nonnull(out, "out")?;
        nonnull(all_pass, "all_pass")?;
        let rep = invariants_report(&(*traj).inner);
        *all_pass = i32::from(rep.all_pass());
        *out = CString::new(to_json(&rep)).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `D₁ = −k/(2c₂)`, `D₂ = 1/(c₂k)`.
///
/// # Safety
/// `d1` and `d2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spe_scaling_constants(k: f64, c2: f64, d1: *mut f64, d2: *mut f64) -> SpeStatus {
    guard(|| {
        nonnull(d1, "d1")?;
        nonnull(d2, "d2")?;
        let s = lift(scaling_constants(k, c2))?;
        *d1 = s.d1;
        *d2 = s.d2;
        Ok(())
    })
}
