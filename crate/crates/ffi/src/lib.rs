//! C ABI for the wigner-transport engine: opaque handles, status codes,
//! and flat-buffer accessors so other languages can drive scenarios and
//! read back densities, marginals and negativity profiles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wigner_transport::config::{parse_config, serialize_scenario};
use wigner_transport::error::SimError;
use wigner_transport::histogram::PhaseSpaceHistogram;
use wigner_transport::observables::{density2d, marginal_x, marginal_y, negativity_marginal_y};
use wigner_transport::oracle::schrodinger_oracle_1d;
use wigner_transport::runner::{run_steady_state, run_transient, RunOptions};
use wigner_transport::scenarios::{preset, RunMode, Scenario};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum wt_status {
    WT_OK = 0,
    WT_ERR_INVALID_ARG = 1,
    WT_ERR_CONFIG = 2,
    WT_ERR_DOMAIN = 3,
    WT_ERR_RESOURCE = 4,
    WT_ERR_NUMERICS = 5,
    WT_ERR_IO = 6,
    WT_ERR_PANIC = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &SimError) -> wt_status {
    match err {
        SimError::Domain(_) => wt_status::WT_ERR_DOMAIN,
        SimError::Config { .. } => wt_status::WT_ERR_CONFIG,
        SimError::Resource(_) => wt_status::WT_ERR_RESOURCE,
        SimError::Numerics(_) | SimError::Diagnostic(_) => wt_status::WT_ERR_NUMERICS,
        SimError::Io(_) => wt_status::WT_ERR_IO,
    }
}

fn guard(f: impl FnOnce() -> wt_status + std::panic::UnwindSafe) -> wt_status {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            wt_status::WT_ERR_PANIC
        }
    }
}

/// Opaque scenario handle.
#[allow(non_camel_case_types)]
pub struct wt_scenario {
    inner: Scenario,
}

/// Opaque run-result handle: snapshot histograms plus scalar outcomes.
#[allow(non_camel_case_types)]
pub struct wt_result {
    snapshots: Vec<(f64, PhaseSpaceHistogram)>,
    transmission: f64,
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Version string of the underlying engine. Static storage; do not free.
#[no_mangle]
pub extern "C" fn wt_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, wt_status> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return Err(wt_status::WT_ERR_INVALID_ARG);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        wt_status::WT_ERR_INVALID_ARG
    })
}

/// Creates a scenario from a built-in preset name.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle. Free the handle with
/// [`wt_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_preset(
    name: *const c_char,
    out: *mut *mut wt_scenario,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        if out.is_null() {
            set_error("out is null");
            return wt_status::WT_ERR_INVALID_ARG;
        }
        let name = match str_arg(name, "preset name") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match preset(name) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(wt_scenario { inner: s }));
                wt_status::WT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}

/// Creates a scenario from a configuration file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_from_config(
    path: *const c_char,
    out: *mut *mut wt_scenario,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        if out.is_null() {
            set_error("out is null");
            return wt_status::WT_ERR_INVALID_ARG;
        }
        let path = match str_arg(path, "config path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_config(Path::new(path)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(wt_scenario { inner: s }));
                wt_status::WT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}

/// Renders the scenario in the config format into `buf` (NUL-terminated,
/// truncated to `len`). The full length (excluding NUL) is written to
/// `written` when non-null; call with a null `buf` to size the buffer.
///
/// # Safety
/// `scenario` must be a live handle; `buf` must point to `len` writable
/// bytes when non-null.
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_serialize(
    scenario: *const wt_scenario,
    buf: *mut c_char,
    len: usize,
    written: *mut usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        let Some(s) = scenario.as_ref() else {
            set_error("scenario is null");
            return wt_status::WT_ERR_INVALID_ARG;
        };
        let text = serialize_scenario(&s.inner);
        if !written.is_null() {
            *written = text.len();
        }
        if !buf.is_null() && len > 0 {
            let n = text.len().min(len - 1);
            ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        wt_status::WT_OK
    }))
}

/// Overrides the random seed.
///
/// # Safety
/// `scenario` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_set_seed(scenario: *mut wt_scenario, seed: u64) -> wt_status {
    guard(AssertUnwindSafe(|| {
        let Some(s) = scenario.as_mut() else {
            set_error("scenario is null");
            return wt_status::WT_ERR_INVALID_ARG;
        };
        s.inner.numerics.seed = seed;
        wt_status::WT_OK
    }))
}

/// Overrides the particle budget (initial ensemble for transient runs,
/// injection batch for steady-state runs).
///
/// # Safety
/// `scenario` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_set_particles(
    scenario: *mut wt_scenario,
    particles: usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        let Some(s) = scenario.as_mut() else {
            set_error("scenario is null");
            return wt_status::WT_ERR_INVALID_ARG;
        };
        if particles == 0 {
            set_error("particle budget must be positive");
            return wt_status::WT_ERR_INVALID_ARG;
        }
        match s.inner.mode {
            RunMode::Transient { .. } => s.inner.numerics.particles = particles,
            RunMode::SteadyState { .. } => {
                if let Some(inj) = s.inner.injection.as_mut() {
                    inj.batch_size = particles;
                }
            }
        }
        wt_status::WT_OK
    }))
}

/// Releases a scenario handle (null is a no-op).
///
/// # Safety
/// `scenario` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_scenario_free(scenario: *mut wt_scenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario with `workers` threads (0 = default) and returns a
/// result handle: one snapshot per transient snapshot time, or a single
/// time-averaged entry for steady state.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid. Free the result
/// with [`wt_result_free`].
#[no_mangle]
pub unsafe extern "C" fn wt_run(
    scenario: *const wt_scenario,
    workers: usize,
    out: *mut *mut wt_result,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        if out.is_null() {
            set_error("out is null");
            return wt_status::WT_ERR_INVALID_ARG;
        }
        let Some(s) = scenario.as_ref() else {
            set_error("scenario is null");
            return wt_status::WT_ERR_INVALID_ARG;
        };
        let options = RunOptions {
            workers: if workers == 0 { None } else { Some(workers) },
            progress: false,
        };
        let built = match &s.inner.mode {
            RunMode::SteadyState { .. } => run_steady_state(&s.inner, &options).map(|r| {
                let injected = r.injected_window.max(1) as f64;
                let transmitted = r.absorbed_at(wigner_transport::engine::Edge::YMax) as f64;
                wt_result {
                    snapshots: vec![(r.window.1, r.histogram)],
                    transmission: transmitted / injected,
                }
            }),
            RunMode::Transient { .. } => run_transient(&s.inner, &options).map(|r| wt_result {
                snapshots: r.snapshots,
                transmission: f64::NAN,
            }),
        };
        match built {
            Ok(r) => {
                *out = Box::into_raw(Box::new(r));
                wt_status::WT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}

/// Releases a result handle (null is a no-op).
///
/// # Safety
/// `result` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_result_free(result: *mut wt_result) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

unsafe fn result_ref<'a>(result: *const wt_result) -> Result<&'a wt_result, wt_status> {
    result.as_ref().ok_or_else(|| {
        set_error("result is null");
        wt_status::WT_ERR_INVALID_ARG
    })
}

/// Number of snapshots held by a result.
///
/// # Safety
/// `result` must be a live handle; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wt_result_snapshot_count(
    result: *const wt_result,
    count: *mut usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| match result_ref(result) {
        Ok(r) => {
            if count.is_null() {
                set_error("count is null");
                return wt_status::WT_ERR_INVALID_ARG;
            }
            *count = r.snapshots.len();
            wt_status::WT_OK
        }
        Err(s) => s,
    }))
}

/// Density grid dimensions (shared by all snapshots of a result).
///
/// # Safety
/// `result` must be a live handle; `nx` and `ny` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wt_result_density_dims(
    result: *const wt_result,
    nx: *mut usize,
    ny: *mut usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| match result_ref(result) {
        Ok(r) => {
            if nx.is_null() || ny.is_null() {
                set_error("nx/ny is null");
                return wt_status::WT_ERR_INVALID_ARG;
            }
            let Some((_, h)) = r.snapshots.first() else {
                set_error("result holds no snapshots");
                return wt_status::WT_ERR_INVALID_ARG;
            };
            *nx = h.spec.domain.cells_x;
            *ny = h.spec.domain.cells_y;
            wt_status::WT_OK
        }
        Err(s) => s,
    }))
}

unsafe fn snapshot<'a>(
    result: *const wt_result,
    index: usize,
) -> Result<&'a (f64, PhaseSpaceHistogram), wt_status> {
    let r = result_ref(result)?;
    r.snapshots.get(index).ok_or_else(|| {
        set_error(&format!(
            "snapshot index {index} out of range ({} available)",
            r.snapshots.len()
        ));
        wt_status::WT_ERR_INVALID_ARG
    })
}

/// Snapshot time in femtoseconds.
///
/// # Safety
/// `result` must be a live handle; `t_fs` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wt_result_snapshot_time(
    result: *const wt_result,
    index: usize,
    t_fs: *mut f64,
) -> wt_status {
    guard(AssertUnwindSafe(|| match snapshot(result, index) {
        Ok((t, _)) => {
            if t_fs.is_null() {
                set_error("t_fs is null");
                return wt_status::WT_ERR_INVALID_ARG;
            }
            *t_fs = *t;
            wt_status::WT_OK
        }
        Err(s) => s,
    }))
}

unsafe fn copy_values(values: &[f64], buf: *mut f64, len: usize, what: &str) -> wt_status {
    if buf.is_null() {
        set_error(&format!("{what} buffer is null"));
        return wt_status::WT_ERR_INVALID_ARG;
    }
    if len < values.len() {
        set_error(&format!("{what} buffer holds {len} values, need {}", values.len()));
        return wt_status::WT_ERR_INVALID_ARG;
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    wt_status::WT_OK
}

/// Copies the density n(x, y) of one snapshot into `buf` (row-major along
/// y: `buf[iy * nx + ix]`). `len` is the buffer capacity in values.
///
/// # Safety
/// `result` must be a live handle; `buf` must point to `len` writable f64.
#[no_mangle]
pub unsafe extern "C" fn wt_result_density(
    result: *const wt_result,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| match snapshot(result, index) {
        Ok((_, h)) => copy_values(&density2d(h).values, buf, len, "density"),
        Err(s) => s,
    }))
}

/// Copies a marginal profile along the chosen axis (0 = x, 1 = y).
///
/// # Safety
/// `result` must be a live handle; `buf` must point to `len` writable f64.
#[no_mangle]
pub unsafe extern "C" fn wt_result_marginal(
    result: *const wt_result,
    index: usize,
    axis: u32,
    buf: *mut f64,
    len: usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| match snapshot(result, index) {
        Ok((_, h)) => {
            let profile = match axis {
                0 => marginal_x(h),
                1 => marginal_y(h),
                _ => {
                    set_error("axis must be 0 (x) or 1 (y)");
                    return wt_status::WT_ERR_INVALID_ARG;
                }
            };
            copy_values(&profile.values, buf, len, "marginal")
        }
        Err(s) => s,
    }))
}

/// Copies the negativity profile along y of one snapshot.
///
/// # Safety
/// `result` must be a live handle; `buf` must point to `len` writable f64.
#[no_mangle]
pub unsafe extern "C" fn wt_result_negativity_y(
    result: *const wt_result,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> wt_status {
    guard(AssertUnwindSafe(|| match snapshot(result, index) {
        Ok((_, h)) => copy_values(&negativity_marginal_y(h).values, buf, len, "negativity"),
        Err(s) => s,
    }))
}

/// Transmitted weight fraction of a steady-state run (absorbed at the top
/// edge over injected weight, within the averaging window). NaN for
/// transient results.
///
/// # Safety
/// `result` must be a live handle; `fraction` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wt_result_transmission(
    result: *const wt_result,
    fraction: *mut f64,
) -> wt_status {
    guard(AssertUnwindSafe(|| match result_ref(result) {
        Ok(r) => {
            if fraction.is_null() {
                set_error("fraction is null");
                return wt_status::WT_ERR_INVALID_ARG;
            }
            *fraction = r.transmission;
            wt_status::WT_OK
        }
        Err(s) => s,
    }))
}

/// Tunneling oracle for a rectangular barrier: closed-form plane-wave
/// transmission and the split-step packet estimate for a packet of
/// spatial width `sigma_nm`.
///
/// # Safety
/// Output pointers must each be valid or null (skipped).
#[no_mangle]
pub unsafe extern "C" fn wt_oracle_transmission(
    height_ev: f64,
    thickness_nm: f64,
    energy_ev: f64,
    m_eff_ratio: f64,
    sigma_nm: f64,
    analytic: *mut f64,
    split_step: *mut f64,
) -> wt_status {
    guard(AssertUnwindSafe(|| {
        let profile = wigner_transport::fields::PotentialProfile::RectangularBarrier {
            height_ev,
            center_nm: thickness_nm,
            thickness_nm,
            axis: wigner_transport::geometry::Axis::Y,
        };
        match schrodinger_oracle_1d(&profile, energy_ev, sigma_nm, m_eff_ratio) {
            Ok(r) => {
                if !analytic.is_null() {
                    *analytic = r.analytic;
                }
                if !split_step.is_null() {
                    *split_step = r.split_step;
                }
                wt_status::WT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}
