//! C ABI over the vaporlight simulator.
//!
//! Every fallible function returns a [`VlStatus`]; on failure the message is
//! available from [`vl_last_error`] on the same thread. Sweep configurations
//! and results are opaque handles released with their `_free` function.
//! Panics never cross the boundary: they are reported as
//! [`VlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use vaporlight::dispersion::{analytic_susceptibility, MediumParams};
use vaporlight::harness::{fit_transparency_window, run_sweep, SweepConfig, SweepOutcome};
use vaporlight::units::carrier_from_wavelength;
use vaporlight::vapor::{killian_density, rabi_from_power, zeeman_shift, ConstantsTable};
use vaporlight::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Configuration = 3,
    Numerical = 4,
    Parse = 5,
    Io = 6,
    Fit = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for VlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::DivisionByZero(_) | Error::Domain(_) | Error::Usage(_) => {
                VlStatus::InvalidInput
            }
            Error::Configuration(_) | Error::Resolution(_) | Error::Grid(_) => VlStatus::Configuration,
            Error::NumericalFailure { .. }
            | Error::PropagationFailure { .. }
            | Error::Degenerate { .. }
            | Error::Model(_) => VlStatus::Numerical,
            Error::Parse(_) => VlStatus::Parse,
            Error::Io(_) => VlStatus::Io,
            Error::Fit { .. } => VlStatus::Fit,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: VlStatus, msg: impl Into<String>) -> VlStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> VlStatus {
    let status = VlStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, clearing the last error first and turning panics into status
/// codes.
fn guard(f: impl FnOnce() -> VlStatus) -> VlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(VlStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, VlStatus> {
    if p.is_null() {
        return Err(fail(VlStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(VlStatus::InvalidInput, format!("{name} is not valid UTF-8")))
}

macro_rules! out_ptr {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            return fail(VlStatus::NullPointer, concat!($name, " is null"));
        }
    };
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn vl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Total rubidium vapor density (cm^-3) at `temperature_k`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn vl_killian_density(temperature_k: f64, out: *mut f64) -> VlStatus {
    guard(|| {
        out_ptr!(out, "out");
        match killian_density(temperature_k) {
            Ok(v) => {
                *out = v;
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Ground-level Zeeman shift magnitude (rad/s) for a field in tesla.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn vl_zeeman_shift(b_field_t: f64, out: *mut f64) -> VlStatus {
    guard(|| {
        out_ptr!(out, "out");
        match zeeman_shift(b_field_t) {
            Ok(v) => {
                *out = v;
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Rabi frequency (rad/s) of a uniform beam of `power_w` watts and
/// `diameter_m` metres with the built-in saturation intensity and decay rate.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn vl_rabi_from_power(power_w: f64, diameter_m: f64, out: *mut f64) -> VlStatus {
    guard(|| {
        out_ptr!(out, "out");
        let d = &ConstantsTable::builtin().defaults;
        match rabi_from_power(power_w, diameter_m, d.saturation_intensity_w_m2, d.gamma()) {
            Ok(v) => {
                *out = v;
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Analytic EIT susceptibility `κγδ / (Ω_c² − δ² − iγδ)`; all rates in
/// rad/s.
///
/// # Safety
/// `re` and `im` must be null or point to writable `double`s.
#[no_mangle]
pub unsafe extern "C" fn vl_eit_susceptibility(
    delta: f64,
    kappa: f64,
    gamma: f64,
    omega_c: f64,
    re: *mut f64,
    im: *mut f64,
) -> VlStatus {
    guard(|| {
        out_ptr!(re, "re");
        out_ptr!(im, "im");
        // Length and carrier do not enter χ; any valid values will do.
        let params = match MediumParams::new(kappa, gamma, omega_c, 1.0, carrier_from_wavelength(795e-9)) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        if !delta.is_finite() {
            return fail(VlStatus::InvalidInput, "detuning must be finite");
        }
        let chi: Complex64 = analytic_susceptibility(delta, &params);
        *re = chi.re;
        *im = chi.im;
        VlStatus::Ok
    })
}

/// Parsed sweep configuration.
pub struct VlSweepConfig {
    inner: SweepConfig,
}

/// Completed sweep.
pub struct VlSweepResult {
    inner: SweepOutcome,
    csv: CString,
}

/// Parses a TOML sweep description.
///
/// # Safety
/// `toml` must be null or a NUL-terminated string; `out` must be null or
/// writable. On success `*out` owns a handle for
/// [`vl_sweep_config_free`].
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_config_from_toml(toml: *const c_char, out: *mut *mut VlSweepConfig) -> VlStatus {
    guard(|| {
        out_ptr!(out, "out");
        *out = ptr::null_mut();
        let text = match str_arg(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SweepConfig::from_toml_str(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(VlSweepConfig { inner }));
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Overrides the resolution multiplier of a configuration.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_config_set_grid_scale(config: *mut VlSweepConfig, scale: f64) -> VlStatus {
    guard(|| {
        out_ptr!(config, "config");
        if !(scale > 0.0 && scale.is_finite()) {
            return fail(VlStatus::InvalidInput, "grid scale must be positive");
        }
        (*config).inner.grid.scale = scale;
        VlStatus::Ok
    })
}

/// # Safety
/// `config` must be null or a handle from [`vl_sweep_config_from_toml`]
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_config_free(config: *mut VlSweepConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a sweep on `workers` threads (0 = all cores). Row failures do not
/// make the call fail; query them with [`vl_sweep_result_failures`].
///
/// # Safety
/// `config` must be null or a live handle; `out` must be null or writable.
/// On success `*out` owns a handle for [`vl_sweep_result_free`].
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_run(config: *const VlSweepConfig, workers: usize, out: *mut *mut VlSweepResult) -> VlStatus {
    guard(|| {
        out_ptr!(out, "out");
        *out = ptr::null_mut();
        out_ptr!(config, "config");
        let workers = (workers > 0).then_some(workers);
        match run_sweep(&(*config).inner, workers) {
            Ok(inner) => {
                let csv = match CString::new(inner.to_csv()) {
                    Ok(c) => c,
                    Err(_) => return fail(VlStatus::Numerical, "dataset contains a NUL byte"),
                };
                *out = Box::into_raw(Box::new(VlSweepResult { inner, csv }));
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_result_rows(result: *const VlSweepResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.rows.len())
}

/// Failed rows plus a failed spot check, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_result_failures(result: *const VlSweepResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.failures())
}

/// Copies the CSV dataset into `buf` (NUL-terminated). `*needed` receives
/// the required size including the terminator; a null `buf` or too small
/// `capacity` writes nothing else and returns `BufferTooSmall`.
///
/// # Safety
/// `result` must be null or a live handle; `buf` must be null or writable
/// for `capacity` bytes; `needed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_result_csv(
    result: *const VlSweepResult,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> VlStatus {
    guard(|| {
        out_ptr!(result, "result");
        out_ptr!(needed, "needed");
        let bytes = (*result).csv.as_bytes_with_nul();
        *needed = bytes.len();
        if buf.is_null() || capacity < bytes.len() {
            return fail(VlStatus::BufferTooSmall, format!("need {} bytes", bytes.len()));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        VlStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a handle from [`vl_sweep_run`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn vl_sweep_result_free(result: *mut VlSweepResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Fits the transparency half-width (Hz) to a slowing-sweep CSV.
///
/// # Safety
/// `csv` must be null or NUL-terminated; the outputs must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vl_fit_window(csv: *const c_char, window_hz: *mut f64, residual: *mut f64) -> VlStatus {
    guard(|| {
        out_ptr!(window_hz, "window_hz");
        out_ptr!(residual, "residual");
        let text = match str_arg(csv, "csv") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match fit_transparency_window(text) {
            Ok(f) => {
                *window_hz = f.window_hz;
                *residual = f.residual;
                VlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
