//! C interface to the `franson` simulator.
//!
//! Every fallible function returns a [`FransonStatus`]; on failure the
//! message is available from [`franson_last_error_message`] on the same
//! thread. Configurations are opaque handles created by
//! `franson_config_new_default` or `franson_config_load` and released with
//! `franson_config_free`. Result structs are written through caller-owned
//! out-pointers.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use franson::analysis::{
    accidental_rate, chsh_experiment, fit_fringe, scan_fringe, significance_from_visibility, ScanAxis,
};
use franson::config::load_config;
use franson::quantum::{
    chsh_s, coincidence_probability, correlation, ChshSettings, OutcomePair, Phase, Sign, Visibility,
};
use franson::sim::simulate_setting;
use franson::{Error, ExperimentConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Fit = 5,
    UndefinedCorrelation = 6,
    Format = 7,
    Panic = 8,
}

/// Opaque experiment configuration.
pub struct FransonConfig {
    inner: ExperimentConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FransonCountSummary {
    pub duration: f64,
    pub window_width: f64,
    /// Indexed by port: 0 is `+`, 1 is `-`.
    pub singles_start: [u64; 2],
    pub singles_stop: [u64; 2],
    /// Order `++`, `+-`, `-+`, `--`.
    pub coincidences: [u64; 4],
    pub accidentals: [f64; 4],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FransonFringeFit {
    pub mean_level: f64,
    pub visibility: f64,
    pub visibility_sigma: f64,
    pub phase0: f64,
    pub period: f64,
    pub period_sigma: f64,
    pub reduced_chi2: f64,
    pub iterations: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FransonChshReport {
    /// Settings order `(a,b)`, `(a,b')`, `(a',b)`, `(a',b')`.
    pub correlations: [f64; 4],
    pub correlation_sigmas: [f64; 4],
    pub s: f64,
    pub s_sigma: f64,
    /// NaN when `s` does not exceed 2.
    pub significance: f64,
    pub violates: bool,
}

pub const FRANSON_AXIS_MIRROR1: c_int = 0;
pub const FRANSON_AXIS_PHASE2: c_int = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FransonStatus {
    match e {
        Error::InvalidVisibility(_) | Error::InvalidArgument(_) | Error::Unordered { .. } => {
            FransonStatus::InvalidArgument
        }
        Error::Config { .. } | Error::ConfigParse { .. } => FransonStatus::Config,
        Error::Io { .. } => FransonStatus::Io,
        Error::Fit(_) => FransonStatus::Fit,
        Error::UndefinedCorrelation => FransonStatus::UndefinedCorrelation,
        Error::Format(_) => FransonStatus::Format,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FransonStatus>) -> FransonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FransonStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            FransonStatus::Panic
        }
    }
}

fn fail(e: Error) -> FransonStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> FransonStatus {
    set_last_error(format!("`{what}` is null"));
    FransonStatus::NullPointer
}

unsafe fn config_ref<'a>(cfg: *const FransonConfig) -> Result<&'a ExperimentConfig, FransonStatus> {
    unsafe { cfg.as_ref() }.map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), FransonStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn visibility(v: f64) -> Result<Visibility, FransonStatus> {
    Visibility::new(v).map_err(fail)
}

fn sign(v: c_int) -> Result<Sign, FransonStatus> {
    match v {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        other => {
            set_last_error(format!("outcome {other} must be +1 or -1"));
            Err(FransonStatus::InvalidArgument)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn franson_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn franson_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Configuration with the default apparatus values. Never NULL.
#[no_mangle]
pub extern "C" fn franson_config_new_default() -> *mut FransonConfig {
    Box::into_raw(Box::new(FransonConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Loads a TOML configuration file into `*out`.
#[no_mangle]
pub unsafe extern "C" fn franson_config_load(path: *const c_char, out: *mut *mut FransonConfig) -> FransonStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }.to_str().map_err(|_| {
            set_last_error("path is not valid UTF-8".into());
            FransonStatus::InvalidArgument
        })?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_config(path).map_err(fail)?;
        unsafe { out.write(Box::into_raw(Box::new(FransonConfig { inner }))) };
        Ok(())
    })
}

/// Releases a configuration. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn franson_config_free(cfg: *mut FransonConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn franson_config_set_visibility(cfg: *mut FransonConfig, v: f64) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { cfg.as_mut() }.ok_or_else(|| null("config"))?;
        cfg.inner.visibility = visibility(v)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn franson_config_set_seed(cfg: *mut FransonConfig, seed: u64) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { cfg.as_mut() }.ok_or_else(|| null("config"))?;
        cfg.inner.seed = seed;
        Ok(())
    })
}

/// Writes the 16-character hex config hash plus NUL into `buf`, which
/// must hold at least 17 bytes.
#[no_mangle]
pub unsafe extern "C" fn franson_config_hash(cfg: *const FransonConfig, buf: *mut c_char, len: usize) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { config_ref(cfg) }?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let hash = cfg.hash();
        if len < hash.len() + 1 {
            set_last_error(format!("buffer of {len} bytes is too small"));
            return Err(FransonStatus::InvalidArgument);
        }
        unsafe {
            ptr::copy_nonoverlapping(hash.as_ptr().cast::<c_char>(), buf, hash.len());
            *buf.add(hash.len()) = 0;
        }
        Ok(())
    })
}

/// Probability of outcome `(i, j)`, each `+1` or `-1`.
#[no_mangle]
pub unsafe extern "C" fn franson_coincidence_probability(
    i: c_int,
    j: c_int,
    delta1: f64,
    delta2: f64,
    vis: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let outcome = OutcomePair::new(sign(i)?, sign(j)?);
        let p = coincidence_probability(outcome, Phase(delta1), Phase(delta2), visibility(vis)?);
        unsafe { write_out(out, p) }
    })
}

#[no_mangle]
pub unsafe extern "C" fn franson_correlation(delta1: f64, delta2: f64, vis: f64, out: *mut f64) -> FransonStatus {
    guard(|| {
        let e = correlation(Phase(delta1), Phase(delta2), visibility(vis)?).0;
        unsafe { write_out(out, e) }
    })
}

/// CHSH value at the standard settings.
#[no_mangle]
pub unsafe extern "C" fn franson_chsh_s_standard(vis: f64, out: *mut f64) -> FransonStatus {
    guard(|| {
        let s = chsh_s(&ChshSettings::standard(), visibility(vis)?);
        unsafe { write_out(out, s) }
    })
}

#[no_mangle]
pub extern "C" fn franson_accidental_rate(singles_start: f64, singles_stop: f64, window: f64) -> f64 {
    accidental_rate(singles_start, singles_stop, window)
}

#[no_mangle]
pub unsafe extern "C" fn franson_significance_from_visibility(
    vis: f64,
    vis_sigma: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let z = significance_from_visibility(vis, vis_sigma).map_err(fail)?;
        unsafe { write_out(out, z) }
    })
}

#[no_mangle]
pub unsafe extern "C" fn franson_simulate_setting(
    cfg: *const FransonConfig,
    delta1: f64,
    delta2: f64,
    duration: f64,
    seed: u64,
    out: *mut FransonCountSummary,
) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { config_ref(cfg) }?;
        let s = simulate_setting(cfg, Phase(delta1), Phase(delta2), duration, seed).map_err(fail)?;
        let summary = FransonCountSummary {
            duration: s.duration,
            window_width: s.window_width,
            singles_start: s.singles_start,
            singles_stop: s.singles_stop,
            coincidences: s.coincidences,
            accidentals: s.accidental_estimates(),
        };
        unsafe { write_out(out, summary) }
    })
}

/// Scans `points` settings over `periods` fringe periods along `axis`
/// (`FRANSON_AXIS_*`), recording `++` coincidences, and fits the fringe.
#[no_mangle]
pub unsafe extern "C" fn franson_scan_fit(
    cfg: *const FransonConfig,
    axis: c_int,
    points: usize,
    periods: f64,
    dwell: f64,
    seed: u64,
    out: *mut FransonFringeFit,
) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { config_ref(cfg) }?;
        let axis = match axis {
            FRANSON_AXIS_MIRROR1 => ScanAxis::Mirror1,
            FRANSON_AXIS_PHASE2 => ScanAxis::Phase2,
            other => {
                set_last_error(format!("unknown axis {other}"));
                return Err(FransonStatus::InvalidArgument);
            }
        };
        if !(periods.is_finite() && periods > 0.0) {
            set_last_error(format!("periods {periods} must be positive"));
            return Err(FransonStatus::InvalidArgument);
        }
        let controls = axis.controls(cfg, points, periods);
        let fringe = scan_fringe(cfg, axis, &controls, dwell, seed, OutcomePair::PP).map_err(fail)?;
        let fit = fit_fringe(&fringe, axis.period(cfg)).map_err(fail)?;
        let result = FransonFringeFit {
            mean_level: fit.mean_level,
            visibility: fit.visibility_raw,
            visibility_sigma: fit.visibility_sigma,
            phase0: fit.phase0.0,
            period: fit.period,
            period_sigma: fit.period_sigma,
            reduced_chi2: fit.goodness,
            iterations: fit.iterations as u32,
        };
        unsafe { write_out(out, result) }
    })
}

/// Four-setting CHSH experiment at the standard settings.
#[no_mangle]
pub unsafe extern "C" fn franson_chsh(
    cfg: *const FransonConfig,
    dwell: f64,
    seed: u64,
    out: *mut FransonChshReport,
) -> FransonStatus {
    guard(|| {
        let cfg = unsafe { config_ref(cfg) }?;
        let r = chsh_experiment(cfg, &ChshSettings::standard(), dwell, seed).map_err(fail)?;
        let report = FransonChshReport {
            correlations: r.correlations.map(|c| c.e),
            correlation_sigmas: r.correlations.map(|c| c.sigma),
            s: r.s,
            s_sigma: r.s_sigma,
            significance: r.significance.unwrap_or(f64::NAN),
            violates: r.violates(),
        };
        unsafe { write_out(out, report) }
    })
}
