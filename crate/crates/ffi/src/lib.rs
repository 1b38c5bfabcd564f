//! C ABI over `resicycle`.
//!
//! Conventions:
//! - Every fallible function returns an [`RcStatus`]; on failure a message is
//!   available from [`rc_last_error`] on the same thread.
//! - Objects created by `*_new` / `*_from_*` are opaque and must be released
//!   with the matching `*_free`. Passing NULL to a `*_free` function is a no-op.
//! - Panics never cross the boundary; they surface as `RC_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use resicycle::config::RunConfig;
use resicycle::cycles::ResilienceCycle;
use resicycle::dynamics::{bootstrap_ks, fit_power_law, BootstrapConfig};
use resicycle::ingest::{parse_csv, CsvOptions};
use resicycle::metrics::{
    rebuilding, reconfiguration, resistance, restabilization, RestabDenominator, ToleranceConfig,
};
use resicycle::pipeline::{analyze_prices, Analysis};
use resicycle::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Parse = 4,
    InsufficientData = 5,
    DegenerateCycle = 6,
    InsufficientTail = 7,
    Io = 8,
    OutOfRange = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcRestabDenominator {
    Eq4 = 0,
    Appendix = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcRecoveryType {
    Collapse = 0,
    Insufficient = 1,
    Leveled = 2,
    Adaptive = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcCycle {
    pub t_pre: usize,
    pub t_event: usize,
    pub t_post: usize,
    pub p_pre: f64,
    pub p_event: f64,
    pub p_post: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcTolerance {
    pub p_rr: f64,
    pub p_et: f64,
    pub restab_denominator: RcRestabDenominator,
}

/// Elemental functions and RI for one cycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcElementals {
    pub r_m: f64,
    pub r_e: f64,
    pub s_f: f64,
    pub s_r: f64,
    pub r_d: f64,
    pub r_s: f64,
    pub ri: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcCycleScores {
    /// Index of the cycle among all identified cycles.
    pub index: usize,
    pub cycle: RcCycle,
    pub rr_width: f64,
    pub et: f64,
    pub elementals: RcElementals,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub recovery_type: RcRecoveryType,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcTailFit {
    pub alpha: f64,
    pub x_min: f64,
    pub n_tail: usize,
    pub n: usize,
    pub ks_stat: f64,
    /// NaN when no bootstrap was run.
    pub p_mean: f64,
}

/// Run configuration, keyed like the CLI's dotted options.
pub struct RcConfig(RunConfig);

/// Result of running the pipeline on one series.
pub struct RcAnalysis(Analysis);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> RcStatus {
    match e {
        Error::Config(_) => RcStatus::Config,
        Error::Format(_) | Error::Row { .. } | Error::Csv(_) | Error::Json(_) => RcStatus::Parse,
        Error::InsufficientData { .. } => RcStatus::InsufficientData,
        Error::DegenerateCycle { .. } | Error::ZeroFailureSlope { .. } => RcStatus::DegenerateCycle,
        Error::InsufficientTail(_) => RcStatus::InsufficientTail,
        Error::Io(_) | Error::Fetch { .. } | Error::Transport(_) => RcStatus::Io,
    }
}

struct Failure(RcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, recording any error or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RcStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            RcStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

impl From<RcCycle> for ResilienceCycle {
    fn from(c: RcCycle) -> Self {
        ResilienceCycle {
            t_pre: c.t_pre,
            t_event: c.t_event,
            t_post: c.t_post,
            p_pre: c.p_pre,
            p_event: c.p_event,
            p_post: c.p_post,
        }
    }
}

impl From<ResilienceCycle> for RcCycle {
    fn from(c: ResilienceCycle) -> Self {
        RcCycle {
            t_pre: c.t_pre,
            t_event: c.t_event,
            t_post: c.t_post,
            p_pre: c.p_pre,
            p_event: c.p_event,
            p_post: c.p_post,
        }
    }
}

impl From<RcTolerance> for ToleranceConfig {
    fn from(t: RcTolerance) -> Self {
        ToleranceConfig {
            p_rr: t.p_rr,
            p_et: t.p_et,
            restab_denominator: match t.restab_denominator {
                RcRestabDenominator::Eq4 => RestabDenominator::Eq4,
                RcRestabDenominator::Appendix => RestabDenominator::Appendix,
            },
        }
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default tolerance thresholds.
#[no_mangle]
pub extern "C" fn rc_tolerance_default() -> RcTolerance {
    let d = ToleranceConfig::default();
    RcTolerance {
        p_rr: d.p_rr,
        p_et: d.p_et,
        restab_denominator: match d.restab_denominator {
            RestabDenominator::Eq4 => RcRestabDenominator::Eq4,
            RestabDenominator::Appendix => RcRestabDenominator::Appendix,
        },
    }
}

/// New configuration with default values. Free with [`rc_config_free`].
#[no_mangle]
pub extern "C" fn rc_config_new() -> *mut RcConfig {
    Box::into_raw(Box::new(RcConfig(RunConfig::default())))
}

/// # Safety
/// `config` must be NULL or a pointer returned by [`rc_config_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn rc_config_free(config: *mut RcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets one option by its dotted key (e.g. `metric.p_et`).
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rc_config_set(
    config: *mut RcConfig,
    key: *const c_char,
    value: *const c_char,
) -> RcStatus {
    guard(|| {
        let config = out_arg(config, "config")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let mut next = config.0.clone();
        next.set(key, value)?;
        next.validate()?;
        config.0 = next;
        Ok(())
    })
}

unsafe fn analyze(
    config: *const RcConfig,
    raw: impl std::io::Read,
    symbol: &str,
    out: *mut *mut RcAnalysis,
) -> Result<(), Failure> {
    let out = out_arg(out, "out")?;
    *out = ptr::null_mut();
    let cfg = &config.as_ref().ok_or_else(|| null("config"))?.0;
    let parsed = parse_csv(raw, symbol, CsvOptions::for_tau(cfg.pipeline.tau_days))?;
    let analysis = analyze_prices(&parsed, &cfg.pipeline)?;
    *out = Box::into_raw(Box::new(RcAnalysis(analysis)));
    Ok(())
}

/// Runs the pipeline on a CSV file. On success `*out` receives a handle to
/// free with [`rc_analysis_free`].
///
/// # Safety
/// `config` must be a live handle, `path` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_from_csv_path(
    config: *const RcConfig,
    path: *const c_char,
    out: *mut *mut RcAnalysis,
) -> RcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(Error::from)?;
        let symbol = std::path::Path::new(path)
            .file_stem()
            .map_or_else(|| "series".into(), |s| s.to_string_lossy().into_owned());
        analyze(config, file, &symbol, out)
    })
}

/// Runs the pipeline on CSV text held in memory.
///
/// # Safety
/// `data` must point to `len` readable bytes; other pointers as for
/// [`rc_analysis_from_csv_path`].
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_from_csv_buffer(
    config: *const RcConfig,
    data: *const u8,
    len: usize,
    out: *mut *mut RcAnalysis,
) -> RcStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        analyze(config, bytes, "series", out)
    })
}

/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_free(analysis: *mut RcAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Number of scored cycles, or 0 for NULL.
///
/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_score_count(analysis: *const RcAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.0.report.scores.len())
}

/// Number of cycles that could not be scored, or 0 for NULL.
///
/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_skipped_count(analysis: *const RcAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.0.report.skipped.len())
}

/// Length of the (normalized, smoothed) series, or 0 for NULL.
///
/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_series_len(analysis: *const RcAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.0.series.len())
}

/// Copies the scores of the `i`-th scored cycle into `*out`.
///
/// # Safety
/// `analysis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_analysis_get_scores(
    analysis: *const RcAnalysis,
    i: usize,
    out: *mut RcCycleScores,
) -> RcStatus {
    guard(|| {
        let analysis = &analysis.as_ref().ok_or_else(|| null("analysis"))?.0;
        let out = out_arg(out, "out")?;
        let scores = analysis.report.scores.get(i).ok_or_else(|| {
            Failure(
                RcStatus::OutOfRange,
                format!(
                    "score {i} out of range (have {})",
                    analysis.report.scores.len()
                ),
            )
        })?;
        *out = RcCycleScores {
            index: scores.index,
            cycle: scores.cycle.into(),
            rr_width: scores.rr_width,
            et: scores.et,
            elementals: RcElementals {
                r_m: scores.r_m,
                r_e: scores.r_e,
                s_f: scores.s_f,
                s_r: scores.s_r,
                r_d: scores.r_d,
                r_s: scores.r_s,
                ri: scores.ri,
            },
            r1: scores.r1,
            r2: scores.r2,
            r3: scores.r3,
            recovery_type: match scores.recovery_type {
                resicycle::metrics::RecoveryType::Collapse => RcRecoveryType::Collapse,
                resicycle::metrics::RecoveryType::Insufficient => RcRecoveryType::Insufficient,
                resicycle::metrics::RecoveryType::Leveled => RcRecoveryType::Leveled,
                resicycle::metrics::RecoveryType::Adaptive => RcRecoveryType::Adaptive,
            },
        };
        Ok(())
    })
}

/// Elemental functions and RI of a single cycle.
///
/// # Safety
/// `cycle` and `tolerance` must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_score_cycle(
    cycle: *const RcCycle,
    tolerance: *const RcTolerance,
    out: *mut RcElementals,
) -> RcStatus {
    guard(|| {
        let cycle: ResilienceCycle = (*cycle.as_ref().ok_or_else(|| null("cycle"))?).into();
        let cfg: ToleranceConfig = (*tolerance.as_ref().ok_or_else(|| null("tolerance"))?).into();
        let out = out_arg(out, "out")?;
        cfg.validate()?;
        let r_m = resistance(&cycle, &cfg);
        let r_e = restabilization(&cycle, &cfg)?;
        let rebuilt = rebuilding(&cycle)?;
        let r_s = reconfiguration(&cycle)?;
        *out = RcElementals {
            r_m,
            r_e,
            s_f: rebuilt.s_f,
            s_r: rebuilt.s_r,
            r_d: rebuilt.r_d,
            r_s,
            ri: r_m * (1.0 - r_e) * rebuilt.r_d * r_s,
        };
        Ok(())
    })
}

/// Power-law fit of the upper tail of `values`. With `reps > 0` a bootstrap
/// goodness-of-fit test fills `p_mean`; otherwise `p_mean` is NaN.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_fit_power_law(
    values: *const f64,
    len: usize,
    reps: usize,
    seed: u64,
    batch_size: usize,
    out: *mut RcTailFit,
) -> RcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let out = out_arg(out, "out")?;
        let values = std::slice::from_raw_parts(values, len);
        let mut fit = fit_power_law(values)?;
        if reps > 0 {
            fit = bootstrap_ks(
                values,
                &fit,
                &BootstrapConfig {
                    reps,
                    seed,
                    batch_size,
                },
            )?;
        }
        *out = RcTailFit {
            alpha: fit.alpha,
            x_min: fit.x_min,
            n_tail: fit.n_tail,
            n: fit.n,
            ks_stat: fit.ks_stat,
            p_mean: fit.p_mean.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}
