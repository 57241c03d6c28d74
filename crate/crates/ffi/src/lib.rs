//! C interface to the engagement simulator.
//!
//! Objects are opaque handles created by `pgs_*_new` style calls and
//! released with the matching `pgs_*_free`. Every fallible call returns a
//! [`PgsStatus`]; on failure `pgs_last_error_message` describes the problem
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pgs_core::airframe::atmosphere;
use pgs_core::config::SimConfig;
use pgs_core::engagement::{compute_metrics, run_engagement, TerminationReason};
use pgs_core::guidance::LosSource;
use pgs_core::montecarlo::run_sweep;
use pgs_core::observer::{ObserverConfig, ObserverGains, Prediction, TwoStepObserver};
use pgs_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Diverged = 4,
    BufferTooSmall = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgsTermination {
    ClosestApproach = 0,
    GroundImpact = 1,
    Timeout = 2,
    ObserverDivergence = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgsSource {
    True = 0,
    Delayed = 1,
    Predicted = 2,
}

/// Predicted signal and derivatives at `t + delta`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgsPrediction {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Scalar metrics of one engagement. Unavailable RMSE values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgsMetrics {
    pub miss_distance: f64,
    pub miss_time: f64,
    pub rmse_delayed: f64,
    pub rmse_predicted: f64,
    pub peak_accel_cmd: f64,
    pub integrated_abs_deflection: f64,
    pub duration: f64,
    pub steps: u64,
    pub termination: PgsTermination,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgsGroupStats {
    pub delay: f64,
    pub source: PgsSource,
    pub mean_miss: f64,
    pub std_miss: f64,
    pub n: u64,
    pub failure_count: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgsAtmosphere {
    pub density: f64,
    pub speed_of_sound: f64,
    pub temperature: f64,
    pub pressure: f64,
}

/// Opaque observer handle.
pub struct PgsObserver(TwoStepObserver);

/// Opaque simulation configuration handle.
pub struct PgsConfig(SimConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PgsStatus {
    match e {
        Error::Validation(_)
        | Error::UnknownKey(_)
        | Error::NonHurwitzGains(..)
        | Error::Json(_)
        | Error::Dataset { .. } => PgsStatus::InvalidConfig,
        Error::InvalidParameter { .. } | Error::StepTooLarge { .. } | Error::AboveCeiling(_) => {
            PgsStatus::InvalidArgument
        }
        Error::Divergence { .. } | Error::NonFinite(_) => PgsStatus::Diverged,
        Error::Io(_) | Error::Csv(_) => PgsStatus::Io,
        _ => PgsStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (PgsStatus, String)>) -> PgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PgsStatus::Internal
        }
    }
}

fn core_err(e: Error) -> (PgsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PgsStatus, String) {
    (PgsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PgsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn termination(t: TerminationReason) -> PgsTermination {
    match t {
        TerminationReason::ClosestApproach => PgsTermination::ClosestApproach,
        TerminationReason::GroundImpact => PgsTermination::GroundImpact,
        TerminationReason::Timeout => PgsTermination::Timeout,
        TerminationReason::ObserverDivergence => PgsTermination::ObserverDivergence,
    }
}

fn source(s: LosSource) -> PgsSource {
    match s {
        LosSource::True => PgsSource::True,
        LosSource::Delayed => PgsSource::Delayed,
        LosSource::Predicted => PgsSource::Predicted,
    }
}

fn prediction(p: Prediction) -> PgsPrediction {
    PgsPrediction {
        value: p.value,
        d1: p.d1,
        d2: p.d2,
        d3: p.d3,
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pgs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an observer. Gains must pass the Hurwitz test.
///
/// # Safety
/// `out` must be null or point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_observer_new(
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
    epsilon: f64,
    delta: f64,
    out: *mut *mut PgsObserver,
) -> PgsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let gains = ObserverGains::new(k1, k2, k3, k4).map_err(core_err)?;
        let cfg = ObserverConfig::new(gains, epsilon, delta).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PgsObserver(TwoStepObserver::new(cfg))));
        Ok(())
    })
}

/// # Safety
/// `obs` must be null or a handle from `pgs_observer_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgs_observer_free(obs: *mut PgsObserver) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Seeds both observer steps with the first signal sample.
///
/// # Safety
/// `obs` must be null or a live observer handle.
#[no_mangle]
pub unsafe extern "C" fn pgs_observer_reset(obs: *mut PgsObserver, v0: f64) -> PgsStatus {
    guard(|| {
        let obs = out_ref(obs, "obs")?;
        obs.0.reset(v0).map_err(core_err)
    })
}

/// Advances one step with `v` held over `dt`. `out` may be null.
///
/// # Safety
/// `obs` must be null or a live observer handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_observer_step(
    obs: *mut PgsObserver,
    v: f64,
    dt: f64,
    out: *mut PgsPrediction,
) -> PgsStatus {
    guard(|| {
        let obs = out_ref(obs, "obs")?;
        let p = obs.0.step(v, dt).map_err(core_err)?;
        if let Some(o) = out.as_mut() {
            *o = prediction(p);
        }
        Ok(())
    })
}

/// # Safety
/// `obs` must be null or a live observer handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_observer_prediction(
    obs: *const PgsObserver,
    out: *mut PgsPrediction,
) -> PgsStatus {
    guard(|| {
        let obs = obs.as_ref().ok_or_else(|| null("obs"))?;
        *out_ref(out, "out")? = prediction(obs.0.prediction());
        Ok(())
    })
}

/// Default configuration.
///
/// # Safety
/// `out` must be null or point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_config_default(out: *mut *mut PgsConfig) -> PgsStatus {
    guard(|| {
        *out_ref(out, "out")? = Box::into_raw(Box::new(PgsConfig(SimConfig::default())));
        Ok(())
    })
}

/// Parses a JSON configuration. Missing keys take their defaults; unknown
/// keys and invalid values are rejected.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_config_from_json(
    json: *const c_char,
    out: *mut *mut PgsConfig,
) -> PgsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (PgsStatus::InvalidArgument, "json is not UTF-8".to_string()))?;
        let cfg = SimConfig::from_json_str(text).map_err(core_err)?;
        let errs = cfg.validate();
        if !errs.is_empty() {
            return Err(core_err(Error::Validation(errs)));
        }
        *out = Box::into_raw(Box::new(PgsConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgs_config_free(cfg: *mut PgsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be null or a live config handle.
#[no_mangle]
pub unsafe extern "C" fn pgs_config_set_seed(cfg: *mut PgsConfig, seed: u64) -> PgsStatus {
    guard(|| {
        out_ref(cfg, "cfg")?.0.seed = seed;
        Ok(())
    })
}

/// Fully resolved configuration as JSON. Release with `pgs_string_free`.
///
/// # Safety
/// `cfg` must be null or a live config handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_config_to_json(
    cfg: *const PgsConfig,
    out: *mut *mut c_char,
) -> PgsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out_ref(out, "out")?;
        let text = cfg.0.to_json_pretty().map_err(core_err)?;
        *out = CString::new(text)
            .map_err(|e| (PgsStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs one engagement. A run that ends in observer divergence still fills
/// `out` and returns `PGS_STATUS_DIVERGED`.
///
/// # Safety
/// `cfg` must be null or a live config handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_run_engagement(
    cfg: *const PgsConfig,
    out: *mut PgsMetrics,
) -> PgsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out_ref(out, "out")?;
        let ec = cfg.0.engagement_config().map_err(core_err)?;
        let rec = run_engagement(&ec).map_err(core_err)?;
        let m = compute_metrics(&rec, &ec).map_err(core_err)?;
        *out = PgsMetrics {
            miss_distance: m.miss_distance,
            miss_time: m.miss_time,
            rmse_delayed: m.rmse_delayed.unwrap_or(f64::NAN),
            rmse_predicted: m.rmse_predicted.unwrap_or(f64::NAN),
            peak_accel_cmd: m.peak_accel_cmd,
            integrated_abs_deflection: m.integrated_abs_deflection,
            duration: m.duration,
            steps: m.steps as u64,
            termination: termination(m.termination_reason),
        };
        if m.termination_reason == TerminationReason::ObserverDivergence {
            return Err((
                PgsStatus::Diverged,
                m.diagnostic.unwrap_or_else(|| "observer diverged".into()),
            ));
        }
        Ok(())
    })
}

/// Runs the Monte-Carlo sweep described by `cfg` on `jobs` threads (0 for
/// all cores) and writes one entry per `(delay, source)` group.
///
/// `*count` receives the number of groups. If `capacity` is too small,
/// nothing is written to `groups` and `PGS_STATUS_BUFFER_TOO_SMALL` is
/// returned; call again with a larger buffer.
///
/// # Safety
/// `cfg` must be null or a live config handle; `groups` must be null or
/// point to `capacity` writable entries; `count` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_run_sweep(
    cfg: *const PgsConfig,
    jobs: u32,
    groups: *mut PgsGroupStats,
    capacity: usize,
    count: *mut usize,
) -> PgsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let count = out_ref(count, "count")?;
        let ec = cfg.0.engagement_config().map_err(core_err)?;
        let jobs = (jobs > 0).then_some(jobs as usize);
        let summary = run_sweep(&ec, &cfg.0.sweep_config(), jobs).map_err(core_err)?;
        *count = summary.groups.len();
        if summary.groups.len() > capacity {
            return Err((
                PgsStatus::BufferTooSmall,
                format!("{} groups, capacity {capacity}", summary.groups.len()),
            ));
        }
        if groups.is_null() && !summary.groups.is_empty() {
            return Err(null("groups"));
        }
        for (i, g) in summary.groups.iter().enumerate() {
            *groups.add(i) = PgsGroupStats {
                delay: g.delay,
                source: source(g.source),
                mean_miss: g.mean_miss,
                std_miss: g.std_miss,
                n: g.n as u64,
                failure_count: g.failure_count as u64,
            };
        }
        Ok(())
    })
}

/// Standard atmosphere at `altitude` metres.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_atmosphere(altitude: f64, out: *mut PgsAtmosphere) -> PgsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let a = atmosphere(altitude).map_err(core_err)?;
        *out = PgsAtmosphere {
            density: a.density,
            speed_of_sound: a.speed_of_sound,
            temperature: a.temperature,
            pressure: a.pressure,
        };
        Ok(())
    })
}
