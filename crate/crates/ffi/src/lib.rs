//! C ABI over `v2v_motifs`.
//!
//! Every fallible function returns a [`V2vStatus`]; on failure the message
//! is available from [`v2v_last_error_message`] on the same thread. Objects
//! cross the boundary as opaque handles owned by the caller and released
//! with the matching `_free` function.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use v2v_motifs::caching::{select_serving_location, zipf_pmf, DemandModel};
use v2v_motifs::config::Config;
use v2v_motifs::geometry::Position;
use v2v_motifs::radio::{channel_gain, rate, ChannelParams, FadingDraw};
use v2v_motifs::simulator::{run_scenario, write_cdf_csv, write_metrics_csv, ScenarioConfig, ScenarioReport};
use v2v_motifs::temporal_graph::VehicleId;
use v2v_motifs::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V2vStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Io = 3,
    NoMotifs = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> V2vStatus {
    if e.is_io() {
        V2vStatus::Io
    } else if matches!(e, Error::NoMotifs) {
        V2vStatus::NoMotifs
    } else {
        V2vStatus::InvalidArgument
    }
}

fn guard(f: impl FnOnce() -> Result<(), (V2vStatus, String)>) -> V2vStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => V2vStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            V2vStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (V2vStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (V2vStatus, String) {
    (V2vStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn v2v_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `omega * log2(1 + gamma)` in bit/s.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn v2v_rate(gamma: f64, omega: f64, out: *mut f64) -> V2vStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if gamma.is_nan() || gamma < 0.0 || omega.is_nan() || omega <= 0.0 {
            return Err((V2vStatus::InvalidArgument, format!("need gamma >= 0 and omega > 0, got {gamma}, {omega}")));
        }
        *out = rate(gamma, omega);
        Ok(())
    })
}

/// `eta * d^-alpha`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn v2v_channel_gain(distance_m: f64, alpha: f64, eta: f64, out: *mut f64) -> V2vStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ChannelParams { alpha, ..Default::default() };
        params.validate().map_err(lib_err)?;
        let fading = FadingDraw::new(eta).map_err(lib_err)?;
        *out = channel_gain(distance_m, &params, fading).map_err(lib_err)?;
        Ok(())
    })
}

/// Zipf request probability of the `rank`-th most popular of `m_total` files.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn v2v_zipf_pmf(m_total: usize, theta: f64, rank: usize, out: *mut f64) -> V2vStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dm = DemandModel::new(m_total, 1, theta).map_err(lib_err)?;
        *out = zipf_pmf(rank, &dm).map_err(lib_err)?;
        Ok(())
    })
}

/// Location-based serving set: the `count` cars minimizing the summed
/// distance of every other car to its nearest serving car. Car `i` sits at
/// `(xs[i], ys[i])`; `serving[i]` is set to 1 for chosen cars, else 0.
///
/// # Safety
/// `xs`, `ys` and `serving` must each point to `n` elements.
#[no_mangle]
pub unsafe extern "C" fn v2v_select_serving_location(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    count: usize,
    serving: *mut u8,
) -> V2vStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() || serving.is_null() {
            return Err(null("xs, ys or serving"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let positions: BTreeMap<VehicleId, Position> =
            (0..n).map(|i| (VehicleId(i as u32), Position::new(xs[i], ys[i]))).collect();
        if positions.values().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err((V2vStatus::InvalidArgument, "positions must be finite".into()));
        }
        let chosen = select_serving_location(&positions, count).map_err(lib_err)?;
        let out = std::slice::from_raw_parts_mut(serving, n);
        for (i, flag) in out.iter_mut().enumerate() {
            *flag = u8::from(chosen.contains(&VehicleId(i as u32)));
        }
        Ok(())
    })
}

/// Opaque scenario configuration.
pub struct V2vScenario {
    config: ScenarioConfig,
}

/// Opaque scenario results.
pub struct V2vReport {
    report: ScenarioReport,
}

/// One sweep point of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2vSweepPoint {
    pub sweep_point: usize,
    pub serving_count: usize,
    pub mean_motif_bps: f64,
    pub mean_location_bps: f64,
    /// `mean_motif_bps / mean_location_bps - 1`.
    pub advantage: f64,
}

/// Scenario with every parameter at its default.
#[no_mangle]
pub extern "C" fn v2v_scenario_new_default() -> *mut V2vScenario {
    Box::into_raw(Box::new(V2vScenario { config: ScenarioConfig::default() }))
}

/// Scenario from a TOML document in the command-line config format.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v2v_scenario_from_toml(toml: *const c_char, out: *mut *mut V2vScenario) -> V2vStatus {
    guard(|| {
        if toml.is_null() || out.is_null() {
            return Err(null("toml or out"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| (V2vStatus::InvalidArgument, "config is not UTF-8".to_string()))?;
        let config = Config::from_toml_str(text).and_then(|c| c.to_scenario()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(V2vScenario { config }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn v2v_scenario_set_replications(scenario: *mut V2vScenario, replications: usize) -> V2vStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.config.replications = replications;
        s.config.validate().map_err(lib_err)
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn v2v_scenario_set_seed(scenario: *mut V2vScenario, seed: u64) -> V2vStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.config.seed = seed;
        s.config.events.rng_seed = seed;
        s.config.null_model.rng_seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn v2v_scenario_free(scenario: *mut V2vScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs every sweep point and replication of `scenario`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v2v_simulate(scenario: *const V2vScenario, out: *mut *mut V2vReport) -> V2vStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = run_scenario(&s.config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(V2vReport { report }));
        Ok(())
    })
}

/// Number of sweep points in `report`, 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn v2v_report_num_points(report: *const V2vReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.summary.len())
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v2v_report_point(
    report: *const V2vReport,
    index: usize,
    out: *mut V2vSweepPoint,
) -> V2vStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = r.report.summary.get(index).ok_or_else(|| {
            (V2vStatus::InvalidArgument, format!("point {index} out of range 0..{}", r.report.summary.len()))
        })?;
        *out = V2vSweepPoint {
            sweep_point: s.sweep_point,
            serving_count: s.serving_count,
            mean_motif_bps: s.mean_motif_bps,
            mean_location_bps: s.mean_location_bps,
            advantage: s.advantage,
        };
        Ok(())
    })
}

unsafe fn write_report_file(
    report: *const V2vReport,
    path: *const c_char,
    write: impl FnOnce(&ScenarioReport, std::fs::File) -> v2v_motifs::Result<()>,
) -> V2vStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path =
            CStr::from_ptr(path).to_str().map_err(|_| (V2vStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let f = std::fs::File::create(Path::new(path)).map_err(|e| (V2vStatus::Io, format!("{path}: {e}")))?;
        write(&r.report, f).map_err(lib_err)
    })
}

/// Writes the metrics CSV (`scenario,sweep_point,strategy,replication,avg_rate_bps`).
///
/// # Safety
/// `report` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn v2v_report_write_metrics(report: *const V2vReport, path: *const c_char) -> V2vStatus {
    write_report_file(report, path, |r, f| write_metrics_csv(f, &r.metrics))
}

/// Writes the CDF CSV (`scenario,serving_count,strategy,rate_bps,cdf`).
///
/// # Safety
/// `report` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn v2v_report_write_cdf(report: *const V2vReport, path: *const c_char) -> V2vStatus {
    write_report_file(report, path, |r, f| write_cdf_csv(f, &r.cdfs))
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn v2v_report_free(report: *mut V2vReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
