//! C interface to the simulator.
//!
//! Objects cross the boundary as opaque handles created by `gtl_config_*`
//! or `gtl_experiment_run` and released with the matching
//! `gtl_*_free`. Every fallible call returns a [`GtlStatus`]; on failure
//! `gtl_last_error` describes the problem. Strings returned by the library
//! are owned by the caller and released with `gtl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gtl_core::experiment::{report_tables, run_experiment, ExperimentConfig, ExperimentReport};
use gtl_core::metrics::Step;
use gtl_core::netsim::formulas::{gain, OverheadPrediction};
use gtl_core::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Config = 3,
    Format = 4,
    Io = 5,
    Dimension = 6,
    Numeric = 7,
    Routing = 8,
    Protocol = 9,
    UndefinedMetric = 10,
    NotFound = 11,
    Panic = 12,
}

/// Experiment configuration.
pub struct GtlConfig(ExperimentConfig);

/// Results of a finished experiment.
pub struct GtlReport(ExperimentReport);

/// Closed-form traffic for one parameter point, in coefficients.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GtlOverhead {
    /// Base models sent all-to-all.
    pub gtl_step1: f64,
    /// GreedyTL models sent all-to-all.
    pub gtl_step3: f64,
    pub gtl_total: f64,
    pub nohtl_mu: f64,
    pub nohtl_mv: f64,
    /// `2ks²d0`, valid when `d1 ≤ d0`.
    pub bound: f64,
    /// Uploading every training record to a central site.
    pub cloud: f64,
    pub gain_gtl: f64,
    pub gain_nohtl_mu: f64,
    /// Traffic of one dynamic phase with the permanent device.
    pub dynamic_gtl: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GtlStatus {
    match e {
        Error::Config(_) => GtlStatus::Config,
        Error::Format { .. } | Error::Json(_) => GtlStatus::Format,
        Error::Io { .. } => GtlStatus::Io,
        Error::Dimension { .. } => GtlStatus::Dimension,
        Error::Numeric(_) => GtlStatus::Numeric,
        Error::Routing(_) => GtlStatus::Routing,
        Error::Protocol { .. } => GtlStatus::Protocol,
        Error::UndefinedMetric(_) => GtlStatus::UndefinedMetric,
    }
}

struct Failure(GtlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GtlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GtlStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GtlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GtlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            GtlStatus::InvalidString,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        Failure(
            GtlStatus::InvalidString,
            "output contains a NUL byte".into(),
        )
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gtl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gtl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gtl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluates the overhead formulas for `s` locations, `k` classes, base
/// and GreedyTL payload sizes `d0`, `d1`, and a cloud upload of `n`
/// records of `dc` values.
///
/// # Safety
/// `out` must point to writable memory for one `GtlOverhead`.
#[no_mangle]
pub unsafe extern "C" fn gtl_overhead_predict(
    s: usize,
    k: usize,
    d0: f64,
    d1: f64,
    n: usize,
    dc: f64,
    out: *mut GtlOverhead,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if s < 2 || k < 2 || !(d0 > 0.0) || d1 < 0.0 || n == 0 || !(dc > 0.0) {
            return Err(Failure(
                GtlStatus::Config,
                format!("need s >= 2, k >= 2, d0 > 0, d1 >= 0, n > 0, dc > 0 (got s={s} k={k} d0={d0} d1={d1} n={n} dc={dc})"),
            ));
        }
        let p = OverheadPrediction::new(s, k, d0, d1, n, dc);
        *out = GtlOverhead {
            gtl_step1: p.gtl.oh0,
            gtl_step3: p.gtl.oh1,
            gtl_total: p.gtl.total,
            nohtl_mu: p.nohtl.mu,
            nohtl_mv: p.nohtl.mv,
            bound: p.bound,
            cloud: p.cloud,
            gain_gtl: gain(p.gtl.total, p.cloud),
            gain_nohtl_mu: gain(p.nohtl.mu, p.cloud),
            dynamic_gtl: p.dyn_gtl,
        };
        Ok(())
    })
}

fn store<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Parses a TOML experiment description and validates it.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_config_from_toml(
    toml: *const c_char,
    out: *mut *mut GtlConfig,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ExperimentConfig::from_toml(str_arg(toml, "toml")?)?;
        c.validate()?;
        store(out, GtlConfig(c));
        Ok(())
    })
}

/// Loads a built-in preset by name. Dataset directories can be redirected
/// with the usual environment variables.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_config_preset(
    name: *const c_char,
    out: *mut *mut GtlConfig,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ExperimentConfig::preset(str_arg(name, "name")?)?;
        store(out, GtlConfig(c));
        Ok(())
    })
}

/// Overrides the base seed and the number of runs (0 keeps the current
/// value), then revalidates.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gtl_config_set_runs(
    config: *mut GtlConfig,
    base_seed: u64,
    runs: usize,
) -> GtlStatus {
    guard(|| {
        let c = &mut out_arg(config, "config")?.0;
        c.base_seed = base_seed;
        if runs > 0 {
            c.runs = runs;
        }
        c.validate()?;
        Ok(())
    })
}

/// The configuration serialized as TOML.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_config_to_toml(
    config: *const GtlConfig,
    out: *mut *mut c_char,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = owned_string(handle(config, "config")?.0.to_toml()?)?;
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gtl_config_free(config: *mut GtlConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs every repetition of the experiment.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_experiment_run(
    config: *const GtlConfig,
    out: *mut *mut GtlReport,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let report = run_experiment(&handle(config, "config")?.0)?;
        store(out, GtlReport(report));
        Ok(())
    })
}

const STEPS: [Step; 10] = [
    Step::Local,
    Step::GtlStep2,
    Step::GtlMean,
    Step::GtlVote,
    Step::NohtlMu,
    Step::NohtlMv,
    Step::Cloud,
    Step::GtlLimited,
    Step::DynGtl,
    Step::DynNohtl,
];

/// Mean over runs of `metric` (for example `f_measure` or `ppg`) for one
/// scenario (`clean` or `malicious`) and step (`gtl_mean`, `nohtl_mu`, ...).
/// Returns `NotFound` when the report has no such values.
///
/// # Safety
/// `report` must be a live handle, the names NUL-terminated strings and
/// `mean` writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_metric(
    report: *const GtlReport,
    scenario: *const c_char,
    step: *const c_char,
    metric: *const c_char,
    mean: *mut f64,
) -> GtlStatus {
    guard(|| {
        let report = &handle(report, "report")?.0;
        let (scenario, step_name, metric) = (
            str_arg(scenario, "scenario")?,
            str_arg(step, "step")?,
            str_arg(metric, "metric")?,
        );
        let mean = out_arg(mean, "mean")?;
        let step = STEPS
            .into_iter()
            .find(|s| s.as_str() == step_name)
            .ok_or_else(|| Failure(GtlStatus::NotFound, format!("unknown step {step_name:?}")))?;
        let summary = report.metrics.summary();
        let i = summary
            .get(&(scenario.to_string(), step, metric.to_string()))
            .ok_or_else(|| {
                Failure(
                    GtlStatus::NotFound,
                    format!("no {metric} for {scenario}/{step_name}"),
                )
            })?;
        *mean = i.mean;
        Ok(())
    })
}

/// Metered coefficients and bytes of one procedure (`gtl`, `nohtl_mu`,
/// `cloud`, ...) in the clean scenario, summed over runs and phases.
///
/// # Safety
/// `report` must be a live handle, `procedure` a NUL-terminated string and
/// both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_traffic(
    report: *const GtlReport,
    procedure: *const c_char,
    coefficients: *mut u64,
    bytes: *mut u64,
) -> GtlStatus {
    guard(|| {
        let report = &handle(report, "report")?.0;
        let procedure = str_arg(procedure, "procedure")?;
        let (coefficients, bytes) = (
            out_arg(coefficients, "coefficients")?,
            out_arg(bytes, "bytes")?,
        );
        let rows: Vec<_> = report
            .overhead
            .iter()
            .filter(|r| r.procedure == procedure && r.scenario == gtl_core::experiment::CLEAN)
            .collect();
        if rows.is_empty() {
            return Err(Failure(
                GtlStatus::NotFound,
                format!("no traffic recorded for {procedure:?}"),
            ));
        }
        *coefficients = rows.iter().map(|r| r.count).sum();
        *bytes = rows.iter().map(|r| r.bytes).sum();
        Ok(())
    })
}

/// Sample payloads carried by protocol buses (the cloud baseline excluded).
/// Always zero for a correct run.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_sample_messages(
    report: *const GtlReport,
    count: *mut usize,
) -> GtlStatus {
    guard(|| {
        *out_arg(count, "count")? = handle(report, "report")?.0.protocol_sample_messages();
        Ok(())
    })
}

/// The Markdown overhead and quality tables.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_tables(
    report: *const GtlReport,
    out: *mut *mut c_char,
) -> GtlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = owned_string(report_tables(&handle(report, "report")?.0).markdown())?;
        Ok(())
    })
}

/// Writes every report file into `dir`, creating it if needed.
///
/// # Safety
/// `report` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_write(
    report: *const GtlReport,
    dir: *const c_char,
) -> GtlStatus {
    guard(|| {
        let report = &handle(report, "report")?.0;
        report.write(Path::new(str_arg(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gtl_report_free(report: *mut GtlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
