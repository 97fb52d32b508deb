//! C ABI for `pilot_interference`.
//!
//! Scenarios and feasible sets are opaque heap handles created by `*_new`
//! functions and released with the matching `*_free`. Every function returns a
//! [`PiStatus`]; on failure a description is available from
//! [`pi_last_error_message`] on the same thread. Results are written through
//! caller-provided out pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pilot_interference::advisor::{self, FeedbackScheme};
use pilot_interference::closed_form::{self, FeasibleSet, SpecialCase};
use pilot_interference::{engine, montecarlo, Error, Scenario, ScenarioConfig};

/// Status code returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    OutOfRange = 3,
    InvalidArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Closed-form case attached to a probability report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiCase {
    None = 0,
    Saturated = 1,
    PilotMultiple = 2,
    SinglePulse = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiFeedback {
    Min = 0,
    Avg = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PiBounds {
    pub lower: f64,
    pub upper: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiReport {
    pub m: u32,
    pub p_exact: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `PI_CASE_NONE` when no closed form applies; `closed_form` is then NaN.
    pub closed_form_case: PiCase,
    pub closed_form: f64,
    pub predicted_nonzero: bool,
    pub prediction_boundary: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PiMcEstimate {
    pub estimate: f64,
    /// Standard error of `estimate`.
    pub stderr_: f64,
    pub n_samples: u64,
    pub successes: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PiDmrs {
    pub k_opt: u32,
    pub t_dmrs: f64,
    pub p_interference: f64,
    pub coherence_ok: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PiScsi {
    pub threshold_m: u32,
    pub p_accurate: f64,
}

/// Opaque validated scenario.
pub struct PiScenario(Scenario);

/// Opaque feasible set of repetition intervals.
pub struct PiFeasibleSet(FeasibleSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PiStatus, msg: impl Into<String>) -> PiStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> PiStatus {
    match e {
        Error::InvalidConfig(_) | Error::InvalidInterval { .. } => PiStatus::InvalidConfig,
        Error::MOutOfRange { .. } | Error::PilotIndexOutOfRange { .. } => PiStatus::OutOfRange,
        Error::InvalidArgument(_) => PiStatus::InvalidArgument,
    }
}

impl From<Error> for PiStatus {
    fn from(e: Error) -> Self {
        fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), PiStatus>) -> PiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PiStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PiStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PiStatus> {
    if p.is_null() {
        Err(fail(PiStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be NULL or a live handle from this library.
unsafe fn scenario<'a>(p: *const PiScenario) -> Result<&'a Scenario, PiStatus> {
    non_null(p, "scenario")?;
    Ok(&(*p).0)
}

/// Creates a scenario. `echo_delays` may be NULL when `n_echoes` is 0.
///
/// # Safety
/// `echo_delays` must point to `n_echoes` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_scenario_new(
    t_ofdm: f64,
    t_pil: f64,
    n_p: u32,
    t_rep: f64,
    t_pulse: f64,
    echo_delays: *const f64,
    n_echoes: usize,
    out: *mut *mut PiScenario,
) -> PiStatus {
    guard(|| {
        non_null(out, "out")?;
        let delays = if n_echoes == 0 {
            Vec::new()
        } else {
            non_null(echo_delays, "echo_delays")?;
            std::slice::from_raw_parts(echo_delays, n_echoes).to_vec()
        };
        let scn = ScenarioConfig::new(t_ofdm, t_pil, n_p, t_rep)
            .with_t_pulse(t_pulse)
            .with_echo_delays(delays)
            .validate()?;
        *out = Box::into_raw(Box::new(PiScenario(scn)));
        Ok(())
    })
}

/// Creates a scenario from a NUL-terminated JSON object.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_scenario_from_json(
    json: *const c_char,
    out: *mut *mut PiScenario,
) -> PiStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(PiStatus::InvalidUtf8, format!("json is not UTF-8: {e}")))?;
        let scn = ScenarioConfig::from_json(text)?.validate()?;
        *out = Box::into_raw(Box::new(PiScenario(scn)));
        Ok(())
    })
}

/// # Safety
/// `scn` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pi_scenario_free(scn: *mut PiScenario) {
    if !scn.is_null() {
        drop(Box::from_raw(scn));
    }
}

/// Exact `P[M >= m]` with bounds and closed-form context.
///
/// # Safety
/// `scn` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_prob_at_least(
    scn: *const PiScenario,
    m: u32,
    out: *mut PiReport,
) -> PiStatus {
    guard(|| {
        let scn = scenario(scn)?;
        non_null(out, "out")?;
        let r = engine::prob_at_least(scn, m)?;
        let (case, value) = match r.closed_form {
            None => (PiCase::None, f64::NAN),
            Some(cf) => (
                match cf.case {
                    SpecialCase::Saturated => PiCase::Saturated,
                    SpecialCase::PilotMultiple => PiCase::PilotMultiple,
                    SpecialCase::SinglePulse => PiCase::SinglePulse,
                },
                cf.value,
            ),
        };
        *out = PiReport {
            m: r.m,
            p_exact: r.p_exact,
            lower_bound: r.lower_bound,
            upper_bound: r.upper_bound,
            closed_form_case: case,
            closed_form: value,
            predicted_nonzero: r.predicted_nonzero,
            prediction_boundary: r.prediction_boundary,
        };
        Ok(())
    })
}

/// # Safety
/// `scn` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_bounds(scn: *const PiScenario, m: u32, out: *mut PiBounds) -> PiStatus {
    guard(|| {
        let scn = scenario(scn)?;
        non_null(out, "out")?;
        let b = closed_form::bounds(scn, m)?;
        *out = PiBounds {
            lower: b.lower,
            upper: b.upper,
        };
        Ok(())
    })
}

/// Monte Carlo estimate; identical inputs give identical results.
///
/// # Safety
/// `scn` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_prob_monte_carlo(
    scn: *const PiScenario,
    m: u32,
    n_samples: u64,
    seed: u64,
    out: *mut PiMcEstimate,
) -> PiStatus {
    guard(|| {
        let scn = scenario(scn)?;
        non_null(out, "out")?;
        let e = montecarlo::prob_monte_carlo(scn, m, n_samples, seed)?;
        *out = PiMcEstimate {
            estimate: e.estimate,
            stderr_: e.stderr,
            n_samples: e.n_samples,
            successes: e.successes,
        };
        Ok(())
    })
}

/// Repetition intervals in `[trep_min, trep_max]` where `P[M >= m]` can be
/// non-zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_new(
    m: u32,
    n_p: u32,
    t_pil: f64,
    t_ofdm: f64,
    trep_min: f64,
    trep_max: f64,
    out: *mut *mut PiFeasibleSet,
) -> PiStatus {
    guard(|| {
        non_null(out, "out")?;
        let fs = closed_form::feasible_set(m, n_p, t_pil, t_ofdm, trep_min, trep_max)?;
        *out = Box::into_raw(Box::new(PiFeasibleSet(fs)));
        Ok(())
    })
}

/// Number of disjoint intervals, or 0 for NULL.
///
/// # Safety
/// `fs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_len(fs: *const PiFeasibleSet) -> usize {
    if fs.is_null() {
        0
    } else {
        (*fs).0.set.len()
    }
}

/// Largest divisor enumerated, or 0 for NULL.
///
/// # Safety
/// `fs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_q_max(fs: *const PiFeasibleSet) -> u32 {
    if fs.is_null() {
        0
    } else {
        (*fs).0.q_max
    }
}

/// Total length of the set in seconds, or 0 for NULL.
///
/// # Safety
/// `fs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_measure(fs: *const PiFeasibleSet) -> f64 {
    if fs.is_null() {
        0.0
    } else {
        (*fs).0.set.measure()
    }
}

/// # Safety
/// `fs` must be a live handle; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_interval(
    fs: *const PiFeasibleSet,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> PiStatus {
    guard(|| {
        non_null(fs, "feasible set")?;
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        let set = &(*fs).0.set;
        let iv = set.intervals().get(index).ok_or_else(|| {
            fail(
                PiStatus::OutOfRange,
                format!("interval index {index} out of range (len {})", set.len()),
            )
        })?;
        *lo = iv.lo();
        *hi = iv.hi();
        Ok(())
    })
}

/// # Safety
/// `fs` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pi_feasible_set_free(fs: *mut PiFeasibleSet) {
    if !fs.is_null() {
        drop(Box::from_raw(fs));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_recommend_dmrs(
    t_rep: f64,
    t_coh: f64,
    t_ofdm: f64,
    out: *mut PiDmrs,
) -> PiStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = advisor::recommend_dmrs(t_rep, t_coh, t_ofdm)?;
        *out = PiDmrs {
            k_opt: r.k_opt,
            t_dmrs: r.t_dmrs,
            p_interference: r.p_interference,
            coherence_ok: r.coherence_ok,
        };
        Ok(())
    })
}

/// # Safety
/// `scn` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pi_scsi_accuracy(
    scn: *const PiScenario,
    scheme: PiFeedback,
    out: *mut PiScsi,
) -> PiStatus {
    guard(|| {
        let scn = scenario(scn)?;
        non_null(out, "out")?;
        let scheme = match scheme {
            PiFeedback::Min => FeedbackScheme::Min,
            PiFeedback::Avg => FeedbackScheme::Avg,
        };
        let a = advisor::scsi_accuracy(scn, scheme)?;
        *out = PiScsi {
            threshold_m: a.threshold_m,
            p_accurate: a.p_accurate,
        };
        Ok(())
    })
}

/// Copy of the last error message on this thread, or NULL if none. Release
/// with [`pi_string_free`].
#[no_mangle]
pub extern "C" fn pi_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
