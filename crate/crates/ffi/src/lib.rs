//! C ABI over `pqci-core`.
//!
//! Every fallible function returns a [`PqciStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! read with [`pqci_last_error`]. Objects are opaque handles released by
//! their `_free` function; strings returned by the library are released
//! with [`pqci_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pqci_core::adversary::{run_attack_trials, AttackStats, AttackStrategy};
use pqci_core::harness::{cmd_cost, render, Format, Mode, RunConfig};
use pqci_core::protocol::AbortReason;
use pqci_core::{Circle, Error, OracleOperator, ProblemParams, ProtocolOutcome, Transcript};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqciStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    Internal = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PqciCircle {
    pub x: u64,
    pub y: u64,
    pub r: u64,
}

impl From<PqciCircle> for Circle {
    fn from(c: PqciCircle) -> Self {
        Circle::new(c.x, c.y, c.r)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqciOutcome {
    Intersect = 0,
    Disjoint = 1,
    AbortDishonestBob = 2,
    AbortInconsistentResults = 3,
    AbortEavesdropperDetected = 4,
}

impl From<ProtocolOutcome> for PqciOutcome {
    fn from(o: ProtocolOutcome) -> Self {
        match o {
            ProtocolOutcome::Intersect => PqciOutcome::Intersect,
            ProtocolOutcome::Disjoint => PqciOutcome::Disjoint,
            ProtocolOutcome::Abort(AbortReason::DishonestBob) => PqciOutcome::AbortDishonestBob,
            ProtocolOutcome::Abort(AbortReason::InconsistentResults) => {
                PqciOutcome::AbortInconsistentResults
            }
            ProtocolOutcome::Abort(AbortReason::EavesdropperDetected) => {
                PqciOutcome::AbortEavesdropperDetected
            }
        }
    }
}

/// Bob's compiled phase oracle.
pub struct PqciOracle(OracleOperator);

/// Record of one protocol run and its outcome.
pub struct PqciTranscript {
    transcript: Transcript,
    outcome: ProtocolOutcome,
}

/// Aggregated Monte Carlo statistics for one attack strategy.
pub struct PqciAttackStats(AttackStats);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PqciStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParams(_) | Error::InvalidCircle(_) | Error::Parse(_) => {
                PqciStatus::InvalidArgument
            }
            Error::Unsupported(_) | Error::DenseTooLarge { .. } | Error::RegisterTooWide(_) => {
                PqciStatus::Unsupported
            }
            _ => PqciStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PqciStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PqciStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PqciStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PqciStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(PqciStatus::InvalidArgument, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail(PqciStatus::Internal, e.to_string()))
}

fn json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Fail> {
    let s = serde_json::to_string(v).map_err(|e| Fail(PqciStatus::Internal, e.to_string()))?;
    into_c_string(s)
}

fn params(t: usize) -> Result<ProblemParams, Fail> {
    Ok(ProblemParams::new(t)?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pqci_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pqci_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn pqci_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Classical predicate: squared center distance below squared radius sum.
#[no_mangle]
pub unsafe extern "C" fn pqci_intersects(
    a: PqciCircle,
    b: PqciCircle,
    result: *mut bool,
) -> PqciStatus {
    guard(|| {
        *out(result, "result")? = pqci_core::intersects(&a.into(), &b.into());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_oracle_new(
    t: usize,
    bob: PqciCircle,
    oracle: *mut *mut PqciOracle,
) -> PqciStatus {
    guard(|| {
        let slot = out(oracle, "oracle")?;
        let op = OracleOperator::build(&bob.into(), params(t)?)?;
        *slot = Box::into_raw(Box::new(PqciOracle(op)));
        Ok(())
    })
}

/// Whether the oracle flips the phase of Alice's basis input.
#[no_mangle]
pub unsafe extern "C" fn pqci_oracle_phase(
    oracle: *const PqciOracle,
    alice: PqciCircle,
    flips: *mut bool,
) -> PqciStatus {
    guard(|| {
        let o = oracle.as_ref().ok_or_else(|| null("oracle"))?;
        let slot = out(flips, "flips")?;
        let c = Circle::from(alice);
        c.validate(&o.0.params())?;
        *slot = o.0.phase_of(c.x as u128, c.y as u128, c.r as u128)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_oracle_free(oracle: *mut PqciOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Runs one protocol. `strategy` may be null for an honest run; otherwise it
/// is an attack name as accepted by the CLI (`alice2` is used only by
/// `alice-multi-input` and may be null).
#[no_mangle]
pub unsafe extern "C" fn pqci_protocol_run(
    t: usize,
    alice: PqciCircle,
    bob: PqciCircle,
    seed: u64,
    strategy: *const c_char,
    alice2: *const PqciCircle,
    decoys: usize,
    transcript: *mut *mut PqciTranscript,
) -> PqciStatus {
    guard(|| {
        let slot = out(transcript, "transcript")?;
        let p = params(t)?;
        let strategy = if strategy.is_null() {
            None
        } else {
            let name = str_arg(strategy, "strategy")?;
            let second = alice2.as_ref().map(|c| Circle::from(*c));
            Some(AttackStrategy::parse(name, second, decoys)?)
        };
        let (transcript, outcome) =
            pqci_core::run_protocol(&alice.into(), &bob.into(), &p, seed, strategy.as_ref())?;
        *slot = Box::into_raw(Box::new(PqciTranscript {
            transcript,
            outcome,
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_transcript_outcome(
    transcript: *const PqciTranscript,
    outcome: *mut PqciOutcome,
) -> PqciStatus {
    guard(|| {
        let tr = transcript.as_ref().ok_or_else(|| null("transcript"))?;
        *out(outcome, "outcome")? = tr.outcome.into();
        Ok(())
    })
}

/// Full transcript as JSON. Free the string with `pqci_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pqci_transcript_to_json(
    transcript: *const PqciTranscript,
    json_out: *mut *mut c_char,
) -> PqciStatus {
    guard(|| {
        let tr = transcript.as_ref().ok_or_else(|| null("transcript"))?;
        let slot = out(json_out, "json_out")?;
        *slot = json(&tr.transcript)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_transcript_free(transcript: *mut PqciTranscript) {
    if !transcript.is_null() {
        drop(Box::from_raw(transcript));
    }
}

/// Monte Carlo run of a named attack. `alice-superposed` is not available
/// here; use the CLI for it.
#[no_mangle]
pub unsafe extern "C" fn pqci_attack_run(
    strategy: *const c_char,
    t: usize,
    alice: PqciCircle,
    bob: PqciCircle,
    alice2: *const PqciCircle,
    decoys: usize,
    trials: u64,
    seed: u64,
    stats: *mut *mut PqciAttackStats,
) -> PqciStatus {
    guard(|| {
        let slot = out(stats, "stats")?;
        let name = str_arg(strategy, "strategy")?;
        let second = alice2.as_ref().map(|c| Circle::from(*c));
        let s = AttackStrategy::parse(name, second, decoys)?;
        let st = run_attack_trials(&s, &alice.into(), &bob.into(), &params(t)?, trials, seed)?;
        *slot = Box::into_raw(Box::new(PqciAttackStats(st)));
        Ok(())
    })
}

/// Looks up one metric (e.g. `learned_x`, `inconsistent_abort`) by name.
#[no_mangle]
pub unsafe extern "C" fn pqci_attack_stats_rate(
    stats: *const PqciAttackStats,
    metric: *const c_char,
    rate: *mut f64,
    count: *mut u64,
) -> PqciStatus {
    guard(|| {
        let st = stats.as_ref().ok_or_else(|| null("stats"))?;
        let name = str_arg(metric, "metric")?;
        let (rate_out, count_out) = (out(rate, "rate")?, out(count, "count")?);
        let r = st
            .0
            .metrics()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| r)
            .ok_or_else(|| Fail(PqciStatus::InvalidArgument, format!("unknown metric `{name}`")))?;
        *rate_out = r.rate;
        *count_out = r.count;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_attack_stats_to_json(
    stats: *const PqciAttackStats,
    json_out: *mut *mut c_char,
) -> PqciStatus {
    guard(|| {
        let st = stats.as_ref().ok_or_else(|| null("stats"))?;
        *out(json_out, "json_out")? = json(&st.0)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqci_attack_stats_free(stats: *mut PqciAttackStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// Cost table over `len` precisions, rendered as the CLI's JSON report.
/// `passed` receives whether every check held.
#[no_mangle]
pub unsafe extern "C" fn pqci_cost_report_json(
    ts: *const usize,
    len: usize,
    seed: u64,
    passed: *mut bool,
    json_out: *mut *mut c_char,
) -> PqciStatus {
    guard(|| {
        if ts.is_null() {
            return Err(null("ts"));
        }
        let (passed, slot) = (out(passed, "passed")?, out(json_out, "json_out")?);
        let mut cfg = RunConfig::new(Mode::Cost);
        cfg.ts = std::slice::from_raw_parts(ts, len).to_vec();
        cfg.seed = seed;
        let report = cmd_cost(&cfg)?;
        *passed = report.passed;
        *slot = into_c_string(render(&report, Format::Json)?)?;
        Ok(())
    })
}
