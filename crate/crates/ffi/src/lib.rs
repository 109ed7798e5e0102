//! C ABI for the `quasistable` matching engine.
//!
//! Markets and deferred-acceptance traces are opaque handles. Contract sets and
//! agent lists cross the boundary as comma-separated id strings (`"a,d"`, `""` for
//! the empty set). Every fallible call returns a [`QsStatus`]; on failure the message
//! is available from [`qs_last_error`] on the same thread. Strings returned through
//! out-parameters are owned by the caller and released with [`qs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quasistable::choice::{verify_all, DEFAULT_VERIFY_CAP};
use quasistable::da::{da_run, format_trace, worker_pessimal, DaTrace, ProposalStrategy};
use quasistable::format::{load_market, market_to_string, parse_market};
use quasistable::gen::{gen_market, Family, GenParams};
use quasistable::lattice::{join_w, tarski};
use quasistable::oracle::{certify, enumerate};
use quasistable::stability::{blocking_contracts, is_individually_rational, is_quasi_stable, is_stable};
use quasistable::{ContractSet, Error, Market, View};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Input = 3,
    Format = 4,
    Precondition = 5,
    TooLarge = 6,
    Violation = 7,
    Internal = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsFamily {
    GreedyOnly = 0,
    Mixed = 1,
}

/// An immutable market.
pub struct QsMarket {
    market: Market,
}

/// A completed deferred-acceptance run together with the market it ran on.
pub struct QsTrace {
    market: Market,
    trace: DaTrace,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QsCheck {
    pub is_allocation: bool,
    pub individually_rational: bool,
    pub quasi_stable: bool,
    pub stable: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QsGenParams {
    pub n_workers: usize,
    pub n_firms: usize,
    pub max_contracts_per_pair: usize,
    pub density: f64,
    pub quota_min: usize,
    pub quota_max: usize,
    pub acceptability_rate: f64,
    pub seed: u64,
    /// A [`QsFamily`] value.
    pub family: u32,
}

struct Failure {
    status: QsStatus,
    message: String,
}

impl Failure {
    fn new(status: QsStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Input(_) => QsStatus::Input,
            Error::Format { .. } => QsStatus::Format,
            Error::Precondition(_) => QsStatus::Precondition,
            Error::TooLarge { .. } => QsStatus::TooLarge,
            Error::Violation(_) => QsStatus::Violation,
            Error::Internal(_) => QsStatus::Internal,
            Error::Io(_) => QsStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior nul removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(body: impl FnOnce() -> Outcome) -> QsStatus {
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".to_string());
        Err(Failure::new(QsStatus::Panic, message))
    });
    match result {
        Ok(()) => {
            set_last_error(None);
            QsStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.message));
            f.status
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure::new(QsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(QsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure::new(QsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Outcome<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure::new(QsStatus::NullPointer, format!("{what} is null")))
}

fn c_string(s: String) -> Outcome<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure::new(QsStatus::Internal, e.to_string()))
}

fn split(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

unsafe fn view<'m>(market: &'m Market, workers: *const c_char, firms: *const c_char) -> Outcome<View<'m>> {
    let workers = optional_text(workers, "workers")?.map(split);
    let firms = optional_text(firms, "firms")?.map(split);
    Ok(market.view_from_ids(workers.as_deref(), firms.as_deref())?)
}

unsafe fn set(market: &Market, list: *const c_char, what: &str) -> Outcome<ContractSet> {
    Ok(market.parse_list(text(list, what)?)?)
}

fn set_string(market: &Market, y: &ContractSet) -> Outcome<*mut c_char> {
    c_string(market.ids(y).join(","))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a successful call.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn qs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_market_from_json(json: *const c_char, out_market: *mut *mut QsMarket) -> QsStatus {
    guard(|| {
        let slot = out(out_market, "out_market")?;
        let market = parse_market(text(json, "json")?)?;
        *slot = Box::into_raw(Box::new(QsMarket { market }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_market_load(path: *const c_char, out_market: *mut *mut QsMarket) -> QsStatus {
    guard(|| {
        let slot = out(out_market, "out_market")?;
        let market = load_market(text(path, "path")?)?;
        *slot = Box::into_raw(Box::new(QsMarket { market }));
        Ok(())
    })
}

/// # Safety
/// `market` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qs_market_free(market: *mut QsMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Number of contracts, or 0 for a null handle.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qs_market_num_contracts(market: *const QsMarket) -> usize {
    market.as_ref().map_or(0, |m| m.market.num_contracts())
}

/// # Safety
/// `market` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_market_to_json(market: *const QsMarket, out_json: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let m = handle(market, "market")?;
        let slot = out(out_json, "out_json")?;
        *slot = c_string(market_to_string(&m.market))?;
        Ok(())
    })
}

/// The market with the roles of workers and firms exchanged.
///
/// # Safety
/// `market` must be a live handle; `out_market` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_market_dualize(market: *const QsMarket, out_market: *mut *mut QsMarket) -> QsStatus {
    guard(|| {
        let m = handle(market, "market")?;
        let slot = out(out_market, "out_market")?;
        *slot = Box::into_raw(Box::new(QsMarket {
            market: m.market.dualize(),
        }));
        Ok(())
    })
}

/// Stability predicates of `allocation` in the view spanned by `workers` and
/// `firms` (null selects a whole side).
///
/// # Safety
/// `market` must be a live handle, string arguments NUL-terminated or null where
/// allowed, `out_check` writable.
#[no_mangle]
pub unsafe extern "C" fn qs_check(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    allocation: *const c_char,
    out_check: *mut QsCheck,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_check, "out_check")?;
        let v = view(m, workers, firms)?;
        let y = set(m, allocation, "allocation")?;
        *slot = if m.is_allocation(&y) && y.is_subset(v.contracts()) {
            QsCheck {
                is_allocation: true,
                individually_rational: is_individually_rational(&v, &y)?,
                quasi_stable: is_quasi_stable(&v, &y)?,
                stable: is_stable(&v, &y)?,
            }
        } else {
            QsCheck::default()
        };
        Ok(())
    })
}

/// Contracts blocking `allocation`, as an id list.
///
/// # Safety
/// As for [`qs_check`]; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_blocking_contracts(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    allocation: *const c_char,
    out_set: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_set, "out_set")?;
        let v = view(m, workers, firms)?;
        let y = set(m, allocation, "allocation")?;
        *slot = set_string(m, &blocking_contracts(&v, &y)?)?;
        Ok(())
    })
}

/// The worker-pessimal stable allocation of the view.
///
/// # Safety
/// As for [`qs_check`]; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_worker_pessimal(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    out_set: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_set, "out_set")?;
        let v = view(m, workers, firms)?;
        *slot = set_string(m, &worker_pessimal(&v)?)?;
        Ok(())
    })
}

/// Least fixed point of the Tarski operator above `allocation`.
///
/// # Safety
/// As for [`qs_check`]; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_tarski(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    allocation: *const c_char,
    out_set: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_set, "out_set")?;
        let v = view(m, workers, firms)?;
        let y = set(m, allocation, "allocation")?;
        *slot = set_string(m, &tarski(&v, &y)?)?;
        Ok(())
    })
}

/// Workers' join of two quasi-stable allocations.
///
/// # Safety
/// As for [`qs_check`]; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_join(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    left: *const c_char,
    right: *const c_char,
    out_set: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_set, "out_set")?;
        let v = view(m, workers, firms)?;
        let a = set(m, left, "left")?;
        let b = set(m, right, "right")?;
        *slot = set_string(m, &join_w(&v, &a, &b)?)?;
        Ok(())
    })
}

/// Runs deferred acceptance from the quasi-stable `start`. `strategy` is `"full"`,
/// `"single"` or `"random"` (null means `"full"`); `seed` is used by `"random"`.
///
/// # Safety
/// As for [`qs_check`]; `out_trace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_da_run(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    start: *const c_char,
    strategy: *const c_char,
    seed: u64,
    out_trace: *mut *mut QsTrace,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_trace, "out_trace")?;
        let v = view(m, workers, firms)?;
        let y = set(m, start, "start")?;
        let strategy = ProposalStrategy::from_name(optional_text(strategy, "strategy")?.unwrap_or("full"), seed)?;
        let trace = da_run(&v, &y, strategy)?;
        *slot = Box::into_raw(Box::new(QsTrace {
            market: m.clone(),
            trace,
        }));
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_free(trace: *mut QsTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of steps taken, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_len(trace: *const QsTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.steps.len())
}

/// The allocation after `step` steps; step 0 is the start.
///
/// # Safety
/// `trace` must be a live handle; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_allocation(
    trace: *const QsTrace,
    step: usize,
    out_set: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let slot = out(out_set, "out_set")?;
        if step > t.trace.steps.len() {
            return Err(Failure::new(
                QsStatus::Input,
                format!("step {step} beyond the {} steps of the trace", t.trace.steps.len()),
            ));
        }
        *slot = set_string(&t.market, t.trace.allocation_at(step))?;
        Ok(())
    })
}

/// # Safety
/// `trace` must be a live handle; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_outcome(trace: *const QsTrace, out_set: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let slot = out(out_set, "out_set")?;
        *slot = set_string(&t.market, &t.trace.outcome)?;
        Ok(())
    })
}

/// The trace in the command-line text format.
///
/// # Safety
/// `trace` must be a live handle; `out_text` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_to_text(trace: *const QsTrace, out_text: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let slot = out(out_text, "out_text")?;
        *slot = c_string(format_trace(&t.market, &t.trace))?;
        Ok(())
    })
}

/// Exhaustive enumeration of the view as JSON with keys `allocations`,
/// `individually_rational`, `quasi_stable` and `stable` (arrays of id arrays).
///
/// # Safety
/// As for [`qs_check`]; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_enumerate(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    out_json: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_json, "out_json")?;
        let v = view(m, workers, firms)?;
        let e = enumerate(&v)?;
        let ids = |sets: &[ContractSet]| sets.iter().map(|y| m.ids(y)).collect::<Vec<_>>();
        let doc = serde_json::json!({
            "allocations": e.all_allocations.len(),
            "individually_rational": ids(&e.ir),
            "quasi_stable": ids(&e.quasi_stable),
            "stable": ids(&e.stable),
        });
        *slot = c_string(doc.to_string())?;
        Ok(())
    })
}

/// Cross-checks the structural results on the view by exhaustive enumeration.
///
/// # Safety
/// As for [`qs_check`]; `out_passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_certify(
    market: *const QsMarket,
    workers: *const c_char,
    firms: *const c_char,
    out_passed: *mut bool,
) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_passed, "out_passed")?;
        let v = view(m, workers, firms)?;
        *slot = certify(&v)?.passed();
        Ok(())
    })
}

/// Verifies every agent's choice function and stores the number of failed checks.
///
/// # Safety
/// `market` must be a live handle; `out_failed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_verify_prefs(market: *const QsMarket, out_failed: *mut usize) -> QsStatus {
    guard(|| {
        let m = &handle(market, "market")?.market;
        let slot = out(out_failed, "out_failed")?;
        *slot = verify_all(m, DEFAULT_VERIFY_CAP)?.iter().filter(|r| !r.passed).count();
        Ok(())
    })
}

/// Default generator parameters.
#[no_mangle]
pub extern "C" fn qs_gen_params_default() -> QsGenParams {
    let p = GenParams::default();
    QsGenParams {
        n_workers: p.n_workers,
        n_firms: p.n_firms,
        max_contracts_per_pair: p.max_contracts_per_pair,
        density: p.density,
        quota_min: p.quota_range.0,
        quota_max: p.quota_range.1,
        acceptability_rate: p.acceptability_rate,
        seed: p.seed,
        family: QsFamily::GreedyOnly as u32,
    }
}

/// # Safety
/// `params` must point to a readable parameter block; `out_market` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_gen(params: *const QsGenParams, out_market: *mut *mut QsMarket) -> QsStatus {
    guard(|| {
        let p = *handle(params, "params")?;
        let slot = out(out_market, "out_market")?;
        let params = GenParams {
            n_workers: p.n_workers,
            n_firms: p.n_firms,
            max_contracts_per_pair: p.max_contracts_per_pair,
            density: p.density,
            quota_range: (p.quota_min, p.quota_max),
            acceptability_rate: p.acceptability_rate,
            seed: p.seed,
            family: match p.family {
                f if f == QsFamily::GreedyOnly as u32 => Family::GreedyOnly,
                f if f == QsFamily::Mixed as u32 => Family::Mixed,
                f => return Err(Failure::new(QsStatus::Input, format!("unknown family {f}"))),
            },
        };
        let market = gen_market(&params)?.market;
        *slot = Box::into_raw(Box::new(QsMarket { market }));
        Ok(())
    })
}
