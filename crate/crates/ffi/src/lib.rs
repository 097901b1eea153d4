//! C ABI over the `revgreedy` library.
//!
//! Instances and traces are opaque heap handles; every entry point returns
//! an `i32` status and writes results through out-pointers. After a non-zero
//! status, `rg_last_error` describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use revgreedy::exact::{exact_opt, ExactConfig};
use revgreedy::format::{trace_to_json, Instance};
use revgreedy::kcenter::{reverse_greedy, TiePolicy, Trace};
use revgreedy::lowerbound::{known_opt, scripted_schedule, verify_schedule, LowerBoundInstance};
use revgreedy::metric::{Arithmetic, MetricSpace};
use revgreedy::Error;

pub const RG_OK: i32 = 0;
pub const RG_ERR_NULL: i32 = 1;
pub const RG_ERR_INVALID_ARGUMENT: i32 = 2;
pub const RG_ERR_ILLEGAL_STEP: i32 = 3;
pub const RG_ERR_CAP_EXCEEDED: i32 = 4;
pub const RG_ERR_PARSE: i32 = 5;
pub const RG_ERR_PANIC: i32 = 6;

/// Tie policy selector for `rg_reverse_greedy`.
pub const RG_POLICY_LOWEST_INDEX: i32 = 0;
pub const RG_POLICY_SEEDED_RANDOM: i32 = 1;

/// A metric space, with the lower-bound construction attached when it came
/// from `rg_instance_lowerbound`.
pub struct RgInstance {
    metric: MetricSpace,
    k: Option<usize>,
    lower: Option<LowerBoundInstance>,
}

/// The removal record of one reverse greedy run.
pub struct RgTrace {
    trace: Trace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::IllegalScriptedStep { .. } => RG_ERR_ILLEGAL_STEP,
        Error::ExactCapExceeded | Error::GammaInfeasible { .. } => RG_ERR_CAP_EXCEEDED,
        Error::Json(_) | Error::Format(_) => RG_ERR_PARSE,
        _ => RG_ERR_INVALID_ARGUMENT,
    }
}

fn guard(f: impl FnOnce() -> Result<(), i32>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RG_OK,
        Ok(Err(code)) => code,
        Err(_) => {
            set_error("internal panic");
            RG_ERR_PANIC
        }
    }
}

fn fail(e: Error) -> i32 {
    set_error(&e.to_string());
    code_of(&e)
}

fn null(what: &str) -> i32 {
    set_error(&format!("null pointer: {what}"));
    RG_ERR_NULL
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, i32> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, i32> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn rg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the adversarial star instance for `k`. `n == 0` means no padding.
///
/// # Safety
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_lowerbound(k: usize, n: usize, out_instance: *mut *mut RgInstance) -> i32 {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        let lb = LowerBoundInstance::build(k, (n != 0).then_some(n)).map_err(fail)?;
        *slot = Box::into_raw(Box::new(RgInstance {
            metric: lb.metric.clone(),
            k: Some(lb.k),
            lower: Some(lb),
        }));
        Ok(())
    })
}

/// Builds an instance from a row-major `n × n` distance matrix. With
/// `exact != 0` entries must be non-negative integers.
///
/// # Safety
/// `dist` must point to `n * n` doubles; `out_instance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_from_matrix(
    n: usize,
    dist: *const f64,
    exact: i32,
    out_instance: *mut *mut RgInstance,
) -> i32 {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        if dist.is_null() {
            return Err(null("dist"));
        }
        let cells = n.checked_mul(n).ok_or_else(|| fail(Error::EmptyInstance))?;
        let flat = std::slice::from_raw_parts(dist, cells);
        let rows = if n == 0 { Vec::new() } else { flat.chunks(n).map(<[f64]>::to_vec).collect() };
        let ar = if exact != 0 { Arithmetic::Exact } else { Arithmetic::float() };
        let metric = MetricSpace::from_rows(rows, ar).map_err(fail)?;
        let report = revgreedy::validate_metric(&metric);
        if !report.is_valid() {
            return Err(fail(Error::InvalidMatrix(format!("{:?}", report.violations[0]))));
        }
        *slot = Box::into_raw(Box::new(RgInstance {
            metric,
            k: None,
            lower: None,
        }));
        Ok(())
    })
}

/// Parses an instance file's JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_instance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_from_json(json: *const c_char, out_instance: *mut *mut RgInstance) -> i32 {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(Error::Format(format!("not UTF-8: {e}"))))?;
        let inst = Instance::from_json(text).map_err(fail)?;
        let lower = inst.lower_bound().map_err(fail)?;
        *slot = Box::into_raw(Box::new(RgInstance {
            k: inst.k,
            metric: inst.metric,
            lower,
        }));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from an `rg_instance_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_free(instance: *mut RgInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of points.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_len(instance: *const RgInstance, out_n: *mut usize) -> i32 {
    guard(|| {
        *out(out_n, "out_n")? = deref(instance, "instance")?.metric.len();
        Ok(())
    })
}

/// The instance's stored k, or 0 if it has none.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_k(instance: *const RgInstance, out_k: *mut usize) -> i32 {
    guard(|| {
        *out(out_k, "out_k")? = deref(instance, "instance")?.k.unwrap_or(0);
        Ok(())
    })
}

/// Distance between points `a` and `b`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_instance_distance(
    instance: *const RgInstance,
    a: usize,
    b: usize,
    out_d: *mut f64,
) -> i32 {
    guard(|| {
        let inst = deref(instance, "instance")?;
        let slot = out(out_d, "out_d")?;
        inst.metric.check_point(a).map_err(fail)?;
        inst.metric.check_point(b).map_err(fail)?;
        *slot = inst.metric.d(a, b);
        Ok(())
    })
}

fn run(inst: &RgInstance, k: usize, policy: TiePolicy, out_trace: &mut *mut RgTrace) -> Result<(), i32> {
    let trace = reverse_greedy(&inst.metric, k, policy).map_err(fail)?;
    *out_trace = Box::into_raw(Box::new(RgTrace { trace }));
    Ok(())
}

/// Runs reverse greedy down to `k` facilities. `policy` is one of the
/// `RG_POLICY_*` values; `seed` is used by the seeded policy only.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_reverse_greedy(
    instance: *const RgInstance,
    k: usize,
    policy: i32,
    seed: u64,
    out_trace: *mut *mut RgTrace,
) -> i32 {
    guard(|| {
        let inst = deref(instance, "instance")?;
        let slot = out(out_trace, "out_trace")?;
        let policy = match policy {
            RG_POLICY_LOWEST_INDEX => TiePolicy::LowestIndex,
            RG_POLICY_SEEDED_RANDOM => TiePolicy::SeededRandom { seed },
            other => {
                set_error(&format!("unknown policy {other}"));
                return Err(RG_ERR_INVALID_ARGUMENT);
            }
        };
        run(inst, k, policy, slot)
    })
}

/// Runs reverse greedy following `sequence`; every entry must be a legal
/// greedy choice. With `sequence == NULL` a lower-bound instance uses its
/// own scripted schedule.
///
/// # Safety
/// `sequence` must point to `len` values or be null; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rg_reverse_greedy_scripted(
    instance: *const RgInstance,
    k: usize,
    sequence: *const usize,
    len: usize,
    out_trace: *mut *mut RgTrace,
) -> i32 {
    guard(|| {
        let inst = deref(instance, "instance")?;
        let slot = out(out_trace, "out_trace")?;
        let sequence = if sequence.is_null() {
            match &inst.lower {
                Some(lb) => scripted_schedule(lb).points(),
                None => return Err(null("sequence")),
            }
        } else {
            std::slice::from_raw_parts(sequence, len).to_vec()
        };
        run(inst, k, TiePolicy::Scripted { sequence }, slot)
    })
}

/// # Safety
/// `trace` must come from `rg_reverse_greedy*`, or be null.
#[no_mangle]
pub unsafe extern "C" fn rg_trace_free(trace: *mut RgTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of removals.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_trace_len(trace: *const RgTrace, out_len: *mut usize) -> i32 {
    guard(|| {
        *out(out_len, "out_len")? = deref(trace, "trace")?.trace.steps.len();
        Ok(())
    })
}

/// Removal `i` and the cost after it.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_trace_step(
    trace: *const RgTrace,
    i: usize,
    out_removed: *mut usize,
    out_cost: *mut f64,
) -> i32 {
    guard(|| {
        let t = &deref(trace, "trace")?.trace;
        let removed = out(out_removed, "out_removed")?;
        let cost = out(out_cost, "out_cost")?;
        let step = t.steps.get(i).ok_or_else(|| {
            set_error(&format!("step {i} out of range ({} steps)", t.steps.len()));
            RG_ERR_INVALID_ARGUMENT
        })?;
        *removed = step.removed;
        *cost = step.cost;
        Ok(())
    })
}

/// Cost of the surviving facility set.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_trace_final_cost(trace: *const RgTrace, out_cost: *mut f64) -> i32 {
    guard(|| {
        *out(out_cost, "out_cost")? = deref(trace, "trace")?.trace.final_cost();
        Ok(())
    })
}

/// Copies the surviving facilities (ascending) into `buf`. `out_len`
/// receives the full count even when `cap` is too small, in which case
/// `RG_ERR_INVALID_ARGUMENT` is returned and nothing is copied.
///
/// # Safety
/// `buf` must hold `cap` values (may be null when `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn rg_trace_final_set(
    trace: *const RgTrace,
    buf: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> i32 {
    guard(|| {
        let set = deref(trace, "trace")?.trace.final_set.members();
        *out(out_len, "out_len")? = set.len();
        if cap < set.len() {
            set_error(&format!("buffer holds {cap}, need {}", set.len()));
            return Err(RG_ERR_INVALID_ARGUMENT);
        }
        if !set.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(set.as_ptr(), buf, set.len());
        }
        Ok(())
    })
}

/// Trace JSON. Release with `rg_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_trace_to_json(trace: *const RgTrace, out_json: *mut *mut c_char) -> i32 {
    guard(|| {
        let t = &deref(trace, "trace")?.trace;
        let slot = out(out_json, "out_json")?;
        let s = trace_to_json(t).map_err(fail)?;
        *slot = CString::new(s).map_err(|_| RG_ERR_PANIC)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn rg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Optimal k-center cost. Lower-bound instances report their known optimum;
/// others are solved exactly, with subset enumeration up to `enumeration_cap`
/// points (0 selects the default).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_exact_opt(
    instance: *const RgInstance,
    k: usize,
    enumeration_cap: usize,
    out_opt: *mut f64,
) -> i32 {
    guard(|| {
        let inst = deref(instance, "instance")?;
        let slot = out(out_opt, "out_opt")?;
        if let Some(lb) = inst.lower.as_ref().filter(|lb| lb.k == k) {
            *slot = known_opt(lb).opt_value;
            return Ok(());
        }
        let mut cfg = ExactConfig::default();
        if enumeration_cap != 0 {
            cfg.enumeration_cap = enumeration_cap;
        }
        *slot = exact_opt(&inst.metric, k, &cfg).map_err(fail)?.opt_value;
        Ok(())
    })
}

/// Replays the scripted adversarial schedule for `k` with legality checks.
/// `out_passed` is 1 when every step is a greedy argmin and the run ends at
/// cost 2k − 2 on the designated survivors.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rg_verify_lower(k: usize, out_passed: *mut i32, out_final_cost: *mut f64) -> i32 {
    guard(|| {
        let passed = out(out_passed, "out_passed")?;
        let cost = out(out_final_cost, "out_final_cost")?;
        let lb = LowerBoundInstance::build(k, None).map_err(fail)?;
        let report = verify_schedule(&lb, &scripted_schedule(&lb));
        *passed = report.passed() as i32;
        *cost = report.final_cost.unwrap_or(f64::NAN);
        Ok(())
    })
}
