//! C ABI over the `vqpm` crate.
//!
//! Objects are opaque heap handles created by `*_new`/`*_load`/`vqpm_run`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`VqpmStatus`]; on failure [`vqpm_last_error`] holds a message for the
//! calling thread. Outputs go through pointer arguments and are written only
//! on success. Panics never cross the boundary.
//!
//! Bitstrings are NUL-terminated `'0'`/`'1'` strings with variable 0 first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vqpm::engine::{run, Mode, RunResult, Termination, VqpmConfig};
use vqpm::lock::PolicySpec;
use vqpm::phase::{convergence_ratio, eigenvalue_magnitude, iteration_bound, PhaseTable};
use vqpm::{brute_force_solve, hoeffding_epsilon, Bitstring, Error, QuboInstance};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VqpmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ResourceLimit = 3,
    NumericDegenerate = 4,
    Unbounded = 5,
    Parse = 6,
    Io = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VqpmTermination {
    SuccessByProbability = 0,
    SuccessByTarget = 1,
    TargetEliminated = 2,
    MaxIterations = 3,
}

impl From<Termination> for VqpmTermination {
    fn from(t: Termination) -> Self {
        match t {
            Termination::SuccessByProbability => Self::SuccessByProbability,
            Termination::SuccessByTarget => Self::SuccessByTarget,
            Termination::TargetEliminated => Self::TargetEliminated,
            Termination::MaxIterations => Self::MaxIterations,
        }
    }
}

/// Engine settings. Obtain defaults from [`vqpm_run_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct VqpmRunConfig {
    pub max_iter: usize,
    /// Decimal places kept in the qubit marginals.
    pub precision: u32,
    /// `false` runs the plain power iteration without measurement or locking.
    pub variational: bool,
    pub success_threshold: f64,
    /// Solve the instance exhaustively and use its optima as targets.
    pub use_oracle: bool,
    pub stop_on_elimination: bool,
}

/// Opaque QUBO instance.
pub struct VqpmInstance(QuboInstance);

/// Opaque engine result.
pub struct VqpmResult {
    result: RunResult,
    found: CString,
}

struct Failure(VqpmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::InvalidCollapse { .. } => {
                VqpmStatus::InvalidArgument
            }
            Error::ResourceLimit(_) => VqpmStatus::ResourceLimit,
            Error::NumericDegenerate(_) | Error::DegenerateMarginal(_) => {
                VqpmStatus::NumericDegenerate
            }
            Error::Unbounded(_) => VqpmStatus::Unbounded,
            Error::Parse { .. } => VqpmStatus::Parse,
            Error::Io(_) | Error::Csv(_) => VqpmStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VqpmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            VqpmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            VqpmStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(VqpmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(VqpmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// Valid until the next `vqpm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn vqpm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn vqpm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// All-zero instance on `n` variables.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_new(n: usize, out: *mut *mut VqpmInstance) -> VqpmStatus {
    guard(|| {
        let inst = QuboInstance::zeros(n)?;
        write(out, boxed(VqpmInstance(inst)), "out")
    })
}

/// Random instance with coefficients uniform in `[lo, hi]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_random(
    n: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    out: *mut *mut VqpmInstance,
) -> VqpmStatus {
    guard(|| {
        let inst = QuboInstance::random(n, seed, (lo, hi))?;
        write(out, boxed(VqpmInstance(inst)), "out")
    })
}

/// Reads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_load(
    path: *const c_char,
    out: *mut *mut VqpmInstance,
) -> VqpmStatus {
    guard(|| {
        let inst = QuboInstance::load(text(path, "path")?)?;
        write(out, boxed(VqpmInstance(inst)), "out")
    })
}

/// Sets coefficient `(i, j)`, `i <= j`.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_set(
    inst: *mut VqpmInstance,
    i: usize,
    j: usize,
    value: f64,
) -> VqpmStatus {
    guard(|| Ok(borrow_mut(inst, "instance")?.0.set(i, j, value)?))
}

/// # Safety
/// `inst` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_get(
    inst: *const VqpmInstance,
    i: usize,
    j: usize,
    out: *mut f64,
) -> VqpmStatus {
    guard(|| {
        let v = borrow(inst, "instance")?.0.get(i, j)?;
        write(out, v, "out")
    })
}

/// Number of variables, 0 for a NULL handle.
///
/// # Safety
/// `inst` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_n(inst: *const VqpmInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// Energy of a bitstring.
///
/// # Safety
/// `inst` must be a live handle, `bits` NUL-terminated, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_energy(
    inst: *const VqpmInstance,
    bits: *const c_char,
    out: *mut f64,
) -> VqpmStatus {
    guard(|| {
        let inst = borrow(inst, "instance")?;
        let x: Bitstring = text(bits, "bits")?.parse()?;
        write(out, inst.0.energy(&x)?, "out")
    })
}

/// Releases an instance. NULL is ignored.
///
/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vqpm_instance_free(inst: *mut VqpmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Exhaustive minimum. `argmin_index` is the lowest-index optimum
/// (bit i of the index is variable i); `degeneracy` counts optima.
///
/// # Safety
/// `inst` must be a live handle; every output pointer valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_brute_force(
    inst: *const VqpmInstance,
    min_energy: *mut f64,
    argmin_index: *mut u64,
    eigengap: *mut f64,
    degeneracy: *mut usize,
) -> VqpmStatus {
    guard(|| {
        let oracle = brute_force_solve(&borrow(inst, "instance")?.0)?;
        let first = oracle.argmin.iter().map(|b| b.index()).min().unwrap_or(0);
        write(min_energy, oracle.min_energy, "min_energy")?;
        write(argmin_index, first as u64, "argmin_index")?;
        write(eigengap, oracle.eigengap, "eigengap")?;
        write(degeneracy, oracle.argmin.len(), "degeneracy")
    })
}

#[no_mangle]
pub extern "C" fn vqpm_run_config_default() -> VqpmRunConfig {
    VqpmRunConfig {
        max_iter: 30,
        precision: 3,
        variational: true,
        success_threshold: 0.5,
        use_oracle: true,
        stop_on_elimination: true,
    }
}

/// Runs the engine. `policy` uses the CLI grammar (`fixed:0.01`,
/// `hoeffding+influence`, `none`, ...); NULL means `fixed:0.01`.
///
/// # Safety
/// `inst` must be a live handle, `config` readable, `policy` NULL or
/// NUL-terminated, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_run(
    inst: *const VqpmInstance,
    config: *const VqpmRunConfig,
    policy: *const c_char,
    out: *mut *mut VqpmResult,
) -> VqpmStatus {
    guard(|| {
        let inst = &borrow(inst, "instance")?.0;
        let cfg = *borrow(config, "config")?;
        let spec: PolicySpec = if policy.is_null() {
            PolicySpec::Fixed(0.01)
        } else {
            text(policy, "policy")?.parse()?
        };
        let targets = if cfg.use_oracle {
            Some(brute_force_solve(inst)?.argmin)
        } else {
            None
        };
        let config = VqpmConfig {
            n: inst.n(),
            max_iter: cfg.max_iter,
            policy: spec.resolve(inst, cfg.max_iter)?,
            precision: cfg.precision,
            mode: if cfg.variational {
                Mode::Variational
            } else {
                Mode::Exact
            },
            success_threshold: cfg.success_threshold,
            targets,
            stop_on_elimination: cfg.stop_on_elimination,
        };
        let result = run(&PhaseTable::from_instance(inst)?, &config)?;
        let found = CString::new(result.found.to_string()).expect("bitstrings contain no NUL");
        write(out, boxed(VqpmResult { result, found }), "out")
    })
}

/// Most probable bitstring at termination. Owned by the result.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_found(r: *const VqpmResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.found.as_ptr())
}

/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_found_probability(r: *const VqpmResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.result.found_probability)
}

/// NaN when the run had no target.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_target_probability(r: *const VqpmResult) -> f64 {
    r.as_ref()
        .and_then(|r| r.result.target_probability)
        .unwrap_or(f64::NAN)
}

/// -1 when the run had no target.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_hamming_to_target(r: *const VqpmResult) -> i64 {
    r.as_ref()
        .and_then(|r| r.result.hamming_to_target)
        .map_or(-1, |h| h as i64)
}

/// -1 when the run had no target.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_wrong_locks(r: *const VqpmResult) -> i64 {
    r.as_ref()
        .and_then(|r| r.result.wrong_locks)
        .map_or(-1, |w| w as i64)
}

/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_iterations(r: *const VqpmResult) -> usize {
    r.as_ref().map_or(0, |r| r.result.iterations_used)
}

/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_lock_events(r: *const VqpmResult) -> usize {
    r.as_ref()
        .map_or(0, |r| r.result.trace.lock_events().count())
}

/// # Safety
/// `r` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_termination(
    r: *const VqpmResult,
    out: *mut VqpmTermination,
) -> VqpmStatus {
    guard(|| {
        let t = borrow(r, "result")?.result.termination;
        write(out, t.into(), "out")
    })
}

/// Releases a result. NULL is ignored.
///
/// # Safety
/// `r` must come from [`vqpm_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vqpm_result_free(r: *mut VqpmResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// `|1 + e^{i lambda}|` for a phase in `[0, pi]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_eigenvalue_magnitude(lambda: f64, out: *mut f64) -> VqpmStatus {
    guard(|| write(out, eigenvalue_magnitude(lambda)?, "out"))
}

/// Ratio of the second to the dominant eigenvalue magnitude.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_convergence_ratio(
    lambda_dominant: f64,
    lambda_second: f64,
    out: *mut f64,
) -> VqpmStatus {
    guard(|| {
        write(
            out,
            convergence_ratio(lambda_dominant, lambda_second)?,
            "out",
        )
    })
}

/// Iterations needed to push the second component below `epsilon`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_iteration_bound(
    ratio: f64,
    epsilon: f64,
    out: *mut u64,
) -> VqpmStatus {
    guard(|| write(out, iteration_bound(ratio, epsilon)?, "out"))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vqpm_hoeffding_epsilon(
    delta: f64,
    n: usize,
    shots: u64,
    out: *mut f64,
) -> VqpmStatus {
    guard(|| write(out, hoeffding_epsilon(delta, n, shots)?, "out"))
}
