//! C interface to the adaptive-drift simulator.
//!
//! Models are opaque `AdModel` handles created by one of the `ad_model_*`
//! constructors and released with [`ad_model_free`]. Every fallible call
//! returns an [`AdStatus`]; on failure a description is available from
//! [`ad_last_error`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use adaptive_drift::compiler::{exact_moments, fixed_probabilities, fluctuation_probabilities, TrajectoryRunner};
use adaptive_drift::harness::{monte_carlo_point, thread_pool};
use adaptive_drift::hilbert::StateVector;
use adaptive_drift::models::{initial_state, Boundary, Model};
use adaptive_drift::{Error, HamiltonianTermSet, ModelSpec, SamplingStrategy};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    ResourceGuard = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdStrategy {
    Qdrift = 0,
    Equal = 1,
    Adaptive = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdFidelityStats {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub max_tau: f64,
}

/// A built model together with its initial state.
pub struct AdModel {
    spec: ModelSpec,
    terms: HamiltonianTermSet,
    psi0: StateVector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> AdStatus {
    match err {
        Error::ResourceGuard { .. } => AdStatus::ResourceGuard,
        Error::InvalidModel(_)
        | Error::FockIndexOutOfRange { .. }
        | Error::InvalidSpace(_)
        | Error::MissingWeight { .. }
        | Error::Config(_) => AdStatus::InvalidModel,
        Error::NotHermitian { .. }
        | Error::NotNormalized(_)
        | Error::NegativeVariance(_)
        | Error::InfiniteCost { .. }
        | Error::InvalidProbabilities(_) => AdStatus::Numerical,
        _ => AdStatus::InvalidArgument,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), AdStatus>) -> AdStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AdStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AdStatus::Panic
        }
    }
}

fn fail(err: Error) -> AdStatus {
    set_last_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> AdStatus {
    set_last_error(format!("{what} is null"));
    AdStatus::NullPointer
}

unsafe fn model_ref<'a>(model: *const AdModel) -> Result<&'a AdModel, AdStatus> {
    // SAFETY: the caller guarantees `model` is null or came from an
    // `ad_model_*` constructor and has not been freed.
    unsafe { model.as_ref() }.ok_or_else(|| null("model"))
}

unsafe fn out_slice<'a>(buf: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], AdStatus> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < needed {
        set_last_error(format!("buffer holds {len} values, {needed} needed"));
        return Err(AdStatus::BufferTooSmall);
    }
    // SAFETY: non-null and, per the caller contract, valid for `len` writes.
    Ok(unsafe { std::slice::from_raw_parts_mut(buf, needed) })
}

fn strategy_of(s: AdStrategy) -> SamplingStrategy {
    match s {
        AdStrategy::Qdrift => SamplingStrategy::FixedQDrift,
        AdStrategy::Equal => SamplingStrategy::EqualWeight,
        AdStrategy::Adaptive => SamplingStrategy::adaptive(),
    }
}

fn build(spec: ModelSpec, out: *mut *mut AdModel) -> Result<(), AdStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    spec.validate().map_err(fail)?;
    let terms = spec.build().map_err(fail)?;
    let psi0 = initial_state(&spec).map_err(fail)?;
    let handle = Box::new(AdModel { spec, terms, psi0 });
    // SAFETY: `out` is non-null and points to writable storage for a pointer.
    unsafe { *out = Box::into_raw(handle) };
    Ok(())
}

/// Mixed-field Ising chain from its default initial state.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ad_model_mfim(
    chain_length: usize,
    j: f64,
    h_x: f64,
    h_z: f64,
    open_boundary: bool,
    out: *mut *mut AdModel,
) -> AdStatus {
    guard(|| {
        let boundary = if open_boundary { Boundary::Open } else { Boundary::Periodic };
        build(
            ModelSpec::new(Model::Mfim {
                chain_length,
                j,
                h_x,
                h_z,
                boundary,
            }),
            out,
        )
    })
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ad_model_kerr(delta: f64, kerr: f64, drive: f64, fock_dim: usize, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        build(
            ModelSpec::new(Model::Kerr {
                delta,
                kerr,
                drive,
                fock_dim,
            }),
            out,
        )
    })
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ad_model_rabi(omega: f64, omega_q: f64, g: f64, fock_dim: usize, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        build(
            ModelSpec::new(Model::Rabi {
                omega,
                omega_q,
                g,
                fock_dim,
            }),
            out,
        )
    })
}

/// Parses a model table in the same TOML form as the `[model]` section of a
/// run configuration, including an optional `initial` list.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writing
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn ad_model_from_toml(toml: *const c_char, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        // SAFETY: non-null and NUL-terminated per the contract above.
        let text = unsafe { CStr::from_ptr(toml) }.to_str().map_err(|e| {
            set_last_error(format!("toml is not UTF-8: {e}"));
            AdStatus::InvalidArgument
        })?;
        let spec: ModelSpec = ::toml::from_str(text).map_err(|e| {
            set_last_error(e.to_string());
            AdStatus::InvalidModel
        })?;
        build(spec, out)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from an `ad_model_*` constructor that
/// has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn ad_model_free(model: *mut AdModel) {
    if !model.is_null() {
        // SAFETY: ownership returns to Rust exactly once per the contract.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ad_model_dimension(model: *const AdModel, out: *mut usize) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = m.psi0.space().dim() };
        Ok(())
    })
}

/// Number of non-zero terms after construction.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ad_model_term_count(model: *const AdModel, out: *mut usize) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = m.terms.len() };
        Ok(())
    })
}

/// Writes the (truncated) spectral norm of each term.
///
/// # Safety
/// `model` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ad_model_term_norms(model: *const AdModel, buf: *mut f64, len: usize) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        let out = unsafe { out_slice(buf, len, m.terms.len()) }?;
        for (o, t) in out.iter_mut().zip(m.terms.terms()) {
            *o = t.weight.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Sampling probabilities on the initial state. Fixed strategies ignore the
/// state; the adaptive one uses exact term deviations.
///
/// # Safety
/// `model` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ad_model_probabilities(
    model: *const AdModel,
    strategy: AdStrategy,
    buf: *mut f64,
    len: usize,
) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        let out = unsafe { out_slice(buf, len, m.terms.len()) }?;
        let probs = match strategy {
            AdStrategy::Adaptive => {
                let moments = exact_moments(&m.terms, &m.psi0).map_err(fail)?;
                fluctuation_probabilities(&moments, 1e-12).map_err(fail)?.probabilities
            }
            s => fixed_probabilities(&m.terms, &strategy_of(s)).map_err(fail)?,
        };
        out.copy_from_slice(probs.as_slice());
        Ok(())
    })
}

/// Mean fidelity over `n_samples` seeded trajectories, each of `n_steps`
/// steps to total time `t`. `jobs = 0` uses every core; the result does not
/// depend on it.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ad_monte_carlo_fidelity(
    model: *const AdModel,
    strategy: AdStrategy,
    t: f64,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
    jobs: usize,
    out: *mut AdFidelityStats,
) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pool = thread_pool(jobs).map_err(fail)?;
        let stats = monte_carlo_point(&m.terms, &m.psi0, &strategy_of(strategy), t, n_steps, n_samples, seed, &pool)
            .map_err(fail)?;
        unsafe {
            *out = AdFidelityStats {
                mean: stats.mean,
                std_error: stats.std_error,
                n_samples: stats.n_samples as u64,
                max_tau: stats.max_tau,
            }
        };
        Ok(())
    })
}

/// Fidelity of a single trajectory on stream `stream` of `seed`; equal to
/// trajectory `stream` of [`ad_monte_carlo_fidelity`] with the same seed.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ad_trajectory_fidelity(
    model: *const AdModel,
    strategy: AdStrategy,
    t: f64,
    n_steps: usize,
    seed: u64,
    stream: u64,
    out: *mut f64,
) -> AdStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let runner = TrajectoryRunner::new(&m.terms, &m.psi0, t, n_steps, &strategy_of(strategy)).map_err(fail)?;
        let r = runner.run_seeded(seed, stream, false).map_err(fail)?;
        unsafe { *out = r.fidelity };
        Ok(())
    })
}

/// Short model tag (`mfim`, `kerr` or `rabi`); static storage.
///
/// # Safety
/// `model` must be a live handle or null (null yields an empty string).
#[no_mangle]
pub unsafe extern "C" fn ad_model_tag(model: *const AdModel) -> *const c_char {
    let tag: &'static CStr = match unsafe { model.as_ref() }.map(|m| m.spec.tag()) {
        Some("mfim") => c"mfim",
        Some("kerr") => c"kerr",
        Some("rabi") => c"rabi",
        _ => c"",
    };
    tag.as_ptr()
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next `ad_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn ad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
