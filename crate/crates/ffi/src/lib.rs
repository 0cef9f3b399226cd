//! C ABI for the streaming attention estimators: opaque handles, status
//! codes, and flat-buffer vector passing.
//!
//! Every handle owns its own deterministic RNG stream, seeded at creation,
//! so replay only needs the seed. All functions are panic-safe: internal
//! invariant failures surface as `ATTN_STATUS_INTERNAL` instead of unwinding
//! across the boundary.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use attnsketch_core::attention::SlidingWindowSpec;
use attnsketch_core::error::Error;
use attnsketch_core::instances::thresholds;
use attnsketch_core::jl::{dim_for, JlProjector};
use attnsketch_core::randkit::chacha;
use attnsketch_core::sampling::ScalarStreamState;
use attnsketch_core::vector::{TokenTriple, Vector};
use attnsketch_core::window::WindowState;
use rand_chacha::ChaCha8Rng;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimMismatch = 3,
    EmptyState = 4,
    IndexOutOfRange = 5,
    Internal = 6,
}

fn status_of(e: &Error) -> AttnStatus {
    match e {
        Error::EmptyInput(_) => AttnStatus::EmptyState,
        Error::DimMismatch { .. } => AttnStatus::DimMismatch,
        Error::IndexOutOfRange { .. } => AttnStatus::IndexOutOfRange,
        Error::NonFinite(_)
        | Error::InvalidParameter(_)
        | Error::NormBound { .. }
        | Error::ThresholdSeparation(_) => AttnStatus::InvalidArgument,
        _ => AttnStatus::Internal,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn attnsketch_status_message(status: AttnStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        AttnStatus::Ok => b"ok\0",
        AttnStatus::NullPointer => b"null pointer argument\0",
        AttnStatus::InvalidArgument => b"invalid argument\0",
        AttnStatus::DimMismatch => b"dimension mismatch\0",
        AttnStatus::EmptyState => b"state is empty\0",
        AttnStatus::IndexOutOfRange => b"index out of range\0",
        AttnStatus::Internal => b"internal invariant failure\0",
    };
    msg.as_ptr().cast()
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn vector_arg(data: &[f64]) -> Result<Vector, AttnStatus> {
    Vector::new(data.to_vec()).map_err(|e| status_of(&e))
}

// ---------------------------------------------------------------------------
// Sliding-window estimator
// ---------------------------------------------------------------------------

/// Opaque sliding-window estimator state (ring buffers, reservoir, RNG).
pub struct AttnWindow {
    state: WindowState,
    rng: ChaCha8Rng,
}

/// Creates a sliding-window estimator for width `w` and embedding dimension
/// `dim`, with all randomness derived from `seed`. Returns NULL on invalid
/// parameters. Free with `attnsketch_window_free`.
#[no_mangle]
pub extern "C" fn attnsketch_window_new(w: usize, dim: usize, seed: u64) -> *mut AttnWindow {
    let spec = match SlidingWindowSpec::new(w) {
        Ok(s) => s,
        Err(_) => return std::ptr::null_mut(),
    };
    match WindowState::new(spec, dim) {
        Ok(state) => Box::into_raw(Box::new(AttnWindow { state, rng: chacha(seed) })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Ingests one (q, k, v) triple of `dim` doubles each.
///
/// # Safety
/// `handle` must come from `attnsketch_window_new` and not be freed; the
/// three pointers must reference `dim` readable doubles, where `dim` is the
/// dimension the handle was created with.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_window_process(
    handle: *mut AttnWindow,
    q: *const f64,
    k: *const f64,
    v: *const f64,
    dim: usize,
) -> AttnStatus {
    let Some(h) = handle.as_mut() else { return AttnStatus::NullPointer };
    let (Some(q), Some(k), Some(v)) =
        (slice_arg(q, dim), slice_arg(k, dim), slice_arg(v, dim))
    else {
        return AttnStatus::NullPointer;
    };
    let triple = match (vector_arg(q), vector_arg(k), vector_arg(v)) {
        (Ok(q), Ok(k), Ok(v)) => match TokenTriple::new(q, k, v) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        },
        _ => return AttnStatus::InvalidArgument,
    };
    match catch_unwind(AssertUnwindSafe(|| h.state.process(&triple, &mut h.rng))) {
        Ok(Ok(())) => AttnStatus::Ok,
        Ok(Err(e)) => status_of(&e),
        Err(_) => AttnStatus::Internal,
    }
}

/// Draws one unbiased estimate of sliding-window attention for query `q`
/// into `out` (`dim` doubles).
///
/// # Safety
/// `handle` as in `attnsketch_window_process`; `q` must reference `dim`
/// readable doubles and `out` `dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_window_sample(
    handle: *mut AttnWindow,
    q: *const f64,
    out: *mut f64,
    dim: usize,
) -> AttnStatus {
    let Some(h) = handle.as_mut() else { return AttnStatus::NullPointer };
    let Some(q) = slice_arg(q, dim) else { return AttnStatus::NullPointer };
    if out.is_null() {
        return AttnStatus::NullPointer;
    }
    let query = match vector_arg(q) {
        Ok(v) => v,
        Err(s) => return s,
    };
    let drawn = match catch_unwind(AssertUnwindSafe(|| h.state.sample(&query, &mut h.rng))) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => return status_of(&e),
        Err(_) => return AttnStatus::Internal,
    };
    if drawn.dim() != dim {
        return AttnStatus::DimMismatch;
    }
    std::ptr::copy_nonoverlapping(drawn.as_slice().as_ptr(), out, dim);
    AttnStatus::Ok
}

/// Number of embedding vectors currently retained (at most 2W + 1).
///
/// # Safety
/// `handle` as in `attnsketch_window_process`.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_window_stored_vectors(handle: *const AttnWindow) -> usize {
    match handle.as_ref() {
        Some(h) => h.state.stored_vector_count(),
        None => 0,
    }
}

/// Stream position (number of triples processed).
///
/// # Safety
/// `handle` as in `attnsketch_window_process`.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_window_step(handle: *const AttnWindow) -> usize {
    match handle.as_ref() {
        Some(h) => h.state.step(),
        None => 0,
    }
}

/// Frees a window estimator handle; NULL is a no-op.
///
/// # Safety
/// `handle` must come from `attnsketch_window_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_window_free(handle: *mut AttnWindow) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// ---------------------------------------------------------------------------
// d = 1 streaming estimator
// ---------------------------------------------------------------------------

/// Opaque d = 1 streaming attention state.
pub struct AttnScalarStream {
    state: ScalarStreamState,
    rng: ChaCha8Rng,
}

/// Creates a d = 1 streaming estimator seeded with `seed`.
/// Free with `attnsketch_scalar_free`.
#[no_mangle]
pub extern "C" fn attnsketch_scalar_new(seed: u64) -> *mut AttnScalarStream {
    Box::into_raw(Box::new(AttnScalarStream { state: ScalarStreamState::new(), rng: chacha(seed) }))
}

/// Ingests one (key, value) scalar pair.
///
/// # Safety
/// `handle` must come from `attnsketch_scalar_new` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_scalar_update(
    handle: *mut AttnScalarStream,
    key: f64,
    value: f64,
) -> AttnStatus {
    let Some(h) = handle.as_mut() else { return AttnStatus::NullPointer };
    if !key.is_finite() || !value.is_finite() {
        return AttnStatus::InvalidArgument;
    }
    match catch_unwind(AssertUnwindSafe(|| h.state.update_scalars(key, value, &mut h.rng))) {
        Ok(()) => AttnStatus::Ok,
        Err(_) => AttnStatus::Internal,
    }
}

/// Draws one unbiased attention estimate for query `q` into `out`.
///
/// # Safety
/// `handle` as in `attnsketch_scalar_update`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_scalar_query(
    handle: *mut AttnScalarStream,
    q: f64,
    out: *mut f64,
) -> AttnStatus {
    let Some(h) = handle.as_mut() else { return AttnStatus::NullPointer };
    if out.is_null() {
        return AttnStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(|| h.state.query(q, &mut h.rng))) {
        Ok(Ok(v)) => {
            *out = v;
            AttnStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => AttnStatus::Internal,
    }
}

/// Count of retained key/value scalars (stays within 8 sqrt(n)).
///
/// # Safety
/// `handle` as in `attnsketch_scalar_update`.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_scalar_stored(handle: *const AttnScalarStream) -> usize {
    match handle.as_ref() {
        Some(h) => h.state.stored_scalars(),
        None => 0,
    }
}

/// Number of pairs ingested so far.
///
/// # Safety
/// `handle` as in `attnsketch_scalar_update`.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_scalar_len(handle: *const AttnScalarStream) -> usize {
    match handle.as_ref() {
        Some(h) => h.state.len(),
        None => 0,
    }
}

/// Frees a scalar-stream handle; NULL is a no-op.
///
/// # Safety
/// `handle` must come from `attnsketch_scalar_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_scalar_free(handle: *mut AttnScalarStream) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// ---------------------------------------------------------------------------
// Seeded random projection
// ---------------------------------------------------------------------------

/// Opaque seeded Gaussian projection.
pub struct AttnProjector {
    inner: JlProjector,
}

/// Creates a seeded projection from `source_dim` to `target_dim` dimensions.
/// Returns NULL on invalid parameters. Free with `attnsketch_projector_free`.
#[no_mangle]
pub extern "C" fn attnsketch_projector_new(
    seed: u64,
    source_dim: usize,
    target_dim: usize,
) -> *mut AttnProjector {
    match JlProjector::new(seed, source_dim, target_dim) {
        Ok(inner) => Box::into_raw(Box::new(AttnProjector { inner })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Projects `x` (`source_dim` doubles) into `out` (`target_dim` doubles).
///
/// # Safety
/// `handle` must come from `attnsketch_projector_new` and not be freed;
/// buffer lengths must match the handle's dimensions.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_projector_project(
    handle: *const AttnProjector,
    x: *const f64,
    source_dim: usize,
    out: *mut f64,
    target_dim: usize,
) -> AttnStatus {
    let Some(h) = handle.as_ref() else { return AttnStatus::NullPointer };
    let Some(x) = slice_arg(x, source_dim) else { return AttnStatus::NullPointer };
    if out.is_null() {
        return AttnStatus::NullPointer;
    }
    if target_dim != h.inner.target_dim() {
        return AttnStatus::DimMismatch;
    }
    let v = match vector_arg(x) {
        Ok(v) => v,
        Err(s) => return s,
    };
    match h.inner.project(&v) {
        Ok(p) => {
            std::ptr::copy_nonoverlapping(p.as_slice().as_ptr(), out, target_dim);
            AttnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Image of the `index`-th standard basis vector (0-based) into `out`.
///
/// # Safety
/// As in `attnsketch_projector_project`.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_projector_basis(
    handle: *const AttnProjector,
    index: usize,
    out: *mut f64,
    target_dim: usize,
) -> AttnStatus {
    let Some(h) = handle.as_ref() else { return AttnStatus::NullPointer };
    if out.is_null() {
        return AttnStatus::NullPointer;
    }
    if target_dim != h.inner.target_dim() {
        return AttnStatus::DimMismatch;
    }
    match h.inner.project_basis(index) {
        Ok(p) => {
            std::ptr::copy_nonoverlapping(p.as_slice().as_ptr(), out, target_dim);
            AttnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Frees a projector handle; NULL is a no-op.
///
/// # Safety
/// `handle` must come from `attnsketch_projector_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_projector_free(handle: *mut AttnProjector) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Target dimension preserving pairwise inner products of `n` unit vectors
/// to within `eps`: ceil(12 ln n / (eps^2 - eps^3)).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_dim_for(n: usize, eps: f64, out: *mut usize) -> AttnStatus {
    if out.is_null() {
        return AttnStatus::NullPointer;
    }
    match dim_for(n, eps) {
        Ok(d) => {
            *out = d;
            AttnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Readout thresholds for the planted-bit decoders: a zero bit stays at or
/// below `lo`, a one bit at or above `hi`. For eta > 0 the margin
/// (1+eta) lo < (1-eta) hi is validated.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn attnsketch_thresholds(
    n: usize,
    c: f64,
    eps: f64,
    eta: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> AttnStatus {
    if lo.is_null() || hi.is_null() {
        return AttnStatus::NullPointer;
    }
    match thresholds(n, c, eps, eta) {
        Ok(t) => {
            *lo = t.lo;
            *hi = t.hi;
            AttnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
