//! C ABI over `qorient`.
//!
//! Objects cross the boundary as opaque handles (`QorientState`,
//! `QorientTensor`) created by `qorient_*` constructors and released with the
//! matching `*_free`. Every fallible call returns a [`QorientStatus`]; on
//! failure a message is available from [`qorient_last_error`] until the next
//! failing call on the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qorient::angular::{clebsch_gordan, HalfInteger};
use qorient::cli::exit_code;
use qorient::expansion::{build_grid, Domain};
use qorient::fermi::{fermi_order_parameters, FermiMode, MomentumOccupation, PolarGridSpec, Profile};
use qorient::quantum::{expectation, order_parameter_operator, DensityMatrix};
use qorient::spin::{nematic_operator_closed, polarization_operator_closed, spin_kernel, SpinSystem};
use qorient::tensor::{SpatialDim, Tensor};
use qorient::verify::{run, VerifyOptions};

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum QorientStatus {
    Ok = 0,
    /// Malformed argument: bad spin, index, profile string, matrix shape.
    InvalidInput = 1,
    /// A physics invariant failed (non-PSD state, missing Fermi crossing, ...).
    InvariantViolation = 2,
    /// `qorient_verify` ran and at least one criterion failed.
    VerifyFailed = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    /// Internal panic, caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum QorientFermiMode {
    Exact = 0,
    FermiSurface = 1,
}

/// Spin-s density matrix.
pub struct QorientState {
    spin: SpinSystem,
    rho: DensityMatrix,
}

/// Real Cartesian tensor, row-major components.
pub struct QorientTensor {
    tensor: Tensor,
    note: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(QorientStatus, String);

impl From<qorient::Error> for Failure {
    fn from(e: qorient::Error) -> Self {
        let status = match exit_code(&e) {
            2 => QorientStatus::InvariantViolation,
            _ => QorientStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QorientStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    // Interior NULs cannot occur in our messages; strip defensively.
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<QorientStatus, Failure>) -> QorientStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QorientStatus::Panic
        }
    }
}

fn spin(twice_s: i32) -> Result<SpinSystem, Failure> {
    Ok(SpinSystem::new(HalfInteger::from_twice(twice_s))?)
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<QorientStatus, Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(QorientStatus::Ok)
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(QorientStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn qorient_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Owned by the
/// library; valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn qorient_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Maximally mixed state of spin `twice_s / 2`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qorient_state_mixed(twice_s: i32, out: *mut *mut QorientState) -> QorientStatus {
    guard(|| {
        let spin = spin(twice_s)?;
        emit(out, QorientState { spin, rho: DensityMatrix::maximally_mixed(spin.dim()) })
    })
}

/// Basis state `|s, m⟩`, both given doubled.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qorient_state_basis(twice_s: i32, twice_m: i32, out: *mut *mut QorientState) -> QorientStatus {
    guard(|| {
        let spin = spin(twice_s)?;
        let i = spin.index(HalfInteger::from_twice(twice_m))?;
        let psi: Vec<Complex64> = (0..spin.dim()).map(|k| Complex64::new(if k == i { 1.0 } else { 0.0 }, 0.0)).collect();
        emit(out, QorientState { spin, rho: DensityMatrix::pure(&psi)? })
    })
}

/// Density matrix from row-major real and imaginary parts, `len = n²` with
/// `n = twice_s + 1` and rows ordered by descending `m`. `im` may be null
/// for a real matrix. The state is validated (Hermitian, unit trace, PSD).
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles; `out`
/// must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qorient_state_from_matrix(
    twice_s: i32,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut QorientState,
) -> QorientStatus {
    guard(|| {
        let spin = spin(twice_s)?;
        let n = spin.dim();
        if len != n * n {
            return Err(Failure(QorientStatus::InvalidInput, format!("spin-{} needs {} entries, got {len}", spin.s(), n * n)));
        }
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im.map_or(0.0, |v| v[i * n + j])));
        emit(out, QorientState { spin, rho: DensityMatrix::new(m)? })
    })
}

/// Hilbert-space dimension, 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qorient_state_dim(state: *const QorientState) -> usize {
    state.as_ref().map_or(0, |s| s.spin.dim())
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qorient_state_free(state: *mut QorientState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Rank-`rank` order-parameter tensor `⟨T̂_rank⟩` of a spin state (3D).
///
/// # Safety
/// `state` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qorient_spin_order_params(
    state: *const QorientState,
    rank: u32,
    out: *mut *mut QorientTensor,
) -> QorientStatus {
    guard(|| {
        let st = state.as_ref().ok_or_else(|| null("state"))?;
        let rank = rank as usize;
        let s2 = st.spin.max_rank();
        let grid = build_grid(Domain::S2, (2 * s2).max(s2 + rank))?;
        let kernel = spin_kernel(st.spin.s(), &grid)?;
        let op = order_parameter_operator(&kernel, SpatialDim::Three, rank)?;
        let value = expectation(&st.rho, &op)?;
        let closed = match rank {
            1 => Some(polarization_operator_closed(st.spin.s())),
            2 => Some(nematic_operator_closed(st.spin.s())),
            _ => None,
        };
        let note = closed
            .as_ref()
            .and_then(|c| c.note().map(str::to_string))
            .or_else(|| (rank > s2).then(|| format!("rank {rank} exceeds 2s = {s2}: the operator vanishes")));
        emit(out, QorientTensor { tensor: value.into_tensor(), note: note.and_then(|n| CString::new(n).ok()) })
    })
}

/// Rank-`rank` order parameter (2D) of a Fermi sea given as a profile
/// string, `disk:pF[,smear]` or `ellipse:a,b,chi[,smear]`.
///
/// # Safety
/// `profile` must be a NUL-terminated string; `out` must be valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn qorient_fermi_order_params(
    profile: *const c_char,
    mode: QorientFermiMode,
    rank: u32,
    out: *mut *mut QorientTensor,
) -> QorientStatus {
    guard(|| {
        let profile: Profile = text(profile, "profile")?.parse()?;
        let occ = MomentumOccupation::from_profile(&profile, &PolarGridSpec::default())?;
        let mode = match mode {
            QorientFermiMode::Exact => FermiMode::Exact,
            QorientFermiMode::FermiSurface => FermiMode::FermiSurface,
        };
        let mut op = fermi_order_parameters(&occ, rank as usize, mode)?;
        let tensor = op.tensors.swap_remove(rank as usize).into_tensor();
        emit(out, QorientTensor { tensor, note: None })
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_rank(t: *const QorientTensor) -> usize {
    t.as_ref().map_or(0, |t| t.tensor.rank())
}

/// Spatial dimension (2 or 3), 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_dim(t: *const QorientTensor) -> usize {
    t.as_ref().map_or(0, |t| t.tensor.dim())
}

/// Number of components, `dim^rank`.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_len(t: *const QorientTensor) -> usize {
    t.as_ref().map_or(0, |t| t.tensor.len())
}

/// Copy the row-major components into `buf` (capacity `cap`).
///
/// # Safety
/// `t` must be a live handle; `buf` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_copy(t: *const QorientTensor, buf: *mut f64, cap: usize) -> QorientStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let data = t.tensor.data();
        if cap < data.len() {
            return Err(Failure(QorientStatus::BufferTooSmall, format!("need {} doubles, buffer holds {cap}", data.len())));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(QorientStatus::Ok)
    })
}

/// Explanatory note attached to the result (e.g. why it vanishes), or null.
/// Owned by the tensor.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_note(t: *const QorientTensor) -> *const c_char {
    t.as_ref().and_then(|t| t.note.as_ref()).map_or(ptr::null(), |n| n.as_ptr())
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qorient_tensor_free(t: *mut QorientTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// `⟨j1 m1; j2 m2 | J M⟩`, all arguments doubled.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qorient_clebsch(
    twice_j1: i32,
    twice_m1: i32,
    twice_j2: i32,
    twice_m2: i32,
    twice_j: i32,
    twice_m: i32,
    out: *mut f64,
) -> QorientStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let h = HalfInteger::from_twice;
        *out = clebsch_gordan(h(twice_j1), h(twice_m1), h(twice_j2), h(twice_m2), h(twice_j), h(twice_m))?;
        Ok(QorientStatus::Ok)
    })
}

/// Run the acceptance suite. `only` is a comma-separated list of criterion
/// names, or null for all. `failed` (nullable) receives the number of
/// failing criteria. Returns `VerifyFailed` when that number is nonzero.
///
/// # Safety
/// `only` must be null or NUL-terminated; `failed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qorient_verify(only: *const c_char, failed: *mut u32) -> QorientStatus {
    guard(|| {
        let only = if only.is_null() {
            Vec::new()
        } else {
            text(only, "only")?.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        };
        let reports = run(&VerifyOptions { only, ..VerifyOptions::default() })?;
        let bad: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
        if let Some(f) = failed.as_mut() {
            *f = bad.len() as u32;
        }
        if bad.is_empty() {
            Ok(QorientStatus::Ok)
        } else {
            Err(Failure(QorientStatus::VerifyFailed, format!("failing criteria: {}", bad.join(", "))))
        }
    })
}
