//! C interface to the `nevanlinna` library.
//!
//! Objects are opaque handles created by `nv_*_new`-style calls and released
//! with the matching `nv_*_free`. Every fallible call returns an [`NvStatus`];
//! on failure, [`nv_last_error`] describes the problem until the next call on
//! the same thread. Complex arrays are interleaved `re, im` pairs and
//! matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nevanlinna::agler_solver::{solve_decomposition, InterpolationProblem, SolveOptions, SolveStatus};
use nevanlinna::aux_function::{build_aux_with, AuxiliaryFunction};
use nevanlinna::cpkernel::CpKernel;
use nevanlinna::io::{AuxFile, ProblemFile};
use nevanlinna::numerics::{Complex, ComplexMatrix};
use nevanlinna::parametrizer::{param_eval, verify, SchurParameter};
use nevanlinna::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvStatus {
    NvOk = 0,
    NvNullPointer = 1,
    NvInvalidInput = 2,
    NvInfeasible = 3,
    NvDecompositionInvalid = 4,
    NvNumerical = 5,
    NvPanic = 6,
}

pub struct NvProblem(InterpolationProblem);

pub struct NvDecomposition(CpKernel);

pub struct NvAux(AuxiliaryFunction);

/// Summary of a feasibility solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NvSolveInfo {
    /// 1 when a decomposition was found.
    pub feasible: i32,
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NvVerification {
    pub interp_residual: f64,
    pub schur_norm_max: f64,
    pub samples: usize,
    /// 1 when both checks pass.
    pub pass: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> NvStatus {
    match e {
        Error::DecompositionInvalid(_) | Error::InfeasibleKernel(_) => NvStatus::NvDecompositionInvalid,
        Error::SingularResolvent | Error::NotPsd { .. } => NvStatus::NvNumerical,
        _ => NvStatus::NvInvalidInput,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<NvStatus, (NvStatus, String)>) -> NvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            set_error("");
            status
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NvStatus::NvPanic
        }
    }
}

fn fail(e: Error) -> (NvStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NvStatus, String) {
    (NvStatus::NvNullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NvStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NvStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NvStatus::NvInvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn read_complex(p: *const f64, count: usize, what: &str) -> Result<Vec<Complex>, (NvStatus, String)> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    let raw = std::slice::from_raw_parts(p, 2 * count);
    Ok(raw.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect())
}

unsafe fn write_matrix(m: &ComplexMatrix, out: *mut f64) -> Result<(), (NvStatus, String)> {
    if m.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * m.len());
    for (k, z) in m.transpose().iter().enumerate() {
        dst[2 * k] = z.re;
        dst[2 * k + 1] = z.im;
    }
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a problem document (the CLI's JSON problem format).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_problem_from_json(json: *const c_char, out: *mut *mut NvProblem) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let loaded = ProblemFile::parse(text).and_then(|f| f.to_problem()).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvProblem(loaded.problem)));
        Ok(NvStatus::NvOk)
    })
}

/// # Safety
/// `problem` must come from [`nv_problem_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_problem_free(problem: *mut NvProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of points, output and input dimensions of the targets, and the
/// dimension of the domain.
///
/// # Safety
/// `problem` must be a live handle; any of the outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nv_problem_shape(
    problem: *const NvProblem,
    points: *mut usize,
    d_out: *mut usize,
    d_in: *mut usize,
    dimension: *mut usize,
) -> NvStatus {
    guard(|| {
        let p = &as_ref(problem, "problem")?.0;
        for (dst, v) in [
            (points, p.len()),
            (d_out, p.d_out()),
            (d_in, p.d_in()),
            (dimension, p.family().dimension()),
        ] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(NvStatus::NvOk)
    })
}

/// Searches for an Agler decomposition. Returns `NvOk` and a handle in
/// `out` when feasible, `NvInfeasible` with `*out` null otherwise. `info`
/// may be null. Non-positive `tol` or zero `max_iter` select the defaults.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_solve(
    problem: *const NvProblem,
    tol: f64,
    max_iter: usize,
    out: *mut *mut NvDecomposition,
    info: *mut NvSolveInfo,
) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = &as_ref(problem, "problem")?.0;
        let mut opts = SolveOptions::default();
        if tol > 0.0 {
            opts.tol_solve = tol;
        }
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let report = solve_decomposition(p, &opts).map_err(fail)?;
        let feasible = report.status == SolveStatus::Feasible;
        if !info.is_null() {
            *info = NvSolveInfo {
                feasible: feasible as i32,
                affine_residual: report.affine_residual,
                min_eigenvalue: report.min_eigenvalue,
                iterations: report.iterations,
            };
        }
        match report.decomposition {
            Some(k) if feasible => {
                *out = Box::into_raw(Box::new(NvDecomposition(k)));
                Ok(NvStatus::NvOk)
            }
            _ => Err((
                NvStatus::NvInfeasible,
                format!("no decomposition found (status {})", report.status.as_str()),
            )),
        }
    })
}

/// # Safety
/// `decomposition` must come from [`nv_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_decomposition_free(decomposition: *mut NvDecomposition) {
    if !decomposition.is_null() {
        drop(Box::from_raw(decomposition));
    }
}

/// Builds the auxiliary function. Non-positive `tol` selects the default.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_build_aux(
    problem: *const NvProblem,
    decomposition: *const NvDecomposition,
    tol: f64,
    out: *mut *mut NvAux,
) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = &as_ref(problem, "problem")?.0;
        let k = &as_ref(decomposition, "decomposition")?.0;
        let tol = if tol > 0.0 {
            tol
        } else {
            nevanlinna::agler_solver::DEFAULT_TOL_SOLVE
        };
        let aux = build_aux_with(p, k, tol).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvAux(aux)));
        Ok(NvStatus::NvOk)
    })
}

/// # Safety
/// `aux` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_aux_free(aux: *mut NvAux) {
    if !aux.is_null() {
        drop(Box::from_raw(aux));
    }
}

/// Dimensions of the parameter spaces `M1`, `M2` and of the state space.
///
/// # Safety
/// `aux` must be a live handle; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nv_aux_dims(
    aux: *const NvAux,
    dim_m1: *mut usize,
    dim_m2: *mut usize,
    state_dim: *mut usize,
) -> NvStatus {
    guard(|| {
        let a = &as_ref(aux, "aux")?.0;
        for (dst, v) in [(dim_m1, a.dim_m1()), (dim_m2, a.dim_m2()), (state_dim, a.state_dim())] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(NvStatus::NvOk)
    })
}

/// Serializes the auxiliary function; free the string with [`nv_string_free`].
///
/// # Safety
/// `aux` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_aux_to_json(aux: *const NvAux, out: *mut *mut c_char) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = &as_ref(aux, "aux")?.0;
        let text = AuxFile::from_aux(a).to_json().map_err(fail)?;
        *out = CString::new(text)
            .map_err(|_| (NvStatus::NvInvalidInput, "interior NUL".to_string()))?
            .into_raw();
        Ok(NvStatus::NvOk)
    })
}

/// Loads an auxiliary function serialized by [`nv_aux_to_json`] or the CLI.
///
/// # Safety
/// `json` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_aux_from_json(json: *const c_char, out: *mut *mut NvAux) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let aux = AuxFile::parse(text).and_then(|f| f.to_aux()).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvAux(aux)));
        Ok(NvStatus::NvOk)
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluates the interpolant for the constant parameter `t` at the point `z`.
///
/// `z` holds `dimension` complex coordinates, `t` a `dim_m2 x dim_m1` matrix
/// (null means the zero parameter), and `out` receives the `d_out x d_in`
/// value.
///
/// # Safety
/// Handles must be live and buffers large enough for the stated shapes.
#[no_mangle]
pub unsafe extern "C" fn nv_interpolant_eval(
    problem: *const NvProblem,
    aux: *const NvAux,
    t: *const f64,
    z: *const f64,
    dimension: usize,
    out: *mut f64,
) -> NvStatus {
    guard(|| {
        let p = &as_ref(problem, "problem")?.0;
        let a = &as_ref(aux, "aux")?.0;
        let param = if t.is_null() {
            SchurParameter::zero(a)
        } else {
            let vals = read_complex(t, a.dim_m2() * a.dim_m1(), "t")?;
            let m = ComplexMatrix::from_row_slice(a.dim_m2(), a.dim_m1(), &vals);
            SchurParameter::constant(m).map_err(fail)?
        };
        let point = read_complex(z, dimension, "z")?;
        let e = p.family().evaluate(&point).map_err(fail)?;
        let value = param_eval(a, &param, &e).map_err(fail)?;
        write_matrix(&value, out)?;
        Ok(NvStatus::NvOk)
    })
}

/// Checks the interpolant for the constant parameter `t` (null for zero).
///
/// # Safety
/// Handles must be live, `t` sized `dim_m2 x dim_m1` if non-null, and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nv_verify(
    problem: *const NvProblem,
    aux: *const NvAux,
    t: *const f64,
    samples: usize,
    seed: u64,
    out: *mut NvVerification,
) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &as_ref(problem, "problem")?.0;
        let a = &as_ref(aux, "aux")?.0;
        let param = if t.is_null() {
            SchurParameter::zero(a)
        } else {
            let vals = read_complex(t, a.dim_m2() * a.dim_m1(), "t")?;
            SchurParameter::constant(ComplexMatrix::from_row_slice(a.dim_m2(), a.dim_m1(), &vals)).map_err(fail)?
        };
        let r = verify(p, a, &param, samples, seed).map_err(fail)?;
        *out = NvVerification {
            interp_residual: r.interp_residual,
            schur_norm_max: r.schur_norm_max,
            samples: r.samples,
            pass: r.pass as i32,
        };
        Ok(NvStatus::NvOk)
    })
}
