//! C ABI for `funkvol`.
//!
//! Polytopes live behind an opaque `FunkvolPolytope` handle. Every fallible
//! call returns a `FunkvolStatus`; on failure the message is kept per thread
//! and can be read with `funkvol_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use funkvol::error::Stage;
use nalgebra::DVector;
use funkvol::{asymptotics, families, funk, santalo, Error, Polytope};

/// Opaque polytope handle.
pub struct FunkvolPolytope {
    inner: Polytope,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunkvolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Quadrature = 4,
    Optimization = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> FunkvolStatus {
    match err.stage() {
        Stage::Parse => FunkvolStatus::InvalidArgument,
        Stage::Geometry => FunkvolStatus::Geometry,
        Stage::Quadrature => FunkvolStatus::Quadrature,
        Stage::Optimization => FunkvolStatus::Optimization,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FunkvolStatus>) -> FunkvolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FunkvolStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FunkvolStatus::Panic
        }
    }
}

fn lib<T>(r: funkvol::Result<T>) -> Result<T, FunkvolStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> FunkvolStatus {
    set_error(format!("null pointer: {what}"));
    FunkvolStatus::NullPointer
}

unsafe fn handle<'a>(p: *const FunkvolPolytope) -> Result<&'a Polytope, FunkvolStatus> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("polytope"))
}

unsafe fn point(p: &Polytope, x: *const f64) -> DVector<f64> {
    if x.is_null() {
        DVector::zeros(p.dim())
    } else {
        DVector::from_column_slice(std::slice::from_raw_parts(x, p.dim()))
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), FunkvolStatus> {
    if out.is_null() {
        return Err(null("output"));
    }
    out.write(value);
    Ok(())
}

/// Builds the convex hull of `num_vertices` points of dimension `dim`,
/// stored row by row in `coords`.
///
/// # Safety
/// `coords` must point to `num_vertices * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_polytope_new(
    coords: *const f64,
    num_vertices: usize,
    dim: usize,
    out: *mut *mut FunkvolPolytope,
) -> FunkvolStatus {
    guard(|| {
        if coords.is_null() || out.is_null() {
            return Err(null("coords or out"));
        }
        if num_vertices == 0 || dim == 0 {
            set_error("polytope needs at least one vertex and dimension".into());
            return Err(FunkvolStatus::InvalidArgument);
        }
        let flat = std::slice::from_raw_parts(coords, num_vertices * dim);
        let pts: Vec<DVector<f64>> = flat.chunks(dim).map(DVector::from_column_slice).collect();
        let inner = lib(Polytope::from_vertices(&pts))?;
        out.write(Box::into_raw(Box::new(FunkvolPolytope { inner })));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `funkvol_polytope_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn funkvol_polytope_free(p: *mut FunkvolPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn funkvol_polytope_dim(p: *const FunkvolPolytope) -> usize {
    p.as_ref().map_or(0, |h| h.inner.dim())
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn funkvol_polytope_num_vertices(p: *const FunkvolPolytope) -> usize {
    p.as_ref().map_or(0, |h| h.inner.vertices().len())
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn funkvol_polytope_num_flags(p: *const FunkvolPolytope) -> usize {
    p.as_ref().map_or(0, |h| h.inner.num_flags())
}

/// Holmes–Thompson volume of the Funk ball of radius `r` about `center`
/// (null means the origin). `tol <= 0` selects the default for the dimension.
/// `abs_error` may be null.
///
/// # Safety
/// `p` must be live, `center` null or of length `dim`, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_ball_volume(
    p: *const FunkvolPolytope,
    center: *const f64,
    r: f64,
    tol: f64,
    value: *mut f64,
    abs_error: *mut f64,
) -> FunkvolStatus {
    guard(|| {
        let p = handle(p)?;
        let x = point(p, center);
        let tol = if tol > 0.0 { tol } else { funk::default_tolerance(p.dim()) };
        let est = lib(funk::ball_volume(p, &x, r, tol))?;
        write(value, est.value)?;
        if !abs_error.is_null() {
            abs_error.write(est.abs_error_estimate);
        }
        Ok(())
    })
}

/// Leading coefficient `c0 = |flags| / (n!)^2`.
///
/// # Safety
/// `p` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_c0(p: *const FunkvolPolytope, out: *mut f64) -> FunkvolStatus {
    guard(|| write(out, asymptotics::c0(handle(p)?)))
}

/// Second coefficient for balls about the origin.
///
/// # Safety
/// `p` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_c1(p: *const FunkvolPolytope, out: *mut f64) -> FunkvolStatus {
    guard(|| {
        let c = lib(asymptotics::c1_flip(handle(p)?))?;
        write(out, c.c1)
    })
}

/// Second coefficient for balls about `x`.
///
/// # Safety
/// `p` must be live, `x` of length `dim`, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_c1_at_point(p: *const FunkvolPolytope, x: *const f64, out: *mut f64) -> FunkvolStatus {
    guard(|| {
        let p = handle(p)?;
        if x.is_null() {
            return Err(null("x"));
        }
        write(out, lib(asymptotics::c1_at_point(p, &point(p, x)))?)
    })
}

/// Limit Funk–Santaló point, written to `point_out` (length `dim`).
/// `residual` may be null.
///
/// # Safety
/// `p` must be live and `point_out` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn funkvol_santalo_infinity(
    p: *const FunkvolPolytope,
    tol: f64,
    point_out: *mut f64,
    residual: *mut f64,
) -> FunkvolStatus {
    guard(|| {
        let p = handle(p)?;
        if point_out.is_null() {
            return Err(null("point_out"));
        }
        let s = lib(santalo::santalo_infinity(p, if tol > 0.0 { tol } else { 1e-8 }))?;
        ptr::copy_nonoverlapping(s.point.as_ptr(), point_out, s.point.len());
        if !residual.is_null() {
            residual.write(s.residual);
        }
        Ok(())
    })
}

/// Closed-form ball volume shared by all `n`-dimensional Hanner polytopes;
/// NaN for `n == 0` or `r <= 0`.
#[no_mangle]
pub extern "C" fn funkvol_hanner_ball_volume(n: usize, r: f64) -> f64 {
    if n == 0 || !(r > 0.0) {
        return f64::NAN;
    }
    families::hanner_ball_volume(n, r)
}

/// Holmes–Thompson volume of a radius-`r` ball about the barycenter of an
/// `n`-simplex, from the dimension recursion.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn funkvol_simplex_volume(n: usize, r: f64, tol: f64, out: *mut f64) -> FunkvolStatus {
    guard(|| {
        if n == 0 || !(r > 0.0) || !(tol > 0.0) {
            set_error(format!("invalid simplex arguments n={n}, r={r}, tol={tol}"));
            return Err(FunkvolStatus::InvalidArgument);
        }
        let v = lib(families::simplex_volume_ode(n, r, tol))?;
        write(out, funkvol::scaled_to_ht(v, n))
    })
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length;
/// a null `buf` only queries it.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn funkvol_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        msg.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn funkvol_status_string(status: FunkvolStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FunkvolStatus::Ok => c"ok",
        FunkvolStatus::NullPointer => c"null pointer",
        FunkvolStatus::InvalidArgument => c"invalid argument",
        FunkvolStatus::Geometry => c"geometry error",
        FunkvolStatus::Quadrature => c"quadrature tolerance not reached",
        FunkvolStatus::Optimization => c"optimization did not converge",
        FunkvolStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
