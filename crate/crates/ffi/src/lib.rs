//! C ABI for `equi-szego`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible function returns an `EsStatus`; on failure the message is
//! kept per thread and can be copied out with `es_last_error_message`.
//! Points are passed as `2(n+1)` doubles `[Re z₀, Im z₀, …]` and are
//! normalized on entry. Weight matrices are row-major, `d × (n+1)`.

use equi_szego::actions::{example_p1, example_p2, WeightSystem};
use equi_szego::asymptotics::diagonal_leading;
use equi_szego::geometry::{frame_at, SpherePoint};
use equi_szego::hardy::{build_basis, IsotypeBasis};
use equi_szego::kernel::{szego_diag, szego_eval};
use equi_szego::{Error, C64};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A mathematical hypothesis failed (e.g. point off the locus).
    AssumptionViolated = 3,
    Failure = 4,
    Panic = 5,
}

/// Opaque weight system `(n, W_G, W_T)`.
pub struct EsWeightSystem(WeightSystem);

/// Opaque isotype basis of `H(X)_{ν_G, kν_T}`.
pub struct EsBasis(IsotypeBasis);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EsStatus {
    if e.is_assumption_violation() {
        EsStatus::AssumptionViolated
    } else {
        match e {
            Error::Dimension { .. } | Error::NotUnit { .. } | Error::InvalidArgument(_) | Error::Config(_) => {
                EsStatus::InvalidArgument
            }
            _ => EsStatus::Failure,
        }
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (EsStatus, String)>>(f: F) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {m}"));
            EsStatus::Panic
        }
    }
}

fn lib<T>(r: equi_szego::Result<T>) -> Result<T, (EsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EsStatus, String) {
    (EsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (EsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix(p: *const i64, rows: usize, cols: usize, what: &str) -> Result<Vec<Vec<i64>>, (EsStatus, String)> {
    let flat = slice(p, rows * cols, what)?;
    Ok(flat.chunks(cols.max(1)).map(|c| c.to_vec()).collect())
}

unsafe fn point(z: *const f64, n: usize) -> Result<SpherePoint, (EsStatus, String)> {
    let raw = slice(z, 2 * (n + 1), "point")?;
    let c: Vec<C64> = raw.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    lib(SpherePoint::normalized(c))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (EsStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn es_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a weight system. `w_g` is `d_g × (n+1)` (may be null when
/// `d_g = 0`), `w_t` is `d_t × (n+1)`.
///
/// # Safety
/// Pointers must be valid for the stated sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_weight_system_new(
    n: usize,
    w_g: *const i64,
    d_g: usize,
    w_t: *const i64,
    d_t: usize,
    out: *mut *mut EsWeightSystem,
) -> EsStatus {
    guard(|| {
        let g = matrix(w_g, d_g, n + 1, "w_g")?;
        let t = matrix(w_t, d_t, n + 1, "w_t")?;
        let ws = lib(WeightSystem::new(n, g, t))?;
        write(out, Box::into_raw(Box::new(EsWeightSystem(ws))), "out")
    })
}

/// The worked example on ℙ¹ (`which = 1`) or ℙ² (`which = 2`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_weight_system_example(which: u32, out: *mut *mut EsWeightSystem) -> EsStatus {
    guard(|| {
        let ws = match which {
            1 => example_p1(),
            2 => example_p2(),
            _ => return Err((EsStatus::InvalidArgument, format!("unknown example {which}"))),
        };
        write(out, Box::into_raw(Box::new(EsWeightSystem(ws))), "out")
    })
}

/// # Safety
/// `ws` must come from `es_weight_system_new`/`_example` or be null.
#[no_mangle]
pub unsafe extern "C" fn es_weight_system_free(ws: *mut EsWeightSystem) {
    if !ws.is_null() {
        drop(Box::from_raw(ws));
    }
}

/// `n` of the weight system.
///
/// # Safety
/// `ws` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_weight_system_n(ws: *const EsWeightSystem, out: *mut usize) -> EsStatus {
    guard(|| write(out, handle(ws, "ws")?.0.n(), "out"))
}

/// Builds the orthonormal monomial basis of the `(ν_G, kν_T)` isotype.
///
/// # Safety
/// `nu_g`/`nu_t` must hold `d_g`/`d_t` entries of the weight system.
#[no_mangle]
pub unsafe extern "C" fn es_basis_new(
    ws: *const EsWeightSystem,
    nu_g: *const i64,
    d_g: usize,
    nu_t: *const i64,
    d_t: usize,
    k: u64,
    out: *mut *mut EsBasis,
) -> EsStatus {
    guard(|| {
        let ws = &handle(ws, "ws")?.0;
        let b = lib(build_basis(ws, slice(nu_g, d_g, "nu_g")?, slice(nu_t, d_t, "nu_t")?, k))?;
        write(out, Box::into_raw(Box::new(EsBasis(b))), "out")
    })
}

/// # Safety
/// `b` must come from `es_basis_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn es_basis_free(b: *mut EsBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_basis_dim(b: *const EsBasis, out: *mut usize) -> EsStatus {
    guard(|| write(out, handle(b, "basis")?.0.dim(), "out"))
}

/// `Π̃(x, x)`.
///
/// # Safety
/// `x` must hold `2(n+1)` doubles.
#[no_mangle]
pub unsafe extern "C" fn es_szego_diag(b: *const EsBasis, x: *const f64, out: *mut f64) -> EsStatus {
    guard(|| {
        let b = &handle(b, "basis")?.0;
        let p = point(x, b.n())?;
        write(out, szego_diag(b, &p), "out")
    })
}

/// `Π̃(x, y)` as `(re, im)`.
///
/// # Safety
/// `x`, `y` must hold `2(n+1)` doubles each.
#[no_mangle]
pub unsafe extern "C" fn es_szego_eval(
    b: *const EsBasis,
    x: *const f64,
    y: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EsStatus {
    guard(|| {
        let b = &handle(b, "basis")?.0;
        let v = szego_eval(b, &point(x, b.n())?, &point(y, b.n())?);
        write(out_re, v.re, "out_re")?;
        write(out_im, v.im, "out_im")
    })
}

/// Predicted leading term of `Π̃(x, x)` at a locus point, including the
/// stabilizer factor.
///
/// # Safety
/// Sizes as in `es_basis_new`; `x` must hold `2(n+1)` doubles.
#[no_mangle]
pub unsafe extern "C" fn es_diagonal_leading(
    ws: *const EsWeightSystem,
    x: *const f64,
    nu_g: *const i64,
    d_g: usize,
    nu_t: *const i64,
    d_t: usize,
    k: u64,
    out: *mut f64,
) -> EsStatus {
    guard(|| {
        let ws = &handle(ws, "ws")?.0;
        let f = frame_at(&point(x, ws.n())?);
        let lt = lib(diagonal_leading(ws, &f, slice(nu_g, d_g, "nu_g")?, slice(nu_t, d_t, "nu_t")?, k))?;
        write(out, lt.value().re, "out")
    })
}

/// Order of the stabilizer of `x` in `G × T`.
///
/// # Safety
/// `x` must hold `2(n+1)` doubles.
#[no_mangle]
pub unsafe extern "C" fn es_stabilizer_order(ws: *const EsWeightSystem, x: *const f64, out: *mut usize) -> EsStatus {
    guard(|| {
        let ws = &handle(ws, "ws")?.0;
        let s = lib(ws.stabilizer(&point(x, ws.n())?))?;
        write(out, s.len(), "out")
    })
}

/// Distance from `x` to the locus `X_{0,ν_T}`.
///
/// # Safety
/// `x` must hold `2(n+1)` doubles; `nu_t` `d_t` entries.
#[no_mangle]
pub unsafe extern "C" fn es_locus_distance(
    ws: *const EsWeightSystem,
    x: *const f64,
    nu_t: *const i64,
    d_t: usize,
    out: *mut f64,
) -> EsStatus {
    guard(|| {
        let ws = &handle(ws, "ws")?.0;
        let d = lib(ws.locus_distance(&point(x, ws.n())?, slice(nu_t, d_t, "nu_t")?))?;
        write(out, d, "out")
    })
}
