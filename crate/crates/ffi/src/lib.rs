//! C ABI for `ratiolim`.
//!
//! Conventions:
//! - Every fallible function returns an [`RlStatus`] and writes its result
//!   through an out-pointer. On failure the out-pointer is left untouched
//!   and [`rl_last_error`] describes the problem.
//! - Tables and root sets are opaque handles released with their `_free`
//!   function. Strings returned through out-pointers are owned by the
//!   caller and released with [`rl_string_free`].
//! - Panics never cross the boundary; they surface as `RL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ratiolim::asymptotics::{solve_binomial_indicial, solve_tail_indicial, RootSet};
use ratiolim::coefficients::{compute_table, schroder_residual, RatioTable, Route};
use ratiolim::scalar::{format_sci, parse_real};
use ratiolim::{Error, KernelSpec, PrecisionContext};

/// Result of a call across the C ABI.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed kernel, route, number or precision.
    InvalidInput = 3,
    /// The request is well formed but mathematically inapplicable.
    Inapplicable = 4,
    /// An iteration or root solve failed to converge.
    Numeric = 5,
    /// An index or size argument is out of range.
    OutOfRange = 6,
    /// An internal panic was caught.
    Panic = 7,
}

/// Opaque table of ratio coefficients `phi_1..phi_N`.
pub struct RlRatioTable {
    table: RatioTable,
}

/// Opaque set of indicial roots.
pub struct RlRootSet {
    roots: RootSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RlStatus {
    match err.exit_code() {
        1 => RlStatus::InvalidInput,
        2 => RlStatus::Inapplicable,
        _ => RlStatus::Numeric,
    }
}

struct Failure(RlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            RlStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees non-null pointers are valid handles.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(RlStatus::NullPointer, format!("`{name}` is null")))
}

fn out_ptr<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(Failure(RlStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(p)
    }
}

fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RlStatus::NullPointer, format!("`{name}` is null")));
    }
    // SAFETY: the caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(RlStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn context(digits: u32) -> Result<PrecisionContext, Failure> {
    Ok(PrecisionContext::new(digits)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Computes `phi_1..phi_n` for `kernel` at `digits` significant digits.
///
/// `route` is one of `closed`, `product`, `recurrence`, `fixedpoint`, or
/// null for automatic selection.
///
/// # Safety
/// `kernel` must be a NUL-terminated string, `route` null or one, and
/// `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rl_table_compute(
    kernel: *const c_char,
    route: *const c_char,
    n: usize,
    digits: u32,
    out: *mut *mut RlRatioTable,
) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ctx = context(digits)?;
        let kernel = KernelSpec::parse(read_str(kernel, "kernel")?, ctx.bits())?;
        let route = if route.is_null() {
            None
        } else {
            Some(read_str(route, "route")?.parse::<Route>()?)
        };
        if n == 0 {
            return Err(Failure(RlStatus::OutOfRange, "n must be at least 1".into()));
        }
        let table = compute_table(&kernel, route, n, &ctx)?;
        *out = Box::into_raw(Box::new(RlRatioTable { table }));
        Ok(())
    })
}

/// Number of coefficients in the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_table_len(table: *const RlRatioTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.len())
}

/// The table behind `table`, after checking that `n` is a valid index.
fn indexed<'a>(table: *const RlRatioTable, n: usize) -> Result<&'a RatioTable, Failure> {
    let t = &non_null(table, "table")?.table;
    if n == 0 || n > t.len() {
        return Err(Failure(RlStatus::OutOfRange, format!("index {n} outside 1..={}", t.len())));
    }
    Ok(t)
}

/// `phi_n` rounded to double precision; `n` is 1-based.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rl_table_get(table: *const RlRatioTable, n: usize, out: *mut f64) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = indexed(table, n)?.phi(n).to_f64();
        Ok(())
    })
}

/// `phi_n` in scientific notation with `digits` significant figures.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes. The string
/// written to `out` must be released with [`rl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rl_table_get_string(
    table: *const RlRatioTable,
    n: usize,
    digits: u32,
    out: *mut *mut c_char,
) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = to_c_string(format_sci(indexed(table, n)?.phi(n), digits as usize));
        Ok(())
    })
}

/// The whole table as CSV with header `n,phi,route,digits`.
///
/// # Safety
/// As for [`rl_table_get_string`].
#[no_mangle]
pub unsafe extern "C" fn rl_table_to_csv(table: *const RlRatioTable, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = to_c_string(non_null(table, "table")?.table.to_csv());
        Ok(())
    })
}

/// Largest relative defect of the table under the Schröder operator.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rl_table_schroder_residual(table: *const RlRatioTable, out: *mut f64) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = &non_null(table, "table")?.table;
        let ctx = context(t.digits)?;
        *out = schroder_residual(&t.kernel, t, &ctx)?.to_f64();
        Ok(())
    })
}

/// Releases a table. Null is ignored.
///
/// # Safety
/// `table` must be null or a handle from [`rl_table_compute`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_table_free(table: *mut RlRatioTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Roots of `(m+1)^alpha - 1 = m alpha / (m+1)`: the real roots `-1` and
/// `0` plus the first `count` conjugate pairs with positive real part.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rl_roots_binomial(m: u32, count: usize, digits: u32, out: *mut *mut RlRootSet) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ctx = context(digits)?;
        let roots = solve_binomial_indicial(m, count, &ctx)?;
        *out = Box::into_raw(Box::new(RlRootSet { roots }));
        Ok(())
    })
}

/// Roots of `(1+a)^(alpha+1) + (1+alpha) e^(-a) = 0`: the real root plus
/// the first `count` conjugate pairs. `a` is a decimal or rational string
/// such as `"2"` or `"3/2"`.
///
/// # Safety
/// `a` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rl_roots_tail(
    a: *const c_char,
    count: usize,
    digits: u32,
    out: *mut *mut RlRootSet,
) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ctx = context(digits)?;
        let a = parse_real(read_str(a, "a")?, ctx.bits())?;
        let roots = solve_tail_indicial(&a, count, &ctx)?;
        *out = Box::into_raw(Box::new(RlRootSet { roots }));
        Ok(())
    })
}

/// Number of roots in the set, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_roots_len(set: *const RlRootSet) -> usize {
    set.as_ref().map_or(0, |s| s.roots.roots.len())
}

/// Root `i` (0-based, sorted by real then imaginary part) in double precision.
///
/// # Safety
/// `set` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rl_roots_get(set: *const RlRootSet, i: usize, re: *mut f64, im: *mut f64) -> RlStatus {
    guard(|| {
        let re = out_ptr(re, "re")?;
        let im = out_ptr(im, "im")?;
        let s = &non_null(set, "set")?.roots;
        let z = s.roots.get(i).ok_or_else(|| {
            Failure(RlStatus::OutOfRange, format!("index {i} outside 0..{}", s.roots.len()))
        })?;
        *re = z.re.to_f64();
        *im = z.im.to_f64();
        Ok(())
    })
}

/// The root set as CSV with header `re,im,residual`.
///
/// # Safety
/// `set` must be a live handle and `out` valid for writes. The string must
/// be released with [`rl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rl_roots_to_csv(set: *const RlRootSet, digits: u32, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = to_c_string(non_null(set, "set")?.roots.to_csv(digits as usize));
        Ok(())
    })
}

/// Releases a root set. Null is ignored.
///
/// # Safety
/// `set` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_roots_free(set: *mut RlRootSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
