//! C ABI over `almost_rm`.
//!
//! Conventions:
//! * every function returns an [`AlmostRmStatus`]; results go through out-pointers;
//! * on failure, [`almost_rm_last_error`] returns a message for the calling thread;
//! * sets are passed as `(m, mask)` with element `i` at bit `i - 1`;
//! * handles come from `*_new`/`*_build` functions and are released with the
//!   matching `*_free`. Freeing `NULL` is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use almost_rm::channel::{bhattacharyya_exact, ChannelSpec};
use almost_rm::code::{build_code, CodeSpec, ZOracle};
use almost_rm::decoder::mc_block_error;
use almost_rm::orders::{compare_decoding, constructible, OrderRelation, SubsetMask};
use almost_rm::Error;

/// Status codes. `0` is success; the rest mirror the library's error kinds.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlmostRmStatus {
    Ok = 0,
    Size = 1,
    Dimension = 2,
    Domain = 3,
    Precondition = 4,
    Infeasible = 5,
    Parse = 6,
    Missing = 7,
    Io = 8,
    NullArgument = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
    /// The caller's buffer was too small; the required size was written.
    BufferTooSmall = 11,
}

/// Ranking used by [`almost_rm_code_build`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlmostRmOracle {
    /// Exact Bhattacharyya parameters on BSC(p); m <= 4.
    Exact = 0,
    /// Decoding-order rank; any m.
    Proxy = 1,
}

/// Monte Carlo block-error estimate with its Wilson 95% interval.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlmostRmSimResult {
    pub trials: u64,
    pub failures: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Opaque handle to a built code.
pub struct AlmostRmCode {
    spec: CodeSpec,
    /// Family in decoding order, for indexed access.
    sets: Vec<SubsetMask>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("no interior NUL"));
}

fn status_of(e: &Error) -> AlmostRmStatus {
    match e {
        Error::Size(_) => AlmostRmStatus::Size,
        Error::Dimension { .. } => AlmostRmStatus::Dimension,
        Error::Domain(_) => AlmostRmStatus::Domain,
        Error::Precondition(_) => AlmostRmStatus::Precondition,
        Error::Infeasible(_) => AlmostRmStatus::Infeasible,
        Error::Parse(_) => AlmostRmStatus::Parse,
        Error::Missing(_) => AlmostRmStatus::Missing,
        Error::Io(_) => AlmostRmStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Status(AlmostRmStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(AlmostRmStatus::NullArgument, format!("{what} is NULL"))
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlmostRmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            AlmostRmStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Err(_) => {
            set_last_error("internal panic");
            AlmostRmStatus::Internal
        }
    }
}

/// # Safety
/// `out` must be NULL or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the API contract, valid for a write of `T`.
    unsafe { out.write(value) };
    Ok(())
}

/// Message for the last failing call on this thread (empty after success).
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn almost_rm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Compares two sets in the decoding order: `-1` if `a` comes first, `0` if
/// equal, `1` if `a` comes later.
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_order_compare(m: u32, a: u64, b: u64, out: *mut i32) -> AlmostRmStatus {
    guard(|| {
        let rel = compare_decoding(&SubsetMask::new(m, a)?, &SubsetMask::new(m, b)?)?;
        let v = match rel {
            OrderRelation::Less => -1,
            OrderRelation::Equal => 0,
            _ => 1,
        };
        unsafe { write_out(out, v, "out") }
    })
}

/// Whether `b` can be constructed from `a` (`a ≪ b`).
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_constructible(m: u32, a: u64, b: u64, out: *mut bool) -> AlmostRmStatus {
    guard(|| {
        let v = constructible(&SubsetMask::new(m, a)?, &SubsetMask::new(m, b)?)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Exact Bhattacharyya parameter `Z_A` on BSC(p). `m <= 4`, or `m = 5` with
/// `allow_high_cost` (about 2^32 steps).
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_bhattacharyya(
    m: u32,
    a: u64,
    p: f64,
    allow_high_cost: bool,
    out: *mut f64,
) -> AlmostRmStatus {
    guard(|| {
        let z = bhattacharyya_exact(SubsetMask::new(m, a)?, ChannelSpec::new(p)?, allow_high_cost)?;
        unsafe { write_out(out, z, "out") }
    })
}

fn into_handle(spec: CodeSpec) -> *mut AlmostRmCode {
    let sets = spec.family.iter().copied().collect();
    Box::into_raw(Box::new(AlmostRmCode { spec, sets }))
}

/// # Safety
/// `code` must be NULL or a live handle from this library.
unsafe fn code_ref<'a>(code: *const AlmostRmCode) -> Result<&'a AlmostRmCode, Failure> {
    // SAFETY: a non-null handle was produced by `into_handle` and not yet freed.
    unsafe { code.as_ref() }.ok_or_else(|| null("code"))
}

/// Builds `RM(m, r, δ)`. `p` is only read for [`AlmostRmOracle::Exact`].
/// On success `*out` owns a handle to release with [`almost_rm_code_free`].
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_build(
    m: u32,
    r: u32,
    delta: f64,
    oracle: AlmostRmOracle,
    p: f64,
    out: *mut *mut AlmostRmCode,
) -> AlmostRmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let oracle = match oracle {
            AlmostRmOracle::Exact => ZOracle::Exact { channel: ChannelSpec::new(p)?, allow_high_cost: false },
            AlmostRmOracle::Proxy => ZOracle::Proxy,
        };
        let spec = build_code(m, r, delta, &oracle)?;
        unsafe { write_out(out, into_handle(spec), "out") }
    })
}

/// Parses a code from its text format.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_from_text(text: *const c_char, out: *mut *mut AlmostRmCode) -> AlmostRmStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let s = unsafe { CStr::from_ptr(text) }.to_str().map_err(|e| Failure::Lib(Error::Parse(e.to_string())))?;
        let spec = CodeSpec::from_text(s)?;
        unsafe { write_out(out, into_handle(spec), "out") }
    })
}

/// Writes the text format into `buf` (NUL-terminated) when `cap` is large
/// enough. `*needed` always receives the required size including the NUL.
///
/// # Safety
/// `buf` must be valid for `cap` bytes (or NULL when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_to_text(
    code: *const AlmostRmCode,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> AlmostRmStatus {
    guard(|| {
        let text = code_ref(code)?.spec.to_text();
        let len = text.len() + 1;
        unsafe { write_out(needed, len, "needed") }?;
        if cap < len || buf.is_null() {
            return Err(Failure::Status(AlmostRmStatus::BufferTooSmall, format!("need {len} bytes, got {cap}")));
        }
        // SAFETY: `buf` holds at least `len` bytes.
        unsafe {
            ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
            *buf.add(text.len()) = 0;
        }
        Ok(())
    })
}

/// Releases a code handle.
///
/// # Safety
/// `code` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_free(code: *mut AlmostRmCode) {
    if !code.is_null() {
        // SAFETY: produced by `Box::into_raw` in `into_handle`.
        drop(unsafe { Box::from_raw(code) });
    }
}

/// Number of information sets `|𝒜|`.
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_len(code: *const AlmostRmCode, out: *mut usize) -> AlmostRmStatus {
    guard(|| unsafe { write_out(out, code_ref(code)?.sets.len(), "out") })
}

/// The `index`-th information set in decoding order, as a mask.
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_set_at(
    code: *const AlmostRmCode,
    index: usize,
    out: *mut u64,
) -> AlmostRmStatus {
    guard(|| {
        let code = code_ref(code)?;
        let set = code
            .sets
            .get(index)
            .ok_or_else(|| Failure::Lib(Error::Domain(format!("index {index} out of range 0..{}", code.sets.len()))))?;
        unsafe { write_out(out, set.mask(), "out") }
    })
}

/// Rate `|𝒜| / 2^m`.
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_code_rate(code: *const AlmostRmCode, out: *mut f64) -> AlmostRmStatus {
    guard(|| unsafe { write_out(out, code_ref(code)?.spec.rate(), "out") })
}

/// Seeded Monte Carlo block error under successive decoding (m <= 4).
///
/// # Safety
/// Pointer arguments must be NULL or valid for the accesses described.
#[no_mangle]
pub unsafe extern "C" fn almost_rm_simulate(
    code: *const AlmostRmCode,
    p: f64,
    trials: u64,
    seed: u64,
    out: *mut AlmostRmSimResult,
) -> AlmostRmStatus {
    guard(|| {
        let rep = mc_block_error(&code_ref(code)?.spec, ChannelSpec::new(p)?, trials, seed)?;
        let res = AlmostRmSimResult {
            trials: rep.trials,
            failures: rep.failures,
            estimate: rep.estimate,
            ci_low: rep.ci_low,
            ci_high: rep.ci_high,
        };
        unsafe { write_out(out, res, "out") }
    })
}
