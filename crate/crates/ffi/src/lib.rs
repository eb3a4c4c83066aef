//! C interface to `contention-core`.
//!
//! Every fallible function returns a [`CtnStatus`] and writes its result
//! through an out-pointer. On failure a description is kept per thread and
//! can be read with [`ctn_last_error_message`]. Codebooks are opaque handles
//! created by [`ctn_codebook_build`] and released with [`ctn_codebook_free`].
//! Panics never cross the boundary; they surface as `CTN_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use contention_core::channel::ChannelModel;
use contention_core::sim::{run_batch, BatchConfig};
use contention_core::strategy::StrategyKind;
use contention_core::{
    optimal_threshold, region_mass, success_prob, Codebook, CodebookBuilder, Error, Region,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The index or pair is outside what the codebook enumerated.
    NotFound = 3,
    Incompatible = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque codebook handle.
pub struct CtnCodebook {
    inner: Codebook,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CtnEntry {
    pub threshold: f64,
    pub probability: f64,
    /// Minislots to reach this entry, including the final success.
    pub depth: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CtnBatchStats {
    pub slots: u64,
    pub resolved: u64,
    pub mean_delay_conditional: f64,
    pub mean_delay_charged: f64,
    pub delay_std_error: f64,
    pub success_rate: f64,
    pub empirical_entropy_bits: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CtnStatus {
    match e {
        Error::UnresolvedAtCutoff { .. } => CtnStatus::NotFound,
        Error::Incompatible { .. } => CtnStatus::Incompatible,
        Error::Io { .. } | Error::Export { .. } => CtnStatus::Io,
        _ => CtnStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (CtnStatus, String)>) -> CtnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CtnStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside contention-ffi");
            CtnStatus::Panic
        }
    }
}

fn core<T>(r: contention_core::Result<T>) -> Result<T, (CtnStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (CtnStatus, String) {
    (CtnStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, name: &str, value: T) -> Result<(), (CtnStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `cb` is null or a live handle from [`ctn_codebook_build`].
unsafe fn handle<'a>(cb: *const CtnCodebook) -> Result<&'a Codebook, (CtnStatus, String)> {
    cb.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| null("codebook"))
}

/// # Safety
/// `s` is null or a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, name: &str) -> Result<&'a str, (CtnStatus, String)> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (CtnStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ctn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Description of the last failure on this thread, empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn ctn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build the MPA codebook for `n_users` with enumeration cutoff `epsilon`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_build(
    n_users: u32,
    epsilon: f64,
    out: *mut *mut CtnCodebook,
) -> CtnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = core(CodebookBuilder::new(n_users).epsilon(epsilon).build())?;
        out.write(Box::into_raw(Box::new(CtnCodebook { inner })));
        Ok(())
    })
}

/// Release a codebook. Null is ignored.
///
/// # Safety
/// `cb` is null or a handle from [`ctn_codebook_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_free(cb: *mut CtnCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_len(cb: *const CtnCodebook, out: *mut usize) -> CtnStatus {
    guard(|| write(out, "out", handle(cb)?.entries().len()))
}

/// Entry `index` in order of decreasing probability.
///
/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_entry(
    cb: *const CtnCodebook,
    index: usize,
    out: *mut CtnEntry,
) -> CtnStatus {
    guard(|| {
        let cb = handle(cb)?;
        let e = cb
            .entries()
            .get(index)
            .ok_or_else(|| (CtnStatus::NotFound, format!("no entry {index}")))?;
        write(
            out,
            "out",
            CtnEntry {
                threshold: e.threshold,
                probability: e.probability,
                depth: e.depth,
            },
        )
    })
}

/// Copy entry `index`'s codeword (`0`, `e`, terminal `1`) into `buf` with a
/// trailing NUL. `needed`, if not null, receives the size including the NUL;
/// a short buffer yields `CTN_STATUS_BUFFER_TOO_SMALL` and is left untouched.
///
/// # Safety
/// `cb` is a live handle; `buf` is valid for `len` bytes or null with `len`
/// zero; `needed` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_codeword(
    cb: *const CtnCodebook,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CtnStatus {
    guard(|| {
        let cb = handle(cb)?;
        let word = cb
            .entries()
            .get(index)
            .ok_or_else(|| (CtnStatus::NotFound, format!("no entry {index}")))?
            .codeword
            .to_string();
        let size = word.len() + 1;
        if !needed.is_null() {
            needed.write(size);
        }
        if buf.is_null() || len < size {
            return Err((
                CtnStatus::BufferTooSmall,
                format!("codeword needs {size} bytes, buffer has {len}"),
            ));
        }
        ptr::copy_nonoverlapping(word.as_ptr().cast::<c_char>(), buf, word.len());
        buf.add(word.len()).write(0);
        Ok(())
    })
}

/// Entropy estimate in bits, including the analytically closed tail.
///
/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_entropy(cb: *const CtnCodebook, out: *mut f64) -> CtnStatus {
    guard(|| write(out, "out", handle(cb)?.entropy().estimate_bits))
}

/// Expected delay estimate in minislots.
///
/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_expected_delay(
    cb: *const CtnCodebook,
    out: *mut f64,
) -> CtnStatus {
    guard(|| write(out, "out", handle(cb)?.expected_delay().estimate))
}

/// Probability mass left unenumerated.
///
/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_residual_mass(
    cb: *const CtnCodebook,
    out: *mut f64,
) -> CtnStatus {
    guard(|| write(out, "out", handle(cb)?.residual_mass()))
}

/// Index of the entry resolving the top two gains `(y_second, y_max)`.
///
/// # Safety
/// `cb` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_codebook_resolve(
    cb: *const CtnCodebook,
    y_second: f64,
    y_max: f64,
    out: *mut usize,
) -> CtnStatus {
    guard(|| {
        let cb = handle(cb)?;
        let entry = core(cb.resolve(y_second, y_max))?;
        let index = cb
            .entries()
            .iter()
            .position(|e| ptr::eq(e, entry))
            .expect("resolve returns an entry of this codebook");
        write(out, "out", index)
    })
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_optimal_threshold(
    a: f64,
    b: f64,
    n_users: u32,
    out: *mut f64,
) -> CtnStatus {
    guard(|| {
        let r = core(Region::new(a, b, n_users))?;
        write(out, "out", optimal_threshold(&r))
    })
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_success_prob(
    a: f64,
    b: f64,
    n_users: u32,
    y: f64,
    out: *mut f64,
) -> CtnStatus {
    guard(|| {
        let r = core(Region::new(a, b, n_users))?;
        write(out, "out", core(success_prob(&r, y))?)
    })
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_region_mass(a: f64, b: f64, n_users: u32, out: *mut f64) -> CtnStatus {
    guard(|| {
        let r = core(Region::new(a, b, n_users))?;
        write(out, "out", region_mass(&r))
    })
}

/// Simulate `slots` slots. `channel` is `iid`, `constant`, `correlated[:eps]`
/// or `chain:<k>[:eps]`; `strategy` is `osa`, `mpa`, `two-sided`,
/// `discrete-mpa` or `discrete-bisect`.
///
/// # Safety
/// `channel` and `strategy` are NUL-terminated strings; `out` is valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ctn_simulate(
    channel: *const c_char,
    n_users: usize,
    strategy: *const c_char,
    slots: u64,
    max_minislots: usize,
    seed: u64,
    out: *mut CtnBatchStats,
) -> CtnStatus {
    guard(|| {
        let ch = core(ChannelModel::parse(text(channel, "channel")?, n_users))?;
        let kind: StrategyKind = core(text(strategy, "strategy")?.parse())?;
        if slots == 0 {
            return Err((CtnStatus::InvalidArgument, "slots must be positive".into()));
        }
        let s = core(run_batch(
            &ch,
            kind,
            BatchConfig::new(slots, max_minislots, seed),
        ))?;
        write(
            out,
            "out",
            CtnBatchStats {
                slots: s.slots,
                resolved: s.resolved,
                mean_delay_conditional: s.mean_delay_conditional,
                mean_delay_charged: s.mean_delay_charged,
                delay_std_error: s.delay_std_error,
                success_rate: s.success_rate,
                empirical_entropy_bits: s.empirical_codeword_entropy,
            },
        )
    })
}
