//! C ABI for the `traster` library.
//!
//! Every fallible function returns a [`TrasterStatus`]; on failure a
//! message is available from [`traster_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! No function retains a caller-supplied pointer past its return.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use traster::dataio;
use traster::{Cell, Error, Raster, SnapshotPolicy, TK2Raster, Window};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrasterStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Format = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A compressed raster time series.
pub struct TrasterSeries(TK2Raster);

/// Result of a window query.
pub struct TrasterCells(Vec<TrasterCell>);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrasterCell {
    pub row: usize,
    pub col: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut v = e.into_vec();
        v.retain(|&b| b != 0);
        CString::new(v).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TrasterStatus {
    match e {
        Error::IndexOutOfRange { .. } => TrasterStatus::OutOfRange,
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => TrasterStatus::InvalidArgument,
        Error::BadMagic { .. }
        | Error::UnsupportedVersion(_)
        | Error::Truncated { .. }
        | Error::DimensionOverflow(_)
        | Error::CorruptBlockTable(_)
        | Error::Format(_) => TrasterStatus::Format,
        Error::Io(_) => TrasterStatus::Io,
    }
}

struct Fail(TrasterStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TrasterStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TrasterStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TrasterStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TrasterStatus::Panic
        }
    }
}

unsafe fn series_ref<'a>(s: *const TrasterSeries) -> Result<&'a TK2Raster, Fail> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("series"))
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail(TrasterStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn frames_from(values: *const i32, tau: usize, rows: usize, cols: usize) -> Result<Vec<Raster>, Fail> {
    if values.is_null() {
        return Err(null("values"));
    }
    let n = tau
        .checked_mul(rows)
        .and_then(|x| x.checked_mul(cols))
        .ok_or_else(|| Fail(TrasterStatus::InvalidArgument, "dimensions overflow".into()))?;
    if n == 0 {
        return Err(Fail(TrasterStatus::InvalidArgument, "empty series".into()));
    }
    let data = std::slice::from_raw_parts(values, n);
    data.chunks_exact(rows * cols)
        .map(|f| Raster::new(rows, cols, f.to_vec()).map_err(Fail::from))
        .collect()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn traster_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn traster_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds from `tau * rows * cols` values, frame-major then row-major,
/// with a snapshot every `t_delta` instants.
///
/// # Safety
/// `values` must point to `tau * rows * cols` readable values and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn traster_build(
    values: *const i32,
    tau: usize,
    rows: usize,
    cols: usize,
    k: usize,
    t_delta: usize,
    out: *mut *mut TrasterSeries,
) -> TrasterStatus {
    guard(|| {
        let frames = frames_from(values, tau, rows, cols)?;
        put(out, TrasterSeries(TK2Raster::build(&frames, k, t_delta)?))
    })
}

/// Like [`traster_build`] with adaptive snapshot placement.
///
/// # Safety
/// As for [`traster_build`].
#[no_mangle]
pub unsafe extern "C" fn traster_build_auto(
    values: *const i32,
    tau: usize,
    rows: usize,
    cols: usize,
    k: usize,
    threshold: f64,
    out: *mut *mut TrasterSeries,
) -> TrasterStatus {
    guard(|| {
        let frames = frames_from(values, tau, rows, cols)?;
        let s = TK2Raster::build_with(&frames, k, SnapshotPolicy::Auto { threshold })?;
        put(out, TrasterSeries(s))
    })
}

/// Reads a container file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn traster_open(path: *const c_char, out: *mut *mut TrasterSeries) -> TrasterStatus {
    guard(|| {
        let path = path_arg(path)?;
        put(out, TrasterSeries(dataio::read_container(path)?))
    })
}

/// Decodes a container from memory.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn traster_from_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut TrasterSeries,
) -> TrasterStatus {
    guard(|| {
        if bytes.is_null() {
            return Err(null("bytes"));
        }
        let data = std::slice::from_raw_parts(bytes, len);
        put(out, TrasterSeries(dataio::deserialize(data)?))
    })
}

/// Writes a container file.
///
/// # Safety
/// `s` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn traster_save(s: *const TrasterSeries, path: *const c_char) -> TrasterStatus {
    guard(|| {
        let s = series_ref(s)?;
        dataio::write_container(path_arg(path)?, s)?;
        Ok(())
    })
}

/// Serializes into `buf`. `*written` receives the encoded size even when
/// the buffer is too small, so a NULL `buf` with `cap` 0 queries the size.
///
/// # Safety
/// `buf` must have `cap` writable bytes unless `cap` is 0, and `written`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn traster_serialize(
    s: *const TrasterSeries,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> TrasterStatus {
    guard(|| {
        let s = series_ref(s)?;
        if written.is_null() {
            return Err(null("written"));
        }
        let bytes = dataio::serialize(s);
        *written = bytes.len();
        if cap < bytes.len() {
            return Err(Fail(
                TrasterStatus::BufferTooSmall,
                format!("need {} bytes, have {cap}", bytes.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// Releases a series handle. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn traster_free(s: *mut TrasterSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; each out pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn traster_dims(
    s: *const TrasterSeries,
    tau: *mut usize,
    rows: *mut usize,
    cols: *mut usize,
) -> TrasterStatus {
    guard(|| {
        let s = series_ref(s)?;
        for (p, v) in [(tau, s.tau()), (rows, s.rows()), (cols, s.cols())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Whether instant `t` is stored as a snapshot.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn traster_is_snapshot(s: *const TrasterSeries, t: usize, out: *mut bool) -> TrasterStatus {
    guard(|| {
        let v = series_ref(s)?.is_snapshot(t)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Encoded size in bytes.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn traster_total_bytes(s: *const TrasterSeries, out: *mut usize) -> TrasterStatus {
    guard(|| {
        let v = series_ref(s)?.stats().total_bytes;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn traster_get_cell(
    s: *const TrasterSeries,
    t: usize,
    r: usize,
    c: usize,
    out: *mut i32,
) -> TrasterStatus {
    guard(|| {
        let v = series_ref(s)?.get_cell_value(r, c, t)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Cells of the inclusive window `[r1, r2] x [c1, c2]` at instant `t` whose
/// value lies in `[vb, ve]`, in row-major order.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn traster_get_cells(
    s: *const TrasterSeries,
    t: usize,
    vb: i64,
    ve: i64,
    r1: usize,
    r2: usize,
    c1: usize,
    c2: usize,
    out: *mut *mut TrasterCells,
) -> TrasterStatus {
    guard(|| {
        let cells = series_ref(s)?.get_cells(vb, ve, Window::new(r1, r2, c1, c2), t)?;
        let cells = cells
            .into_iter()
            .map(|Cell { row, col }| TrasterCell { row, col })
            .collect();
        put(out, TrasterCells(cells))
    })
}

/// # Safety
/// `cells` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn traster_cells_len(cells: *const TrasterCells) -> usize {
    cells.as_ref().map_or(0, |c| c.0.len())
}

/// Pointer to `traster_cells_len` entries, owned by the handle.
///
/// # Safety
/// `cells` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn traster_cells_data(cells: *const TrasterCells) -> *const TrasterCell {
    cells.as_ref().map_or(ptr::null(), |c| c.0.as_ptr())
}

/// # Safety
/// `cells` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn traster_cells_free(cells: *mut TrasterCells) {
    if !cells.is_null() {
        drop(Box::from_raw(cells));
    }
}

/// Writes frame `t` row-major into `buf`, which holds `len` values.
///
/// # Safety
/// `s` must be a live handle and `buf` must have `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn traster_decompress_frame(
    s: *const TrasterSeries,
    t: usize,
    buf: *mut i32,
    len: usize,
) -> TrasterStatus {
    guard(|| {
        let s = series_ref(s)?;
        let need = s.rows() * s.cols();
        if len < need {
            return Err(Fail(
                TrasterStatus::BufferTooSmall,
                format!("need {need} values, have {len}"),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let frame = s.decompress_frame(t)?;
        ptr::copy_nonoverlapping(frame.values().as_ptr(), buf, need);
        Ok(())
    })
}
