//! C ABI over the `hnerv` codec.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns an
//! [`HnervStatus`]; on failure `hnerv_last_error` describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hnerv::arch::VideoRepresentation;
use hnerv::compression::{checkpoint_bitstream, compress, decompress, CompressOptions, PruneSpec};
use hnerv::runtime::{DecodeRequest, FrameDecoder};
use hnerv::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HnervStatus {
    Ok = 0,
    /// Invalid argument, index or option.
    Usage = 1,
    /// Malformed, corrupted or unreadable data.
    Data = 2,
    /// Non-finite values.
    Numeric = 3,
    /// The representation lacks a required part, such as the encoder.
    Capability = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque loaded representation.
pub struct HnervModel {
    rep: VideoRepresentation,
}

/// Byte buffer allocated by the library; release with `hnerv_buffer_free`.
#[repr(C)]
pub struct HnervBuffer {
    pub data: *mut u8,
    pub len: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HnervInfo {
    pub num_frames: usize,
    pub stored_frames: usize,
    pub height: usize,
    pub width: usize,
    /// Embedding values plus decoder parameters.
    pub total_size: usize,
    pub has_encoder: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> HnervStatus {
    match e {
        Error::Usage(_) | Error::Config(_) => HnervStatus::Usage,
        Error::NonFinite { .. } => HnervStatus::Numeric,
        Error::Capability(_) => HnervStatus::Capability,
        _ => HnervStatus::Data,
    }
}

struct Failure(HnervStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HnervStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HnervStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HnervStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure(HnervStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(())
}

fn model_ref<'a>(model: *const HnervModel) -> Result<&'a HnervModel, Failure> {
    non_null(model, "model")?;
    // SAFETY: non-null handles come from `Box::into_raw` in this crate.
    Ok(unsafe { &*model })
}

fn store_model(rep: VideoRepresentation, out: *mut *mut HnervModel) {
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(HnervModel { rep })) };
}

fn store_buffer(bytes: Vec<u8>, out: *mut HnervBuffer) {
    let boxed = bytes.into_boxed_slice();
    let len = boxed.len();
    let data = Box::into_raw(boxed) as *mut u8;
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = HnervBuffer { data, len } };
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hnerv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hnerv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a compressed stream or float checkpoint held in memory.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hnerv_model_load(bytes: *const u8, len: usize, out: *mut *mut HnervModel) -> HnervStatus {
    guard(|| {
        non_null(bytes, "bytes")?;
        non_null(out, "out")?;
        let data = std::slice::from_raw_parts(bytes, len);
        store_model(decompress(data)?, out);
        Ok(())
    })
}

/// Reads a `.hnrv` file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hnerv_model_load_file(path: *const c_char, out: *mut *mut HnervModel) -> HnervStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(HnervStatus::Usage, "path is not UTF-8".into()))?;
        let bytes = std::fs::read(Path::new(path)).map_err(Error::from)?;
        store_model(decompress(&bytes)?, out);
        Ok(())
    })
}

/// Releases a model; NULL is ignored.
///
/// # Safety
/// `model` must come from a load call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hnerv_model_free(model: *mut HnervModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hnerv_model_info(model: *const HnervModel, out: *mut HnervInfo) -> HnervStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let rep = &m.rep;
        *out = HnervInfo {
            num_frames: rep.num_frames,
            stored_frames: rep.frame_ids.len(),
            height: rep.config.frame_height,
            width: rep.config.frame_width,
            total_size: rep.total_size(),
            has_encoder: rep.encoder.is_some(),
        };
        Ok(())
    })
}

/// Decodes frame `t` as interleaved RGB8 into `out` (`3 * height * width` bytes).
///
/// # Safety
/// `model` must be a live handle; `out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hnerv_decode_frame_rgb8(
    model: *const HnervModel,
    t: usize,
    out: *mut u8,
    len: usize,
) -> HnervStatus {
    let frames = [t];
    hnerv_decode_frames_rgb8(model, frames.as_ptr(), 1, 1, out, len)
}

/// Decodes `count` frames with `workers` threads, writing them back to back
/// as interleaved RGB8 in request order.
///
/// # Safety
/// `frames` must point to `count` indices; `out` to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hnerv_decode_frames_rgb8(
    model: *const HnervModel,
    frames: *const usize,
    count: usize,
    workers: usize,
    out: *mut u8,
    len: usize,
) -> HnervStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(frames, "frames")?;
        non_null(out, "out")?;
        let per = 3 * m.rep.config.frame_height * m.rep.config.frame_width;
        let need = per
            .checked_mul(count)
            .ok_or_else(|| Failure(HnervStatus::Usage, "frame count overflows".into()))?;
        if len < need {
            return Err(Failure(HnervStatus::BufferTooSmall, format!("need {need} bytes, got {len}")));
        }
        let request = DecodeRequest { frames: std::slice::from_raw_parts(frames, count).to_vec(), workers };
        let decoded = FrameDecoder::new(&m.rep)?.decode_parallel(&request)?;
        let dst = std::slice::from_raw_parts_mut(out, need);
        for (chunk, (_, frame)) in dst.chunks_exact_mut(per).zip(&decoded.frames) {
            chunk.copy_from_slice(&frame.to_rgb8());
        }
        Ok(())
    })
}

/// Prunes, quantizes and entropy-codes the model without fine-tuning.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hnerv_compress(
    model: *const HnervModel,
    sparsity: f64,
    bits: u8,
    workers: usize,
    out: *mut HnervBuffer,
) -> HnervStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let options = CompressOptions {
            prune: PruneSpec { sparsity, finetune_epochs: 0 },
            model_bits: bits,
            embedding_bits: bits,
            workers,
            ..CompressOptions::default()
        };
        store_buffer(compress(&m.rep, &options, None)?.bytes, out);
        Ok(())
    })
}

/// Serializes the model as a float checkpoint.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hnerv_checkpoint(model: *const HnervModel, out: *mut HnervBuffer) -> HnervStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        store_buffer(checkpoint_bitstream(&m.rep)?.to_bytes(), out);
        Ok(())
    })
}

/// Releases a buffer from `hnerv_compress` or `hnerv_checkpoint`.
///
/// # Safety
/// `buffer` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hnerv_buffer_free(buffer: HnervBuffer) {
    if !buffer.data.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(buffer.data, buffer.len)));
    }
}
