//! C ABI over `mpeg7-annotate`.
//!
//! Every fallible function returns an [`AnnStatus`]. On failure a message is
//! kept per thread and can be read with [`ann_last_error`]. Models are opaque
//! handles created by [`ann_model_load`] or [`ann_model_from_json`] and
//! released with [`ann_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mpeg7_annotate::bundle::ModelBundle;
use mpeg7_annotate::classifiers::Prediction;
use mpeg7_annotate::descriptors::{extract, DescriptorKind, EhdParams};
use mpeg7_annotate::raster::{decode_file, decode_image};
use mpeg7_annotate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Decode = 4,
    ImageTooSmall = 5,
    DimensionMismatch = 6,
    Format = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnDescriptor {
    Ehd = 0,
    Scd = 1,
    CldRaw = 2,
}

impl From<AnnDescriptor> for DescriptorKind {
    fn from(d: AnnDescriptor) -> Self {
        match d {
            AnnDescriptor::Ehd => DescriptorKind::Ehd,
            AnnDescriptor::Scd => DescriptorKind::Scd,
            AnnDescriptor::CldRaw => DescriptorKind::CldRaw,
        }
    }
}

/// A loaded model bundle.
pub struct AnnModel {
    bundle: ModelBundle,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> AnnStatus {
    match e {
        Error::Io { .. } => AnnStatus::Io,
        Error::Decode(_) | Error::UnsupportedConversion { .. } => AnnStatus::Decode,
        Error::ImageTooSmall { .. } | Error::GridTooFine { .. } => AnnStatus::ImageTooSmall,
        Error::DimensionMismatch { .. } => AnnStatus::DimensionMismatch,
        Error::Format { .. } | Error::Json(_) | Error::KindMismatch { .. } => AnnStatus::Format,
        _ => AnnStatus::InvalidArgument,
    }
}

fn fail(status: AnnStatus, msg: impl Into<String>) -> AnnStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), AnnStatus>) -> AnnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnnStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(AnnStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> AnnStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, AnnStatus> {
    if p.is_null() {
        return Err(fail(AnnStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AnnStatus::InvalidArgument, "string argument is not UTF-8"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], AnnStatus> {
    if p.is_null() {
        if len == 0 {
            return Ok(&[]);
        }
        return Err(fail(AnnStatus::NullArgument, "null buffer argument"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_handle(bundle: ModelBundle, out: *mut *mut AnnModel) -> Result<(), AnnStatus> {
    let names = bundle
        .class_names
        .iter()
        .map(|n| CString::new(n.replace('\0', " ")).expect("nul bytes removed"))
        .collect();
    let model = Box::new(AnnModel { bundle, names });
    unsafe { *out = Box::into_raw(model) };
    Ok(())
}

unsafe fn write_prediction(p: Prediction, label: *mut usize, confidence: *mut f64) {
    *label = p.label;
    if !confidence.is_null() {
        *confidence = p.confidence;
    }
}

/// Loads a model bundle written by `annotate train`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ann_model_load(path: *const c_char, out: *mut *mut AnnModel) -> AnnStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null output handle"));
        }
        *out = ptr::null_mut();
        let path = c_str(path)?;
        into_handle(ModelBundle::load(Path::new(path)).map_err(lib_err)?, out)
    })
}

/// Parses a model bundle from its JSON text.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ann_model_from_json(json: *const c_char, out: *mut *mut AnnModel) -> AnnStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null output handle"));
        }
        *out = ptr::null_mut();
        let text = c_str(json)?;
        into_handle(ModelBundle::from_json(text).map_err(lib_err)?, out)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ann_model_free(model: *mut AnnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ann_model_class_count(model: *const AnnModel) -> usize {
    model.as_ref().map_or(0, |m| m.names.len())
}

/// Name of class `index`, valid while the model lives. Null when out of range.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ann_model_class_name(model: *const AnnModel, index: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.names.get(index))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Length of the descriptor vector `ann_model_predict_features` expects.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ann_model_input_dim(model: *const AnnModel) -> usize {
    model.as_ref().map_or(0, |m| m.bundle.source_kind().dim())
}

/// Descriptor the model is trained on.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ann_model_descriptor(model: *const AnnModel, out: *mut AnnDescriptor) -> AnnStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(AnnStatus::NullArgument, "null model"))?;
        if out.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null output"));
        }
        *out = match m.bundle.source_kind() {
            DescriptorKind::Ehd => AnnDescriptor::Ehd,
            DescriptorKind::Scd => AnnDescriptor::Scd,
            _ => AnnDescriptor::CldRaw,
        };
        Ok(())
    })
}

/// Classifies a raw descriptor vector. `confidence` may be null.
///
/// # Safety
/// `values` must point to `len` doubles; `label` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ann_model_predict_features(
    model: *const AnnModel,
    values: *const f64,
    len: usize,
    label: *mut usize,
    confidence: *mut f64,
) -> AnnStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(AnnStatus::NullArgument, "null model"))?;
        if label.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null label output"));
        }
        let values = slice(values, len)?;
        let p = m.bundle.predict_features(values).map_err(lib_err)?;
        write_prediction(p, label, confidence);
        Ok(())
    })
}

/// Classifies an encoded PNG or JPEG image held in memory.
///
/// # Safety
/// `bytes` must point to `len` bytes; `label` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ann_model_predict_image(
    model: *const AnnModel,
    bytes: *const u8,
    len: usize,
    label: *mut usize,
    confidence: *mut f64,
) -> AnnStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(AnnStatus::NullArgument, "null model"))?;
        if label.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null label output"));
        }
        let img = decode_image(slice(bytes, len)?).map_err(lib_err)?;
        let p = m.bundle.predict_image(&img).map_err(lib_err)?;
        write_prediction(p, label, confidence);
        Ok(())
    })
}

/// Classifies an image file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `label` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ann_model_predict_file(
    model: *const AnnModel,
    path: *const c_char,
    label: *mut usize,
    confidence: *mut f64,
) -> AnnStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(AnnStatus::NullArgument, "null model"))?;
        if label.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null label output"));
        }
        let img = decode_file(Path::new(c_str(path)?)).map_err(lib_err)?;
        let p = m.bundle.predict_image(&img).map_err(lib_err)?;
        write_prediction(p, label, confidence);
        Ok(())
    })
}

/// Length of a descriptor vector.
#[no_mangle]
pub extern "C" fn ann_descriptor_dim(kind: AnnDescriptor) -> usize {
    DescriptorKind::from(kind).dim()
}

/// Extracts a descriptor from an encoded image into `out`, which must hold
/// at least `ann_descriptor_dim(kind)` values.
///
/// # Safety
/// `bytes` must point to `len` bytes and `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ann_extract_image(
    kind: AnnDescriptor,
    bytes: *const u8,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> AnnStatus {
    guard(|| {
        let kind = DescriptorKind::from(kind);
        if out.is_null() {
            return Err(fail(AnnStatus::NullArgument, "null output buffer"));
        }
        if out_len < kind.dim() {
            return Err(fail(
                AnnStatus::BufferTooSmall,
                format!("{kind} needs {} values, buffer holds {out_len}", kind.dim()),
            ));
        }
        let img = decode_image(slice(bytes, len)?).map_err(lib_err)?;
        let v = extract(&img, kind, &EhdParams::default()).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, kind.dim()).copy_from_slice(v.values());
        Ok(())
    })
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ann_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ann_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
