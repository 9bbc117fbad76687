//! C ABI over the `explneed` library.
//!
//! Every fallible function returns an [`ExnStatus`]; on failure the message
//! is available from [`exn_last_error`] on the same thread until the next
//! call into the library. Datasets and models are opaque handles owned by the
//! caller and released with their `_free` function. Strings returned by the
//! library are released with [`exn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use explneed::agreement::{AgreementReport, ContingencyTable2x2, LandisKochBand};
use explneed::classifiers::TrainedModel;
use explneed::corpus::{dataset_stats, load_dataset, LabeledDataset};
use explneed::evaluation::{compute_lambda, f_beta};
use explneed::rule_based::{classify_rule_based, Rule};
use explneed::Error;

/// Result of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input data or arguments failed validation.
    InvalidInput = 2,
    /// A model file could not be read or parsed.
    ModelIo = 3,
    /// Unexpected failure inside the library.
    Internal = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
}

/// Verbal interpretation of an agreement coefficient.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExnBand {
    None = 0,
    Slight = 1,
    Fair = 2,
    Moderate = 3,
    Substantial = 4,
    AlmostPerfect = 5,
}

impl From<LandisKochBand> for ExnBand {
    fn from(b: LandisKochBand) -> Self {
        match b {
            LandisKochBand::None => ExnBand::None,
            LandisKochBand::Slight => ExnBand::Slight,
            LandisKochBand::Fair => ExnBand::Fair,
            LandisKochBand::Moderate => ExnBand::Moderate,
            LandisKochBand::Substantial => ExnBand::Substantial,
            LandisKochBand::AlmostPerfect => ExnBand::AlmostPerfect,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExnAgreement {
    pub n: u64,
    pub percent_agreement: f64,
    pub cohens_kappa: f64,
    pub kappa_degenerate: bool,
    pub kappa_band: ExnBand,
    pub gwets_ac1: f64,
    pub ac1_degenerate: bool,
    pub ac1_band: ExnBand,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExnRulePrediction {
    pub explanation_need: bool,
    pub question_mark: bool,
    pub why: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExnPrediction {
    pub label: bool,
    pub score: f64,
}

/// Opaque handle to a loaded dataset.
pub struct ExnDataset(LabeledDataset);

/// Opaque handle to a trained model.
pub struct ExnModel(TrainedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> ExnStatus {
    match err.exit_code() {
        2 => ExnStatus::InvalidInput,
        3 => ExnStatus::ModelIo,
        _ => ExnStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (ExnStatus, String)>>(f: F) -> ExnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside explneed".into());
            ExnStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (ExnStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (ExnStatus, String)> {
    if p.is_null() {
        return Err((ExnStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ExnStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (ExnStatus, String)> {
    // SAFETY: non-null pointers to outputs must be valid for writes per the
    // documented contract of each function.
    unsafe { p.as_mut() }.ok_or_else(|| (ExnStatus::NullArgument, format!("{name} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn exn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn exn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn exn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Agreement statistics for the 2x2 table: `a` both negative, `b` rater 1
/// positive only, `c` rater 2 positive only, `d` both positive.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_agreement(a: u64, b: u64, c: u64, d: u64, out: *mut ExnAgreement) -> ExnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let table = ContingencyTable2x2::new(a, b, c, d).map_err(lib_err)?;
        let r = AgreementReport::from_table(table);
        *out = ExnAgreement {
            n: r.n,
            percent_agreement: r.percent_agreement,
            cohens_kappa: r.cohens_kappa.value,
            kappa_degenerate: r.cohens_kappa.degenerate,
            kappa_band: r.kappa_band.into(),
            gwets_ac1: r.gwets_ac1.value,
            ac1_degenerate: r.gwets_ac1.degenerate,
            ac1_band: r.ac1_band.into(),
        };
        Ok(())
    })
}

/// `(1 + β²)·P·R / (β²·P + R)`, or 0 when both are 0.
#[no_mangle]
pub extern "C" fn exn_f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    f_beta(precision, recall, beta)
}

/// `total / relevant`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_compute_lambda(relevant: u64, total: u64, out: *mut f64) -> ExnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = compute_lambda(relevant, total).map_err(lib_err)?;
        Ok(())
    })
}

/// Applies the question-mark / "why" rule to a NUL-terminated UTF-8 string.
///
/// # Safety
/// `text` must be a valid C string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_classify_rule_based(text: *const c_char, out: *mut ExnRulePrediction) -> ExnStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let p = classify_rule_based(text);
        *out = ExnRulePrediction {
            explanation_need: p.explanation_need,
            question_mark: p.fired_rules.contains(&Rule::QuestionMark),
            why: p.fired_rules.contains(&Rule::Why),
        };
        Ok(())
    })
}

/// Loads a dataset in the canonical CSV format.
///
/// # Safety
/// `path` and `name` must be valid C strings; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_dataset_load(
    path: *const c_char,
    name: *const c_char,
    out: *mut *mut ExnDataset,
) -> ExnStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        let ds = load_dataset(path, name).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ExnDataset(ds)));
        Ok(())
    })
}

/// Number of reviews, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle from [`exn_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn exn_dataset_len(ds: *const ExnDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Number of explanation needs, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle from [`exn_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn exn_dataset_positives(ds: *const ExnDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.positives())
}

/// Dataset statistics as a JSON string, released with [`exn_string_free`].
///
/// # Safety
/// `ds` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_dataset_stats_json(ds: *const ExnDataset, out: *mut *mut c_char) -> ExnStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or((ExnStatus::NullArgument, "ds is null".to_string()))?;
        let out = out_arg(out, "out")?;
        let json = serde_json::to_string(&dataset_stats(&ds.0)).map_err(|e| (ExnStatus::Internal, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Releases a dataset handle. Null is ignored.
///
/// # Safety
/// `ds` must be null or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn exn_dataset_free(ds: *mut ExnDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Loads a model saved by `explneed train`.
///
/// # Safety
/// `path` must be a valid C string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn exn_model_load(path: *const c_char, out: *mut *mut ExnModel) -> ExnStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let model = TrainedModel::load(path).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ExnModel(model)));
        Ok(())
    })
}

/// Scores one review text with a loaded model.
///
/// # Safety
/// `model` must be a live handle, `text` a valid C string and `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn exn_model_predict(
    model: *const ExnModel,
    text: *const c_char,
    out: *mut ExnPrediction,
) -> ExnStatus {
    guard(|| {
        let model = model
            .as_ref()
            .ok_or((ExnStatus::NullArgument, "model is null".to_string()))?;
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let p = model.0.predict_text(text);
        *out = ExnPrediction {
            label: p.label,
            score: p.score,
        };
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn exn_model_free(model: *mut ExnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
