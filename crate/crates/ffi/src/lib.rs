//! C ABI over `gendisc`.
//!
//! Every fallible function returns a [`GdStatus`]. On failure a message is
//! available from [`gd_last_error_message`] on the same thread. Models are
//! opaque [`GdModel`] handles released with [`gd_model_free`]; strings
//! returned through out-parameters are released with [`gd_string_free`].
//! Panics never cross the boundary; they surface as `GD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gendisc::hmm::{entropic_forward_backward, forward_backward};
use gendisc::logreg::{lr_to_nb, nb_to_lr};
use gendisc::model_io::Model;
use gendisc::numeric::ProbabilityVector;
use gendisc::verify::{self, Fault};
use gendisc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed model, dimension mismatch, unknown symbol, zero evidence.
    BadInput = 3,
    /// Divergence or a non-finite intermediate.
    Numerical = 4,
    /// The operation does not apply to this kind of model.
    WrongModelKind = 5,
    /// The caller's output buffer has the wrong length.
    BufferSize = 6,
    Io = 7,
    VerifyFailed = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdModelKind {
    NaiveBayes = 0,
    DiscNb = 1,
    LogReg = 2,
    Hmm = 3,
}

/// Posterior route for Naive Bayes models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdRoute {
    Generative = 0,
    Discriminative = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdAlgorithm {
    ForwardBackward = 0,
    EntropicForwardBackward = 1,
}

/// Opaque model handle.
pub struct GdModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure {
    status: GdStatus,
    message: String,
}

impl Failure {
    fn new(status: GdStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DivergedLoss { .. } | Error::NonFinite(_) => GdStatus::Numerical,
            _ => GdStatus::BadInput,
        };
        Failure::new(status, e.to_string())
    }
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GdStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("internal panic");
            GdStatus::Panic
        }
    }
}

fn not_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(
            GdStatus::NullArgument,
            format!("{name} is null"),
        ))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    not_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(GdStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// # Safety
/// `model` must be null or a live handle.
unsafe fn model_ref<'a>(model: *const GdModel) -> Result<&'a Model, Failure> {
    not_null(model, "model")?;
    Ok(&(*model).inner)
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn read_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    not_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `out` must be null or valid for `out_len` writes.
unsafe fn write_out(values: &[f64], out: *mut f64, out_len: usize) -> Result<(), Failure> {
    not_null(out, "out")?;
    if out_len != values.len() {
        return Err(Failure::new(
            GdStatus::BufferSize,
            format!(
                "output buffer holds {out_len} values, result has {}",
                values.len()
            ),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn into_handle(model: Model) -> *mut GdModel {
    Box::into_raw(Box::new(GdModel { inner: model }))
}

fn wrong_kind(op: &str, model: &Model) -> Failure {
    Failure::new(
        GdStatus::WrongModelKind,
        format!("{op} does not apply to {} models", model.kind().tag()),
    )
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON model document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_from_json(
    json: *const c_char,
    out: *mut *mut GdModel,
) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let text = read_str(json, "json")?;
        *out = into_handle(Model::from_json(text)?);
        Ok(())
    })
}

/// Reads and parses a JSON model file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_load(path: *const c_char, out: *mut *mut GdModel) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let path = read_str(path, "path")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(GdStatus::Io, format!("cannot read {path}: {e}")))?;
        *out = into_handle(Model::from_json(&text)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_model_free(model: *mut GdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serializes a model; release the string with [`gd_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_to_json(
    model: *const GdModel,
    out: *mut *mut c_char,
) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let json = model_ref(model)?.to_json();
        *out = CString::new(json)
            .expect("JSON has no NUL bytes")
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_kind(model: *const GdModel, out: *mut GdModelKind) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        *out = match model_ref(model)? {
            Model::NaiveBayes(_) => GdModelKind::NaiveBayes,
            Model::DiscNb(_) => GdModelKind::DiscNb,
            Model::LogReg(_) => GdModelKind::LogReg,
            Model::Hmm(_) => GdModelKind::Hmm,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_n_labels(model: *const GdModel, out: *mut usize) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        *out = model_ref(model)?.labels().len();
        Ok(())
    })
}

/// Name of label `index`; release the string with [`gd_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_label(
    model: *const GdModel,
    index: usize,
    out: *mut *mut c_char,
) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let labels = model_ref(model)?.labels();
        if index >= labels.len() {
            return Err(Failure::new(
                GdStatus::BadInput,
                format!("label index {index} out of range ({} labels)", labels.len()),
            ));
        }
        *out = CString::new(labels.name(index))
            .map_err(|_| Failure::new(GdStatus::BadInput, "label name contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Observation length `T` of a Naive Bayes, disc_nb or logreg model.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_model_n_positions(model: *const GdModel, out: *mut usize) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let m = model_ref(model)?;
        *out = match m {
            Model::NaiveBayes(nb) => nb.n_positions(),
            Model::DiscNb(nb) => nb.n_positions(),
            Model::LogReg(lr) => lr.n_positions(),
            Model::Hmm(_) => return Err(wrong_kind("n_positions", m)),
        };
        Ok(())
    })
}

/// Posterior of a Naive Bayes model for symbol indices `symbols[0..len]`,
/// written to `out[0..out_len]` with `out_len` equal to the label count.
///
/// # Safety
/// `model` must be a live handle; `symbols` valid for `len` reads; `out`
/// valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn gd_predict_discrete(
    model: *const GdModel,
    symbols: *const usize,
    len: usize,
    route: GdRoute,
    out: *mut f64,
    out_len: usize,
) -> GdStatus {
    guard(|| {
        let m = model_ref(model)?;
        let Model::NaiveBayes(nb) = m else {
            return Err(wrong_kind("discrete prediction", m));
        };
        let y = read_slice(symbols, len, "symbols")?;
        let p = match route {
            GdRoute::Generative => nb.generative_posterior(y)?,
            GdRoute::Discriminative => nb.to_discriminative(None)?.posterior(y)?,
        };
        write_out(p.as_slice(), out, out_len)
    })
}

/// Posterior of a disc_nb or logreg model for real features `y[0..len]`.
///
/// # Safety
/// `model` must be a live handle; `y` valid for `len` reads; `out` valid
/// for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn gd_predict_real(
    model: *const GdModel,
    y: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> GdStatus {
    guard(|| {
        let m = model_ref(model)?;
        let y = read_slice(y, len, "y")?;
        let p = match m {
            Model::DiscNb(nb) => nb.posterior(y)?,
            Model::LogReg(lr) => lr.posterior(y)?,
            _ => return Err(wrong_kind("real-valued prediction", m)),
        };
        write_out(p.as_slice(), out, out_len)
    })
}

/// disc_nb to logreg, or logreg to disc_nb under `prior[0..prior_len]`
/// (uniform when `prior_len` is 0). The result is a new handle.
///
/// # Safety
/// `model` must be a live handle; `prior` valid for `prior_len` reads;
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_convert(
    model: *const GdModel,
    prior: *const f64,
    prior_len: usize,
    out: *mut *mut GdModel,
) -> GdStatus {
    guard(|| {
        not_null(out, "out")?;
        let m = model_ref(model)?;
        let converted: Model = match m {
            Model::DiscNb(nb) => {
                if prior_len != 0 {
                    return Err(Failure::new(
                        GdStatus::BadInput,
                        "a prior applies only to logreg sources",
                    ));
                }
                nb_to_lr(nb)?.into()
            }
            Model::LogReg(lr) => {
                let prior = if prior_len == 0 {
                    ProbabilityVector::uniform(lr.n_labels())?
                } else {
                    ProbabilityVector::new(read_slice(prior, prior_len, "prior")?.to_vec())?
                };
                lr_to_nb(lr, &prior)?.into()
            }
            _ => return Err(wrong_kind("conversion", m)),
        };
        *out = into_handle(converted);
        Ok(())
    })
}

/// Smoothed marginals of an HMM for `observations[0..len]`, row-major into
/// `out[0..out_len]` with `out_len = len * n_labels`. The entropic variant
/// derives posterior columns from the emissions when the model has none.
///
/// # Safety
/// `model` must be a live handle; `observations` valid for `len` reads;
/// `out` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn gd_hmm_posterior(
    model: *const GdModel,
    observations: *const usize,
    len: usize,
    algorithm: GdAlgorithm,
    out: *mut f64,
    out_len: usize,
) -> GdStatus {
    guard(|| {
        let m = model_ref(model)?;
        let Model::Hmm(hmm) = m else {
            return Err(wrong_kind("hmm_posterior", m));
        };
        let y = read_slice(observations, len, "observations")?;
        let marginals = match algorithm {
            GdAlgorithm::ForwardBackward => forward_backward(hmm, y)?,
            GdAlgorithm::EntropicForwardBackward if hmm.posteriors().is_none() => {
                entropic_forward_backward(&hmm.derive_posteriors()?, y)?
            }
            GdAlgorithm::EntropicForwardBackward => entropic_forward_backward(hmm, y)?,
        };
        let flat: Vec<f64> = marginals
            .gamma
            .iter()
            .flat_map(|r| r.as_slice().iter().copied())
            .collect();
        write_out(&flat, out, out_len)
    })
}

/// Runs the equivalence suites. Returns `GD_STATUS_VERIFY_FAILED` if any
/// suite fails; `max_discrepancy`, when not null, receives the largest
/// discrepancy over all suites.
///
/// # Safety
/// `max_discrepancy` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gd_verify(seed: u64, cases: usize, max_discrepancy: *mut f64) -> GdStatus {
    guard(|| {
        if cases == 0 {
            return Err(Failure::new(GdStatus::BadInput, "cases must be positive"));
        }
        let report = verify::run_all(seed, cases, Fault::None);
        if !max_discrepancy.is_null() {
            *max_discrepancy = report
                .suites
                .iter()
                .map(|s| s.max_discrepancy)
                .fold(0.0, f64::max);
        }
        if report.all_passed() {
            Ok(())
        } else {
            Err(Failure::new(GdStatus::VerifyFailed, report.render()))
        }
    })
}
