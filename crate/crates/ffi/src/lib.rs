//! C ABI over `funcomp`.
//!
//! Models are opaque handles created by `fc_model_*` constructors and
//! released with [`fc_model_free`]. Every fallible call returns an
//! [`FcStatus`]; on failure [`fc_last_error_message`] describes the error
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use funcomp::regions::{self, Origin, RateBounds};
use funcomp::sim::{simulate_exact, BinRates};
use funcomp::{AuxSystem, Error, FunctionClass, SourceModel};

/// Opaque source model.
pub struct FcModel {
    inner: SourceModel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Precondition = 5,
    Guard = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FcFunctionClass {
    Invertible = 0,
    PartiallyInvertible1 = 1,
    PartiallyInvertible2 = 2,
    General = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FcOrigin {
    Thm1Inner = 0,
    Thm1Outer = 1,
    Thm2Inner = 2,
    Thm2Outer = 3,
    Lemma1 = 4,
    Lemma2 = 5,
    Lemma3 = 6,
    Lemma4 = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FcClassification {
    pub function_class: FcFunctionClass,
    pub eve_degraded: bool,
    pub fusion_degraded: bool,
    pub residual_eve: f64,
    pub residual_fusion: f64,
}

/// Rate bounds in bits/symbol; `d` is meaningful only when `has_d`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FcRateBounds {
    pub origin: FcOrigin,
    pub r_s: f64,
    pub r_w1: f64,
    pub r_w2: f64,
    pub r_w_sum: f64,
    pub r_l_dec: f64,
    pub r_l_eve: f64,
    pub has_d: bool,
    pub d: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FcSimReport {
    pub n: usize,
    pub error_prob: f64,
    pub secrecy_leak: f64,
    pub priv_dec: f64,
    pub priv_eve: f64,
    pub storage1: f64,
    pub storage2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FcAuxPreset {
    Identity = 0,
    Constant = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FcStatus {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => FcStatus::Parse,
        Error::Precondition(_) => FcStatus::Precondition,
        Error::Guard(_) => FcStatus::Guard,
        Error::Internal(_) => FcStatus::Internal,
        _ => FcStatus::Validation,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), FcStatus>) -> FcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside funcomp");
            FcStatus::Panic
        }
    }
}

fn lift<T>(r: funcomp::Result<T>) -> Result<T, FcStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> FcStatus {
    set_error(&format!("{what} is null"));
    FcStatus::NullPointer
}

unsafe fn model_ref<'a>(model: *const FcModel) -> Result<&'a SourceModel, FcStatus> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), FcStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn origin(o: Origin) -> FcOrigin {
    match o {
        Origin::Thm1Inner => FcOrigin::Thm1Inner,
        Origin::Thm1Outer => FcOrigin::Thm1Outer,
        Origin::Thm2Inner => FcOrigin::Thm2Inner,
        Origin::Thm2Outer => FcOrigin::Thm2Outer,
        Origin::Lemma1 => FcOrigin::Lemma1,
        Origin::Lemma2 => FcOrigin::Lemma2,
        Origin::Lemma3 => FcOrigin::Lemma3,
        Origin::Lemma4 => FcOrigin::Lemma4,
    }
}

fn bounds(b: RateBounds) -> FcRateBounds {
    FcRateBounds {
        origin: origin(b.origin),
        r_s: b.r_s,
        r_w1: b.r_w1,
        r_w2: b.r_w2,
        r_w_sum: b.r_w_sum,
        r_l_dec: b.r_l_dec,
        r_l_eve: b.r_l_eve,
        has_d: b.d.is_some(),
        d: b.d.unwrap_or(0.0),
    }
}

fn boxed(model: SourceModel) -> *mut FcModel {
    Box::into_raw(Box::new(FcModel { inner: model }))
}

/// Parse a model from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_model_from_json(json: *const c_char, out: *mut *mut FcModel) -> FcStatus {
    guarded(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not valid UTF-8");
            FcStatus::InvalidArgument
        })?;
        let model = lift(funcomp::io::parse_model(text))?;
        write_out(out, boxed(model))
    })
}

/// Builtin multiplicative-Bernoulli model.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_model_bernoulli(
    beta1: f64,
    beta2: f64,
    alpha: f64,
    q: f64,
    out: *mut *mut FcModel,
) -> FcStatus {
    guarded(|| {
        let model = lift(SourceModel::bernoulli_example(beta1, beta2, alpha, q))?;
        write_out(out, boxed(model))
    })
}

/// Release a model; null is ignored.
///
/// # Safety
/// `model` must come from an `fc_model_*` constructor and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn fc_model_free(model: *mut FcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_classify(model: *const FcModel, out: *mut FcClassification) -> FcStatus {
    guarded(|| {
        let m = model_ref(model)?;
        let class = match lift(m.classify_function())? {
            FunctionClass::Invertible => FcFunctionClass::Invertible,
            FunctionClass::PartiallyInvertibleWrt1 => FcFunctionClass::PartiallyInvertible1,
            FunctionClass::PartiallyInvertibleWrt2 => FcFunctionClass::PartiallyInvertible2,
            FunctionClass::General => FcFunctionClass::General,
        };
        let d = lift(m.check_degradedness())?;
        write_out(
            out,
            FcClassification {
                function_class: class,
                eve_degraded: d.eve_degraded,
                fusion_degraded: d.fusion_degraded,
                residual_eve: d.residual_eve,
                residual_fusion: d.residual_fusion,
            },
        )
    })
}

/// Evaluate lemma 1-4. Lemma 1 uses the identity auxiliary system and
/// lemma 2 a constant time-sharing variable.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_evaluate_lemma(model: *const FcModel, lemma: u32, out: *mut FcRateBounds) -> FcStatus {
    guarded(|| {
        let m = model_ref(model)?;
        let b = match lemma {
            1 => lift(regions::eval_lemma1(m, &AuxSystem::identity(m)))?,
            2 => lift(regions::eval_lemma2(m, None))?,
            3 => lift(regions::eval_lemma3(m))?,
            4 => lift(regions::eval_lemma4(m))?,
            other => {
                set_error(&format!("no lemma {other}"));
                return Err(FcStatus::InvalidArgument);
            }
        };
        write_out(out, bounds(b))
    })
}

/// Lossless inner bound for a preset auxiliary system.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_evaluate_inner(
    model: *const FcModel,
    preset: FcAuxPreset,
    out: *mut FcRateBounds,
) -> FcStatus {
    guarded(|| {
        let m = model_ref(model)?;
        let aux = match preset {
            FcAuxPreset::Identity => AuxSystem::identity(m),
            FcAuxPreset::Constant => AuxSystem::constant(m),
        };
        write_out(out, bounds(lift(regions::eval_inner_lossless(m, &aux))?))
    })
}

/// Exact simulation with direct binning at stored rates `w1`, `w2`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_simulate_exact(
    model: *const FcModel,
    n: usize,
    w1: f64,
    w2: f64,
    seed: u64,
    out: *mut FcSimReport,
) -> FcStatus {
    guarded(|| {
        let m = model_ref(model)?;
        let r = lift(simulate_exact(m, n, &BinRates::invertible(w1, w2), seed))?;
        write_out(
            out,
            FcSimReport {
                n: r.n,
                error_prob: r.error_prob,
                secrecy_leak: r.secrecy_leak.unwrap_or(f64::NAN),
                priv_dec: r.priv_dec.unwrap_or(f64::NAN),
                priv_eve: r.priv_eve.unwrap_or(f64::NAN),
                storage1: r.storage1,
                storage2: r.storage2,
            },
        )
    })
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next `fc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
