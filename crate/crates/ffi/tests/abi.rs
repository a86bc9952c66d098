use std::ffi::{CStr, CString};
use std::ptr;

use funcomp_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fc_last_error_message()) }.to_string_lossy().into_owned()
}

fn example() -> *mut FcModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fc_model_bernoulli(0.2, 0.11, 0.3, 0.25, &mut m) }, FcStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn lemma4_through_the_abi() {
    let m = example();
    let mut b = std::mem::MaybeUninit::<FcRateBounds>::uninit();
    assert_eq!(unsafe { fc_evaluate_lemma(m, 4, b.as_mut_ptr()) }, FcStatus::Ok);
    let b = unsafe { b.assume_init() };
    assert_eq!(b.origin, FcOrigin::Lemma4);
    assert!((b.r_s - 0.7579).abs() < 5e-5);
    assert!((b.r_l_eve - 0.1469).abs() < 5e-5);
    assert!(!b.has_d);
    unsafe { fc_model_free(m) };
}

#[test]
fn classification_and_precondition_codes() {
    let m = example();
    let mut c = std::mem::MaybeUninit::<FcClassification>::uninit();
    assert_eq!(unsafe { fc_classify(m, c.as_mut_ptr()) }, FcStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert_eq!(c.function_class, FcFunctionClass::Invertible);
    assert!(c.fusion_degraded && !c.eve_degraded);

    let mut b = std::mem::MaybeUninit::<FcRateBounds>::uninit();
    assert_eq!(unsafe { fc_evaluate_lemma(m, 3, b.as_mut_ptr()) }, FcStatus::Precondition);
    assert!(last_error().contains("not eve-degraded"));
    assert_eq!(unsafe { fc_evaluate_lemma(m, 9, b.as_mut_ptr()) }, FcStatus::InvalidArgument);
    assert_eq!(unsafe { fc_evaluate_inner(m, FcAuxPreset::Constant, b.as_mut_ptr()) }, FcStatus::Precondition);
    assert!(last_error().contains("aux not admissible"));
    assert_eq!(unsafe { fc_evaluate_inner(m, FcAuxPreset::Identity, b.as_mut_ptr()) }, FcStatus::Ok);
    unsafe { fc_model_free(m) };
}

#[test]
fn simulation_and_guard() {
    let m = example();
    let mut r = std::mem::MaybeUninit::<FcSimReport>::uninit();
    assert_eq!(unsafe { fc_simulate_exact(m, 1, 1.0, 1.0, 3, r.as_mut_ptr()) }, FcStatus::Ok);
    let r = unsafe { r.assume_init() };
    assert!((r.secrecy_leak - 0.7578701189727858).abs() < 1e-9);
    assert_eq!(r.error_prob, 0.0);
    let mut r = std::mem::MaybeUninit::<FcSimReport>::uninit();
    assert_eq!(unsafe { fc_simulate_exact(m, 9, 1.0, 1.0, 3, r.as_mut_ptr()) }, FcStatus::Guard);
    unsafe { fc_model_free(m) };
}

#[test]
fn json_models_and_bad_input() {
    let m = funcomp::SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap();
    let json = CString::new(funcomp::io::model_to_json(&m)).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fc_model_from_json(json.as_ptr(), &mut h) }, FcStatus::Ok);
    unsafe { fc_model_free(h) };

    let bad = CString::new("{\"schema_version\": 1").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fc_model_from_json(bad.as_ptr(), &mut h) }, FcStatus::Parse);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { fc_model_from_json(ptr::null(), &mut h) }, FcStatus::NullPointer);
    assert_eq!(unsafe { fc_classify(ptr::null(), ptr::null_mut()) }, FcStatus::NullPointer);
    assert_eq!(unsafe { fc_model_bernoulli(2.0, 0.1, 0.1, 0.1, &mut h) }, FcStatus::Validation);
    unsafe { fc_model_free(ptr::null_mut()) };
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(fc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/funcomp.h")).unwrap();
    for name in [
        "fc_model_from_json",
        "fc_model_bernoulli",
        "fc_model_free",
        "fc_classify",
        "fc_evaluate_lemma",
        "fc_evaluate_inner",
        "fc_simulate_exact",
        "fc_last_error_message",
        "typedef struct FcModel FcModel",
        "FC_STATUS_PRECONDITION",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
