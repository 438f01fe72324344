use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dcause_ffi::*;

fn fixture(name: &str) -> CString {
    CString::new(format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn load(name: &str) -> *mut DcModel {
    let mut m = ptr::null_mut();
    let path = fixture(name);
    assert_eq!(unsafe { dc_model_from_path(path.as_ptr(), &mut m) }, DcStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { dc_string_free(s) };
    out
}

fn last_error() -> String {
    let p = dc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn medical_table_answers() {
    let m = load("medical.world.json");
    let mut kind = ptr::null_mut();
    assert_eq!(unsafe { dc_model_kind(m, &mut kind) }, DcStatus::Ok);
    assert_eq!(take(kind), "world_table");

    let mut yes = false;
    assert_eq!(unsafe { dc_is_responsive(m, c("c").as_ptr(), ptr::null(), &mut yes) }, DcStatus::Ok);
    assert!(yes);
    assert_eq!(unsafe { dc_is_responsive(m, c("c").as_ptr(), c("t").as_ptr(), &mut yes) }, DcStatus::Ok);
    assert!(!yes);

    let mut causes = ptr::null_mut();
    assert_eq!(unsafe { dc_find_causes(m, c("c").as_ptr(), &mut causes) }, DcStatus::Ok);
    assert_eq!(take(causes), r#"[["r"],["t"]]"#);

    let mut p = 0.0;
    let status = unsafe {
        dc_counterfactual_probability(
            m,
            c("r=take").as_ptr(),
            c("t=yes,c=yes").as_ptr(),
            c("r=dont_take").as_ptr(),
            c("c=yes").as_ptr(),
            false,
            &mut p,
        )
    };
    assert_eq!(status, DcStatus::Ok);
    assert!((p - 2.0 / 3.0).abs() < 1e-12);

    let mut canon = ptr::null_mut();
    assert_eq!(unsafe { dc_canonicalize(m, &mut canon) }, DcStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { dc_model_to_json(canon, &mut json) }, DcStatus::Ok);
    let want = std::fs::read_to_string(fixture("medical.canonical.json").to_str().unwrap()).unwrap();
    assert_eq!(take(json), want);
    unsafe {
        dc_model_free(canon);
        dc_model_free(m);
    }
}

#[test]
fn counts_inference_and_information() {
    let canon = load("medical_g.canonical.json");
    let sem = load("medical_g.sem.json");
    let functional = load("medical_g.functional.json");
    let mut n = 0u64;
    for (m, want) in [(canon, 13), (sem, 31), (functional, 15)] {
        assert_eq!(unsafe { dc_count_params(m, &mut n) }, DcStatus::Ok);
        assert_eq!(n, want);
    }

    let coin = load("coin.world.json");
    let mut p = 0.0;
    for bet in ["b=heads", "b=tails"] {
        let status = unsafe { dc_infer_probability(coin, c(bet).as_ptr(), ptr::null(), c("w=win").as_ptr(), &mut p) };
        assert_eq!(status, DcStatus::Ok);
        assert!((p - 0.5).abs() < 1e-12);
    }

    let smoking = load("smoking_voi.canonical.json");
    let mut voi = 0.0;
    assert_eq!(unsafe { dc_value_of_information(smoking, c("l(s)").as_ptr(), &mut voi) }, DcStatus::Ok);
    assert!((voi - 2.4).abs() < 1e-9);
    assert_eq!(unsafe { dc_value_of_information(smoking, c("l").as_ptr(), &mut voi) }, DcStatus::Input);
    assert!(last_error().contains('l'));
    for m in [canon, sem, functional, coin, smoking] {
        unsafe { dc_model_free(m) };
    }
}

#[test]
fn failures_report_status_and_message() {
    let mut m = ptr::null_mut();
    let bad = c(r#"{"format_version": 1, "model": "world_table", "surprise": 1}"#);
    assert_eq!(unsafe { dc_model_from_json(bad.as_ptr(), &mut m) }, DcStatus::Format);
    assert!(m.is_null());
    assert!(last_error().contains("surprise"));

    assert_eq!(unsafe { dc_model_from_json(ptr::null(), &mut m) }, DcStatus::NullArgument);
    let missing = c("/nonexistent/model.json");
    assert_ne!(unsafe { dc_model_from_path(missing.as_ptr(), &mut m) }, DcStatus::Ok);

    let canon = load("medical_g.canonical.json");
    let mut yes = false;
    assert_eq!(unsafe { dc_is_responsive(canon, c("c").as_ptr(), ptr::null(), &mut yes) }, DcStatus::WrongModelKind);
    let mut n = 0u64;
    assert_eq!(unsafe { dc_count_params(canon, ptr::null_mut()) }, DcStatus::NullArgument);
    assert_eq!(unsafe { dc_count_params(canon, &mut n) }, DcStatus::Ok);
    assert!(dc_last_error().is_null());

    let table = load("medical.world.json");
    let mut p = 0.0;
    let status = unsafe {
        dc_infer_probability(table, c("r=take").as_ptr(), c("t=yes,c=no").as_ptr(), c("c=yes").as_ptr(), &mut p)
    };
    assert_eq!(status, DcStatus::Ok);
    assert_eq!(p, 0.0);
    let status =
        unsafe { dc_infer_probability(table, c("r=maybe").as_ptr(), ptr::null(), c("c=yes").as_ptr(), &mut p) };
    assert_eq!(status, DcStatus::Input);
    unsafe {
        dc_model_free(canon);
        dc_model_free(table);
        dc_model_free(ptr::null_mut());
        dc_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(dc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_current() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dcause.h")).unwrap();
    for f in [
        "dc_version",
        "dc_last_error",
        "dc_model_from_json",
        "dc_model_from_path",
        "dc_model_free",
        "dc_string_free",
        "dc_model_kind",
        "dc_model_to_json",
        "dc_canonicalize",
        "dc_is_responsive",
        "dc_find_causes",
        "dc_count_params",
        "dc_infer_probability",
        "dc_counterfactual_probability",
        "dc_value_of_information",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct DcModel DcModel;"));
}
