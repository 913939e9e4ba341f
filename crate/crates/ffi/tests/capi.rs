use std::ffi::{CStr, CString};
use std::ptr;

use dgm_ffi::*;

fn model(name: &str) -> *mut DgmModel {
    let json = CString::new(dgm_core::fixtures::text(name).unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dgm_model_from_json(json.as_ptr(), &mut m) }, DgmStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut libc::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { dgm_string_free(s) };
    out
}

fn last_error() -> String {
    let p = dgm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(dgm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn dimensions_of_chain() {
    let m = model("chain");
    let (mut v, mut p, mut c) = (0, 0, 0);
    assert_eq!(unsafe { dgm_model_dimensions(m, &mut v, &mut p, &mut c) }, DgmStatus::Ok);
    assert_eq!((v, p, c), (3, 8, 12));
    unsafe { dgm_model_free(m) };
}

#[test]
fn null_and_utf8_arguments() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dgm_model_from_json(ptr::null(), &mut m) }, DgmStatus::NullPointer);
    assert!(last_error().contains("json"));
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { dgm_model_from_json(bad.as_ptr().cast(), &mut m) },
        DgmStatus::InvalidUtf8
    );
    let mut n = 0;
    assert_eq!(
        unsafe { dgm_model_dimensions(ptr::null(), &mut n, &mut n, &mut n) },
        DgmStatus::NullPointer
    );
    unsafe { dgm_model_free(ptr::null_mut()) };
    unsafe { dgm_string_free(ptr::null_mut()) };
}

#[test]
fn non_decomposable_model_is_a_user_error() {
    let json = CString::new(dgm_core::fixtures::text("cycle4").unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dgm_model_from_json(json.as_ptr(), &mut m) }, DgmStatus::UserError);
    assert!(m.is_null());
    assert!(last_error().contains("chordless"));
}

#[test]
fn prior_mean_round_trips_through_theta() {
    let m = model("six");
    let (mut prior, mut xi, mut back) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let pcond = CString::new("pcond").unwrap();
    let seed_kind = CString::new("pcond").unwrap();
    assert_eq!(
        unsafe { dgm_sample(m, seed_kind.as_ptr(), 1, 7, ptr::null(), 0, &mut prior) },
        DgmStatus::Ok
    );
    let draws: serde_json::Value = serde_json::from_str(&take(prior)).unwrap();
    let draw = CString::new(draws[0].to_string()).unwrap();
    let to = CString::new("xi").unwrap();
    assert_eq!(unsafe { dgm_transform(m, draw.as_ptr(), to.as_ptr(), 1e-9, &mut xi) }, DgmStatus::Ok);
    let xi = CString::new(take(xi)).unwrap();
    assert_eq!(unsafe { dgm_transform(m, xi.as_ptr(), pcond.as_ptr(), 1e-9, &mut back) }, DgmStatus::Ok);
    let back: serde_json::Value = serde_json::from_str(&take(back)).unwrap();
    let probs = |v: &serde_json::Value| -> Vec<f64> {
        v["blocks"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|b| b["probs"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
            .collect()
    };
    let (a, b) = (probs(&draws[0]), probs(&back));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
    unsafe { dgm_model_free(m) };
}

#[test]
fn loglik_is_invariant_across_parametrizations() {
    let m = model("chain");
    let mut draws = ptr::null_mut();
    let kind = CString::new("joint").unwrap();
    assert_eq!(unsafe { dgm_sample(m, kind.as_ptr(), 1, 3, ptr::null(), 0, &mut draws) }, DgmStatus::Ok);
    let draws: serde_json::Value = serde_json::from_str(&take(draws)).unwrap();
    let dump = CString::new(draws[0].to_string()).unwrap();
    let counts: Vec<u64> = (1..=12).collect();
    let mut values = Vec::new();
    for k in ["joint", "pcond", "mod", "cond", "cliq", "xi"] {
        let k = CString::new(k).unwrap();
        let mut v = 0.0;
        assert_eq!(
            unsafe { dgm_loglik(m, dump.as_ptr(), k.as_ptr(), counts.as_ptr(), counts.len(), 1e-9, &mut v) },
            DgmStatus::Ok
        );
        values.push(v);
    }
    for v in &values {
        assert!((v - values[0]).abs() < 1e-10, "{values:?}");
    }
    unsafe { dgm_model_free(m) };
}

#[test]
fn wrong_table_size_is_reported() {
    let m = model("chain");
    let counts = [1u64; 5];
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { dgm_posterior(m, counts.as_ptr(), counts.len(), &mut out) },
        DgmStatus::UserError
    );
    assert!(out.is_null());
    unsafe { dgm_model_free(m) };
}

#[test]
fn posterior_adds_counts_to_half() {
    let m = model("chain");
    let counts: Vec<u64> = vec![0; 12];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dgm_posterior(m, counts.as_ptr(), 12, &mut out) }, DgmStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    let kind = CString::new("pcond").unwrap();
    let mut prior = ptr::null_mut();
    assert_eq!(unsafe { dgm_prior(m, kind.as_ptr(), &mut prior) }, DgmStatus::Ok);
    let p: serde_json::Value = serde_json::from_str(&take(prior)).unwrap();
    assert_eq!(v["blocks"], p["blocks"]);
    unsafe { dgm_model_free(m) };
}

#[test]
fn cut_and_witness() {
    let m = model("eleven");
    let mut out = ptr::null_mut();
    let set = CString::new("1,2,3,4,5,6").unwrap();
    assert_eq!(unsafe { dgm_cut(m, set.as_ptr(), true, &mut out) }, DgmStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 3);
    assert!(v["prior"]["blocks"].is_array());
    let bad = CString::new("1,2,4").unwrap();
    assert_eq!(unsafe { dgm_cut(m, bad.as_ptr(), false, &mut out) }, DgmStatus::UserError);
    assert!(!last_error().is_empty());
    unsafe { dgm_model_free(m) };
}

#[test]
fn verify_passes() {
    let mut ok = 0;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { dgm_verify(0, &mut ok, &mut report) }, DgmStatus::Ok);
    assert_eq!(ok, 1);
    assert!(take(report).contains("checks"));
}
