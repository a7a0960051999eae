use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use aloof_ffi::*;

const SCHEMA: &str = "x:numeric\nc:categorical\ny:response-numeric\n";

fn csv() -> String {
    let mut s = String::from("x,c,y\n");
    for i in 0..40 {
        let y = if i < 20 { 1.0 } else { 5.0 };
        s.push_str(&format!("{i},{},{y}\n", ["a", "b", "c"][i % 3]));
    }
    s
}

fn dataset() -> *mut AloofDataset {
    let (c, s) = (CString::new(csv()).unwrap(), CString::new(SCHEMA).unwrap());
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { aloof_dataset_parse(c.as_ptr(), s.as_ptr(), &mut d) }, AloofStatus::Ok);
    d
}

fn last_error() -> String {
    let p = aloof_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fit_predict_round_trip() {
    let d = dataset();
    let (mut rows, mut p) = (0, 0);
    assert_eq!(unsafe { aloof_dataset_shape(d, &mut rows, &mut p) }, AloofStatus::Ok);
    assert_eq!((rows, p), (40, 2));

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { aloof_model_fit(d, ptr::null(), &mut m) }, AloofStatus::Ok);
    let mut pred = vec![0.0; rows];
    assert_eq!(unsafe { aloof_model_predict(m, d, pred.as_mut_ptr(), rows) }, AloofStatus::Ok);
    assert_eq!(pred[0], 1.0);
    assert_eq!(pred[39], 5.0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { aloof_model_to_json(m, &mut json) }, AloofStatus::Ok);
    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { aloof_model_from_json(json, &mut m2) }, AloofStatus::Ok);
    let mut pred2 = vec![0.0; rows];
    assert_eq!(unsafe { aloof_model_predict(m2, d, pred2.as_mut_ptr(), rows) }, AloofStatus::Ok);
    assert_eq!(pred, pred2);

    unsafe {
        aloof_string_free(json);
        aloof_model_free(m);
        aloof_model_free(m2);
        aloof_dataset_free(d);
    }
}

#[test]
fn ensembles_through_options() {
    let d = dataset();
    for learner in [AloofLearner::GradientBoosting, AloofLearner::RandomForest] {
        let mut o = aloof_fit_options_default();
        o.learner = learner;
        o.selector = AloofSelector::Cart;
        o.trees = 5;
        o.seed = 3;
        let mut m = ptr::null_mut();
        assert_eq!(unsafe { aloof_model_fit(d, &o, &mut m) }, AloofStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(unsafe { aloof_model_to_json(m, &mut json) }, AloofStatus::Ok);
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
        assert!(text.contains("\"members\""));
        unsafe {
            aloof_string_free(json);
            aloof_model_free(m);
        }
    }
    unsafe { aloof_dataset_free(d) };
}

#[test]
fn loo_scores_prefer_signal_feature() {
    let d = dataset();
    let (mut s, mut v, mut base) = ([0.0; 2], [0u8; 2], 0.0);
    assert_eq!(unsafe { aloof_loo_scores(d, 1, s.as_mut_ptr(), v.as_mut_ptr(), 2, &mut base) }, AloofStatus::Ok);
    assert_eq!(v, [1, 1]);
    assert!(s[0] < s[1] && s[0] < base);
    assert_eq!(unsafe { aloof_loo_scores(d, 1, s.as_mut_ptr(), v.as_mut_ptr(), 3, &mut base) }, AloofStatus::BufferTooSmall);
    unsafe { aloof_dataset_free(d) };
}

#[test]
fn errors_set_status_and_message() {
    let mut d = ptr::null_mut();
    let bad = CString::new("x:numeric\n").unwrap();
    let c = CString::new("x\n1\n").unwrap();
    assert_eq!(unsafe { aloof_dataset_parse(c.as_ptr(), bad.as_ptr(), &mut d) }, AloofStatus::Schema);
    assert!(last_error().contains("schema"));
    assert!(d.is_null());

    assert_eq!(unsafe { aloof_dataset_parse(ptr::null(), bad.as_ptr(), &mut d) }, AloofStatus::NullPointer);

    let missing = CString::new("/nonexistent/file.csv").unwrap();
    let schema = CString::new("/nonexistent/file.schema").unwrap();
    assert_eq!(unsafe { aloof_dataset_load(missing.as_ptr(), schema.as_ptr(), &mut d) }, AloofStatus::Io);

    let junk = CString::new("{\"format_version\": 99}").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { aloof_model_from_json(junk.as_ptr(), &mut m) }, AloofStatus::Format);

    let (mut e, mut n) = (0.0, 0.0);
    assert_eq!(unsafe { aloof_sign_test(3, 2, &mut e, &mut n) }, AloofStatus::InvalidArgument);
    assert_eq!(unsafe { aloof_sign_test(10, 10, &mut e, &mut n) }, AloofStatus::Ok);
    assert_eq!(e, 1.0 / 1024.0);
    assert!(aloof_last_error().is_null());
}

#[test]
fn null_handles_are_rejected() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { aloof_model_fit(ptr::null(), ptr::null(), &mut m) }, AloofStatus::NullPointer);
    unsafe {
        aloof_model_free(ptr::null_mut());
        aloof_dataset_free(ptr::null_mut());
        aloof_string_free(ptr::null_mut());
    }
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include").join("aloof.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["aloof_model_fit", "aloof_last_error", "typedef struct AloofModel AloofModel", "ALOOF_STATUS_OK"] {
        assert!(text.contains(sym), "{sym}");
    }
    let lib = target_dir().join("libaloof_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include "aloof.h"
#include <stdio.h>
int main(void) {
    double exact = 0, normal = 0;
    if (aloof_sign_test(9, 10, &exact, &normal) != ALOOF_STATUS_OK) return 1;
    if (exact * 1024.0 != 11.0) return 2;
    AloofDataset *d = NULL;
    if (aloof_dataset_parse(NULL, "", &d) != ALOOF_STATUS_NULL_POINTER) return 3;
    if (aloof_last_error() == NULL) return 4;
    AloofFitOptions o = aloof_fit_options_default();
    if (o.selector != ALOOF_SELECTOR_ALOOF) return 5;
    const char *csv = "x,y\n1,0\n2,0\n3,1\n4,1\n";
    if (aloof_dataset_parse(csv, "x:numeric\ny:response-numeric\n", &d) != ALOOF_STATUS_OK) return 6;
    AloofModel *m = NULL;
    o.selector = ALOOF_SELECTOR_CART;
    if (aloof_model_fit(d, &o, &m) != ALOOF_STATUS_OK) return 7;
    double p[4];
    if (aloof_model_predict(m, d, p, 4) != ALOOF_STATUS_OK) return 8;
    if (p[0] != 0.0 || p[3] != 1.0) return 9;
    aloof_model_free(m);
    aloof_dataset_free(d);
    puts("ok");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
