use std::ffi::{CStr, CString};
use std::ptr;

use tamperlab_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { tl_string_free(s) };
    out
}

fn last_error() -> String {
    let p = tl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(json: &str) -> *mut TlConfig {
    let text = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { tl_config_from_json(text.as_ptr(), &mut cfg) }, TlStatus::Ok);
    cfg
}

#[test]
fn run_report_and_replay_round_trip() {
    let cfg = config(r#"{"suite": "twirl-identities", "seed": 3, "params": {"states": 10, "pq_states": 1}}"#);
    let mut hash = ptr::null_mut();
    assert_eq!(unsafe { tl_config_hash(cfg, &mut hash) }, TlStatus::Ok);
    assert_eq!(take(hash).len(), 64);

    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { tl_run(cfg, 2, &mut rep) }, TlStatus::Ok);
    assert_eq!(unsafe { tl_report_passed(rep) }, 1);
    let n = unsafe { tl_report_check_count(rep) };
    assert!(n >= 4);
    for i in 0..n {
        let (mut v, mut b, mut ok) = (0.0, 0.0, 0);
        assert_eq!(unsafe { tl_report_check(rep, i, &mut v, &mut b, &mut ok) }, TlStatus::Ok);
        assert_eq!(ok, 1);
        let mut name = ptr::null_mut();
        assert_eq!(unsafe { tl_report_check_name(rep, i, &mut name) }, TlStatus::Ok);
        assert!(!take(name).is_empty());
    }
    let (mut v, mut b, mut ok) = (0.0, 0.0, 0);
    assert_eq!(unsafe { tl_report_check(rep, n, &mut v, &mut b, &mut ok) }, TlStatus::OutOfRange);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { tl_report_to_json(rep, &mut json) }, TlStatus::Ok);
    let json = take(json);
    let mut matches = 0;
    let cj = CString::new(json.clone()).unwrap();
    assert_eq!(unsafe { tl_replay_json(cj.as_ptr(), &mut matches) }, TlStatus::Ok);
    assert_eq!(matches, 1);

    let mut edited: serde_json::Value = serde_json::from_str(&json).unwrap();
    edited["config"]["seed"] = 4.into();
    let cj = CString::new(edited.to_string()).unwrap();
    assert_eq!(unsafe { tl_replay_json(cj.as_ptr(), &mut matches) }, TlStatus::HashMismatch);
    assert!(last_error().contains("hash"));

    unsafe {
        tl_report_free(rep);
        tl_config_free(cfg);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { tl_config_from_json(ptr::null(), &mut cfg) }, TlStatus::NullPointer);
    let bad = CString::new(r#"{"suite": "no-such-suite"}"#).unwrap();
    assert_eq!(unsafe { tl_config_from_json(bad.as_ptr(), &mut cfg) }, TlStatus::InvalidConfig);
    assert!(last_error().contains("no-such-suite"));
    let unknown = CString::new(r#"{"suite": "lrss", "colour": 1}"#).unwrap();
    assert_eq!(unsafe { tl_config_from_json(unknown.as_ptr(), &mut cfg) }, TlStatus::InvalidConfig);
    let name = CString::new("capacity").unwrap();
    assert_eq!(unsafe { tl_config_new(name.as_ptr(), 1, ptr::null_mut()) }, TlStatus::NullPointer);

    // A bad suite parameter is only noticed when the suite runs.
    let cfg = config(r#"{"suite": "tdc-reduction", "params": {"lambdas": [9]}}"#);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { tl_run(cfg, 1, &mut rep) }, TlStatus::InvalidConfig);
    assert!(rep.is_null());
    unsafe { tl_config_free(cfg) };

    assert_eq!(unsafe { tl_report_passed(ptr::null()) }, -1);
    assert_eq!(unsafe { tl_report_check_count(ptr::null()) }, 0);
    unsafe {
        tl_config_free(ptr::null_mut());
        tl_report_free(ptr::null_mut());
        tl_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(dir.join("tamperlab.h")).unwrap();
    for f in [
        "tl_last_error",
        "tl_version",
        "tl_config_from_json",
        "tl_config_new",
        "tl_config_hash",
        "tl_config_free",
        "tl_run",
        "tl_report_passed",
        "tl_report_check_count",
        "tl_report_check",
        "tl_report_check_name",
        "tl_report_to_json",
        "tl_report_free",
        "tl_replay_json",
        "tl_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    let probe = std::env::temp_dir().join(format!("tamperlab_probe_{}.c", std::process::id()));
    std::fs::write(&probe, "#include \"tamperlab.h\"\nint main(void) { TlConfig *c = 0; return (int)tl_config_new(\"capacity\", 1, &c); }\n").unwrap();
    match std::process::Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&dir).arg(&probe).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax not checked"),
    }
    let _ = std::fs::remove_file(probe);
}
