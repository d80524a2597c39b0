use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ripple_opf::opf::OpfSolution;
use ripple_opf::power_flow::PowerFlowResult;
use ripple_opf_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ropf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { ropf_string_free(p) };
    s
}

#[test]
fn power_flow_round_trips_through_json() {
    let mut net = ptr::null_mut();
    let text = cstr(&ripple_opf::presets::demo_feeder().to_json().unwrap());
    assert_eq!(
        unsafe { ropf_network_from_json(text.as_ptr(), &mut net) },
        RopfStatus::Ok
    );
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ropf_power_flow(net, &mut out) }, RopfStatus::Ok);
    let r: PowerFlowResult = serde_json::from_str(&take(out)).unwrap();
    assert!(r.residual < 1e-8);
    unsafe { ropf_network_free(net) };
}

#[test]
fn opf_accepts_an_objective() {
    let mut net = ptr::null_mut();
    assert_eq!(
        unsafe { ropf_network_preset(cstr("statcom_toy").as_ptr(), &mut net) },
        RopfStatus::Ok
    );
    let obj = cstr(r#"{"kind": "min_max_phase_current", "target_branch": "feeder"}"#);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ropf_opf(net, obj.as_ptr(), &mut out) },
        RopfStatus::Ok,
        "{}",
        last_error()
    );
    let sol: OpfSolution = serde_json::from_str(&take(out)).unwrap();
    assert!(sol.objective_value > 0.0);

    let bad = cstr(r#"{"kind": "min_max_phase_current", "target_branch": "nope"}"#);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ropf_opf(net, bad.as_ptr(), &mut out) },
        RopfStatus::InvalidInput
    );
    assert!(last_error().contains("nope"));
    unsafe { ropf_network_free(net) };
}

#[test]
fn errors_are_reported_without_panicking() {
    let mut net = ptr::null_mut();
    assert_eq!(
        unsafe { ropf_network_from_json(ptr::null(), &mut net) },
        RopfStatus::NullPointer
    );
    let broken = cstr("{\"schema_version\": 1");
    assert_eq!(
        unsafe { ropf_network_from_json(broken.as_ptr(), &mut net) },
        RopfStatus::InvalidInput
    );
    assert!(net.is_null());
    assert_eq!(unsafe { ropf_network_bus_count(ptr::null()) }, 0);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ropf_power_flow(ptr::null(), &mut out) },
        RopfStatus::NullPointer
    );
    unsafe {
        ropf_network_free(ptr::null_mut());
        ropf_string_free(ptr::null_mut());
    }
}

#[test]
fn oracle_case_fills_the_summary() {
    let mut s = RopfOracleSummary::default();
    assert_eq!(
        unsafe { ropf_oracle_case(cstr("3c").as_ptr(), &mut s) },
        RopfStatus::Ok
    );
    assert!((s.simulated_ripple_w - s.proposed_ripple_w).abs() < 1e-3 * s.proposed_ripple_w);
    assert_eq!(
        unsafe { ropf_oracle_case(cstr("9z").as_ptr(), &mut s) },
        RopfStatus::InvalidInput
    );
}

#[test]
fn ripple_phasor_sums_leg_products() {
    let v = [240.0, 0.0, 0.0, 10.0];
    let i = [2.0, 0.0, 0.0, 1.0];
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(
        unsafe { ropf_ripple_phasor(v.as_ptr(), i.as_ptr(), 2, &mut re, &mut im) },
        RopfStatus::Ok
    );
    assert_eq!((re, im), (470.0, 0.0));
}

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/ripple_opf.h");
    assert!(header.exists());
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libripple_opf_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
