use std::ffi::{CStr, CString};
use std::ptr;

use noma_secrecy_ffi::*;

fn last_error() -> String {
    let p = ns_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn exact_sop_through_handles() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(ns_config_default(&mut cfg), NsStatus::Ok);
        assert_eq!(ns_config_set_rho_db(cfg, 30.0), NsStatus::Ok);
        let mut engine = ptr::null_mut();
        assert_eq!(ns_engine_new(cfg, &mut engine), NsStatus::Ok);
        ns_config_free(cfg);

        let mut n = f64::NAN;
        let mut pair = f64::NAN;
        assert_eq!(ns_sop_exact(engine, NsScenario::ExternalN, &mut n), NsStatus::Ok);
        assert_eq!(ns_sop_exact(engine, NsScenario::ExternalPair, &mut pair), NsStatus::Ok);
        assert!(n > 0.0 && n < pair && pair < 1.0, "{n} {pair}");
        let mut floor = f64::NAN;
        assert_eq!(ns_sop_asymptotic(engine, NsScenario::ExternalN, &mut floor), NsStatus::Ok);
        assert!(floor > 0.0 && floor < n);
        ns_engine_free(engine);
    }
}

#[test]
fn json_config_and_monte_carlo() {
    unsafe {
        let json = CString::new(r#"{"k": 1, "sic": {"kind": "perfect"}, "rho_db": 30}"#).unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(ns_config_from_json(json.as_ptr(), &mut cfg), NsStatus::Ok);
        let (mut a, mut ci_a, mut b, mut ci_b) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(ns_sop_monte_carlo(cfg, NsScenario::ExternalN, 400, 3, &mut a, &mut ci_a), NsStatus::Ok);
        assert_eq!(ns_sop_monte_carlo(cfg, NsScenario::ExternalN, 400, 3, &mut b, &mut ci_b), NsStatus::Ok);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(ci_a > 0.0 && (0.0..=1.0).contains(&a));
        ns_config_free(cfg);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new(r#"{"a_n": 0.7, "a_m": 0.3}"#).unwrap();
        assert_eq!(ns_config_from_json(bad.as_ptr(), &mut cfg), NsStatus::InvalidConfig);
        assert!(cfg.is_null());
        assert!(last_error().contains("a_m"), "{}", last_error());

        let unknown = CString::new(r#"{"nope": 1}"#).unwrap();
        assert_eq!(ns_config_from_json(unknown.as_ptr(), &mut cfg), NsStatus::InvalidConfig);
        let garbage = CString::new("not json").unwrap();
        assert_eq!(ns_config_from_json(garbage.as_ptr(), &mut cfg), NsStatus::InvalidConfig);

        assert_eq!(ns_config_default(ptr::null_mut()), NsStatus::NullPointer);
        let mut out = 0.0;
        assert_eq!(ns_sop_exact(ptr::null(), NsScenario::Internal, &mut out), NsStatus::NullPointer);
        assert!(last_error().contains("engine"));

        assert_eq!(ns_config_default(&mut cfg), NsStatus::Ok);
        let (mut v, mut ci) = (0.0, 0.0);
        assert_eq!(ns_sop_monte_carlo(cfg, NsScenario::ExternalM, 0, 1, &mut v, &mut ci), NsStatus::InvalidArgument);
        assert_eq!(ns_config_set_rho_db(cfg, f64::NAN), NsStatus::InvalidConfig);
        ns_config_free(cfg);
        ns_config_free(ptr::null_mut());
        ns_engine_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ns_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/noma_secrecy.h")).unwrap();
    for sym in [
        "ns_last_error",
        "ns_version",
        "ns_config_default",
        "ns_config_from_json",
        "ns_config_set_rho_db",
        "ns_config_free",
        "ns_engine_new",
        "ns_engine_free",
        "ns_sop_exact",
        "ns_sop_asymptotic",
        "ns_sop_monte_carlo",
        "typedef struct NsConfig NsConfig",
        "NS_STATUS_PANIC = 5",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}
