use std::ffi::{CStr, CString};
use std::ptr;

use franson_ffi::*;

fn last_error() -> String {
    let p = franson_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(franson_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn pure_math() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            franson_coincidence_probability(1, 1, 0.0, 0.0, 1.0, &mut out),
            FransonStatus::Ok
        );
        assert!((out - 0.25).abs() < 1e-15);
        assert_eq!(
            franson_chsh_s_standard(std::f64::consts::FRAC_1_SQRT_2, &mut out),
            FransonStatus::Ok
        );
        assert!((out - 2.0).abs() < 1e-12);
        assert_eq!(
            franson_significance_from_visibility(0.957, 0.0315, &mut out),
            FransonStatus::Ok
        );
        assert!((out - 7.93).abs() < 0.01);
        assert_eq!(franson_correlation(0.3, -0.3, 0.5, &mut out), FransonStatus::Ok);
        assert!((out - 0.5).abs() < 1e-15);
    }
    assert!((franson_accidental_rate(250e3, 380e3, 350e-12) - 33.25).abs() < 1e-9);
}

#[test]
fn bad_arguments_report_errors() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            franson_coincidence_probability(2, 1, 0.0, 0.0, 1.0, &mut out),
            FransonStatus::InvalidArgument
        );
        assert!(last_error().contains("+1 or -1"));
        assert_eq!(
            franson_correlation(0.0, 0.0, 1.5, &mut out),
            FransonStatus::InvalidArgument
        );
        assert_eq!(
            franson_chsh_s_standard(1.0, ptr::null_mut()),
            FransonStatus::NullPointer
        );
        assert_eq!(
            franson_significance_from_visibility(0.9, 0.0, &mut out),
            FransonStatus::InvalidArgument
        );
    }
}

#[test]
fn config_lifecycle_and_simulation() {
    let cfg = franson_config_new_default();
    unsafe {
        assert_eq!(franson_config_set_visibility(cfg, 1.2), FransonStatus::InvalidArgument);
        assert_eq!(franson_config_set_visibility(cfg, 0.9), FransonStatus::Ok);
        let mut hash = [0 as std::ffi::c_char; 17];
        assert_eq!(
            franson_config_hash(cfg, hash.as_mut_ptr(), hash.len()),
            FransonStatus::Ok
        );
        assert_eq!(CStr::from_ptr(hash.as_ptr()).to_bytes().len(), 16);
        assert_eq!(
            franson_config_hash(cfg, hash.as_mut_ptr(), 4),
            FransonStatus::InvalidArgument
        );

        let mut a = FransonCountSummary::default();
        let mut b = FransonCountSummary::default();
        assert_eq!(
            franson_simulate_setting(cfg, 0.0, 0.0, 0.05, 3, &mut a),
            FransonStatus::Ok
        );
        assert_eq!(
            franson_simulate_setting(cfg, 0.0, 0.0, 0.05, 3, &mut b),
            FransonStatus::Ok
        );
        assert_eq!(a, b);
        assert!(a.singles_start[0] > 0 && a.singles_stop[1] > 0);
        assert_eq!(a.window_width, 350e-12);
        assert_eq!(
            franson_simulate_setting(cfg, 0.0, 0.0, -1.0, 3, &mut a),
            FransonStatus::InvalidArgument
        );
        assert_eq!(
            franson_simulate_setting(ptr::null(), 0.0, 0.0, 1.0, 3, &mut a),
            FransonStatus::NullPointer
        );
        franson_config_free(cfg);
        franson_config_free(ptr::null_mut());
    }
}

#[test]
fn scan_and_chsh_on_lossless_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lossless.toml");
    std::fs::write(
        &path,
        r#"
visibility = 1.0
[source]
pair_rate = "20kHz"
arm1_transmission = 1.0
arm2_transmission = 1.0
split_efficiency = 1.0
[detector_start]
efficiency = 1.0
dark_rate = 0
jitter_fwhm = 0
[detector_stop]
efficiency = 1.0
dark_rate = 0
jitter_fwhm = 0
"#,
    )
    .unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(franson_config_load(cpath.as_ptr(), &mut cfg), FransonStatus::Ok);
        let mut fit = FransonFringeFit::default();
        assert_eq!(
            franson_scan_fit(cfg, FRANSON_AXIS_PHASE2, 13, 1.0, 0.2, 5, &mut fit),
            FransonStatus::Ok
        );
        assert!(
            (fit.visibility - 1.0).abs() < 5.0 * fit.visibility_sigma + 0.02,
            "{fit:?}"
        );
        assert!((fit.period - std::f64::consts::TAU).abs() < 0.1);
        assert_eq!(
            franson_scan_fit(cfg, 7, 13, 1.0, 0.2, 5, &mut fit),
            FransonStatus::InvalidArgument
        );

        let mut report = FransonChshReport::default();
        assert_eq!(franson_chsh(cfg, 0.5, 11, &mut report), FransonStatus::Ok);
        assert!(report.violates);
        assert!((report.s - 2.0 * std::f64::consts::SQRT_2).abs() < 5.0 * report.s_sigma);
        franson_config_free(cfg);
    }
}

#[test]
fn config_load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[tphc]\nwindow_width = \"800ps\"\n").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(franson_config_load(cpath.as_ptr(), &mut cfg), FransonStatus::Config);
        assert!(last_error().contains("tphc.window_width"));
        assert!(cfg.is_null());
        let missing = CString::new(dir.path().join("nope.toml").to_str().unwrap()).unwrap();
        assert_eq!(franson_config_load(missing.as_ptr(), &mut cfg), FransonStatus::Io);
        assert_eq!(franson_config_load(ptr::null(), &mut cfg), FransonStatus::NullPointer);
    }
}
