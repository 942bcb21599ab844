use std::ffi::{CStr, CString};
use std::ptr;

use vaporlight_ffi::*;

fn last_error() -> String {
    let p = vl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_helpers() {
    let mut n = 0.0;
    assert_eq!(unsafe { vl_killian_density(338.15, &mut n) }, VlStatus::Ok);
    assert!(n > 1e11 && n < 1e13, "{n}");
    assert!(vl_last_error().is_null());

    let mut shift = 0.0;
    assert_eq!(unsafe { vl_zeeman_shift(1e-6, &mut shift) }, VlStatus::Ok);
    assert!(shift > 0.0);

    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { vl_eit_susceptibility(0.0, 1e3, 3e7, 1e7, &mut re, &mut im) }, VlStatus::Ok);
    assert_eq!((re, im), (0.0, 0.0));
}

#[test]
fn errors_are_reported() {
    let mut n = 0.0;
    assert_eq!(unsafe { vl_killian_density(-1.0, &mut n) }, VlStatus::InvalidInput);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { vl_killian_density(300.0, ptr::null_mut()) }, VlStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut cfg = ptr::null_mut();
    let bad = CString::new("kind = \"nope\"").unwrap();
    let status = unsafe { vl_sweep_config_from_toml(bad.as_ptr(), &mut cfg) };
    assert_ne!(status, VlStatus::Ok);
    assert!(cfg.is_null());
    assert_eq!(unsafe { vl_sweep_config_from_toml(ptr::null(), &mut cfg) }, VlStatus::NullPointer);

    let (mut w, mut r) = (0.0, 0.0);
    let junk = CString::new("not a dataset").unwrap();
    assert_ne!(unsafe { vl_fit_window(junk.as_ptr(), &mut w, &mut r) }, VlStatus::Ok);

    unsafe {
        vl_sweep_config_free(ptr::null_mut());
        vl_sweep_result_free(ptr::null_mut());
    }
    assert_eq!(unsafe { vl_sweep_result_rows(ptr::null()) }, 0);
}

#[test]
fn sweep_round_trip_through_fit() {
    let toml = CString::new(
        "kind = \"slowing\"\n[sweep]\nparameter = \"duration_us\"\nvalues = [2, 5, 10, 30, 100]\n\
         [medium]\noptical_depth = 20.0\nwindow_khz = 50.0\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { vl_sweep_config_from_toml(toml.as_ptr(), &mut cfg) }, VlStatus::Ok);
    assert_eq!(unsafe { vl_sweep_config_set_grid_scale(cfg, 0.0) }, VlStatus::InvalidInput);

    let mut result = ptr::null_mut();
    assert_eq!(unsafe { vl_sweep_run(cfg, 1, &mut result) }, VlStatus::Ok);
    unsafe { vl_sweep_config_free(cfg) };
    assert_eq!(unsafe { vl_sweep_result_rows(result) }, 5);
    assert_eq!(unsafe { vl_sweep_result_failures(result) }, 0);

    let mut needed = 0usize;
    let status = unsafe { vl_sweep_result_csv(result, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(status, VlStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed];
    assert_eq!(unsafe { vl_sweep_result_csv(result, buf.as_mut_ptr(), buf.len(), &mut needed) }, VlStatus::Ok);
    unsafe { vl_sweep_result_free(result) };

    let (mut w, mut r) = (0.0, 0.0);
    assert_eq!(unsafe { vl_fit_window(buf.as_ptr(), &mut w, &mut r) }, VlStatus::Ok);
    assert!((w / 50e3 - 1.0).abs() <= 0.05, "{w}");
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(vl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/vaporlight.h");
    for name in [
        "vl_last_error",
        "vl_version",
        "vl_killian_density",
        "vl_zeeman_shift",
        "vl_rabi_from_power",
        "vl_eit_susceptibility",
        "vl_sweep_config_from_toml",
        "vl_sweep_config_set_grid_scale",
        "vl_sweep_config_free",
        "vl_sweep_run",
        "vl_sweep_result_rows",
        "vl_sweep_result_failures",
        "vl_sweep_result_csv",
        "vl_sweep_result_free",
        "vl_fit_window",
    ] {
        let declared = header.contains(&format!(" {name}(")) || header.contains(&format!("*{name}("));
        assert!(declared, "{name} missing from header");
    }
    assert!(header.contains("typedef struct VlSweepConfig VlSweepConfig;"));
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let src = std::env::temp_dir().join(format!("vaporlight_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"vaporlight.h\"\nint main(void) { return vl_version() == 0; }\n").unwrap();
    let status = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
