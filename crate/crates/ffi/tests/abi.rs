use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use obe_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(obe_last_error()) }.to_string_lossy().into_owned()
}

fn tables(qmax: u32) -> *mut ObeTables {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { obe_tables_build(qmax, &mut t) }, ObeStatus::Ok);
    t
}

#[test]
fn builtin_ground_state_through_the_c_abi() {
    let t = tables(12);
    let name = CString::new("gauss3b").unwrap();
    let mut r = ptr::null_mut();
    let st = unsafe { obe_solve_builtin(name.as_ptr(), 0, 1, 12, 1.6365, 2, t, &mut r) };
    assert_eq!(st, ObeStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(obe_result_len(r), 2);
        assert_eq!(obe_result_basis_size(r), 23);
        let (mut e, mut rr) = (0.0, 0.0);
        assert_eq!(obe_result_state(r, 0, &mut e, &mut rr), ObeStatus::Ok);
        assert!((e + 1.739830590).abs() < 1e-8, "{e}");
        assert!(rr > 0.0);
        assert_eq!(obe_result_state(r, 5, &mut e, ptr::null_mut()), ObeStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(obe_result_scales(r, &mut a, &mut b), ObeStatus::Ok);
        assert!((b - a * 3f64.sqrt() / 2.0).abs() < 1e-14);
        let mut js = ptr::null_mut();
        assert_eq!(obe_result_json(r, &mut js), ObeStatus::Ok);
        let text = CStr::from_ptr(js).to_str().unwrap().to_owned();
        obe_string_free(js);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["basis_size"], 23);
        obe_result_free(r);
        obe_tables_free(t);
    }
}

#[test]
fn toml_config_and_table_files() {
    let dir = std::env::temp_dir().join(format!("obe-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("t.bin").to_str().unwrap()).unwrap();
    let t = tables(8);
    unsafe {
        assert_eq!(obe_tables_save(t, path.as_ptr()), ObeStatus::Ok);
        obe_tables_free(t);
        let mut u = ptr::null_mut();
        assert_eq!(obe_tables_load(path.as_ptr(), &mut u), ObeStatus::Ok);
        let mut q = 0;
        assert_eq!(obe_tables_qmax(u, &mut q), ObeStatus::Ok);
        assert_eq!(q, 8);
        let cfg = CString::new(
            "[system]\nbuiltin = \"coulomb3b\"\n[sector]\nl = 0\nparity = 1\nsymmetry = \"three_identical\"\nsigma = 1\n[basis]\nqmax = 8\n[variational]\na = 3.0\n",
        )
        .unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(obe_solve_toml(cfg.as_ptr(), u, &mut r), ObeStatus::Ok, "{}", last_error());
        assert_eq!(obe_result_len(r), 3);
        obe_result_free(r);

        let big = CString::new("[system]\nbuiltin = \"coulomb3b\"\n[sector]\nl = 0\nparity = 1\nsymmetry = \"three_identical\"\nsigma = 1\n[basis]\nqmax = 10\n[variational]\na = 3.0\n").unwrap();
        assert_eq!(obe_solve_toml(big.as_ptr(), u, &mut r), ObeStatus::MissingCoefficients);
        let bad = CString::new("[system]\nbuiltin = \"nope\"\n").unwrap();
        assert_eq!(obe_solve_toml(bad.as_ptr(), u, &mut r), ObeStatus::Config);
        assert!(!last_error().is_empty());
        obe_tables_free(u);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn null_and_corrupt_inputs_are_reported() {
    unsafe {
        assert_eq!(obe_tables_build(4, ptr::null_mut()), ObeStatus::NullPointer);
        let mut t = ptr::null_mut();
        assert_eq!(obe_tables_load(ptr::null(), &mut t), ObeStatus::NullPointer);
        let missing = CString::new("/nonexistent/obe/tables.bin").unwrap();
        assert_eq!(obe_tables_load(missing.as_ptr(), &mut t), ObeStatus::Io);
        assert_eq!(obe_result_len(ptr::null()), 0);
        assert_eq!(obe_result_scales(ptr::null(), ptr::null_mut(), ptr::null_mut()), ObeStatus::NullPointer);
        obe_result_free(ptr::null_mut());
        obe_tables_free(ptr::null_mut());
        obe_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/obe.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["obe_tables_build", "obe_tables_load", "obe_solve_toml", "obe_solve_builtin", "obe_result_state", "obe_last_error", "OBE_STATUS_MISSING_COEFFICIENTS"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    // compile-only check when a C compiler is present
    if let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_shared_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libobe_ffi.so");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no shared library or C compiler");
        return;
    }
    let manifest = env!("CARGO_MANIFEST_DIR");
    let bin = profile_dir.join(format!("obe-c-smoke-{}", std::process::id()));
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(format!("-L{}", profile_dir.display()))
        .arg(format!("-Wl,-rpath,{}", profile_dir.display()))
        .arg("-lobe_ffi")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    std::fs::remove_file(&bin).ok();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    let e: f64 = String::from_utf8_lossy(&run.stdout).trim().parse().unwrap();
    assert!((e + 1.739828778).abs() < 1e-8, "{e}");
}
