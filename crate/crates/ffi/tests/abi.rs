use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bfcalc_ffi::*;

fn tutorial() -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tutorial/torus.bfh");
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bfc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn run_matches_golden_report() {
    unsafe {
        let mut doc = ptr::null_mut();
        assert_eq!(bfc_document_parse(tutorial().as_ptr(), &mut doc), BfcStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(bfc_document_run(doc, false, &mut report), BfcStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        bfc_string_free(report);
        let golden = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/torus.txt")).unwrap();
        assert_eq!(text, golden);

        let cmd = CString::new("morphism homotopic idI G --cap 3").unwrap();
        assert_eq!(bfc_document_execute(doc, cmd.as_ptr(), true, &mut report), BfcStatus::Fail);
        assert!(CStr::from_ptr(report).to_str().unwrap().contains("\"cap\": 3"));
        bfc_string_free(report);
        let cmd = CString::new("homology NOPE").unwrap();
        assert_eq!(bfc_document_execute(doc, cmd.as_ptr(), false, &mut report), BfcStatus::InputError);
        bfc_string_free(report);
        bfc_document_free(doc);
    }
}

#[test]
fn parse_errors_carry_locations() {
    unsafe {
        let mut doc = ptr::null_mut();
        let bad = CString::new("PMC T GENUS 1 PAIRS (1 3) (2 x)").unwrap();
        assert_eq!(bfc_document_parse(bad.as_ptr(), &mut doc), BfcStatus::InputError);
        assert!(doc.is_null());
        assert!(last_error().starts_with("1:27"), "{}", last_error());
        let invalid = [0xffu8, 0];
        assert_eq!(bfc_document_parse(invalid.as_ptr().cast(), &mut doc), BfcStatus::Utf8);
        assert_eq!(bfc_document_parse(ptr::null(), &mut doc), BfcStatus::NullPointer);
        assert_eq!(bfc_document_parse(bad.as_ptr(), ptr::null_mut()), BfcStatus::NullPointer);
    }
}

#[test]
fn circles_and_algebras() {
    unsafe {
        let mut pmc = ptr::null_mut();
        assert_eq!(bfc_pmc_new(1, [1u8, 3, 2, 4].as_ptr(), 2, &mut pmc), BfcStatus::Ok);
        let mut valid = false;
        assert_eq!(bfc_pmc_is_valid(pmc, &mut valid), BfcStatus::Ok);
        assert!(valid);
        let mut alg = ptr::null_mut();
        assert_eq!(bfc_algebra_strand(pmc, &mut alg), BfcStatus::Ok);
        let mut dim = 0;
        assert_eq!(bfc_algebra_dim(alg, &mut dim), BfcStatus::Ok);
        assert_eq!(dim, 16);
        assert_eq!(bfc_algebra_verify(alg, 10_000), BfcStatus::Ok);
        bfc_algebra_free(alg);
        bfc_pmc_free(pmc);

        assert_eq!(bfc_pmc_new(1, [1u8, 2, 3, 4].as_ptr(), 2, &mut pmc), BfcStatus::Ok);
        assert_eq!(bfc_pmc_is_valid(pmc, &mut valid), BfcStatus::Ok);
        assert!(!valid);
        assert_eq!(bfc_algebra_strand(pmc, &mut alg), BfcStatus::InputError);
        assert!(alg.is_null());
        bfc_pmc_free(pmc);

        assert_eq!(bfc_pmc_new(1, [1u8, 3, 3, 4].as_ptr(), 2, &mut pmc), BfcStatus::InputError);
        assert_eq!(bfc_algebra_dim(ptr::null(), &mut dim), BfcStatus::NullPointer);
        bfc_string_free(ptr::null_mut());
    }
}

#[test]
fn c_program_links_and_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in target/<profile>/deps; the static library sits
    // one level up.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libbfcalc_ffi.a");
    let bin = profile_dir.join("bfcalc_ffi_smoke");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("a C compiler is installed");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "dim 16, verify 0\n");
}
