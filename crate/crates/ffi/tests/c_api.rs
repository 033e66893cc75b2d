use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use gtl_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = gtl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn overhead_matches_closed_forms() {
    let mut o = GtlOverhead::default();
    let status = unsafe { gtl_overhead_predict(21, 12, 562.0, 78.0, 10929, 561.0, &mut o) };
    assert_eq!(status, GtlStatus::Ok);
    assert_eq!(o.gtl_step1, (21 * 20 * 12 * 562) as f64);
    assert_eq!(o.gtl_step3, (21 * 20 * 12 * 78) as f64);
    assert_eq!(o.nohtl_mu, (2 * 12 * 20 * 562) as f64);
    assert_eq!(o.nohtl_mv, o.gtl_step1);
    assert_eq!(o.bound, (2 * 12 * 21 * 21 * 562) as f64);
    assert_eq!(o.cloud, (10929 * 561) as f64);
    assert_eq!(o.dynamic_gtl, o.gtl_total + (562 * 12 * 22) as f64);
    assert!((o.gain_gtl - (1.0 - o.gtl_total / o.cloud)).abs() < 1e-15);
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut o = GtlOverhead::default();
    assert_eq!(
        unsafe { gtl_overhead_predict(21, 12, 562.0, 78.0, 10, 561.0, ptr::null_mut()) },
        GtlStatus::NullPointer
    );
    assert!(last_error().contains("out"));

    assert_eq!(
        unsafe { gtl_overhead_predict(21, 1, 562.0, 78.0, 10, 561.0, &mut o) },
        GtlStatus::Config
    );

    let mut cfg: *mut GtlConfig = ptr::null_mut();
    assert_eq!(
        unsafe { gtl_config_preset(c("nope").as_ptr(), &mut cfg) },
        GtlStatus::Config
    );
    assert!(last_error().contains("unknown preset"));
    assert!(cfg.is_null());

    assert_eq!(
        unsafe { gtl_config_from_toml(c("runs = \"x\"").as_ptr(), &mut cfg) },
        GtlStatus::Config
    );
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { gtl_config_from_toml(bad.as_ptr().cast(), &mut cfg) },
        GtlStatus::InvalidString
    );

    // Freeing NULL is a no-op.
    unsafe {
        gtl_config_free(ptr::null_mut());
        gtl_report_free(ptr::null_mut());
        gtl_string_free(ptr::null_mut());
    }
}

#[test]
fn experiment_roundtrip_through_handles() {
    let mut cfg: *mut GtlConfig = ptr::null_mut();
    unsafe {
        assert_eq!(
            gtl_config_preset(c("synthetic").as_ptr(), &mut cfg),
            GtlStatus::Ok
        );
        assert_eq!(gtl_config_set_runs(cfg, 9, 1), GtlStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(gtl_config_to_toml(cfg, &mut text), GtlStatus::Ok);
        let toml = CStr::from_ptr(text).to_str().unwrap().to_string();
        gtl_string_free(text);
        assert!(toml.contains("base_seed = 9"));

        // The TOML text reproduces the same configuration.
        let mut again: *mut GtlConfig = ptr::null_mut();
        assert_eq!(
            gtl_config_from_toml(c(&toml).as_ptr(), &mut again),
            GtlStatus::Ok
        );

        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(gtl_experiment_run(cfg, &mut a), GtlStatus::Ok);
        assert_eq!(gtl_experiment_run(again, &mut b), GtlStatus::Ok);
        let mut fa = 0.0;
        let mut fb = 0.0;
        let (clean, step, metric) = (c("clean"), c("gtl_mean"), c("f_measure"));
        assert_eq!(
            gtl_report_metric(a, clean.as_ptr(), step.as_ptr(), metric.as_ptr(), &mut fa),
            GtlStatus::Ok
        );
        assert_eq!(
            gtl_report_metric(b, clean.as_ptr(), step.as_ptr(), metric.as_ptr(), &mut fb),
            GtlStatus::Ok
        );
        assert_eq!(fa, fb);
        assert!(fa > 0.0 && fa <= 1.0);
        assert_eq!(
            gtl_report_metric(
                a,
                clean.as_ptr(),
                c("dyn_gtl").as_ptr(),
                metric.as_ptr(),
                &mut fa
            ),
            GtlStatus::NotFound
        );
        assert_eq!(
            gtl_report_metric(
                a,
                clean.as_ptr(),
                c("bogus").as_ptr(),
                metric.as_ptr(),
                &mut fa
            ),
            GtlStatus::NotFound
        );

        let (mut coeffs, mut bytes) = (0u64, 0u64);
        assert_eq!(
            gtl_report_traffic(a, c("nohtl_mu").as_ptr(), &mut coeffs, &mut bytes),
            GtlStatus::Ok
        );
        assert_eq!(bytes, 8 * coeffs);
        assert_eq!(
            gtl_report_traffic(a, c("dyn_gtl").as_ptr(), &mut coeffs, &mut bytes),
            GtlStatus::NotFound
        );
        let mut samples = 1usize;
        assert_eq!(gtl_report_sample_messages(a, &mut samples), GtlStatus::Ok);
        assert_eq!(samples, 0);

        let dir = tempfile::tempdir().unwrap();
        let out = c(dir.path().to_str().unwrap());
        assert_eq!(gtl_report_write(a, out.as_ptr()), GtlStatus::Ok);
        assert!(dir.path().join("report.json").is_file());

        gtl_report_free(a);
        gtl_report_free(b);
        gtl_config_free(cfg);
        gtl_config_free(again);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header().join("gtl.h")).unwrap();
    let src =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            text.contains(&format!("{name}(")),
            "{name} missing from gtl.h"
        );
    }
}

/// Compiles the C smoke program against the header and the static library
/// and runs it. Skipped when no C compiler is installed.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // target/<profile>/deps/c_api-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libgtl_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(header())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).current_dir(dir.path()).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
