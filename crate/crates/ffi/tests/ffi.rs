use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use nodalgeom_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ng_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn square_mode(m: i64, n: i64, cells: usize) -> *mut NgField {
    let dims = [PI, PI];
    let mode = [m, n];
    let mut f = ptr::null_mut();
    let s = unsafe {
        ng_field_closed_form(
            NgDomainKind::Rectangle,
            dims.as_ptr(),
            2,
            0.0,
            mode.as_ptr(),
            2,
            cells,
            &mut f,
        )
    };
    assert_eq!(s, NgStatus::Ok, "{}", last_error());
    f
}

#[test]
fn field_and_nodal_domains() {
    let f = square_mode(3, 2, 120);
    let (mut lambda, mut len) = (0.0, 0usize);
    assert_eq!(
        unsafe { ng_field_info(f, &mut lambda, &mut len) },
        NgStatus::Ok
    );
    assert!((lambda - 13.0).abs() < 1e-12);
    assert_eq!(len, 121 * 121);
    let mut buf = vec![0.0; len];
    assert_eq!(
        unsafe { ng_field_values(f, buf.as_mut_ptr(), len - 1) },
        NgStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { ng_field_values(f, buf.as_mut_ptr(), len) },
        NgStatus::Ok
    );
    assert!(buf.iter().any(|&v| v > 0.5));

    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { ng_nodal_decompose(f, 1e-12, &mut d) },
        NgStatus::Ok
    );
    let mut n = 0;
    assert_eq!(unsafe { ng_nodal_count(d, &mut n) }, NgStatus::Ok);
    assert_eq!(n, 6);
    let mut c = NgComponent::default();
    assert_eq!(unsafe { ng_nodal_component(d, 1, &mut c) }, NgStatus::Ok);
    assert!((c.inradius - PI / 6.0).abs() < 2.0 * PI / 120.0);
    assert_eq!(
        unsafe { ng_nodal_component(d, 0, &mut c) },
        NgStatus::InvalidArgument
    );
    assert!(last_error().contains("unknown component"));
    unsafe {
        ng_nodal_free(d);
        ng_field_free(f);
    }
}

#[test]
fn asymmetry_and_capacity() {
    let f = square_mode(1, 2, 200);
    let radii = [0.4, 0.6];
    let mut s = NgAsymmetrySummary::default();
    assert_eq!(
        unsafe { ng_asymmetry_scan(f, radii.as_ptr(), 2, 64, 0, &mut s) },
        NgStatus::Ok
    );
    assert!(s.probes > 0);
    assert!((s.p05 - 0.5).abs() < 0.05, "{}", s.p05);
    unsafe { ng_field_free(f) };

    let mut cap = NgCapacity::default();
    assert_eq!(
        unsafe { ng_concentric_capacity(2, 256, 0.25, 1.0, &mut cap) },
        NgStatus::Ok
    );
    assert!(cap.relative_error.abs() < 0.05);
    assert_eq!(
        unsafe { ng_concentric_capacity(4, 16, 0.25, 1.0, &mut cap) },
        NgStatus::Unsupported
    );
}

#[test]
fn errors_and_null_handles() {
    let mut f = ptr::null_mut();
    let dims = [PI, PI];
    let mode = [0i64, 1];
    let s = unsafe {
        ng_field_closed_form(
            NgDomainKind::Rectangle,
            dims.as_ptr(),
            2,
            0.0,
            mode.as_ptr(),
            2,
            32,
            &mut f,
        )
    };
    assert_eq!(s, NgStatus::InvalidDomain);
    assert!(f.is_null());
    let s = unsafe {
        ng_field_closed_form(
            NgDomainKind::Rectangle,
            ptr::null(),
            2,
            0.0,
            mode.as_ptr(),
            2,
            32,
            &mut f,
        )
    };
    assert_eq!(s, NgStatus::NullPointer);
    let s = unsafe {
        ng_field_closed_form(
            NgDomainKind::Torus,
            dims.as_ptr(),
            2,
            0.0,
            mode.as_ptr(),
            2,
            2,
            &mut f,
        )
    };
    assert_eq!(s, NgStatus::Resolution);
    assert_eq!(
        unsafe { ng_field_info(ptr::null(), ptr::null_mut(), ptr::null_mut()) },
        NgStatus::NullPointer
    );
    unsafe {
        ng_field_free(ptr::null_mut());
        ng_nodal_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(ng_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn numerical_eigenpair() {
    let dims = [PI, PI];
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe {
            ng_field_eigen(
                NgDomainKind::Rectangle,
                dims.as_ptr(),
                2,
                0.0,
                48,
                1,
                &mut f,
            )
        },
        NgStatus::Ok
    );
    let mut lambda = 0.0;
    unsafe { ng_field_info(f, &mut lambda, ptr::null_mut()) };
    assert!((lambda - 2.0).abs() < 2e-3);
    unsafe { ng_field_free(f) };
    assert_eq!(
        unsafe {
            ng_field_eigen(
                NgDomainKind::Rectangle,
                dims.as_ptr(),
                2,
                0.0,
                48,
                0,
                &mut f,
            )
        },
        NgStatus::InvalidArgument
    );
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nodalgeom.h"))
            .unwrap();
    for name in [
        "ng_last_error",
        "ng_version",
        "ng_field_closed_form",
        "ng_field_eigen",
        "ng_field_free",
        "ng_field_info",
        "ng_field_values",
        "ng_nodal_decompose",
        "ng_nodal_free",
        "ng_nodal_count",
        "ng_nodal_component",
        "ng_asymmetry_scan",
        "ng_concentric_capacity",
        "typedef struct NgField NgField",
        "NG_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles a small C program against the header and the shared library.
#[test]
fn c_program_links_and_runs() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| manifest.join("../../target"));
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    let libdir = target.join(profile);
    let cc = std::process::Command::new("cc").arg("--version").output();
    if cc.is_err() || !libdir.join("libnodalgeom_ffi.so").exists() {
        eprintln!("skipping: no C compiler or shared library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&libdir)
        .args(["-lnodalgeom_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe)
        .env("LD_LIBRARY_PATH", &libdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "6");
}
