use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use qkdnet_ffi::*;

fn last_error() -> String {
    let p = qkd_last_error();
    assert!(!p.is_null(), "an error message should be set");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qkd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn bb84_rate_matches_library() {
    let mut r = 0.0;
    assert_eq!(unsafe { qkd_bb84_rate(20.0, QkdProfile::Cold, &mut r) }, QkdStatus::Ok);
    let want = qkdnet::bb84::secure_rate_bb84(20.0, &qkdnet::common::ProtocolParams::cold())
        .unwrap()
        .bits_per_s;
    assert_eq!(r, want);
    assert!(qkd_last_error().is_null());
}

#[test]
fn error_codes() {
    let mut r = 0.0;
    assert_eq!(
        unsafe { qkd_bb84_rate(-1.0, QkdProfile::Hot, &mut r) },
        QkdStatus::InvalidArgument
    );
    assert!(last_error().contains("non-negative"));
    assert_eq!(
        unsafe { qkd_bb84_rate(1.0, QkdProfile::Hot, ptr::null_mut()) },
        QkdStatus::NullPointer
    );
    assert!(last_error().contains("out_bits_per_s"));

    let mut g = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { qkd_graph_from_json(bad.as_ptr(), &mut g) }, QkdStatus::Parse);
    assert!(g.is_null());
    assert_eq!(
        unsafe { qkd_graph_generate(50.0, 1, 3, 3.5, 0, &mut g) },
        QkdStatus::InvalidArgument
    );
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { qkd_tf_model_rate(m, 1.0, 1.0, &mut r) },
        QkdStatus::NullPointer
    );
    assert_eq!(unsafe { qkd_tf_model_new(QkdProfile::Cold, &mut m) }, QkdStatus::Ok);
    assert_eq!(
        unsafe { qkd_tf_model_rate(m, -3.0, 1.0, &mut r) },
        QkdStatus::InvalidArgument
    );
    unsafe { qkd_tf_model_free(m) };
}

#[test]
fn tf_model_handle() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qkd_tf_model_new(QkdProfile::Cold, &mut m) }, QkdStatus::Ok);
    let (mut ab, mut ba) = (0.0, 0.0);
    unsafe {
        assert_eq!(qkd_tf_model_rate(m, 3.0, 12.0, &mut ab), QkdStatus::Ok);
        assert_eq!(qkd_tf_model_rate(m, 12.0, 3.0, &mut ba), QkdStatus::Ok);
        qkd_tf_model_free(m);
        qkd_tf_model_free(ptr::null_mut());
    }
    assert!(ab > 0.0);
    assert_eq!(ab, ba);
}

#[test]
fn graph_and_analysis_round_trip() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(qkd_graph_generate(80.0, 8, 4, 3.5, 3, &mut g), QkdStatus::Ok);
        assert_eq!(qkd_graph_node_count(g), 12);
        assert!(qkd_graph_edge_count(g) >= 11);
        assert_eq!(qkd_graph_node_count(ptr::null()), 0);

        let mut json = ptr::null_mut();
        assert_eq!(qkd_graph_to_json(g, &mut json), QkdStatus::Ok);
        let mut g2 = ptr::null_mut();
        assert_eq!(qkd_graph_from_json(json, &mut g2), QkdStatus::Ok);
        qkd_string_free(json);
        assert_eq!(qkd_graph_edge_count(g2), qkd_graph_edge_count(g));

        let mut a = ptr::null_mut();
        assert_eq!(qkd_analysis_new(g2, 1.0, 2, &mut a), QkdStatus::Ok);
        let mut caps = [0.0; 4];
        for (k, s) in [
            QkdSolution::Bb84Uncooled,
            QkdSolution::Bb84Cooled,
            QkdSolution::TfUncooled,
            QkdSolution::TfCooled,
        ]
        .into_iter()
        .enumerate()
        {
            assert_eq!(qkd_analysis_capacity(a, s, &mut caps[k]), QkdStatus::Ok);
            let mut zeros = usize::MAX;
            assert_eq!(qkd_analysis_zero_pairs(a, s, &mut zeros), QkdStatus::Ok);
            assert!(zeros <= 28);
        }
        assert!(caps[3] > 0.0);

        let mut len = 0;
        assert_eq!(
            qkd_analysis_detectors(a, ptr::null_mut(), 0, &mut len),
            QkdStatus::InvalidArgument
        );
        assert_eq!(len, 2);
        let mut buf = [0usize; 2];
        assert_eq!(qkd_analysis_detectors(a, buf.as_mut_ptr(), 2, &mut len), QkdStatus::Ok);
        assert!(buf.iter().all(|&d| (8..12).contains(&d)));

        let mut bad = ptr::null_mut();
        assert_eq!(qkd_analysis_new(g2, 1.0, 9, &mut bad), QkdStatus::InvalidArgument);
        assert!(bad.is_null());

        qkd_analysis_free(a);
        qkd_graph_free(g2);
        qkd_graph_free(g);
    }
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile_dir();
    let cfg = CString::new(
        r#"{"box_sizes_km": [30.0], "reference_box_km": 30.0, "n_graphs": 2,
            "n_sources": 5, "n_candidates": 3, "n_bob": 2, "bob_sweep": [1, 2]}"#,
    )
    .unwrap();
    let out = CString::new(dir.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { qkd_simulate(cfg.as_ptr(), out.as_ptr()) }, QkdStatus::Ok);
    for f in ["results.json", "fractions.csv", "ratios.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let missing = CString::new(dir.join("absent").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { qkd_simulate(cfg.as_ptr(), missing.as_ptr()) }, QkdStatus::Io);
    assert_eq!(
        unsafe { qkd_simulate(cfg.as_ptr(), ptr::null()) },
        QkdStatus::NullPointer
    );
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("ffi-sim-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qkdnet.h")).unwrap();
    for name in [
        "qkd_version",
        "qkd_last_error",
        "qkd_bb84_rate",
        "qkd_tf_model_new",
        "qkd_tf_model_free",
        "qkd_graph_generate",
        "qkd_analysis_new",
        "qkd_simulate",
        "typedef struct QkdGraph QkdGraph",
        "QKD_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/smoke.c");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "cc rejected the header"),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
