use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qkdnet::cli::rate_curve_rows;
use qkdnet::common::{Profile, ProtocolParams};

fn qkdnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdnet"))
        .args(args)
        .env_remove("QKDNET_OUT_DIR")
        .output()
        .expect("spawn qkdnet")
}

fn rows(csv_text: &str) -> Vec<(f64, String, f64)> {
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("distance_km,solution,bits_per_s"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(qkdnet(&["--help"]).status.code(), Some(0));
    assert_eq!(qkdnet(&[]).status.code(), Some(1));
    assert_eq!(qkdnet(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qkdnet(&["rate-curve", "--protocol", "bb84"]).status.code(), Some(1));
    let neg = qkdnet(&["rate-curve", "--protocol", "bb84", "--profile", "hot", "--max-km", "-5"]);
    assert_eq!(neg.status.code(), Some(1));
    let zero_jobs = qkdnet(&[
        "--jobs",
        "0",
        "rate-curve",
        "--protocol",
        "tf",
        "--profile",
        "cold",
        "--max-km",
        "1",
    ]);
    assert_eq!(zero_jobs.status.code(), Some(1));
}

#[test]
fn bb84_hot_curve_has_one_row_per_km() {
    let out = qkdnet(&[
        "rate-curve",
        "--protocol",
        "bb84",
        "--profile",
        "hot",
        "--max-km",
        "300",
        "--step-km",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(r.len(), 301);
    for (k, (d, label, rate)) in r.iter().enumerate() {
        assert_eq!(*d, k as f64);
        assert_eq!(label, "bb84_hot");
        assert!(*rate >= 0.0);
    }
    assert!(
        r.windows(2).all(|w| w[1].2 <= w[0].2),
        "rate must not increase with distance"
    );
    assert!(r[0].2 > 0.0);
}

#[test]
fn tf_curve_matches_library() {
    let out = qkdnet(&[
        "rate-curve",
        "--protocol",
        "tf",
        "--profile",
        "cold",
        "--max-km",
        "400",
        "--step-km",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let got = rows(std::str::from_utf8(&out.stdout).unwrap());
    let want = rate_curve_rows(true, Profile::Cold, &ProtocolParams::default(), 400.0, 20.0).unwrap();
    assert_eq!(got.len(), want.len());
    for ((d, _, r), (wd, wr)) in got.iter().zip(&want) {
        assert_eq!(d.to_bits(), wd.to_bits());
        assert_eq!(r.to_bits(), wr.to_bits());
    }
}

#[test]
fn cold_curve_dominates_hot() {
    for tf in [false, true] {
        let p = ProtocolParams::default();
        let hot = rate_curve_rows(tf, Profile::Hot, &p, 300.0, 10.0).unwrap();
        let cold = rate_curve_rows(tf, Profile::Cold, &p, 300.0, 10.0).unwrap();
        for (h, c) in hot.iter().zip(&cold) {
            assert!(c.1 >= h.1, "tf={tf} at {} km: cold {} < hot {}", h.0, c.1, h.1);
        }
    }
}

#[test]
fn missing_config_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = qkdnet(&[
        "simulate",
        "--config",
        missing.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope.json"), "stderr: {err}");
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_graphs": 2, "no_such_key": 1}"#).unwrap();
    let out = qkdnet(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!dir.path().join("results.json").exists());
}

fn small_simulate(out_dir: &Path, jobs: &str) -> Output {
    qkdnet(&[
        "--jobs",
        jobs,
        "simulate",
        "--graphs",
        "3",
        "--nodes",
        "10",
        "--candidates",
        "4",
        "--bobs",
        "2",
        "--box-min-km",
        "20",
        "--box-max-km",
        "60",
        "--box-step-km",
        "20",
        "--reference-box-km",
        "40",
        "--seed",
        "7",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ])
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(small_simulate(a.path(), "1").status.code(), Some(0));
    assert_eq!(small_simulate(b.path(), "3").status.code(), Some(0));
    for f in ["results.json", "fractions.csv", "ratios.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qkdnet"))
        .args([
            "analyze-graph",
            "--box-km",
            "50",
            "--seed",
            "3",
            "--nodes",
            "8",
            "--candidates",
            "4",
            "--bobs",
            "2",
        ])
        .env("QKDNET_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["graph.json", "losses.csv", "capacities.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
}

#[test]
fn analyze_round_trips_its_graph() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = qkdnet(&[
        "analyze-graph",
        "--box-km",
        "70",
        "--seed",
        "11",
        "--out-dir",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(first.status.code(), Some(0));
    let g = a.path().join("graph.json");
    let second = qkdnet(&[
        "analyze-graph",
        "--graph",
        g.to_str().unwrap(),
        "--out-dir",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(
        second.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    for f in ["graph.json", "losses.csv", "capacities.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn unwritable_out_dir_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain_file");
    fs::write(&file, b"x").unwrap();
    let out = qkdnet(&["analyze-graph", "--box-km", "30", "--out-dir", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
