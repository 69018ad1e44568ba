//! End-to-end tests of the command-line interface: output schemas, exit
//! codes, and byte-level determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lens-torsion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn kappa_json_reports_closed_and_direct() {
    let out = run(&[
        "kappa", "--n", "1", "--mu", "5", "--nu", "1,2", "--u", "1", "--s", "3", "--format",
        "json", "--pmax", "80", "--qmax", "80",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    let closed = v["kappa_closed"].as_f64().unwrap();
    let direct = v["kappa_direct"].as_f64().unwrap();
    let tail = v["tail"].as_f64().unwrap();
    let disc = v["discrepancy"].as_f64().unwrap();
    assert!((closed - direct).abs() <= tail + 1e-8);
    assert!((disc - (closed - direct).abs()) <= 1e-15);
    assert_eq!(v["nu"][1].as_i64(), Some(2));
}

#[test]
fn kappa_at_origin_vanishes() {
    let out = run(&["kappa", "--n", "1", "--mu", "1", "--u", "0", "--s", "0", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["kappa_closed"].as_f64().unwrap().abs() <= 1e-10);
    // s below n + 2: no spectral-sum fields.
    assert!(v.get("kappa_direct").is_none());
}

#[test]
fn kappa_pole_is_bad_input() {
    let out = run(&["kappa", "--n", "1", "--mu", "1", "--u", "0", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("pole"), "stderr: {err}");
}

#[test]
fn invalid_inputs_exit_2() {
    // Non-coprime rotation parameter.
    let out = run(&["torsion", "--n", "1", "--mu", "4", "--nu", "1,2", "--u", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // Wrong number of rotation parameters.
    let out = run(&["torsion", "--n", "2", "--mu", "5", "--nu", "1,2", "--u", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn torsion_json_round_trips() {
    let out = run(&[
        "torsion", "--n", "1", "--mu", "5", "--nu", "1,2", "--u", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    // Recomputing the ratio from the parsed fields reproduces the printed
    // value exactly: 17 significant digits round-trip f64.
    let t_c = v["T_contact"].as_f64().unwrap();
    let t_rs = v["T_ray_singer"].as_f64().unwrap();
    let d = v["dim_H0"].as_u64().unwrap() as i32;
    let n = v["n"].as_u64().unwrap() as usize;
    let nfact: u64 = (1..=n as u64).product();
    let recomputed = t_c / ((nfact as f64).powi(d) * t_rs);
    assert_eq!(recomputed.to_bits(), v["ratio_check"].as_f64().unwrap().to_bits());
    assert!((v["ratio_check"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn torsion_multi_summand_bundle() {
    let out = run(&[
        "torsion", "--n", "1", "--mu", "2", "--nu", "1,1", "--us", "0,1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["us"].as_array().unwrap().len(), 2);
    assert_eq!(v["dim_H0"].as_u64(), Some(1));
    assert!((v["ratio_check"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn sphere_ratio_is_factorial() {
    let out = run(&["torsion", "--n", "2", "--mu", "1", "--u", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let t_c = v["T_contact"].as_f64().unwrap();
    let t_rs = v["T_ray_singer"].as_f64().unwrap();
    assert!((t_c / t_rs - 2.0).abs() <= 1e-9);
}

#[test]
fn table_csv_has_mu_rows() {
    for mu in [1i64, 5, 9] {
        let nu = if mu == 9 { "1,2" } else { "1,1" };
        let out = run(&[
            "table",
            "--n",
            "1",
            "--mu",
            &mu.to_string(),
            "--nu",
            nu,
            "--format",
            "csv",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + mu as usize, "mu = {mu}: {text}");
        assert!(lines[0].starts_with("u,kappa0,kappa_prime0"));
    }
}

#[test]
fn table_json_parses() {
    let out = run(&["table", "--n", "1", "--mu", "3", "--nu", "1,2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (u, row) in rows.iter().enumerate() {
        assert_eq!(row["us"][0].as_u64(), Some(u as u64));
    }
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--seed", "7", "--grid-mu", "5", "--grid-n", "2"]);
    assert_eq!(a.status.code(), Some(0), "stderr: {:?}", String::from_utf8_lossy(&a.stderr));
    let b = run(&["verify", "--seed", "7", "--grid-mu", "5", "--grid-n", "2"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn verify_json_schema() {
    let out = run(&["verify", "--grid-mu", "3", "--grid-n", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for check in v.as_array().unwrap() {
        assert!(check["pass"].as_bool().unwrap(), "{check}");
        assert!(check["max_residual"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn thread_cap_does_not_change_output() {
    let base = run(&[
        "kappa", "--n", "2", "--mu", "3", "--nu", "1,1,2", "--u", "1", "--s", "5", "--format",
        "json", "--pmax", "64", "--qmax", "64",
    ]);
    let single = bin()
        .env("TORSION_THREADS", "1")
        .args([
            "kappa", "--n", "2", "--mu", "3", "--nu", "1,1,2", "--u", "1", "--s", "5", "--format",
            "json", "--pmax", "64", "--qmax", "64",
        ])
        .output()
        .unwrap();
    assert_eq!(base.stdout, single.stdout);
}

#[test]
fn output_file_flag() {
    let dir = std::env::temp_dir().join(format!("lens-torsion-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "torsion", "--n", "1", "--mu", "5", "--nu", "1,2", "--u", "1", "--format", "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["ratio_check"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    std::fs::remove_dir_all(&dir).ok();
}
