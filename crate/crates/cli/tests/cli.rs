use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bpbv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpbv")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn verify_main_w_one_passes() {
    let out = bpbv(&["verify-main", "--prime", "2", "--m", "1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(statuses(&report).iter().all(|(_, s)| s == "PASS"));
    assert_eq!(report["params"]["w"], 1);
    assert!(out.stdout.ends_with(b"}\n"));
}

#[test]
fn invalid_parameters_exit_two() {
    for args in [
        &["alpha", "--prime", "2", "--m", "1", "--n", "1", "--k", "2"][..],
        &["alpha", "--prime", "4", "--m", "1", "--n", "1"],
        &["alpha", "--prime", "2", "--m", "2", "--n", "1"],
        &["alpha", "--prime", "2", "--m", "1", "--n", "1", "--trunc-deg", "0"],
        &["alpha", "--prime", "2", "--m", "1", "--n", "1", "--flavor", "lazard"],
        &["filtration", "--prime", "2", "--m", "1", "--n", "1", "--degrees", "4:2"],
        &["dickson", "--prime", "2"],
        &["frobnicate"],
    ] {
        let out = bpbv(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn dickson_example() {
    let out = bpbv(&["dickson", "--prime", "2", "--k", "2", "--m", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["outputs"]["beta"], "x0*x1^2 + x0^2*x1");
    assert!(statuses(&report).iter().all(|(_, s)| s == "PASS"));
}

#[test]
fn alpha_and_pseries_outputs() {
    let out = bpbv(&["alpha", "--prime", "2", "--m", "1", "--n", "1", "--flavor", "araki"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["outputs"]["alpha"], "x0^2");
    assert_eq!(report["outputs"]["alpha_prime"], "x0^2");
    assert_eq!(report["outputs"]["expected_degree"], 4);

    let out = bpbv(&["pseries", "--prime", "2", "--m", "1", "--n", "1", "--flavor", "araki"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["outputs"]["p_series"].as_str().unwrap().starts_with("v1*t^2"));
    assert_eq!(report["outputs"]["pi"].as_object().unwrap().len(), 2);
}

fn certificate_from_run(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("report.json");
    let run = bpbv(&["verify-main", "--prime", "2", "--m", "1", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let check = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "alpha-equals-alpha-prime").unwrap();
    assert_eq!(check["certificate"]["file"], "report-certs/alpha-equals-alpha-prime.json");
    dir.join(check["certificate"]["file"].as_str().unwrap())
}

#[test]
fn recheck_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let cert = certificate_from_run(dir.path());
    let ok = bpbv(&["recheck", cert.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));

    // Zeroing the multipliers leaves a nonzero residual: the check fails.
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    for m in doc["multipliers"].as_array_mut().unwrap() {
        m["terms"] = Value::Array(vec![]);
    }
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, doc.to_string()).unwrap();
    let bad = bpbv(&["recheck", tampered.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1), "{}", String::from_utf8_lossy(&bad.stderr));
    assert_eq!(statuses(&json(&bad))[0].1, "FAIL");

    std::fs::write(&tampered, "{\"format_version\": 1").unwrap();
    assert_eq!(bpbv(&["recheck", tampered.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bpbv(&["recheck", "/nonexistent/cert.json"]).status.code(), Some(2));
}

#[test]
fn cache_is_reused_and_corruption_is_tolerated() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["verify-main", "--prime", "3", "--m", "1", "--n", "1", "--cache-dir", cache.to_str().unwrap()];
    let first = bpbv(&args);
    assert_eq!(first.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let second = bpbv(&args);
    assert_eq!(second.stdout, first.stdout);
    assert!(second.stderr.is_empty());

    std::fs::write(&files[0], "{ not json").unwrap();
    let third = bpbv(&args);
    assert_eq!(third.status.code(), Some(0));
    assert_eq!(third.stdout, first.stdout);
    assert!(String::from_utf8_lossy(&third.stderr).contains("warning"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "prime = 3\nm = 1\nn = 1\n").unwrap();
    let out = bpbv(&["alpha", "--prime", "2", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["params"]["p"], 3);
}

#[test]
fn timings_are_opt_in() {
    let out = bpbv(&["alpha", "--prime", "2", "--m", "1", "--n", "1"]);
    assert!(json(&out)["checks"][0]["timing_ms"].is_null());
    let out = bpbv(&["alpha", "--prime", "2", "--m", "1", "--n", "1", "--timings"]);
    assert!(json(&out)["checks"][0]["timing_ms"].is_u64());
}

#[test]
fn filtration_with_small_k() {
    let out = bpbv(&["filtration", "--prime", "2", "--m", "1", "--n", "2", "--k", "1", "--degrees=-4:4"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = statuses(&json(&out)).into_iter().map(|c| c.0).collect();
    assert_eq!(names, ["chain-0-theta", "chain-1-theta", "chain-1-psi-ideal", "free-rank-0", "free-rank-1"]);
}

#[test]
fn help_exits_zero() {
    assert_eq!(bpbv(&["--help"]).status.code(), Some(0));
}
