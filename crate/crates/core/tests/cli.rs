use std::path::PathBuf;
use std::process::Command;

use metgraph::cli::run;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

/// Runs the CLI with `--out` in a temporary directory and returns the exit code and
/// the parsed report, if one was written.
fn run_report(args: &[&str]) -> (i32, Option<Value>) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut argv = vec!["metgraph".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let code = run(argv);
    let report = std::fs::read_to_string(&out).ok().map(|t| serde_json::from_str(&t).unwrap());
    (code, report)
}

#[test]
fn partition_segment() {
    let (code, report) = run_report(&["partition", "--graph", &data("segment.json"), "--functional", "length", "--n", "3"]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(report["verdict"], "pass");
    let parts = report["parts"].as_array().unwrap();
    let want = [(0.0, 0.5, 0.25), (0.5, 0.75, 0.125), (0.75, 1.0, 0.125)];
    for (p, (lo, hi, t)) in parts.iter().zip(want) {
        let iv = &p["set"]["intervals"][0];
        assert!((iv["from"].as_f64().unwrap() - lo).abs() < 1e-9);
        assert!((iv["to"].as_f64().unwrap() - hi).abs() < 1e-9);
        assert!((p["tilde_phi"].as_f64().unwrap() - t).abs() < 1e-9);
    }
    assert_eq!(parts[0]["set"]["excluded"][0]["offset"].as_f64().map(|x| (x - 0.5).abs() < 1e-9), Some(true));
}

#[test]
fn sharpness_modes() {
    let (code, report) = run_report(&["sharpness", "--mode", "uniform", "--N", "3"]);
    assert_eq!(code, 0);
    assert!(report.unwrap()["rel_error"].as_f64().unwrap() <= 1e-8);
    let (code, report) = run_report(&["sharpness", "--mode", "lp", "--N", "4"]);
    assert_eq!(code, 0);
    assert!((report.unwrap()["achieved"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(run_report(&["partition", "--graph", &data("malformed.json"), "--n", "3"]).0, 2);
    assert_eq!(run_report(&["partition", "--graph", &data("missing.json"), "--n", "3"]).0, 2);
    assert_eq!(run_report(&["partition", "--graph", &data("segment.json"), "--functional", "bogus", "--n", "2"]).0, 2);
    assert_eq!(run_report(&["partition", "--graph", &data("segment.json"), "--functional", "measure", "--n", "2"]).0, 2);
    assert_eq!(run_report(&["partition", "--graph", &data("segment.json"), "--n", "0"]).0, 2);
    assert_eq!(run_report(&["hardy", "--graph", &data("theta_graph.json"), "--root", "s"]).0, 2);
    assert_eq!(run_report(&["frobnicate"]).0, 2);
    assert_eq!(run_report(&["approximate", "--graph", &data("segment.json"), "--u", &data("identity.json"), "--n", "1", "--p", "0.5"]).0, 2);
}

#[test]
fn violations_exit_1() {
    let (code, report) = run_report(&[
        "verify",
        "--graph",
        &data("segment.json"),
        "--parts",
        &data("segment_parts_unbalanced.json"),
        "--n",
        "3",
    ]);
    assert_eq!(code, 1);
    let report = report.unwrap();
    assert_eq!(report["verdict"], "fail");
    assert!(!report["violations"].as_array().unwrap().is_empty());

    let (code, _) = run_report(&["verify", "--graph", &data("segment.json"), "--parts", &data("segment_parts.json"), "--n", "3"]);
    assert_eq!(code, 0);
}

#[test]
fn approximate_and_hardy() {
    let (code, report) =
        run_report(&["approximate", "--graph", &data("segment.json"), "--u", &data("identity.json"), "--p", "inf", "--n", "1"]);
    assert_eq!(code, 0);
    assert!((report.unwrap()["error"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let (code, report) = run_report(&[
        "approximate",
        "--graph",
        &data("theta_graph.json"),
        "--u",
        &data("theta_u.json"),
        "--p",
        "3",
        "--n",
        "4",
        "--mode",
        "lp",
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert!(report["error"].as_f64().unwrap() <= report["bound"].as_f64().unwrap());

    let (code, report) = run_report(&[
        "hardy", "--graph", &data("tree.json"), "--root", "root", "--v", &data("tree_v.json"), "--w",
        &data("tree_w.json"), "--mesh", "40", "--n-max", "5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report.unwrap()["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn sweep_and_reproducibility() {
    let args = ["verify", "--sweep", "12", "--seed", "99", "--n-max", "4"];
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    let out = dir.path().join("sweep.json");
    for _ in 0..2 {
        let mut argv: Vec<String> = std::iter::once("metgraph").chain(args).map(String::from).collect();
        argv.extend(["--out".to_string(), out.display().to_string()]);
        assert_eq!(run(argv), 0);
        texts.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let report: Value = serde_json::from_slice(&texts[0]).unwrap();
    assert_eq!(report["instances"].as_array().unwrap().len(), 12);
    assert_eq!(report["failures"], 0);
}

#[test]
fn dot_export_and_digests() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("parts.dot");
    let (code, report) = run_report(&[
        "partition",
        "--graph",
        &data("theta_graph.json"),
        "--functional",
        "product:0.5",
        "--n",
        "4",
        "--dot",
        &dot.display().to_string(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph metgraph {") && text.contains("--"));
    let digest = report.unwrap()["inputs"][data("theta_graph.json")].as_str().unwrap().to_string();
    assert_eq!(digest.len(), 64);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_metgraph");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["partition", "--graph", &data("segment.json"), "--functional", "length", "--n", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["parts"].as_array().unwrap().len(), 3);
    let bad = status(&["partition", "--graph", &data("malformed.json"), "--n", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));
    let fail = status(&["verify", "--graph", &data("segment.json"), "--parts", &data("segment_parts_unbalanced.json"), "--n", "2"]);
    assert_eq!(fail.status.code(), Some(1));
}
