use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsar-kernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("default.toml");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = cli(&["run", "--config", s(&cfg), "--out", s(out), "--quiet"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    for f in ["report.txt", "report.jsonl"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("nonlinear.toml");
    let o = cli(&["run", "--config", s(&cfg), "--seed", "7", "--out", s(dir.path())]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("split: seed 7"), "{text}");
}

#[test]
fn file_workflow_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = fixtures().join("nonlinear.toml");
    let ok = |o: Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    ok(cli(&["preprocess", "--config", s(&cfg), "--out", s(d)]));
    ok(cli(&["gram", "--config", s(&cfg), "--model", "SVM_zz_full", "--input", s(&d.join("train.csv")), "--out", s(d)]));
    ok(cli(&[
        "train", "--config", s(&cfg), "--model", "SVM_zz_full",
        "--input", s(&d.join("train.csv")), "--gram", s(&d.join("gram_SVM_zz_full.txt")), "--out", s(d),
    ]));
    let with_gram = std::fs::read_to_string(d.join("SVM_zz_full.model")).unwrap();
    ok(cli(&["train", "--config", s(&cfg), "--model", "SVM_zz_full", "--input", s(&d.join("train.csv")), "--out", s(d)]));
    assert_eq!(with_gram, std::fs::read_to_string(d.join("SVM_zz_full.model")).unwrap());
    let metrics = ok(cli(&["eval", "--model", s(&d.join("SVM_zz_full.model")), "--input", s(&d.join("test.csv"))]));
    assert_eq!(metrics.trim(), format!("{{\"n\":27,\"active\":15,\"inactive\":12,\"acc\":{}}}", 21.0 / 27.0));
}

#[test]
fn invalid_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cli(&["run"]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--config", s(&d.join("nope.toml"))]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));

    let bad = d.join("bad.toml");
    std::fs::write(&bad, "input = \"x.csv\"\nseed = 1\nsplit = 0.5\nmodels = []\n").unwrap();
    let o = cli(&["run", "--config", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config:"));

    let cfg = fixtures().join("nonlinear.toml");
    let o = cli(&["eval", "--model", s(&cfg), "--input", s(&fixtures().join("nonlinear_band.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}
