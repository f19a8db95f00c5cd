use std::path::Path;
use std::process::{Command, Output};

use hypercyclic_cli::{Report, ReportBody};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypercyclic"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_target_synthesis_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = run(&["synthesize", "--m", "1", "--targets", "1", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = Report::read(&out).unwrap();
    match report.body {
        ReportBody::Synthesis { checks, certificate, .. } => {
            assert_eq!(checks.len(), 1);
            assert!(checks[0].passed());
            assert_eq!(certificate.vectors.len(), 1);
        }
        other => panic!("unexpected body {other:?}"),
    }
    let v = run(&["verify", path_str(&out)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn report_goes_to_stdout_without_out() {
    let o = run(&["synthesize", "--m", "1", "--targets", "2"]);
    assert_eq!(code(&o), 0);
    let report = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(report.passed());
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["synthesize", "--m", "0"][..],
        &["synthesize", "--m", "9"],
        &["synthesize", "--targets", "0"],
        &["synthesize", "--targets", "10001"],
        &["synthesize", "--lambda", "1"],
        &["synthesize", "--lambda", "abc"],
        &["construct", "--grid-coords", "0,1/3"],
        &["construct", "--no-such-flag"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn malformed_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    for text in ["m = [", "m = \"two\"", "unknown_key = 1", "m = 0"] {
        std::fs::write(&cfg, text).unwrap();
        let o = run(&["synthesize", "--config", path_str(&cfg)]);
        assert_eq!(code(&o), 2, "{text}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("s.json");
    std::fs::write(&cfg, "m = 3\ntargets = 4\nlambda = \"-2\"\n").unwrap();
    let o = run(&["synthesize", "--m", "1", "--targets", "2", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = Report::read(&out).unwrap();
    assert_eq!(report.config.m, 3);
    assert_eq!(report.config.target_count, 4);
    assert!(report.config.lambda.is_negative());
}

#[test]
fn missing_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["verify", path_str(&missing)])), 3);
    let missing_cfg = dir.path().join("nope.toml");
    assert_eq!(code(&run(&["synthesize", "--config", path_str(&missing_cfg)])), 3);
    let unwritable = dir.path().join("no/such/dir/out.json");
    assert_eq!(code(&run(&["synthesize", "--m", "1", "--targets", "1", "--out", path_str(&unwritable)])), 3);
}

fn construct(dir: &Path, name: &str, dual: bool) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["construct", "--m", "2", "--targets", "5", "--seed", "7", "--out", path_str(&out)];
    if dual {
        args.insert(1, "--dual");
    }
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn construct_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let art = construct(dir.path(), "c.json", false);
    let rep = dir.path().join("v.json");
    let o = run(&["verify", path_str(&art), "--out", path_str(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("overall: PASS"));
    match Report::read(&rep).unwrap().body {
        ReportBody::Verification(v) => {
            assert!(v.verdict);
            assert!(v.checks.iter().any(|c| c.name == "similarity_audit" && c.passed));
            assert!(!v.checks.iter().any(|c| c.name == "dual_similarity_audit"));
            assert!(v.orbit.unwrap().records.iter().all(|r| r.pass_at_certified_time == Some(true)));
        }
        other => panic!("unexpected body {other:?}"),
    }
}

#[test]
fn dual_construction_passes_dual_audit() {
    let dir = tempfile::tempdir().unwrap();
    let art = construct(dir.path(), "d.json", true);
    let rep = dir.path().join("v.json");
    let o = run(&["verify", path_str(&art), "--out", path_str(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    match Report::read(&rep).unwrap().body {
        ReportBody::Verification(v) => {
            assert!(v.checks.iter().any(|c| c.name == "dual_similarity_audit" && c.passed));
        }
        other => panic!("unexpected body {other:?}"),
    }
}

#[test]
fn corrupted_artifacts_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let art = construct(dir.path(), "c.json", false);
    let text = std::fs::read_to_string(&art).unwrap();
    let bad = dir.path().join("bad.json");

    // Truncated JSON.
    std::fs::write(&bad, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&run(&["verify", path_str(&bad)])), 1);

    // Well-formed but tampered: the common vector no longer matches.
    let mut report = Report::from_json(&text).unwrap();
    if let ReportBody::Construction { construction, .. } = &mut report.body {
        let x = &mut construction.artifact.common_vector;
        *x = x.clone() + hypercyclic::SparseVector::basis(40);
    }
    report.write(&bad).unwrap();
    let o = run(&["verify", path_str(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[FAIL] consistency"));

    // Tampered schedule tolerance.
    let mut report = Report::from_json(&text).unwrap();
    report.config.tolerance_shift = 5;
    report.write(&bad).unwrap();
    assert_eq!(code(&run(&["verify", path_str(&bad)])), 1);

    // Wrong format tag.
    std::fs::write(&bad, text.replace("hypercyclic-report", "something-else")).unwrap();
    assert_eq!(code(&run(&["verify", path_str(&bad)])), 1);
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for dual in [false, true] {
        let a = std::fs::read(construct(dir.path(), "a.json", dual)).unwrap();
        let b = std::fs::read(construct(dir.path(), "b.json", dual)).unwrap();
        assert_eq!(a, b, "construct output differs between runs");
        let text = String::from_utf8(a).unwrap();
        assert_eq!(Report::from_json(&text).unwrap().to_json(), text);
    }
    let art = construct(dir.path(), "c.json", false);
    let v1 = run(&["verify", path_str(&art), "--seed", "3"]).stdout;
    let v2 = run(&["verify", path_str(&art), "--seed", "3"]).stdout;
    assert_eq!(v1, v2);
    let text = String::from_utf8(v1).unwrap();
    assert_eq!(Report::from_json(&text).unwrap().to_json(), text);
}
