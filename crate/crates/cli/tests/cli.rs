use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bla")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_all_correct_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested").join("report.json");
    let o = bla(&["run", "--config", arg(&fixture("all_correct.json")), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["sub_rounds"], 9);
    for p in report["processes"].as_array().unwrap() {
        assert_eq!(p["output"], "{0:0,1:0,2:0,3:0}");
    }
}

#[test]
fn run_with_byzantine_processes_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bla(&["--quiet", "run", "--config", arg(&fixture("byzantine_sqrtf.json")), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn resilience_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bla(&["run", "--config", arg(&fixture("bad_resilience.json")), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3f + 1"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_config_and_bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let missing = dir.path().join("nope.json");
    assert_eq!(bla(&["run", "--config", arg(&missing), "--out", arg(&out)]).status.code(), Some(2));
    assert_eq!(bla(&["run", "--out", arg(&out)]).status.code(), Some(2));
    assert_eq!(bla(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn inverted_checker_exits_one_with_witness_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bla(&["--invert-verdicts", "run", "--config", arg(&fixture("all_correct.json")), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains(&format!("witness: {}", out.display())), "{err}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["all_pass"], false);
    assert_eq!(report["verdicts"][0]["witness"]["inverted"], true);
}

#[test]
fn help_documents_flags() {
    let o = bla(&["sweep", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--spec", "--out-dir", "--fail-fast", "--quiet", "--jobs"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    assert!(!text.contains("invert"));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sqrtf_sweep_passes_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let o = bla(&["--quiet", "sweep", "--spec", arg(&fixture("sweep_sqrtf.json")), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(rows[0].join(","), "n,f,t,algorithm,adversary,seed,sub_rounds,envelopes,all_pass");
    // 4 sizes x 7 adversaries x 20 seeds
    assert_eq!(rows.len() - 1, 4 * 7 * 20);
    assert!(rows[1..].iter().all(|r| r[8] == "true"));
    assert_eq!(fs::read_dir(dir.path().join("reports")).unwrap().count(), 560);
}

#[test]
fn logn_sweep_at_sixteen_has_constant_sub_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = bla(&["--quiet", "sweep", "--spec", arg(&fixture("sweep_logn16.json")), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(rows.len() - 1, 3 * 2 * 3);
    assert!(rows[1..].iter().all(|r| r[6] == "15"));
    let ts: std::collections::BTreeSet<&str> = rows[1..].iter().map(|r| r[2].as_str()).collect();
    assert_eq!(ts, ["0", "5"].into());
}

#[test]
fn sweep_csv_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = fixture("sweep_logn16.json");
    for (d, jobs) in [(&a, "1"), (&b, "3")] {
        let o = bla(&["--quiet", "sweep", "--spec", arg(&spec), "--out-dir", arg(d.path()), "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("summary.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn empty_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bla(&["sweep", "--spec", arg(&fixture("sweep_empty.json")), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no points"));
}

#[test]
fn invalid_sweep_points_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    for body in [
        r#"{"n": [6], "f": 2, "algorithms": ["logn"], "adversaries": ["silent"], "seeds": 1}"#,
        r#"{"n": [4], "t": [2], "algorithms": ["logn"], "adversaries": ["silent"], "seeds": 1}"#,
        r#"{"n": [4], "algorithms": ["logn"], "adversaries": ["sneaky"], "seeds": 1}"#,
        r#"{"n": [4], "algorithms": ["logn"], "adversaries": ["silent"], "seeds": 1, "extra": 0}"#,
    ] {
        fs::write(&spec, body).unwrap();
        let o = bla(&["sweep", "--spec", arg(&spec), "--out-dir", arg(&dir.path().join("out"))]);
        assert_eq!(o.status.code(), Some(2), "{body}: {}", stderr(&o));
    }
}

#[test]
fn failing_sweep_completes_then_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n": [4, 7], "algorithms": ["logf"], "adversaries": ["silent"], "seeds": 3, "repetitions": 2}"#).unwrap();
    let out = dir.path().join("out");
    let o = bla(&["--invert-verdicts", "sweep", "--spec", arg(&spec), "--out-dir", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let rows = read_csv(&out.join("summary.csv"));
    assert_eq!(rows.len() - 1, 6);
    assert!(rows[1..].iter().all(|r| r[8] == "false"));
    assert!(stderr(&o).contains("6 of 6 points failed"));

    let ff = dir.path().join("ff");
    let o = bla(&["--invert-verdicts", "sweep", "--fail-fast", "--jobs", "1", "--spec", arg(&spec), "--out-dir", arg(&ff)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(read_csv(&ff.join("summary.csv")).len() - 1, 1);
}
