//! End-to-end checks of the `frog` binary: exit codes, output shape,
//! manifest reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn frog() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frog"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const TRANSIENT: &str = r#"{
  "drift":  { "kind": "constant", "p": 0.7 },
  "counts": { "kind": "iid", "dist": { "kind": "deterministic", "k": 1 } },
  "p0": 0.7
}"#;

fn run(args: &[&str], dir: &Path) -> Output {
    frog().args(args).current_dir(dir).output().unwrap()
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn validate_ok_and_reject() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("ok.json"), TRANSIENT);
    let out = run(&["validate", "--config", "ok.json"], dir.path());
    assert_code(&out, 0);

    write(
        &dir.path().join("bad.json"),
        r#"{"drift":{"kind":"constant","p":0.4},
            "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
            "p0":0.7}"#,
    );
    let out = run(&["validate", "--config", "bad.json"], dir.path());
    assert_code(&out, 2);

    write(&dir.path().join("broken.json"), "{ not json");
    let out = run(&["validate", "--config", "broken.json"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn criteria_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    let out = run(
        &["criteria", "--config", "m.json", "--n-max", "128", "--out", "c.csv"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), &format!("# frog {}", env!("CARGO_PKG_VERSION")));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(header, "n,term,partial_sum,log_term");
    let first = text.lines().skip_while(|l| l.starts_with('#')).nth(1).unwrap();
    assert!(first.starts_with("2,"), "{first}");
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    assert_eq!(rows, 1 + 127); // header + terms for n = 2..=128
}

#[test]
fn kconst_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    let out = run(&["kconst", "--config", "m.json", "--tol", "1e-9"], dir.path());
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let row = text.lines().last().unwrap();
    let value: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-7);

    // Out-of-range tolerance is a numerical failure.
    let out = run(&["kconst", "--config", "m.json", "--tol", "1e-20"], dir.path());
    assert_code(&out, 3);
}

#[test]
fn missing_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["criteria"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn budget_breach_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("huge.json"),
        r#"{"drift":{"kind":"constant","p":0.55},
            "counts":{"kind":"deterministic_sequence","k":[200000000]},
            "p0":0.55}"#,
    );
    let out = run(
        &["simulate", "--config", "huge.json", "--cap", "10", "--trials", "50", "--seed", "1"],
        dir.path(),
    );
    assert_code(&out, 4);
}

#[test]
fn simulate_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    let args = [
        "simulate", "--config", "m.json", "--cap", "10", "--trials", "100", "--seed", "1",
        "--out", "s.csv", "--per-trial", "t.csv",
    ];
    let a_dir = dir.path().join("a");
    let b_dir = dir.path().join("b");
    for d in [&a_dir, &b_dir] {
        fs::create_dir(d).unwrap();
        write(&d.join("m.json"), TRANSIENT);
        let out = run(&args, d);
        assert_code(&out, 0);
    }
    assert_eq!(
        fs::read(a_dir.join("s.csv")).unwrap(),
        fs::read(b_dir.join("s.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a_dir.join("t.csv")).unwrap(),
        fs::read(b_dir.join("t.csv")).unwrap()
    );
    // Per-trial rows carry the right columns.
    let t = fs::read_to_string(a_dir.join("t.csv")).unwrap();
    assert!(t.lines().any(|l| l == "trial,died_at,activated_frogs,activated_sites"));
}

#[test]
fn sweep_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    write(&dir.path().join("grid.json"), r#"{"field":"drift.c","values":[0.2]}"#);
    // drift.c over a constant drift is a usage error.
    let out = run(
        &["sweep", "--config", "m.json", "--grid", "grid.json"],
        dir.path(),
    );
    assert_code(&out, 2);

    write(&dir.path().join("grid2.json"), r#"{"field":"nope","values":[0.2]}"#);
    let out = run(
        &["sweep", "--config", "m.json", "--grid", "grid2.json"],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn bmz_and_gs_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    let out = run(
        &["bmz", "--config", "m.json", "--nk", "1,2,4,8"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("k,n_k,term,partial_sum,log_term"));
    assert!(text.contains("sufficient for non-transience"));

    let out = run(&["bmz", "--config", "m.json", "--nk", "8,4"], dir.path());
    assert_code(&out, 2);

    let out = run(&["gs-check", "--config", "m.json"], dir.path());
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().last().unwrap().starts_with("finite"));
    assert!(text.contains("transient"));
}

#[test]
fn fplus_reports_closed_form_column() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("m.json"), TRANSIENT);
    let out = run(
        &["fplus", "--config", "m.json", "--cap", "4", "--trials", "2000", "--seed", "9"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n,trials,zeros,empirical,closed_form,abs_diff,sigma"));
    // Site 1 closed form is 1 - r0 = 1 - 3/7.
    let row1 = text
        .lines()
        .find(|l| l.starts_with("1,"))
        .unwrap();
    let closed: f64 = row1.split(',').nth(4).unwrap().parse().unwrap();
    assert!((closed - 4.0 / 7.0).abs() < 1e-12);
}
