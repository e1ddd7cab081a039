use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cfp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfp"))
        .current_dir(dir)
        .env_remove("CFP_SEED")
        .args(args)
        .output()
        .expect("cfp runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = cfp(dir, args);
    assert!(o.status.success(), "cfp {args:?} failed: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn generate_classify_round_trip() {
    let d = TempDir::new().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (&["--n", "12", "--class", "regular"], "RegularNGon n=12 δ=π/6"),
        (&["--n", "10", "--class", "strict-biangular", "--alpha", "pi/10"], "StrictBiangular n=10 α=π/10 β=3π/10"),
        (&["--n", "16", "--class", "quasi-aligned", "--seed", "2"], "QuasiAligned n=16"),
        (&["--n", "16", "--class", "quasi-arbitrary", "--seed", "2"], "QuasiArbitrary n=16"),
        (&["--n", "30", "--class", "strict-biangular", "--alpha", "5deg"], "StrictBiangular n=30 α=π/36"),
    ];
    for (args, want) in cases {
        let mut full = vec!["generate", "--out", "c.json"];
        full.extend_from_slice(args);
        ok(d.path(), &full);
        let report = ok(d.path(), &["classify", "c.json"]);
        assert!(report.starts_with(want), "{args:?}: {report}");
    }
}

#[test]
fn quasi_report_has_sector_table() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["generate", "--n", "16", "--class", "quasi-arbitrary", "--seed", "5", "--out", "q.json"]);
    let report = ok(d.path(), &["classify", "q.json"]);
    let header = report.lines().find(|l| l.starts_with("sector")).expect("sector table");
    assert!(header.contains("missing"));
    let k: usize = report.lines().next().unwrap().rsplit("k=").next().unwrap().parse().unwrap();
    let rows = report.lines().skip_while(|l| !l.starts_with("sector")).skip(1).count();
    assert_eq!(rows, k);
}

#[test]
fn generation_errors() {
    let d = TempDir::new().unwrap();
    let o = cfp(d.path(), &["generate", "--n", "9", "--class", "strict-biangular"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("even number"), "{}", stderr(&o));
    let o = cfp(d.path(), &["generate", "--n", "10", "--class", "strict-biangular", "--alpha", "pi/5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cfp(d.path(), &["generate", "--n", "10", "--class", "hexagon"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_file_is_a_parse_error() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.json"), "{\"n\": 3,\n \"points\": [}").unwrap();
    let o = cfp(d.path(), &["classify", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.json") && err.contains("line 2"), "{err}");
}

#[test]
fn run_reports_outcome_and_classes() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["run", "--n", "10", "--class", "strict-biangular", "--scheduler", "synchronous", "--out", "t.jsonl"]);
    assert!(out.contains("outcome: Formed@1"), "{out}");
    assert!(out.contains("classes: StrictBiangular -> RegularNGon"), "{out}");

    let out = ok(
        d.path(),
        &["run", "--n", "16", "--class", "quasi-arbitrary", "--seed", "1", "--scheduler", "round-robin", "--out", "q.jsonl"],
    );
    assert!(out.contains("outcome: Formed@"), "{out}");
    assert!(out.contains("classes: QuasiArbitrary -> QuasiAligned -> RegularNGon"), "{out}");
}

#[test]
fn excluded_sizes_are_rejected() {
    let d = TempDir::new().unwrap();
    for n in ["4", "6", "8"] {
        let o = cfp(d.path(), &["run", "--n", n, "--class", "strict-biangular", "--alpha", "1deg"]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("excluded"), "{}", stderr(&o));
    }
}

#[test]
fn run_from_config_and_spec() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["generate", "--n", "14", "--class", "strict-biangular", "--alpha", "pi/20", "--out", "c.json"]);
    let out = ok(d.path(), &["run", "--config", "c.json", "--scheduler", "random-fair:2", "--seed", "3", "--out", "t.jsonl"]);
    assert!(out.contains("Formed@"), "{out}");
    // the header carries the full spec, so it can be replayed
    let header = fs::read_to_string(d.path().join("t.jsonl")).unwrap().lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&header).unwrap();
    fs::write(d.path().join("spec.json"), v["spec"].to_string()).unwrap();
    ok(d.path(), &["run", "--spec", "spec.json", "--out", "replay.jsonl"]);
    assert_eq!(
        fs::read(d.path().join("t.jsonl")).unwrap(),
        fs::read(d.path().join("replay.jsonl")).unwrap()
    );
}

#[test]
fn identical_flags_give_identical_traces() {
    let d = TempDir::new().unwrap();
    let args = ["run", "--n", "12", "--class", "strict-biangular", "--alpha", "1/30turn", "--seed", "7"];
    ok(d.path(), &[&args[..], &["--out", "a.jsonl"]].concat());
    ok(d.path(), &[&args[..], &["--out", "b.jsonl"]].concat());
    let o = Command::new(env!("CARGO_BIN_EXE_cfp"))
        .current_dir(d.path())
        .env("CFP_SEED", "7")
        .args(["run", "--n", "12", "--class", "strict-biangular", "--alpha", "1/30turn", "--out", "c.jsonl"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let a = fs::read(d.path().join("a.jsonl")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.jsonl")).unwrap());
    assert_eq!(a, fs::read(d.path().join("c.jsonl")).unwrap(), "CFP_SEED differs from --seed");
}

#[test]
fn trace_on_stdout_summary_on_stderr() {
    let d = TempDir::new().unwrap();
    let o = cfp(d.path(), &["run", "--n", "10", "--class", "strict-biangular", "--scheduler", "synchronous"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("{\"type\":\"header\""));
    assert!(stderr(&o).contains("Formed@1"));
}

fn frame_count(dir: &Path) -> usize {
    fs::read_dir(dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count()
}

#[test]
fn render_every_acceptance_style_trace() {
    let d = TempDir::new().unwrap();
    let runs: [&[&str]; 4] = [
        &["--n", "10", "--class", "strict-biangular", "--scheduler", "synchronous"],
        &["--n", "12", "--class", "strict-biangular", "--rule", "bq", "--scheduler", "scripted:0,3,4,9", "--budget", "1"],
        &["--n", "20", "--class", "quasi-arbitrary", "--seed", "3", "--scheduler", "round-robin"],
        &["--n", "16", "--class", "strict-biangular", "--seed", "4", "--scheduler", "random-fair:3"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let trace = format!("t{i}.jsonl");
        let frames = format!("f{i}");
        ok(d.path(), &[&["run", "--out", &trace][..], args].concat());
        let steps = fs::read_to_string(d.path().join(&trace)).unwrap().lines().count() - 2;
        ok(d.path(), &["render", &trace, "--out", &frames]);
        assert_eq!(frame_count(&d.path().join(&frames)), steps + 1, "{args:?}");
        let first = fs::read_to_string(d.path().join(&frames).join("step-000.svg")).unwrap();
        assert!(first.starts_with("<svg") && first.contains("version=\"1.1\""));
    }
}

#[test]
fn render_terminal_trace_is_single_frame() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["run", "--n", "12", "--class", "regular", "--out", "r.jsonl"]);
    ok(d.path(), &["render", "r.jsonl", "--out", "f"]);
    assert_eq!(frame_count(&d.path().join("f")), 1);
}

#[test]
fn demo_utp_certifies_reference_rules() {
    let d = TempDir::new().unwrap();
    let o = cfp(d.path(), &["demo-utp", "--rule", "midpoint", "--n", "10", "--alpha", "pi/10", "--budget", "10000", "--out", "m.jsonl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("certified"));
    let lines = fs::read_to_string(d.path().join("m.jsonl")).unwrap().lines().count();
    assert_eq!(lines, 10_002);

    let o = cfp(d.path(), &["demo-utp", "--rule", "stay-put", "--n", "12", "--budget", "50", "--out", "s.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let again = cfp(d.path(), &["demo-utp", "--rule", "stay-put", "--n", "12", "--budget", "50", "--out", "s2.jsonl"]);
    assert!(again.status.success());
    assert_eq!(fs::read(d.path().join("s.jsonl")).unwrap(), fs::read(d.path().join("s2.jsonl")).unwrap());
}

#[test]
fn demo_utp_rejects_unknown_rule() {
    let d = TempDir::new().unwrap();
    let o = cfp(d.path(), &["demo-utp", "--rule", "unknown-rule"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown rule"));
}
