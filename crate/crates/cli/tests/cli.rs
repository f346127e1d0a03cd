use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn swj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swj")).args(args).output().expect("swj runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_examples() {
    let o = swj(&["eval", "interleave(const0, const1)", "--bits", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "010101\n");
    let o = swj(&["eval", "e(approx(id, const0))", "--bits", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "00000000\n");
    let o = swj(&["eval", "e(const0)", "--bits", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn eval_parse_errors_and_flags() {
    assert_eq!(swj(&["eval", "interleave(const0"]).status.code(), Some(2));
    assert_eq!(swj(&["eval", "const0", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(swj(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn approx_dump_and_trace() {
    let o = swj(&["approx", "id", "ec(\"01\",1)", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 0 0\n1 1 1\n2 2 1\n");
    let o = swj(&["approx", "id", "ec(\"01\",1)", "--count", "3", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 0 0 1\n1 1 1 2\n2 2 1 3\n");
}

#[test]
fn check_shipped_witnesses() {
    for w in ["injections.swj", "laws.swj"] {
        let o = swj(&["check", "--problems", &data("problems.swj"), "--witness", &data(w)]);
        assert_eq!(o.status.code(), Some(0), "{w}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("overall Pass\n"));
    }
}

#[test]
fn check_corrupted_witness_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data("injections.swj")).unwrap();
    let bad = text.replacen("backward compose(e,project0)", "backward compose(e,project1)", 1);
    assert_ne!(bad, text);
    let path = dir.path().join("bad.swj");
    fs::write(&path, bad).unwrap();
    let o = swj(&["check", "--problems", &data("problems.swj"), "--witness", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("Fail"), "{out}");
    assert!(out.ends_with("overall Fail\n"));
}

#[test]
fn check_missing_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.swj");
    let o = swj(&["check", "--problems", &data("problems.swj"), "--witness", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.swj");
    fs::write(&bad, "witness x\nkind maybe\nend\n").unwrap();
    let o = swj(&["check", "--problems", &data("problems.swj"), "--witness", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_shallow_depth_is_unknown() {
    let o = swj(&[
        "check",
        "--problems",
        &data("problems.swj"),
        "--witness",
        &data("injections.swj"),
        "--depth",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn check_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = swj(&[
        "check",
        "--problems",
        &data("problems.swj"),
        "--witness",
        &data("injections.swj"),
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["overall"], "Pass");
}

#[test]
fn suite_default_passes_and_is_deterministic() {
    let a = swj(&["suite"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = swj(&["suite"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with("overall Pass\n"));
}

#[test]
fn suite_config_and_depth() {
    let o = swj(&["suite", "--config", &data("suite.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(swj(&["suite", "--depth", "1"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "depth = \"deep\"\n").unwrap();
    assert_eq!(swj(&["suite", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "colour = 3\n").unwrap();
    assert_eq!(swj(&["suite", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("none.toml");
    assert_eq!(swj(&["suite", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suite_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = swj(&["suite", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["overall"], "Pass");
    assert_eq!(v["criteria"].as_array().unwrap().len(), 11);
    assert!(v["criteria"][0].get("elapsed_ms").is_none());
}

#[test]
fn search_found_and_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.swj");
    fs::write(
        &p,
        "problem C\nd_id 1\ninstance ,1\nsolution ,0\nend\n\n\
problem K\nd_id 1\ninstance ,0\nsolution ,0\nend\n\n\
problem id2\nd_id 1\ninstance ,0\nsolution ,0\ninstance ,1\nsolution ,1\nend\n",
    )
    .unwrap();
    let p = p.to_str().unwrap();
    let o = swj(&["search", "--problems", p, "C", "K"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("witness found\nkind sw\nsource C\ntarget K\n"));
    // The found witness re-verifies through check.
    let w = dir.path().join("w.swj");
    fs::write(&w, stdout(&o)).unwrap();
    let o = swj(&["check", "--problems", p, "--witness", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = swj(&["search", "--problems", p, "id2", "K", "--use", "2", "--output-depth", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(swj(&["search", "--problems", p, "id2", "K", "--use", "0"]).status.code(), Some(2));
}

#[test]
fn print_witness_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = swj(&["print-witness", "assoc", "A", "B", "D", "--name", "a"]);
    assert_eq!(o.status.code(), Some(0));
    let w = dir.path().join("a.swj");
    fs::write(&w, stdout(&o)).unwrap();
    let p = dir.path().join("p.swj");
    let problems = fs::read_to_string(data("problems.swj")).unwrap();
    fs::write(&p, problems).unwrap();
    let o = swj(&["check", "--problems", p.to_str().unwrap(), "--witness", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(swj(&["print-witness", "assoc", "A", "B"]).status.code(), Some(2));
    assert_eq!(swj(&["print-witness", "commute", "A", "Z"]).status.code(), Some(2));
}
