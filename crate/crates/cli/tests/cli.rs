use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gcgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcgw")).args(args).env_remove("GCGW_FIXTURES").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gcgw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn parse_errors_carry_positions() {
    let f = scratch("bad_form.json", "{\"lie_algebra\": {\"dim\": 2,\n  \"d\": {\"e2\": \"e1^^e2\"}}, \"tasks\": [\"validate\"]}");
    let o = gcgw(&["run", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("$.lie_algebra.d[\"e2\"]"), "{}", err);
    assert!(err.contains("line 2") && err.contains("at column 4"), "{}", err);
}

#[test]
fn schema_errors_exit_2() {
    let cases = [
        ("unknown_task.json", r#"{"lie_algebra": {"dim": 2, "d": {}}, "tasks": ["frobnicate"]}"#, "unknown task"),
        ("missing_block.json", r#"{"tasks": ["validate"]}"#, "needs a 'lie_algebra' block"),
        ("unknown_param.json", r#"{"lie_algebra": {"dim": 2, "d": {}}, "tasks": [{"task": "validate", "params": {"x": 1}}]}"#, "unknown parameter"),
    ];
    for (name, text, msg) in cases {
        let o = gcgw(&["run", scratch(name, text).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", name);
        assert!(stderr(&o).contains(msg), "{}: {}", name, stderr(&o));
    }
    let o = gcgw(&["--json", "run", scratch("missing_block.json", r#"{"tasks": ["validate"]}"#).to_str().unwrap()]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"]["location"], "$.tasks[0]");
}

#[test]
fn fixture_listing() {
    let o = gcgw(&["--json", "fixtures"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v["fixtures"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(names.contains(&"iwasawa") && names.contains(&"p1_o(1)"));

    let empty = std::env::temp_dir().join(format!("gcgw-empty-{}", std::process::id()));
    std::fs::create_dir_all(&empty).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gcgw")).args(["--json", "fixtures"]).env("GCGW_FIXTURES", &empty).output().unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fixtures"], Value::Array(vec![]));
}

#[test]
fn iwasawa_fixtures() {
    // the standard spinor is not closed
    let o = gcgw(&["run", "iwasawa"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("d rho = 2*e1^e2^e3^e4^e5 + 2 i*e1^e2^e3^e4^e6"), "{}", out);
    assert!(out.contains("flavor=D) ... PASS"), "{}", out);
    assert!(gcgw(&["run", "iwasawa_closed"]).status.success());
    let o = gcgw(&["cy", "iwasawa_closed", "--strong"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn atiyah_on_the_line() {
    let o = gcgw(&["atiyah", "p1_o(1)", "--connection-bound", "4"]);
    let out = stdout(&o);
    assert!(out.contains("xi[U0,U1] = [[(1/z)*dz]]"), "{}", out);
    assert!(out.contains("no connection within bound 4"), "{}", out);
    // a search without an expectation reports what it found and passes
    assert!(o.status.success());
}

#[test]
fn output_is_deterministic() {
    for args in [&["--json", "run", "p1_o(1)+o(2)"][..], &["run", "torus4"][..], &["--json", "--approx", "chern", "p1_o(1)", "--degree", "1"][..]] {
        let a = gcgw(args);
        let b = gcgw(args);
        assert_eq!(a.stdout, b.stdout, "{:?}", args);
        assert_eq!(a.status.code(), b.status.code());
    }
    let o = gcgw(&["--json", "run", "torus2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "gcgw-report/1");
    assert_eq!(v["passed"], true);
}

#[test]
fn parameter_commands() {
    let o = gcgw(&["bott", "--n", "1", "--m", "-3", "--q", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("= 2"), "{}", stdout(&o));
    let o = gcgw(&["oracle", "p1", "--m", "2", "--q", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("= 3"), "{}", stdout(&o));
    // n = 0 is outside the contract
    assert_eq!(gcgw(&["bott", "--n", "0", "--m", "1"]).status.code(), Some(3));
}

#[test]
fn every_fixture_runs() {
    // the three failing fixtures are deliberate negative examples
    let failing = ["corrupted_plane", "iwasawa", "non_lie"];
    let o = gcgw(&["--json", "fixtures"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for name in v["fixtures"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()) {
        let code = gcgw(&["run", name]).status.code();
        let expected = if failing.contains(&name) { 1 } else { 0 };
        assert_eq!(code, Some(expected), "{}", name);
    }
}
