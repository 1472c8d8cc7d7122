use std::io::Write;
use std::process::{Command, Output, Stdio};

fn kumsim(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_kumsim"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_run_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pos.txt");
    let p = path.to_str().unwrap();
    let o = kumsim(&["gen", "--n", "3", "--count", "20", "--seed", "5", "--out", p], "");
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    kumsim(&["gen", "--n", "3", "--count", "20", "--seed", "5", "--out", p], "");
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let kum = stdout(&kumsim(&["run", "--machine", "kum", p], ""));
    let oracle = stdout(&kumsim(&["run", "--machine", "oracle", p], ""));
    assert_eq!(kum.lines().count(), 20);
    for (k, o) in kum.lines().zip(oracle.lines()) {
        let cols: Vec<&str> = k.split('\t').collect();
        assert_eq!(cols[0], "accept");
        assert_eq!(cols[2], "33");
        assert_eq!(o, "accept\t0\t0");
    }
}

#[test]
fn negative_generator_lines_are_rejected() {
    let o = kumsim(&["gen", "--n", "2", "--kind", "value-mismatch", "--seed", "7"], "");
    let line = stdout(&o);
    let run = stdout(&kumsim(&["run", "--machine", "smm"], &line));
    assert!(run.starts_with("reject\t"));
    let o = kumsim(&["gen", "--n", "1", "--kind", "value-mismatch", "--seed", "7"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_show_in_degree_growth() {
    let line = stdout(&kumsim(&["gen", "--n", "8", "--kind", "all-equal"], ""));
    let smm: serde_json::Value = serde_json::from_str(stdout(&kumsim(&["stats", "--machine", "smm"], &line)).trim()).unwrap();
    assert_eq!(smm["max_in_degree"], 256);
    let kum: serde_json::Value = serde_json::from_str(stdout(&kumsim(&["stats", "--machine", "kum"], &line)).trim()).unwrap();
    assert!(kum["max_degree"].as_u64().unwrap() <= 4);
    let oracle = stdout(&kumsim(&["stats", "--machine", "oracle"], &line));
    assert_eq!(oracle.trim(), "{\"verdict\":\"accept\"}");
}

#[test]
fn profile_is_byte_identical_across_runs() {
    let args = ["profile", "--machine", "kum", "--n", "2-6", "--per-n", "3", "--seed", "9"];
    let a = kumsim(&args, "");
    let b = kumsim(&args, "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 5 * 3);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(4) == Some("33")));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(kumsim(&["fuzz", "--cases", "0"], "").status.code(), Some(2));
    assert_eq!(kumsim(&["run", "--machine", "tm"], "").status.code(), Some(2));
}
