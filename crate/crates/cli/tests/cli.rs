use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = "c two clauses over four variables\np cnf 4 2\n-1 3 4 0\n1 -2 4 0\n";
const CONTRADICTION: &str = "p cnf 1 2\n1 0\n-1 0\n";

fn hforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hforge")).args(args).env_remove("HARDNESS_FORGE_CAPS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Horizon out of a "metric: total(h=N)" line.
fn horizon(report: &str) -> String {
    let line = report.lines().find(|l| l.starts_with("metric: ")).unwrap();
    let start = line.find("h=").unwrap() + 2;
    line[start..].trim_end_matches(')').to_string()
}

#[test]
fn example_formula_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = put(dir.path(), "example.cnf", EXAMPLE);
    let o = hforge(&["verify", &cnf]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("instance: satisfiable"));
    assert!(text.contains("oracle value: 1/1"));
    assert!(text.contains("PASS") && !text.contains("FAIL"));
}

#[test]
fn every_sat_construction_verifies() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("yes.cnf", EXAMPLE), ("no.cnf", CONTRADICTION)] {
        let cnf = put(dir.path(), name, text);
        for via in [&["--via", "sat3"][..], &["--via", "gap", "--eps", "1/2"], &["--via", "uomdp"], &["--via", "inf"]] {
            let mut args = vec!["verify", cnf.as_str()];
            args.extend_from_slice(via);
            let o = hforge(&args);
            assert_eq!(o.status.code(), Some(0), "{name} {via:?}: {}", stdout(&o));
        }
    }
    let cnf = put(dir.path(), "amp.cnf", CONTRADICTION);
    let o = hforge(&["verify", &cnf, "--via", "amplify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("oracle value: 1/16"));
}

#[test]
fn unsatisfiable_gadget_has_value_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = put(dir.path(), "no.cnf", CONTRADICTION);
    let out = path(dir.path(), "no.pomdp");
    let o = hforge(&["compile", "sat3", &cnf, "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    let h = horizon(&stdout(&o));
    let o = hforge(&["value", &out, "--class", "stat", "--metric", "total", "--horizon", &h]);
    assert_eq!(stdout(&o), "value: 0/1\n");
}

#[test]
fn satisfying_assignment_evaluates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = put(dir.path(), "example.cnf", EXAMPLE);
    let out = path(dir.path(), "example.pomdp");
    let o = hforge(&["compile", "sat3", &cnf, "-o", &out]);
    let h = horizon(&stdout(&o));
    let witness = path(dir.path(), "best.policy");
    let o = hforge(&["value", &out, "--class", "stat", "--metric", "total", "--horizon", &h, "--witness", &witness]);
    assert_eq!(stdout(&o), "value: 1/1\n");
    let o = hforge(&["eval", &out, "--policy", &witness, "--metric", "total", "--horizon", &h]);
    assert_eq!(stdout(&o), "value: 1/1\n");
    let o = hforge(&["bounds", &out, "--metric", "total", "--horizon", &h]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("delta: "));
}

#[test]
fn circuits_compile_and_expand() {
    let dir = tempfile::tempdir().unwrap();
    let net = put(dir.path(), "c.net", "gate a CONST 1\ngate b CONST 0\ngate c OR a b\noutput c\n");
    let o = hforge(&["verify", &net, "--via", "cvp", "--gap", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = hforge(&["verify", &net, "--via", "succinct-cvp", "--test-exponent", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let tbn = path(dir.path(), "c.tbn");
    assert_eq!(
        hforge(&["compile", "succinct-cvp", &net, "--gap", "1", "--test-exponent", "3", "-o", &tbn]).status.code(),
        Some(0)
    );
    let flat = path(dir.path(), "c.pomdp");
    let o = hforge(&["expand", &tbn, "-o", &flat]);
    assert_eq!(o.status.code(), Some(2), "full expansion is over the state cap");
    let o = hforge(&["expand", &tbn, "--reachable", "-o", &flat]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = hforge(&["value", &flat, "--class", "stat", "--metric", "total", "--horizon", "9"]);
    assert_eq!(stdout(&o), "value: 8/1\n");

    let adder = put(dir.path(), "adder.net", "gate a INPUT\ngate b INPUT\ngate cin INPUT\ngate t XOR a b\noutput t\n");
    // XOR is not a gate kind: parse errors exit 2 with a line number
    let o = hforge(&["compile", "tbn", &adder, "-o", &tbn]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn ssat_outside_promise_fails() {
    let dir = tempfile::tempdir().unwrap();
    let half = put(dir.path(), "half.ssat", "p cnf 1 1\nr 1 0\n1 0\n");
    let o = hforge(&["verify", &half, "--via", "ssat", "--c", "1", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let sure = put(dir.path(), "sure.ssat", "p cnf 2 1\ne 1 0\nr 2 0\n1 2 0\n");
    let o = hforge(&["verify", &sure, "--via", "ssat", "--c", "1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = path(dir.path(), "sure.pomdp");
    let o = hforge(&["compile", "ssat", &sure, "--eps", "1/2", "-o", &out]);
    assert!(stdout(&o).contains("constants: c=2 k="));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hforge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hforge(&["value"]).status.code(), Some(2));
    assert_eq!(hforge(&["verify", "/nonexistent/input.cnf"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = put(
        dir.path(),
        "bad.pomdp",
        "POMDP v1\nstates 2\nactions 1\nobservations 1\ninitial 0\nobs 0 0\nobs 1 0\nT 0 0 1 1/3\n",
    );
    let o = hforge(&["value", &bad, "--class", "stat", "--metric", "total", "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(hforge(&["--help"]).status.code(), Some(0));
}

#[test]
fn caps_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = put(dir.path(), "example.cnf", EXAMPLE);
    let o = Command::new(env!("CARGO_BIN_EXE_hforge"))
        .args(["verify", &cnf])
        .env("HARDNESS_FORGE_CAPS", "policies=2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds cap"));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = put(dir.path(), "example.cnf", EXAMPLE);
    let a = path(dir.path(), "a.pomdp");
    let b = path(dir.path(), "b.pomdp");
    let first = hforge(&["compile", "sat3", &cnf, "--amplify", "--discount", "1/2", "-o", &a]);
    let second = hforge(&["compile", "sat3", &cnf, "--amplify", "--discount", "1/2", "-o", &b]);
    assert_eq!(stdout(&first).replace(&a, ""), stdout(&second).replace(&b, ""));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v1 = hforge(&["verify", &cnf, "--via", "gap", "--eps", "3/4"]);
    let v2 = hforge(&["verify", &cnf, "--via", "gap", "--eps", "3/4"]);
    assert_eq!(v1.stdout, v2.stdout);
    assert_eq!(v1.status.code(), Some(0));
}
