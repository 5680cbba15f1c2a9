use std::io::Write;
use std::process::{Command, Output, Stdio};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");

fn slc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slc")).args(args).output().unwrap()
}

fn slc_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_slc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn file(name: &str) -> String {
    format!("{CORPUS}/{name}.sll")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_string()
}

#[test]
fn check_prints_the_type_and_respects_the_pragma() {
    let o = slc(&["check", &file("discards_divergent")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "I");

    // The flag overrides the file's `calculus affine` line.
    let o = slc(&["--calculus", "linear", "check", &file("discards_divergent")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("LinearVarDiscarded"));
}

#[test]
fn check_reads_stdin_and_defaults_to_linear() {
    let o = slc_stdin(&["check", "-"], "(\\y:I -o I. *) (\\x:I. x)");
    assert_eq!(o.status.code(), Some(1));
    let o = slc_stdin(&["--calculus", "affine", "check", "-"], "(\\y:I -o I. *) (\\x:I. x)");
    assert_eq!(o.status.code(), Some(0));
    let o = slc_stdin(&["check", "-"], "\\x:!I. <force x, force x>");
    assert_eq!(stdout(&o), "!I -o I * I");
}

#[test]
fn json_rejection_names_the_rule() {
    let o = slc_stdin(&["--json", "check", "-"], "\\x:(I -o I). <x,x>");
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["type_error"]["kind"], "LinearVarDuplicated");
}

#[test]
fn run_and_denote_agree_on_the_corpus() {
    assert_eq!(stdout(&slc(&["run", &file("countdown")])), "*");
    assert_eq!(stdout(&slc(&["denote", &file("countdown")])), "*");
    assert_eq!(stdout(&slc(&["run", &file("divergent")])), "OUT_OF_FUEL");
    assert_eq!(stdout(&slc(&["--fuel", "500", "denote", &file("divergent")])), "BOTTOM_UP_TO_FUEL(500)");
}

#[test]
fn naive_backend_loses_the_discarded_divergence() {
    let t = file("discards_divergent");
    assert_eq!(stdout(&slc(&["run", &t])), "*");
    assert_eq!(stdout(&slc(&["denote", "--backend", "standard", &t])), "*");
    assert_eq!(stdout(&slc(&["denote", "--backend", "naive", &t])), "BOTTOM_UP_TO_FUEL(10000)");
}

#[test]
fn run_json_reports_the_outcome() {
    let o = slc(&["--json", "run", &file("countdown")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcome"], "converged");
    assert_eq!(v["value"], "*");
    assert_eq!(v["type"], "I");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(slc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(slc(&["check", "/no/such/file.sll"]).status.code(), Some(2));
    assert_eq!(slc(&["denote", "--backend", "nope", &file("countdown")]).status.code(), Some(2));
    assert_eq!(slc(&["test", "nope"]).status.code(), Some(2));
    assert_eq!(slc(&["--calculus", "cartesian", "check", &file("countdown")]).status.code(), Some(2));
}

#[test]
fn parse_errors_are_rejections() {
    let o = slc_stdin(&["check", "-"], "(\\x:I. ");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn test_subcommand_runs_a_registered_suite() {
    let o = slc(&["--json", "test", "inclusion", "--cases", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["suite"], "inclusion");
    assert_eq!(v["cases"], 50);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);

    let list = stdout(&slc(&["test", "--list"]));
    for suite in ["subject-reduction", "soundness", "adequacy", "degeneracy", "coherence"] {
        assert!(list.contains(suite), "{suite} missing from {list}");
    }
}

#[test]
fn gen_is_deterministic_in_the_seed() {
    let a = stdout(&slc(&["--seed", "7", "gen", "--count", "5"]));
    let b = stdout(&slc(&["--seed", "7", "gen", "--count", "5"]));
    let c = stdout(&slc(&["--seed", "8", "gen", "--count", "5"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 5);
    for line in a.lines() {
        let (term, _) = line.rsplit_once(" : ").unwrap();
        let o = slc_stdin(&["check", "-"], term);
        assert_eq!(o.status.code(), Some(0), "{term}");
    }
}

#[test]
fn gen_honours_the_requested_type() {
    let out = stdout(&slc(&["gen", "--count", "4", "--type", "I -o I"]));
    assert!(out.lines().all(|l| l.ends_with(" : I -o I")), "{out}");
}
