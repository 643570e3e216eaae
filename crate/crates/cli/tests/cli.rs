use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use mvzero::algebra::builtin;
use mvzero::semantics::make_structure;
use mvzero::translator::ConstraintProfile;
use mvzero::{Elem, Vocabulary};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvzero")).args(args).env_remove("MVZERO_MAX_DEPTH").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mvzero-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn help_for_every_subcommand() {
    let commands: &[&[&str]] = &[
        &[],
        &["algebra"],
        &["algebra", "list"],
        &["algebra", "show"],
        &["algebra", "check"],
        &["parse"],
        &["eval"],
        &["translate"],
        &["asymptotic"],
        &["qe"],
        &["asymset"],
        &["montecarlo"],
        &["continuum"],
        &["continuum", "estimate"],
        &["continuum", "extremum"],
        &["continuum", "ext-axiom"],
        &["s5"],
    ];
    for c in commands {
        let mut args = c.to_vec();
        args.push("--help");
        let text = stdout(&args);
        assert!(text.contains("Usage"), "{c:?}");
    }
}

#[test]
fn algebra_listing_and_check() {
    let list = stdout(&["algebra", "list"]);
    for name in ["B2", "L<k>", "G<k>", "prod("] {
        assert!(list.contains(name), "{list}");
    }
    assert!(stdout(&["algebra", "show", "L3"]).contains("1/2"));
    let json = stdout(&["algebra", "show", "G4", "--json"]);
    let path = temp_file("g4.json", &json);
    assert!(stdout(&["algebra", "check", path.to_str().unwrap()]).contains("delta = g1"));
}

#[test]
fn witness_values() {
    let out = stdout(&["asymptotic", "--algebra", "L4", "-s", "forall x. times(1, oplus(pow(P(x),3), not P(x)))"]);
    assert!(out.contains("1/3"), "{out}");
    let out = stdout(&["asymptotic", "--algebra", "G3", "-s", "forall x. P(x) | not P(x)"]);
    assert!(out.contains("g1"), "{out}");
    let out = stdout(&["asymptotic", "--algebra", "B2", "-s", "forall x. exists y. R(x,y)", "--explain"]);
    assert!(out.contains('1'), "{out}");
}

#[test]
fn asymptotic_json_is_valid() {
    let out = stdout(&["asymptotic", "--algebra", "L3", "-s", "forall x. P(x) | not P(x)", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.to_string().contains("1/2"), "{v}");
}

#[test]
fn sentence_file_with_comments() {
    let path = temp_file("sentences.txt", "# unary witnesses\nexists x. P(x)\nforall x. P(x)\n");
    let out = stdout(&["asymptotic", "--algebra", "L3", "--file", path.to_str().unwrap()]);
    assert_eq!(out.lines().count(), 2, "{out}");
}

#[test]
fn quantifier_elimination_and_value_sets() {
    let out = stdout(&["qe", "--algebra", "L3", "-s", "forall x. P(x) | not P(x)"]);
    assert!(out.contains("1/2"), "{out}");
    let out = stdout(&["asymset", "--algebra", "prod(G3,L4)"]);
    assert_eq!(out.matches('<').count(), 5, "{out}");
    let out = stdout(&["asymset", "--algebra", "L4", "--witnesses"]);
    assert!(out.contains("1/3"), "{out}");
}

#[test]
fn translation_prints_one_formula_per_value() {
    let out = stdout(&["translate", "--algebra", "L3", "-s", "exists x. P(x)"]);
    assert_eq!(out.lines().filter(|l| !l.trim().is_empty()).count(), 3, "{out}");
}

#[test]
fn parse_round_trip() {
    let out = stdout(&["parse", "-s", "forall x. P(x) | not P(x)"]);
    assert!(out.contains("forall x"), "{out}");
    let out = stdout(&["parse", "--term", "oplus(pow(v,2), not v)", "--algebra", "L3"]);
    assert!(!out.is_empty());
}

#[test]
fn eval_on_structure_file() {
    let a = Arc::new(builtin("L3").unwrap());
    let vocab = Vocabulary::unary("P");
    let tables = BTreeMap::from([("P".to_string(), vec![Elem(0), Elem(1), Elem(2)])]);
    let m = make_structure(3, a, &vocab, tables, &ConstraintProfile::none()).unwrap();
    let path = temp_file("m.json", &m.to_json());
    let p = path.to_str().unwrap();
    let out = stdout(&["eval", "--structure", p, "-s", "exists x. P(x)"]);
    assert!(out.contains('1'), "{out}");
    let out = stdout(&["eval", "--structure", p, "-s", "P(x)", "--assign", "x=2"]);
    assert!(out.contains("1/2"), "{out}");
}

#[test]
fn montecarlo_csv_and_reproducibility() {
    let args = ["montecarlo", "--algebra", "B2", "-s", "exists x. P(x)", "--n", "5,10", "--samples", "300", "--seed", "9"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("n,value_label,frequency,ci_low,ci_high"), "{text}");
    let exact = stdout(&["montecarlo", "--algebra", "B2", "-s", "exists x. P(x)", "--n", "3", "--exact"]);
    assert!(exact.contains("7/8") || exact.contains("0.875"), "{exact}");
}

#[test]
fn continuum_commands() {
    let out = stdout(&["continuum", "extremum", "--term", "not v | mul(v, v)", "--tol", "1e-3"]);
    assert!(out.contains("note"), "{out}");
    let args = ["continuum", "estimate", "-s", "forall x. P(x) | not P(x)", "--n", "50", "--samples", "100", "--seed", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let out = stdout(&["continuum", "ext-axiom", "--k", "0", "--grid", "2", "--cells", "1"]);
    assert!(out.contains("exists x1"), "{out}");
}

#[test]
fn modal_translation() {
    let out = stdout(&["s5", "--modal", "box p -> p", "--algebra", "L3"]);
    assert!(!out.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--no-such-flag"]), 1);
    assert_eq!(code(&["asymptotic", "--algebra", "NOPE", "-s", "exists x. P(x)"]), 1);
    assert_eq!(code(&["asymptotic", "--algebra", "L3", "-s", "exists x. ("]), 1);
    let deep = "exists x. exists y. exists z. exists u. exists w. P(x) & P(y) & P(z) & P(u) & P(w)";
    assert_eq!(code(&["asymptotic", "--algebra", "L3", "-s", deep]), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_mvzero"))
        .args(["asymptotic", "--algebra", "L3", "-s", "forall x. exists y. R(x,y)"])
        .env("MVZERO_MAX_DEPTH", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
