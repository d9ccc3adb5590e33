use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use revsym_core::{alpha_equal, parse_formula, Signature};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("theories").join(name).to_str().unwrap().to_string()
}

fn revsym(args: &[&str], env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_revsym"));
    cmd.args(args).env_remove("REVSYM_FUEL");
    if let Some(v) = env {
        cmd.env("REVSYM_FUEL", v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn golden_theory_matches_and_verifies() {
    let o = revsym(&["reverse", &fixture("golden.thy"), "--verify"], None);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches("expected: match").count(), 4);
    assert!(out.contains("lemma suffix_appendI: suffix u v ==> suffix u (z @ v)"));
    assert!(out.contains("lemma rqI: z @ u = v ==> right_quotient v u = z"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn printed_lemmas_reparse() {
    let o = revsym(&["reverse", &fixture("golden.thy")], None);
    for line in stdout(&o).lines().filter(|l| l.starts_with("lemma ")) {
        let formula = line.split_once(": ").unwrap().1;
        let f = parse_formula(formula, &Signature::builtin()).unwrap();
        assert_eq!(f.to_string(), formula);
        assert!(alpha_equal(&f, &parse_formula(&f.to_string(), &Signature::builtin()).unwrap()));
    }
}

#[test]
fn association_decides_the_hand_written_match() {
    let thy = fixture("example3_canon.thy");
    let o = revsym(&["reverse", &thy, "--assoc-canon"], None);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("suffix u (q @ w @ p)"));
    let o = revsym(&["reverse", &thy], None);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn uncovered_symbol_leaves_residual() {
    let o = revsym(&["reverse", &fixture("uncovered.thy")], None);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("residual rev at 0.0.0: rev u"), "{}", stdout(&o));
}

#[test]
fn check_rules_exit_codes() {
    let defaults = root().join("crates/core/src/default.rules");
    let o = revsym(&["check-rules", defaults.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("# 14 rules checked, 0 rejected (k=2, L=4, N=8)"));
    assert!(stdout(&o).contains("ok       rev_append (961 valuations)"));

    let o = revsym(&["check-rules", &fixture("unsound.rules")], None);
    assert_eq!(code(&o), 3);
    let out = stdout(&o);
    assert!(out.contains("rejected bad\n"), "{out}");
    assert!(out.contains("rejected bogus\n  counterexample {x=[0,1]}"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let empty = write(&dir, "empty.rules", "");
    let o = revsym(&["check-rules", &empty], None);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0 rules checked"));

    let broken = write(&dir, "broken.rules", "rule r: rev (rev x) ==\n");
    assert_eq!(code(&revsym(&["check-rules", &broken], None)), 2);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let parse_err = write(&dir, "a.thy", "lemma a: prefix u\n");
    let o = revsym(&["reverse", &parse_err], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("a.thy:1:"), "{}", stderr(&o));

    let unknown = write(&dir, "b.thy", "reversed nothing\n");
    assert_eq!(code(&revsym(&["reverse", &unknown], None)), 2);

    let bad_rule = write(&dir, "c.thy", "rule bad: rev x == x\nlemma a: u = v\nreversed a\n");
    let o = revsym(&["reverse", &bad_rule], None);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("unsound"), "{}", stderr(&o));

    let good = write(&dir, "d.thy", "lemma a: prefix u (u @ v)\nreversed a\n");
    assert_eq!(code(&revsym(&["reverse", &good, "--without", "nope"], None)), 2);
    assert_eq!(code(&revsym(&["reverse", &good, "--fuel", "0"], None)), 4);
    assert_eq!(code(&revsym(&["reverse", &good], Some("0"))), 4);
    assert_eq!(code(&revsym(&["reverse", &good, "--fuel", "5"], Some("0"))), 0);
    assert_eq!(code(&revsym(&["reverse", &good], Some("many"))), 2);
    assert_eq!(code(&revsym(&["reverse", &good, "--no-defaults"], None)), 1);
}

#[test]
fn user_rules_extend_the_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write(&dir, "x.rules", "rule rev_snoc_single: rev x @ [a] == rev (a # x)\n");
    let thy = write(&dir, "x.thy", "lemma a: u @ [b:elem] = v\nreversed a\n");
    let o = revsym(&["reverse", &thy], None);
    assert_eq!(code(&o), 1);
    let o = revsym(&["reverse", &thy, "--rules", &rules], None);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("lemma a_reversed: b:elem # u = v"), "{}", stdout(&o));
}

#[test]
fn json_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let j1 = dir.path().join("1.json");
    let j2 = dir.path().join("2.json");
    let thy = fixture("golden.thy");
    for j in [&j1, &j2] {
        let o = revsym(
            &["reverse", &thy, "--verify", "--json", j.to_str().unwrap()],
            None,
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read_to_string(&j1).unwrap();
    assert_eq!(a, std::fs::read_to_string(&j2).unwrap());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], "revsym/1");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["lemmas"].as_array().unwrap().len(), 4);
    assert!(v["lemmas"]
        .as_array()
        .unwrap()
        .iter()
        .all(|l| l["status"] == "ok" && l["verification"]["transport"]["pass"] == true));
    let keys: Vec<_> = a
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(keys, ["schema", "file", "options", "lemmas", "error", "exit_code"]);
}

#[test]
fn generated_lemmas_round_trip_through_reverse() {
    let o = revsym(&["gen", "--depth", "3", "--seed", "7", "--count", "20"], None);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text, stdout(&revsym(&["gen", "--depth", "3", "--seed", "7", "--count", "20"], None)));
    assert_eq!(text.lines().filter(|l| l.starts_with("lemma gen_")).count(), 20);
    let dir = tempfile::tempdir().unwrap();
    let thy = write(&dir, "gen.thy", &text);
    let o = revsym(&["reverse", &thy, "--verify"], None);
    assert!(matches!(code(&o), 0 | 1), "{}{}", stdout(&o), stderr(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
