//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use revsym_core::engine::{canon_assoc, reverse_fact, ReverseOptions};
use revsym_core::gen::gen_formula;
use revsym_core::oracle::check_transport;
use revsym_core::rules::{admit_rule, default_ruleset, Origin, Rule};
use revsym_core::semantics::{DomainParams, Value};
use revsym_core::{alpha_equal, parse_formula, schematic_equal, Formula, Signature, Var};

const PREFIX_PREFIX: &str = "prefix u v ==> prefix u (v @ z)";
const SUFFIX_APPEND: &str = "suffix u v ==> suffix u (z @ v)";
const EXAMPLE2: &str = "u ~= [] ==> prefix u v ==> hd u = hd v";
const EXAMPLE2_REV: &str = "u ~= [] ==> suffix u v ==> last u = last v";
const EXAMPLE3: &str = "prefix u (p @ w @ q) ==> length p <= length u \
    ==> length u <= length (p @ w) ==> EX r. u = p @ r /\\ prefix r w";
const EXAMPLE3_REV: &str = "suffix u (p @ w @ q) ==> length q <= length u \
    ==> length u <= length (w @ q) ==> EX r. u = r @ q /\\ suffix r w";
const LQ_I: &str = "u @ z = v ==> left_quotient u v = z";
const RQ_I: &str = "z @ u = v ==> right_quotient v u = z";

fn parse(s: &str) -> Formula {
    parse_formula(s, &Signature::builtin()).unwrap()
}

fn reverse(f: &Formula, assoc_canon: bool) -> Formula {
    let opts = ReverseOptions {
        assoc_canon,
        ..ReverseOptions::default()
    };
    reverse_fact(f, &default_ruleset(), opts).unwrap().output
}

fn within(limit: Duration, f: impl FnOnce()) {
    let start = Instant::now();
    f();
    let took = start.elapsed();
    assert!(took < limit, "took {took:?}, limit {limit:?}");
}

fn golden_pair(input: &str, expected: &str) {
    within(Duration::from_secs(1), || {
        let out = reverse(&parse(input), false);
        assert!(alpha_equal(&out, &parse(expected)), "got {out}");
    });
}

fn criterion_1() {
    golden_pair(PREFIX_PREFIX, SUFFIX_APPEND);
}

fn criterion_2() {
    golden_pair(EXAMPLE2, EXAMPLE2_REV);
}

fn criterion_3() {
    within(Duration::from_secs(1), || {
        let target = canon_assoc(&parse(EXAMPLE3_REV));
        let canon = reverse(&parse(EXAMPLE3), true);
        assert!(schematic_equal(&canon, &target), "got {canon}");
        assert_eq!(canon.binder_names(), ["r"]);
        let raw = reverse(&parse(EXAMPLE3), false);
        assert!(!schematic_equal(&raw, &target), "raw output is already right-associated");
        assert!(schematic_equal(&canon_assoc(&raw), &target));
        assert_eq!(raw.binder_names(), ["r"]);
    });
}

fn criterion_4() {
    golden_pair(LQ_I, RQ_I);
}

fn criterion_5() {
    within(Duration::from_secs(10), || {
        let p = DomainParams::new(2, 4);
        let lists: u128 = (0..=4).map(|n| 2u128.pow(n)).sum();
        assert_eq!(lists, 31);
        assert_eq!(p.domain_size(revsym_core::Sort::List), lists);
        let rules = default_ruleset();
        assert_eq!(rules.len(), 14);
        for rule in rules.rules() {
            let v = admit_rule(rule, p);
            assert!(v.admitted(), "{}: {:?}", rule.name, v.problems);
            let expected = lists.pow(
                rule.vars()
                    .iter()
                    .filter(|v| v.sort == revsym_core::Sort::List)
                    .count() as u32,
            ) * 2u128.pow(
                rule.vars()
                    .iter()
                    .filter(|v| v.sort == revsym_core::Sort::Elem)
                    .count() as u32,
            );
            assert_eq!(v.verdict.unwrap().checked_count, expected, "{}", rule.name);
        }
    });
}

fn criterion_6() {
    within(Duration::from_secs(300), || {
        let p = DomainParams::new(2, 3);
        let sig = Signature::builtin();
        let golden = [PREFIX_PREFIX, EXAMPLE2, EXAMPLE3, LQ_I].map(parse);
        let generated = (0..1000u64).map(|seed| gen_formula(4, seed, &sig));
        for f in golden.into_iter().chain(generated) {
            let g = reverse(&f, false);
            let v = check_transport(&f, &g, p).unwrap();
            assert!(v.pass, "{f} -> {g}: counterexample {:?}", v.counterexample);
        }
    });
}

fn criterion_7() {
    within(Duration::from_secs(1), || {
        for input in [PREFIX_PREFIX, EXAMPLE2, EXAMPLE3, LQ_I] {
            let f = parse(input);
            let twice = reverse(&reverse(&f, true), true);
            assert!(alpha_equal(&twice, &canon_assoc(&f)), "{input}: {twice}");
        }
    });
}

fn run_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_revsym"))
        .args(args)
        .env_remove("REVSYM_FUEL")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn criterion_8() {
    let dir = tempfile::tempdir().unwrap();
    let thy = dir.path().join("example2.thy");
    std::fs::write(&thy, format!("lemma example2: {EXAMPLE2}\nreversed example2\n")).unwrap();
    let thy = thy.to_str().unwrap();
    let json = dir.path().join("report.json");
    let json = json.to_str().unwrap();

    let mut runs = Vec::new();
    for _ in 0..2 {
        let (code, stdout) = run_bin(&["reverse", thy, "--without", "hd_rev_last", "--json", json]);
        assert_eq!(code, 1, "{stdout}");
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        let lemma = &report["lemmas"][0];
        assert_eq!(lemma["status"], "residual");
        assert_eq!(lemma["residual_count"], 2);
        let positions: Vec<(String, String)> = lemma["residual_positions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| {
                (
                    p["path"].as_str().unwrap().to_string(),
                    p["term"].as_str().unwrap().to_string(),
                )
            })
            .collect();
        // the conclusion `hd u = hd v` sits at 1.1 and becomes `hd (rev u) = hd (rev v)`
        assert_eq!(
            positions,
            [
                ("1.1.0.0".to_string(), "rev u".to_string()),
                ("1.1.1.0".to_string(), "rev v".to_string())
            ]
        );
        let output = parse(lemma["output"].as_str().unwrap());
        let located: Vec<String> = revsym_core::engine::rev_positions(&output)
            .iter()
            .map(|r| revsym_core::term::format_path(&r.path))
            .collect();
        assert_eq!(located, ["1.1.0.0", "1.1.1.0"]);
        runs.push((stdout, std::fs::read(json).unwrap()));
    }
    assert_eq!(runs[0], runs[1], "output is not deterministic");

    let (code, stdout) = run_bin(&["reverse", thy, "--json", json]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains(EXAMPLE2_REV), "{stdout}");
}

fn criterion_9() {
    let rule = Rule::parse("bogus: hd (rev x) == hd x", &Signature::builtin(), Origin::User)
        .unwrap();
    let v = admit_rule(&rule, DomainParams::new(2, 4));
    assert!(!v.admitted());

    // independent search: lists in length-then-lexicographic order
    let hd = |xs: &[u32]| xs.first().copied().unwrap_or(0);
    let mut first = None;
    'search: for len in 0..=4u32 {
        for code in 0..2u32.pow(len) {
            let xs: Vec<u32> = (0..len).rev().map(|i| (code >> i) & 1).collect();
            let rev: Vec<u32> = xs.iter().rev().copied().collect();
            if hd(&rev) != hd(&xs) {
                first = Some(xs);
                break 'search;
            }
        }
    }
    assert_eq!(first, Some(vec![0, 1]));
    assert_eq!(hd(&[1, 0]), 1);
    let c = v.counterexample().expect("counterexample");
    assert_eq!(c.get(&Var::list("x")), Some(&Value::List(vec![0, 1])));
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn()); 9] = [
        ("golden pair: prefix monotonicity", criterion_1),
        ("golden pair: head lemma", criterion_2),
        ("golden pair: bound variable lemma", criterion_3),
        ("golden pair: quotient lemma", criterion_4),
        ("default rule catalogue sound at k=2, L=4", criterion_5),
        ("transport for golden and 1000 generated formulas", criterion_6),
        ("involution up to association", criterion_7),
        ("residual diagnostics without hd_rev_last", criterion_8),
        ("negative control hd (rev x) == hd x", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let took = start.elapsed();
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name} ({took:.2?})", i + 1);
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
