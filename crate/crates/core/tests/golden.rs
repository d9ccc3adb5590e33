use revsym_core::engine::{canon_assoc, replay, reverse_fact, ReverseOptions};
use revsym_core::oracle::{check_closure, check_transport};
use revsym_core::rules::default_ruleset;
use revsym_core::semantics::DomainParams;
use revsym_core::{alpha_equal, parse_formula, schematic_equal, Formula, Signature};

const EXAMPLE3: &str = "prefix u (p @ w @ q) ==> length p <= length u ==> length u <= length (p @ w) \
                        ==> EX r. u = p @ r /\\ prefix r w";
const EXAMPLE3_RAW: &str = "suffix u ((q @ w) @ p) ==> length p <= length u \
                            ==> length u <= length (w @ p) ==> EX r. u = r @ p /\\ suffix r w";

fn parse(s: &str) -> Formula {
    parse_formula(s, &Signature::builtin()).unwrap()
}

fn reverse(s: &str, assoc_canon: bool) -> Formula {
    let opts = ReverseOptions {
        assoc_canon,
        ..ReverseOptions::default()
    };
    reverse_fact(&parse(s), &default_ruleset(), opts).unwrap().output
}

#[test]
fn prefix_monotonicity() {
    let out = reverse("prefix u v ==> prefix u (v @ z)", false);
    assert!(alpha_equal(&out, &parse("suffix u v ==> suffix u (z @ v)")));
}

#[test]
fn head_lemma() {
    let out = reverse("u ~= [] ==> prefix u v ==> hd u = hd v", false);
    assert_eq!(out.to_string(), "u ~= [] ==> suffix u v ==> last u = last v");
}

#[test]
fn bound_variable_lemma() {
    let raw = reverse(EXAMPLE3, false);
    assert!(alpha_equal(&raw, &parse(EXAMPLE3_RAW)), "{raw}");
    let canon = reverse(EXAMPLE3, true);
    assert_eq!(
        canon.to_string(),
        "suffix u (q @ w @ p) ==> length p <= length u ==> length u <= length (w @ p) \
         ==> EX r. u = r @ p /\\ suffix r w"
    );
    assert_eq!(canon.binder_names(), ["r"]);
    assert!(alpha_equal(&canon_assoc(&raw), &canon));
    let primed = parse(
        "suffix u (p @ w @ q) ==> length q <= length u ==> length u <= length (w @ q) \
         ==> EX r. u = r @ q /\\ suffix r w",
    );
    assert!(schematic_equal(&canon, &primed));
    assert!(!schematic_equal(&raw, &primed));
}

#[test]
fn quotient_lemma() {
    let out = reverse("u @ z = v ==> left_quotient u v = z", false);
    assert_eq!(out.to_string(), "z @ u = v ==> right_quotient v u = z");
}

fn golden_inputs() -> Vec<String> {
    vec![
        "prefix u v ==> prefix u (v @ z)".into(),
        "u ~= [] ==> prefix u v ==> hd u = hd v".into(),
        EXAMPLE3.into(),
        "u @ z = v ==> left_quotient u v = z".into(),
    ]
}

#[test]
fn golden_outputs_transport_and_close() {
    let p = DomainParams::new(2, 3);
    for input in golden_inputs() {
        let f = parse(&input);
        let g = reverse(&input, false);
        assert!(check_transport(&f, &g, p).unwrap().pass, "{input}");
        assert!(check_closure(&f, &g, p).unwrap().pass, "{input}");
    }
}

#[test]
fn golden_inputs_are_involutive_up_to_association() {
    let rules = default_ruleset();
    let opts = ReverseOptions {
        assoc_canon: true,
        ..ReverseOptions::default()
    };
    for input in golden_inputs() {
        let f = parse(&input);
        let once = reverse_fact(&f, &rules, opts).unwrap().output;
        let twice = reverse_fact(&once, &rules, opts).unwrap().output;
        assert!(alpha_equal(&twice, &canon_assoc(&f)), "{input}: {twice}");
    }
}

#[test]
fn golden_traces_replay() {
    let rules = default_ruleset();
    for canon in [false, true] {
        let opts = ReverseOptions {
            assoc_canon: canon,
            ..ReverseOptions::default()
        };
        for input in golden_inputs() {
            let r = reverse_fact(&parse(&input), &rules, opts).unwrap();
            assert_eq!(replay(&r.input, &r.steps).unwrap(), r.output);
            assert_eq!(r.residual_rev_count, 0);
        }
    }
}

#[test]
fn binders_are_transported_through_rev() {
    let f = parse("EX r. u = p @ r /\\ prefix r w");
    let out = reverse_fact(&f, &default_ruleset(), ReverseOptions::default())
        .unwrap()
        .output;
    assert_eq!(out.to_string(), "EX r. u = r @ p /\\ suffix r w");
}
