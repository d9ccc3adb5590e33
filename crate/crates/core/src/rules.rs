//! Oriented rewrite rules and the admission gate guarding the rule database.
//!
//! A rule `lhs == rhs` states that `lhs` and `rhs` denote the same value.
//! It is admitted only when it is well sorted, oriented so that rewriting
//! removes reversal images, and sound at every valuation of a bounded
//! domain.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::error::{ParseError, SyntaxError};
use crate::oracle::{OracleError, ValuationSpace, Verdict};
use crate::parse::{parse_rule_sides, split_declarations, Pattern};
use crate::print::print_rule_sides;
use crate::semantics::{DomainParams, EvalError, Evaluator, Valuation, Value};
use crate::term::{Builtin, Signature, Sort, Term, Var};

const DEFAULT_RULES: &str = include_str!("default.rules");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Builtin,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub origin: Origin,
}

fn pattern_vars(p: &Pattern) -> BTreeSet<Var> {
    match p {
        Pattern::Term(t) => t.vars(),
        Pattern::Eq(a, b) => {
            let mut out = a.vars();
            b.collect_vars(&mut out);
            out
        }
    }
}

fn pattern_rev_count(p: &Pattern) -> usize {
    match p {
        Pattern::Term(t) => t.count_app(Builtin::Rev),
        Pattern::Eq(a, b) => a.count_app(Builtin::Rev) + b.count_app(Builtin::Rev),
    }
}

fn rev_depth_sum(t: &Term, depth: usize) -> usize {
    match t {
        Term::App(_, args) => {
            let here = if t.is_app_of(Builtin::Rev) { depth } else { 0 };
            here + args.iter().map(|a| rev_depth_sum(a, depth + 1)).sum::<usize>()
        }
        _ => 0,
    }
}

/// How far `rev` is from being eliminated: the number of `rev` nodes, then
/// the total depth at which they sit.
fn rev_measure(p: &Pattern) -> (usize, usize) {
    let depth = match p {
        Pattern::Term(t) => rev_depth_sum(t, 0),
        Pattern::Eq(a, b) => rev_depth_sum(a, 1) + rev_depth_sum(b, 1),
    };
    (pattern_rev_count(p), depth)
}

fn pattern_user_symbols(p: &Pattern, out: &mut BTreeSet<String>) {
    fn walk(t: &Term, out: &mut BTreeSet<String>) {
        if let Term::App(sym, args) = t {
            if let crate::term::Symbol::User(d) = sym {
                out.insert(d.name.clone());
            }
            args.iter().for_each(|a| walk(a, out));
        }
    }
    match p {
        Pattern::Term(t) => walk(t, out),
        Pattern::Eq(a, b) => {
            walk(a, out);
            walk(b, out);
        }
    }
}

impl Rule {
    pub fn new(name: impl Into<String>, lhs: Pattern, rhs: Pattern, origin: Origin) -> Self {
        Rule {
            name: name.into(),
            lhs,
            rhs,
            origin,
        }
    }

    /// Parses `NAME: LHS == RHS`.
    pub fn parse(text: &str, sig: &Signature, origin: Origin) -> Result<Rule, SyntaxError> {
        Self::parse_at(text, sig, origin, 1, 1)
    }

    /// Like [`Rule::parse`], reporting positions relative to `line`/`col`.
    pub fn parse_at(
        text: &str,
        sig: &Signature,
        origin: Origin,
        line: usize,
        col: usize,
    ) -> Result<Rule, SyntaxError> {
        let (name, rest, offset) = split_name(text).ok_or_else(|| {
            ParseError::new(line, col, "expected `NAME: LHS == RHS`".to_string())
        })?;
        let (lhs, rhs) = parse_rule_sides(rest, sig, line, col + offset)?;
        Ok(Rule::new(name, lhs, rhs, origin))
    }

    pub fn sort(&self) -> Sort {
        self.lhs.sort()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = pattern_vars(&self.lhs);
        out.extend(pattern_vars(&self.rhs));
        out
    }

    pub fn swapped(&self) -> Rule {
        Rule::new(
            self.name.clone(),
            self.rhs.clone(),
            self.lhs.clone(),
            self.origin,
        )
    }

    /// Checks orientation and variable conditions, without evaluation. A
    /// rule is oriented when its left side mentions `rev` and rewriting
    /// strictly lowers the number of `rev` nodes, or keeps it and moves
    /// them closer to the root.
    pub fn structural_problems(&self) -> Vec<Problem> {
        let mut problems = Vec::new();
        if self.lhs.sort() != self.rhs.sort() {
            problems.push(Problem::SortMismatch {
                lhs: self.lhs.sort(),
                rhs: self.rhs.sort(),
            });
        }
        let trivial = match &self.lhs {
            Pattern::Term(Term::Var(_)) => true,
            Pattern::Term(t) if t.is_app_of(Builtin::Rev) => matches!(t.args()[0], Term::Var(_)),
            _ => false,
        };
        if trivial {
            problems.push(Problem::TrivialLhs);
        }
        let (l, r) = (rev_measure(&self.lhs), rev_measure(&self.rhs));
        if l.0 == 0 {
            problems.push(Problem::NoRevOnLeft);
        } else if r >= l {
            problems.push(Problem::NotDecreasing { lhs: l, rhs: r });
        }
        let unbound: Vec<Var> = pattern_vars(&self.rhs)
            .difference(&pattern_vars(&self.lhs))
            .cloned()
            .collect();
        if !unbound.is_empty() {
            problems.push(Problem::UnboundRhsVars(unbound));
        }
        problems
    }
}

fn split_name(text: &str) -> Option<(&str, &str, usize)> {
    let name_len = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
        .unwrap_or(text.len());
    if name_len == 0 {
        return None;
    }
    let after = &text[name_len..];
    let colon = after.len() - after.trim_start_matches([' ', '\t']).len();
    if !after[colon..].starts_with(':') {
        return None;
    }
    let offset = name_len + colon + 1;
    Some((&text[..name_len], &text[offset..], offset))
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule {}: {}",
            self.name,
            print_rule_sides(&self.lhs, &self.rhs)
        )
    }
}

/// A reason a rule was refused.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Problem {
    #[error("sides have different sorts ({} vs {})", .lhs.name(), .rhs.name())]
    SortMismatch { lhs: Sort, rhs: Sort },
    #[error("orientation: left side contains no rev")]
    NoRevOnLeft,
    /// Measures are (rev count, summed rev depth), compared lexicographically.
    #[error(
        "orientation: right side does not reduce rev (count, depth) {:?} to below {:?}",
        .rhs,
        .lhs
    )]
    NotDecreasing {
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("left side is a bare variable or the reversal of one")]
    TrivialLhs,
    #[error("right side mentions variables absent from the left: {}", names(.0))]
    UnboundRhsVars(Vec<Var>),
    #[error("unsound: sides differ at {0}")]
    Unsound(Valuation),
    #[error("cannot be vetted: {0}")]
    Unevaluable(EvalError),
}

fn names(vars: &[Var]) -> String {
    vars.iter()
        .map(|v| v.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The outcome of [`admit_rule`]: the soundness verdict and every problem
/// found. The rule is admitted iff `problems` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleVerdict {
    pub rule: String,
    pub verdict: Option<Verdict>,
    pub problems: Vec<Problem>,
}

impl RuleVerdict {
    pub fn admitted(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn counterexample(&self) -> Option<&Valuation> {
        self.verdict.as_ref().and_then(|v| v.counterexample.as_ref())
    }
}

fn eval_pattern(ev: &Evaluator, p: &Pattern, sigma: &Valuation) -> Result<Value, EvalError> {
    match p {
        Pattern::Term(t) => ev.term(t, sigma),
        Pattern::Eq(a, b) => Ok(Value::Bool(ev.term(a, sigma)? == ev.term(b, sigma)?)),
    }
}

/// Vets a rule: structural checks, then exhaustive soundness under `p`.
/// Soundness is checked even when a structural check fails, so that an
/// unsound rule always reports its counterexample.
pub fn admit_rule(rule: &Rule, p: DomainParams) -> RuleVerdict {
    let mut problems = rule.structural_problems();
    let mut verdict = None;
    let mut users = BTreeSet::new();
    pattern_user_symbols(&rule.lhs, &mut users);
    pattern_user_symbols(&rule.rhs, &mut users);
    if let Some(name) = users.into_iter().next() {
        problems.push(Problem::Unevaluable(EvalError::Uninterpreted(name)));
    } else if !problems
        .iter()
        .any(|pr| matches!(pr, Problem::SortMismatch { .. }))
    {
        let ev = Evaluator::new(p);
        let space = ValuationSpace::new(&rule.vars(), p);
        match space.check(p, |sigma| {
            Ok(eval_pattern(&ev, &rule.lhs, sigma)? == eval_pattern(&ev, &rule.rhs, sigma)?)
        }) {
            Ok(v) => {
                if let Some(c) = &v.counterexample {
                    problems.push(Problem::Unsound(c.clone()));
                }
                verdict = Some(v);
            }
            Err(OracleError::Eval { error, .. }) => problems.push(Problem::Unevaluable(error)),
            Err(OracleError::Sort(_)) => unreachable!("rule sides share one variable scope"),
        }
    }
    RuleVerdict {
        rule: rule.name.clone(),
        verdict,
        problems,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{}rule `{name}` is already defined", position(.at))]
    Duplicate {
        name: String,
        at: Option<(usize, usize)>,
    },
    #[error("rule `{}` rejected: {}", .0.rule, problem_list(&.0.problems))]
    Rejected(RuleVerdict),
}

fn position(at: &Option<(usize, usize)>) -> String {
    at.map(|(l, c)| format!("{l}:{c}: ")).unwrap_or_default()
}

fn problem_list(problems: &[Problem]) -> String {
    problems
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<ParseError> for RuleError {
    fn from(e: ParseError) -> Self {
        RuleError::Syntax(e.into())
    }
}

/// An ordered rule database. Every member passed [`admit_rule`] under
/// [`RuleSet::params`] when it was added.
#[derive(Clone, Debug)]
pub struct RuleSet {
    rules: Vec<Rule>,
    params: DomainParams,
}

impl RuleSet {
    pub fn empty(params: DomainParams) -> Self {
        RuleSet {
            rules: Vec::new(),
            params,
        }
    }

    pub fn params(&self) -> DomainParams {
        self.params
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Admits and appends a rule.
    pub fn add(&mut self, rule: Rule) -> Result<RuleVerdict, RuleError> {
        if self.get(&rule.name).is_some() {
            return Err(RuleError::Duplicate {
                name: rule.name,
                at: None,
            });
        }
        let verdict = admit_rule(&rule, self.params);
        if !verdict.admitted() {
            return Err(RuleError::Rejected(verdict));
        }
        self.rules.push(rule);
        Ok(verdict)
    }

    pub fn remove(&mut self, name: &str) -> Option<Rule> {
        let i = self.rules.iter().position(|r| r.name == name)?;
        Some(self.rules.remove(i))
    }

    pub fn without(&self, name: &str) -> RuleSet {
        let mut out = self.clone();
        out.remove(name);
        out
    }

    /// Appends every rule declared in `text` (`rule NAME: LHS == RHS` lines).
    pub fn load(&mut self, text: &str, sig: &Signature, origin: Origin) -> Result<(), RuleError> {
        for decl in split_declarations(text, &["rule"])? {
            let rule = Rule::parse_at(&decl.body, sig, origin, decl.line, decl.col)?;
            if self.get(&rule.name).is_some() {
                return Err(RuleError::Duplicate {
                    name: rule.name,
                    at: Some((decl.line, decl.col)),
                });
            }
            self.add(rule)?;
        }
        Ok(())
    }
}

/// The builtin reversal rules, vetted at the default bounds.
pub fn default_ruleset() -> RuleSet {
    let mut set = RuleSet::empty(DomainParams::vetting());
    set.load(DEFAULT_RULES, &Signature::builtin(), Origin::Builtin)
        .expect("builtin rules are admissible");
    set
}

/// Source text of the builtin rules.
pub fn default_rules_text() -> &'static str {
    DEFAULT_RULES
}

/// The builtin rules followed by the rules declared in `text`.
pub fn load_ruleset(text: &str, sig: &Signature, p: DomainParams) -> Result<RuleSet, RuleError> {
    let mut set = RuleSet::empty(p);
    set.load(DEFAULT_RULES, &Signature::builtin(), Origin::Builtin)?;
    set.load(text, sig, Origin::User)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(text: &str) -> Rule {
        Rule::parse(text, &Signature::builtin(), Origin::User).unwrap()
    }

    #[test]
    fn default_rules_are_admitted_in_order() {
        let set = default_ruleset();
        let names: Vec<_> = set.rules().iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "rev_rev",
                "rev_append",
                "rev_inj",
                "rev_is_nil",
                "nil_is_rev",
                "cons_rev",
                "prefix_rev",
                "suffix_rev",
                "hd_rev_last",
                "last_rev_hd",
                "length_rev",
                "lq_to_rq",
                "rq_to_lq",
                "rev_nil",
            ]
        );
    }

    #[test]
    fn parses_name_and_sides() {
        let r = rule("hd_rev: hd (rev x) == last x");
        assert_eq!(r.name, "hd_rev");
        assert_eq!(r.sort(), Sort::Elem);
        assert_eq!(r.to_string(), "rule hd_rev: hd (rev x) == last x");
        let r = rule("inj : (rev x = rev y) == (x = y)");
        assert_eq!(r.sort(), Sort::Bool);
        assert_eq!(r.to_string(), "rule inj: (rev x = rev y) == (x = y)");
    }

    #[test]
    fn unsound_rule_reports_first_counterexample() {
        let v = admit_rule(&rule("bad: hd (rev x) == hd x"), DomainParams::vetting());
        assert!(!v.admitted());
        let expected = Valuation::new().with(Var::list("x"), Value::List(vec![0, 1]));
        assert_eq!(v.counterexample(), Some(&expected));
        assert_eq!(v.problems, vec![Problem::Unsound(expected)]);
    }

    #[test]
    fn misoriented_rules_are_rejected() {
        let p = DomainParams::vetting();
        let v = admit_rule(&rule("r: last x == hd (rev x)"), p);
        assert_eq!(v.problems, vec![Problem::NoRevOnLeft]);
        let v = admit_rule(&rule("r: x == rev (rev x)"), p);
        assert!(v.problems.contains(&Problem::TrivialLhs));
        let v = admit_rule(&rule("r: rev x == x"), p);
        assert!(v.problems.contains(&Problem::TrivialLhs));
        assert!(v.counterexample().is_some());
    }

    #[test]
    fn every_swapped_default_rule_is_rejected() {
        for r in default_ruleset().rules() {
            let v = admit_rule(&r.swapped(), DomainParams::vetting());
            assert!(!v.admitted(), "{}", r.name);
        }
    }

    #[test]
    fn unbound_right_variables_are_rejected() {
        let v = admit_rule(&rule("r: rev (rev x) == rev (rev y)"), DomainParams::new(2, 2));
        assert!(v
            .problems
            .iter()
            .any(|p| matches!(p, Problem::UnboundRhsVars(_))));
    }

    #[test]
    fn uninterpreted_symbols_cannot_be_vetted() {
        let mut sig = Signature::builtin();
        sig.declare("f", vec![Sort::List], Sort::List).unwrap();
        let r = Rule::parse("r: f (rev x) == f x", &sig, Origin::User).unwrap();
        let v = admit_rule(&r, DomainParams::vetting());
        assert_eq!(
            v.problems,
            vec![Problem::Unevaluable(EvalError::Uninterpreted("f".into()))]
        );
    }

    #[test]
    fn load_appends_user_rules_and_rejects_duplicates() {
        let sig = Signature::builtin();
        let set = load_ruleset(
            "rule hd_rev: hd (rev x) == last x\n",
            &sig,
            DomainParams::vetting(),
        )
        .unwrap();
        assert_eq!(set.len(), 15);
        assert_eq!(set.rules().last().unwrap().origin, Origin::User);
        let err = load_ruleset("rule rev_rev: rev (rev y) == y\n", &sig, DomainParams::vetting())
            .unwrap_err();
        assert!(matches!(err, RuleError::Duplicate { at: Some((1, _)), .. }));
    }

    #[test]
    fn load_reports_rejections_and_positions() {
        let sig = Signature::builtin();
        let err = load_ruleset("\nrule bad: hd (rev x) == hd x\n", &sig, DomainParams::vetting())
            .unwrap_err();
        let RuleError::Rejected(v) = err else { panic!() };
        assert_eq!(v.rule, "bad");
        let err = load_ruleset("rule bad: hd (rev x) == \n", &sig, DomainParams::vetting())
            .unwrap_err();
        let RuleError::Syntax(SyntaxError::Parse(e)) = err else { panic!() };
        assert_eq!(e.line, 1);
        let err = load_ruleset("rule bad hd x == x\n", &sig, DomainParams::vetting()).unwrap_err();
        assert!(matches!(err, RuleError::Syntax(_)));
    }

    #[test]
    fn without_drops_a_rule() {
        let set = default_ruleset().without("hd_rev_last");
        assert_eq!(set.len(), 13);
        assert!(set.get("hd_rev_last").is_none());
    }
}
