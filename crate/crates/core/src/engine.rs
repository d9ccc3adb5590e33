//! The reversal pipeline: instantiate, transport binders, normalize, and
//! optionally canonicalize `@` chains.
//!
//! Every change is recorded as a [`Step`] that rewrites one node of the
//! formula tree, so a report can be replayed from its input.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::parse::Pattern;
use crate::rules::RuleSet;
use crate::term::{
    format_path, substitute, Builtin, Formula, Node, NodeRef, Path, Sort, Term, Var,
};

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Instantiate,
    Transport,
    Rewrite,
    Canon,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Instantiate => "instantiate",
            Phase::Transport => "transport",
            Phase::Rewrite => "rewrite",
            Phase::Canon => "canon",
        }
    }
}

/// One rewrite: the node at `path` was `before` and became `after`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub phase: Phase,
    /// Rule name, or the name of the builtin transformation.
    pub label: String,
    pub path: Path,
    pub before: Node,
    pub after: Node,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |n: &Node| match n {
            Node::Formula(g) => crate::print::plain(g),
            Node::Term(t) => t.to_string(),
        };
        write!(
            f,
            "{} {} at {}: {} ~> {}",
            self.phase.name(),
            self.label,
            format_path(&self.path),
            show(&self.before),
            show(&self.after)
        )
    }
}

/// A `rev` application left in the output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub path: Path,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReversalReport {
    pub input: Formula,
    pub output: Formula,
    pub residual_rev_count: usize,
    pub residual_positions: Vec<Residual>,
    pub steps: Vec<Step>,
    /// Rule and literal rewrites performed during normalization.
    pub fuel_used: usize,
}

impl ReversalReport {
    pub fn is_complete(&self) -> bool {
        self.residual_rev_count == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReverseOptions {
    pub assoc_canon: bool,
    pub fuel: usize,
}

impl Default for ReverseOptions {
    fn default() -> Self {
        ReverseOptions {
            assoc_canon: false,
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("fuel exhausted after {fuel} rewrites; last formula: {}", crate::print::plain(.last))]
    FuelExhausted { fuel: usize, last: Formula },
    #[error("rewriting cycled after {steps} rewrites at: {}", crate::print::plain(.formula))]
    CycleDetected { steps: usize, formula: Formula },
}

/// Substitutes `rev x` for every free list variable `x`.
pub fn instantiate_list_vars(f: &Formula) -> Formula {
    let binding: BTreeMap<Var, Term> = f
        .free_vars()
        .into_iter()
        .filter(|v| v.sort == Sort::List)
        .map(|v| {
            let image = Term::rev(Term::Var(v.clone()));
            (v, image)
        })
        .collect();
    substitute(f, &binding).expect("rev preserves the list sort")
}

/// Re-parameterizes every list binder `x` through `rev`, replacing its
/// bound occurrences by `rev x`. Sound because `rev` is a bijection.
pub fn transport_binders(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(transport_binders(g)),
        Formula::And(a, b) => Formula::and(transport_binders(a), transport_binders(b)),
        Formula::Or(a, b) => Formula::or(transport_binders(a), transport_binders(b)),
        Formula::Implies(a, b) => Formula::implies(transport_binders(a), transport_binders(b)),
        Formula::Quant(q, v, body) => {
            let mut body = transport_binders(body);
            if v.sort == Sort::List {
                let binding = BTreeMap::from([(v.clone(), Term::rev(Term::Var(v.clone())))]);
                body = substitute(&body, &binding).expect("rev preserves the list sort");
            }
            Formula::Quant(*q, v.clone(), Box::new(body))
        }
    }
}

fn match_term(pat: &Term, t: &Term, b: &mut BTreeMap<Var, Term>) -> bool {
    match pat {
        Term::Var(v) => {
            if t.sort() != v.sort {
                return false;
            }
            match b.get(v) {
                Some(bound) => bound == t,
                None => {
                    b.insert(v.clone(), t.clone());
                    true
                }
            }
        }
        Term::Lit(_) => pat == t,
        Term::App(s, ps) => match t {
            Term::App(s2, ts) => {
                s == s2 && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| match_term(p, t, b))
            }
            _ => false,
        },
    }
}

fn instantiate_pattern(p: &Pattern, b: &BTreeMap<Var, Term>) -> Node {
    match p {
        Pattern::Term(t) if t.sort() == Sort::Bool => Node::Formula(Formula::Atom(t.subst(b))),
        Pattern::Term(t) => Node::Term(t.subst(b)),
        Pattern::Eq(l, r) => Node::Formula(Formula::Eq(l.subst(b), r.subst(b))),
    }
}

struct Redex {
    label: String,
    path: Path,
    before: Node,
    after: Node,
}

struct Search<'r> {
    rules: &'r RuleSet,
    path: Path,
}

impl Search<'_> {
    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> Option<T>) -> Option<T> {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    fn formula(&mut self, f: &Formula) -> Option<Redex> {
        match f {
            Formula::Atom(t) => self.child(0, |s| s.term(t, true)),
            Formula::Eq(a, b) => self
                .child(0, |s| s.term(a, false))
                .or_else(|| self.child(1, |s| s.term(b, false)))
                .or_else(|| self.equation(f, a, b)),
            Formula::Not(g) | Formula::Quant(_, _, g) => self.child(0, |s| s.formula(g)),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => self
                .child(0, |s| s.formula(a))
                .or_else(|| self.child(1, |s| s.formula(b))),
        }
    }

    fn equation(&self, f: &Formula, a: &Term, b: &Term) -> Option<Redex> {
        for rule in self.rules.rules() {
            let Pattern::Eq(pa, pb) = &rule.lhs else {
                continue;
            };
            let mut binding = BTreeMap::new();
            if match_term(pa, a, &mut binding) && match_term(pb, b, &mut binding) {
                return Some(Redex {
                    label: rule.name.clone(),
                    path: self.path.clone(),
                    before: Node::Formula(f.clone()),
                    after: instantiate_pattern(&rule.rhs, &binding),
                });
            }
        }
        None
    }

    /// `atom_root`: `t` is the whole body of an atomic formula, so a rule
    /// whose right side is an equation may replace the enclosing atom.
    fn term(&mut self, t: &Term, atom_root: bool) -> Option<Redex> {
        if let Term::App(_, args) = t {
            for (i, a) in args.iter().enumerate() {
                if let Some(r) = self.child(i, |s| s.term(a, false)) {
                    return Some(r);
                }
            }
        }
        for rule in self.rules.rules() {
            let Pattern::Term(pat) = &rule.lhs else {
                continue;
            };
            let mut binding = BTreeMap::new();
            if !match_term(pat, t, &mut binding) {
                continue;
            }
            match instantiate_pattern(&rule.rhs, &binding) {
                Node::Term(after) => {
                    return Some(Redex {
                        label: rule.name.clone(),
                        path: self.path.clone(),
                        before: Node::Term(t.clone()),
                        after: Node::Term(after),
                    })
                }
                Node::Formula(Formula::Atom(after)) => {
                    return Some(Redex {
                        label: rule.name.clone(),
                        path: self.path.clone(),
                        before: Node::Term(t.clone()),
                        after: Node::Term(after),
                    })
                }
                Node::Formula(after) if atom_root => {
                    let mut path = self.path.clone();
                    path.pop();
                    return Some(Redex {
                        label: rule.name.clone(),
                        path,
                        before: Node::Formula(Formula::Atom(t.clone())),
                        after: Node::Formula(after),
                    });
                }
                Node::Formula(_) => {}
            }
        }
        mirror_literal(t).map(|after| Redex {
            label: "literal_mirror".to_string(),
            path: self.path.clone(),
            before: Node::Term(t.clone()),
            after: Node::Term(after),
        })
    }
}

/// `rev [t1, ..., tn]` with rev-free items becomes `[tn, ..., t1]`.
fn mirror_literal(t: &Term) -> Option<Term> {
    if !t.is_app_of(Builtin::Rev) {
        return None;
    }
    let items = t.args()[0].as_list_literal()?;
    if items.iter().any(|i| i.mentions(Builtin::Rev)) {
        return None;
    }
    Some(Term::list_literal(items.into_iter().rev().cloned().collect()))
}

fn apply(f: &Formula, path: &[usize], node: Node) -> Formula {
    f.replace_at(path, node).expect("redex path is valid")
}

/// Rewrites leftmost-innermost to a normal form: at each step the first
/// redex in post-order is rewritten by the first matching rule, falling
/// back to literal mirroring.
pub fn normalize(
    f: &Formula,
    rules: &RuleSet,
    fuel: usize,
) -> Result<(Formula, Vec<Step>), EngineError> {
    let mut current = f.clone();
    let mut seen = HashSet::from([current.clone()]);
    let mut steps = Vec::new();
    loop {
        let mut search = Search {
            rules,
            path: Vec::new(),
        };
        let Some(redex) = search.formula(&current) else {
            return Ok((current, steps));
        };
        if steps.len() == fuel {
            return Err(EngineError::FuelExhausted {
                fuel,
                last: current,
            });
        }
        let next = apply(&current, &redex.path, redex.after.clone());
        steps.push(Step {
            phase: Phase::Rewrite,
            label: redex.label,
            path: redex.path,
            before: redex.before,
            after: redex.after,
        });
        if !seen.insert(next.clone()) {
            return Err(EngineError::CycleDetected {
                steps: steps.len(),
                formula: next,
            });
        }
        current = next;
    }
}

fn right_assoc(l: Term, r: Term) -> Term {
    if l.is_app_of(Builtin::Append) {
        let Term::App(_, mut args) = l else {
            unreachable!()
        };
        let b = args.pop().unwrap();
        let a = args.pop().unwrap();
        right_assoc(a, right_assoc(b, r))
    } else {
        Term::append(l, r)
    }
}

/// Re-associates every `@` chain to the right.
pub fn canon_assoc(f: &Formula) -> Formula {
    f.map_terms(&mut |t| {
        t.map_bottom_up(&mut |t| {
            if t.is_app_of(Builtin::Append) {
                let Term::App(_, mut args) = t else {
                    unreachable!()
                };
                let r = args.pop().unwrap();
                let l = args.pop().unwrap();
                right_assoc(l, r)
            } else {
                t
            }
        })
    })
}

/// Every `rev` application in `f`, outermost first, in left-to-right order.
pub fn rev_positions(f: &Formula) -> Vec<Residual> {
    fn term(t: &Term, path: &mut Path, out: &mut Vec<Residual>) {
        if let Term::App(_, args) = t {
            if t.is_app_of(Builtin::Rev) {
                out.push(Residual {
                    path: path.clone(),
                    term: t.clone(),
                });
            }
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                term(a, path, out);
                path.pop();
            }
        }
    }
    fn formula(f: &Formula, path: &mut Path, out: &mut Vec<Residual>) {
        let child = |i: usize, path: &mut Path, out: &mut Vec<Residual>, n: Either| {
            path.push(i);
            match n {
                Either::F(g) => formula(g, path, out),
                Either::T(t) => term(t, path, out),
            }
            path.pop();
        };
        match f {
            Formula::Atom(t) => child(0, path, out, Either::T(t)),
            Formula::Eq(a, b) => {
                child(0, path, out, Either::T(a));
                child(1, path, out, Either::T(b));
            }
            Formula::Not(g) | Formula::Quant(_, _, g) => child(0, path, out, Either::F(g)),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                child(0, path, out, Either::F(a));
                child(1, path, out, Either::F(b));
            }
        }
    }
    enum Either<'a> {
        F(&'a Formula),
        T(&'a Term),
    }
    let mut out = Vec::new();
    formula(f, &mut Vec::new(), &mut out);
    out
}

fn whole(phase: Phase, label: &str, before: &Formula, after: &Formula) -> Option<Step> {
    (before != after).then(|| Step {
        phase,
        label: label.to_string(),
        path: Vec::new(),
        before: Node::Formula(before.clone()),
        after: Node::Formula(after.clone()),
    })
}

/// Produces the reversal-symmetric counterpart of `f`.
pub fn reverse_fact(
    f: &Formula,
    rules: &RuleSet,
    opts: ReverseOptions,
) -> Result<ReversalReport, EngineError> {
    let mut steps = Vec::new();
    let inst = instantiate_list_vars(f);
    steps.extend(whole(Phase::Instantiate, "instantiate_list_vars", f, &inst));
    let trans = transport_binders(&inst);
    steps.extend(whole(Phase::Transport, "transport_binders", &inst, &trans));
    let (normal, rewrites) = normalize(&trans, rules, opts.fuel)?;
    let fuel_used = rewrites.len();
    steps.extend(rewrites);
    let output = if opts.assoc_canon {
        let canon = canon_assoc(&normal);
        steps.extend(whole(Phase::Canon, "canon_assoc", &normal, &canon));
        canon
    } else {
        normal
    };
    let residual_positions = rev_positions(&output);
    Ok(ReversalReport {
        input: f.clone(),
        residual_rev_count: output.count_app(Builtin::Rev),
        residual_positions,
        output,
        steps,
        fuel_used,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index} does not apply: no matching node at {}", format_path(.path))]
pub struct ReplayError {
    pub index: usize,
    pub path: Path,
}

/// Re-applies `steps` to `input`, checking each recorded `before` node.
pub fn replay(input: &Formula, steps: &[Step]) -> Result<Formula, ReplayError> {
    let mut current = input.clone();
    for (index, step) in steps.iter().enumerate() {
        let err = || ReplayError {
            index,
            path: step.path.clone(),
        };
        let matches = match (current.node_at(&step.path), &step.before) {
            (Some(NodeRef::Formula(g)), Node::Formula(b)) => g == b,
            (Some(NodeRef::Term(t)), Node::Term(b)) => t == b,
            _ => false,
        };
        if !matches {
            return Err(err());
        }
        current = current
            .replace_at(&step.path, step.after.clone())
            .ok_or_else(err)?;
    }
    Ok(current)
}
