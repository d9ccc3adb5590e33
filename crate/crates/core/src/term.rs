//! Sorted first-order terms and formulas over the list vocabulary.
//!
//! Variables are named, not indexed. Binding is by name: a quantifier over
//! `x` hides every occurrence of `x` in its body. Substitution renames a
//! binder only when a replacement term would otherwise be captured, so user
//! visible bound names survive every transformation that does not need to
//! touch them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::SortError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Elem,
    List,
    Nat,
    Bool,
}

impl Sort {
    pub const ALL: [Sort; 4] = [Sort::Elem, Sort::List, Sort::Nat, Sort::Bool];

    pub fn name(self) -> &'static str {
        match self {
            Sort::Elem => "elem",
            Sort::List => "list",
            Sort::Nat => "nat",
            Sort::Bool => "bool",
        }
    }

    pub fn from_name(name: &str) -> Option<Sort> {
        Sort::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }

    pub fn list(name: impl Into<String>) -> Self {
        Var::new(name, Sort::List)
    }
}

/// The fixed catalogue of list symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Nil,
    Cons,
    Snoc,
    Append,
    Rev,
    Hd,
    Last,
    Length,
    Prefix,
    Suffix,
    LeftQuotient,
    RightQuotient,
    Leq,
}

impl Builtin {
    pub const ALL: [Builtin; 13] = [
        Builtin::Nil,
        Builtin::Cons,
        Builtin::Snoc,
        Builtin::Append,
        Builtin::Rev,
        Builtin::Hd,
        Builtin::Last,
        Builtin::Length,
        Builtin::Prefix,
        Builtin::Suffix,
        Builtin::LeftQuotient,
        Builtin::RightQuotient,
        Builtin::Leq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Nil => "nil",
            Builtin::Cons => "cons",
            Builtin::Snoc => "snoc",
            Builtin::Append => "append",
            Builtin::Rev => "rev",
            Builtin::Hd => "hd",
            Builtin::Last => "last",
            Builtin::Length => "length",
            Builtin::Prefix => "prefix",
            Builtin::Suffix => "suffix",
            Builtin::LeftQuotient => "left_quotient",
            Builtin::RightQuotient => "right_quotient",
            Builtin::Leq => "leq",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arg_sorts(self) -> &'static [Sort] {
        use Sort::*;
        match self {
            Builtin::Nil => &[],
            Builtin::Cons => &[Elem, List],
            Builtin::Snoc => &[List, Elem],
            Builtin::Rev | Builtin::Hd | Builtin::Last | Builtin::Length => &[List],
            Builtin::Append
            | Builtin::Prefix
            | Builtin::Suffix
            | Builtin::LeftQuotient
            | Builtin::RightQuotient => &[List, List],
            Builtin::Leq => &[Nat, Nat],
        }
    }

    pub fn result_sort(self) -> Sort {
        match self {
            Builtin::Nil
            | Builtin::Cons
            | Builtin::Snoc
            | Builtin::Append
            | Builtin::Rev
            | Builtin::LeftQuotient
            | Builtin::RightQuotient => Sort::List,
            Builtin::Hd | Builtin::Last => Sort::Elem,
            Builtin::Length => Sort::Nat,
            Builtin::Prefix | Builtin::Suffix | Builtin::Leq => Sort::Bool,
        }
    }
}

/// A user-declared uninterpreted symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub result: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Builtin(Builtin),
    User(Arc<SymbolDecl>),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Builtin(b) => b.name(),
            Symbol::User(d) => &d.name,
        }
    }

    pub fn arg_sorts(&self) -> &[Sort] {
        match self {
            Symbol::Builtin(b) => b.arg_sorts(),
            Symbol::User(d) => &d.args,
        }
    }

    pub fn result_sort(&self) -> Sort {
        match self {
            Symbol::Builtin(b) => b.result_sort(),
            Symbol::User(d) => d.result,
        }
    }

    pub fn is(&self, builtin: Builtin) -> bool {
        matches!(self, Symbol::Builtin(b) if *b == builtin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Elem(u32),
    Nat(u64),
}

impl Literal {
    pub fn sort(self) -> Sort {
        match self {
            Literal::Elem(_) => Sort::Elem,
            Literal::Nat(_) => Sort::Nat,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
    Lit(Literal),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn list_var(name: impl Into<String>) -> Term {
        Term::var(name, Sort::List)
    }

    pub fn elem(value: u32) -> Term {
        Term::Lit(Literal::Elem(value))
    }

    pub fn nat(value: u64) -> Term {
        Term::Lit(Literal::Nat(value))
    }

    /// Applies a builtin. Arity is checked only in debug builds; use
    /// [`Term::checked_app`] for untrusted input.
    pub fn app(builtin: Builtin, args: Vec<Term>) -> Term {
        debug_assert_eq!(builtin.arg_sorts().len(), args.len());
        Term::App(Symbol::Builtin(builtin), args)
    }

    pub fn checked_app(symbol: Symbol, args: Vec<Term>) -> Result<Term, SortError> {
        let expected = symbol.arg_sorts();
        if expected.len() != args.len() {
            return Err(SortError::new(format!(
                "`{}` expects {} argument(s), got {}",
                symbol.name(),
                expected.len(),
                args.len()
            )));
        }
        for (i, (want, arg)) in expected.iter().zip(&args).enumerate() {
            if arg.sort() != *want {
                return Err(SortError::new(format!(
                    "argument {} of `{}` must be {}, got {}",
                    i + 1,
                    symbol.name(),
                    want.name(),
                    arg.sort().name()
                )));
            }
        }
        Ok(Term::App(symbol, args))
    }

    pub fn nil() -> Term {
        Term::app(Builtin::Nil, vec![])
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::app(Builtin::Cons, vec![head, tail])
    }

    pub fn append(left: Term, right: Term) -> Term {
        Term::app(Builtin::Append, vec![left, right])
    }

    pub fn rev(t: Term) -> Term {
        Term::app(Builtin::Rev, vec![t])
    }

    /// `[a, b, c]` as a cons spine ending in nil.
    pub fn list_literal(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::nil(), |tail, head| Term::cons(head, tail))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::App(sym, _) => sym.result_sort(),
            Term::Lit(lit) => lit.sort(),
        }
    }

    pub fn is_app_of(&self, builtin: Builtin) -> bool {
        matches!(self, Term::App(sym, _) if sym.is(builtin))
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    /// The elements of a constructor-closed list literal, if this is one.
    pub fn as_list_literal(&self) -> Option<Vec<&Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(sym, _) if sym.is(Builtin::Nil) => return Some(items),
                Term::App(sym, args) if sym.is(Builtin::Cons) => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Lit(_) => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn mentions(&self, builtin: Builtin) -> bool {
        match self {
            Term::App(sym, args) => sym.is(builtin) || args.iter().any(|a| a.mentions(builtin)),
            _ => false,
        }
    }

    pub fn count_app(&self, builtin: Builtin) -> usize {
        match self {
            Term::App(sym, args) => {
                usize::from(sym.is(builtin)) + args.iter().map(|a| a.count_app(builtin)).sum::<usize>()
            }
            _ => 0,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    /// Plain simultaneous substitution; terms have no binders.
    pub fn subst(&self, map: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(sym, args) => {
                Term::App(sym.clone(), args.iter().map(|a| a.subst(map)).collect())
            }
            Term::Lit(_) => self.clone(),
        }
    }

    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::App(sym, args) => {
                Term::App(sym.clone(), args.iter().map(|a| a.map_bottom_up(f)).collect())
            }
            _ => self.clone(),
        };
        f(rebuilt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// A Bool-sorted term used as a proposition.
    Atom(Term),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant(Quantifier, Var, Box<Formula>),
}

impl Formula {
    pub fn atom(t: Term) -> Formula {
        debug_assert_eq!(t.sort(), Sort::Bool);
        Formula::Atom(t)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        debug_assert_eq!(lhs.sort(), rhs.sort());
        Formula::Eq(lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Forall, v, Box::new(body))
    }

    /// Variables with at least one free occurrence.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.free_vars_in_order().into_iter().collect()
    }

    /// Free variables in order of first (leftmost) occurrence.
    pub fn free_vars_in_order(&self) -> Vec<Var> {
        fn walk_term(t: &Term, bound: &[&str], out: &mut Vec<Var>) {
            match t {
                Term::Var(v) => {
                    if !bound.contains(&v.name.as_str()) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Term::App(_, args) => args.iter().for_each(|a| walk_term(a, bound, out)),
                Term::Lit(_) => {}
            }
        }
        fn walk<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut Vec<Var>) {
            match f {
                Formula::Atom(t) => walk_term(t, bound, out),
                Formula::Eq(a, b) => {
                    walk_term(a, bound, out);
                    walk_term(b, bound, out);
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Quant(_, v, body) => {
                    bound.push(&v.name);
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Bound variable names, one entry per binder, in binder order.
    pub fn binder_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Quant(_, v, _) = f {
                out.push(v.name.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Atom(_) | Formula::Eq(..) => {}
            Formula::Not(g) | Formula::Quant(_, _, g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Rebuilds the formula with `f` applied to every maximal term.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom(t) => Formula::Atom(f(t)),
            Formula::Eq(a, b) => {
                let a = f(a);
                Formula::Eq(a, f(b))
            }
            Formula::Not(g) => Formula::not(g.map_terms(f)),
            Formula::And(a, b) => {
                let a = a.map_terms(f);
                Formula::and(a, b.map_terms(f))
            }
            Formula::Or(a, b) => {
                let a = a.map_terms(f);
                Formula::or(a, b.map_terms(f))
            }
            Formula::Implies(a, b) => {
                let a = a.map_terms(f);
                Formula::implies(a, b.map_terms(f))
            }
            Formula::Quant(q, v, body) => Formula::Quant(*q, v.clone(), Box::new(body.map_terms(f))),
        }
    }

    pub fn count_app(&self, builtin: Builtin) -> usize {
        let mut n = 0;
        self.visit(&mut |f| match f {
            Formula::Atom(t) => n += t.count_app(builtin),
            Formula::Eq(a, b) => n += a.count_app(builtin) + b.count_app(builtin),
            _ => {}
        });
        n
    }

    pub fn mentions(&self, builtin: Builtin) -> bool {
        self.count_app(builtin) > 0
    }

    /// Maximum nesting of connectives and quantifiers; an atom or equation has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Eq(..) => 1,
            Formula::Not(g) | Formula::Quant(_, _, g) => 1 + g.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Checks that every atom is Bool-sorted, every equation relates terms of
    /// one sort, every application matches its signature, and every variable
    /// name carries a single sort within its scope.
    pub fn sort_check(&self) -> Result<(), SortError> {
        fn term(t: &Term, scope: &mut Vec<(String, Sort)>) -> Result<(), SortError> {
            match t {
                Term::Var(v) => match scope.iter().rev().find(|(n, _)| *n == v.name) {
                    Some((_, s)) if *s != v.sort => Err(SortError::new(format!(
                        "variable `{}` used as {} and {}",
                        v.name,
                        s.name(),
                        v.sort.name()
                    ))),
                    Some(_) => Ok(()),
                    None => {
                        scope.insert(0, (v.name.clone(), v.sort));
                        Ok(())
                    }
                },
                Term::App(sym, args) => {
                    for a in args {
                        term(a, scope)?;
                    }
                    Term::checked_app(sym.clone(), args.clone()).map(|_| ())
                }
                Term::Lit(_) => Ok(()),
            }
        }
        fn walk(f: &Formula, scope: &mut Vec<(String, Sort)>) -> Result<(), SortError> {
            match f {
                Formula::Atom(t) => {
                    term(t, scope)?;
                    if t.sort() != Sort::Bool {
                        return Err(SortError::new("atom must be bool-sorted"));
                    }
                    Ok(())
                }
                Formula::Eq(a, b) => {
                    term(a, scope)?;
                    term(b, scope)?;
                    if a.sort() != b.sort() {
                        return Err(SortError::new(format!(
                            "equation relates {} and {}",
                            a.sort().name(),
                            b.sort().name()
                        )));
                    }
                    Ok(())
                }
                Formula::Not(g) => walk(g, scope),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    walk(a, scope)?;
                    walk(b, scope)
                }
                Formula::Quant(_, v, body) => {
                    scope.push((v.name.clone(), v.sort));
                    let r = walk(body, scope);
                    scope.pop();
                    r
                }
            }
        }
        walk(self, &mut Vec::new())
    }
}

/// Capture-avoiding simultaneous substitution.
///
/// Each replacement must have the sort of the variable it replaces. A binder
/// is renamed (by priming) only when one of the replacements that actually
/// reaches its body mentions the binder's name.
pub fn substitute(f: &Formula, binding: &BTreeMap<Var, Term>) -> Result<Formula, SortError> {
    for (v, t) in binding {
        if v.sort != t.sort() {
            return Err(SortError::new(format!(
                "cannot replace {}:{} by a {} term",
                v.name,
                v.sort.name(),
                t.sort().name()
            )));
        }
    }
    Ok(subst_formula(f, binding))
}

fn subst_formula(f: &Formula, map: &BTreeMap<Var, Term>) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    match f {
        Formula::Atom(t) => Formula::Atom(t.subst(map)),
        Formula::Eq(a, b) => Formula::Eq(a.subst(map), b.subst(map)),
        Formula::Not(g) => Formula::not(subst_formula(g, map)),
        Formula::And(a, b) => Formula::and(subst_formula(a, map), subst_formula(b, map)),
        Formula::Or(a, b) => Formula::or(subst_formula(a, map), subst_formula(b, map)),
        Formula::Implies(a, b) => {
            Formula::implies(subst_formula(a, map), subst_formula(b, map))
        }
        Formula::Quant(q, v, body) => {
            let body_free = body.free_vars();
            let relevant: BTreeMap<Var, Term> = map
                .iter()
                .filter(|(k, _)| k.name != v.name && body_free.contains(*k))
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect();
            if relevant.is_empty() {
                return f.clone();
            }
            let incoming: BTreeSet<String> = relevant
                .values()
                .flat_map(|t| t.vars())
                .map(|x| x.name)
                .collect();
            if !incoming.contains(&v.name) {
                return Formula::Quant(*q, v.clone(), Box::new(subst_formula(body, &relevant)));
            }
            let mut avoid: BTreeSet<String> = body_free.into_iter().map(|x| x.name).collect();
            avoid.extend(incoming);
            let fresh = Var::new(fresh_name(&v.name, &avoid), v.sort);
            let mut renamed = relevant;
            renamed.insert(v.clone(), Term::Var(fresh.clone()));
            Formula::Quant(*q, fresh, Box::new(subst_formula(body, &renamed)))
        }
    }
}

/// `base'`, `base''`, ..., the first one not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{base}'");
    while avoid.contains(&candidate) || candidate == base {
        candidate.push('\'');
    }
    candidate
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_equal(f1: &Formula, f2: &Formula) -> bool {
    alpha_formula(f1, f2, &mut Vec::new(), &mut Vec::new())
}

/// Alpha-equality that also treats free variables as implicitly universally
/// bound in order of first occurrence, so two facts that differ only in the
/// names of their schematic variables compare equal.
pub fn schematic_equal(f1: &Formula, f2: &Formula) -> bool {
    alpha_equal(&universal_closure(f1), &universal_closure(f2))
}

/// Binds every free variable with a universal quantifier, outermost first.
pub fn universal_closure(f: &Formula) -> Formula {
    f.free_vars_in_order()
        .into_iter()
        .rev()
        .fold(f.clone(), |body, v| Formula::forall(v, body))
}

fn bound_index(stack: &[&Var], name: &str) -> Option<usize> {
    stack.iter().rev().position(|v| v.name == name)
}

fn alpha_term<'a>(t1: &Term, t2: &Term, s1: &[&'a Var], s2: &[&'a Var]) -> bool {
    match (t1, t2) {
        (Term::Var(a), Term::Var(b)) => {
            match (bound_index(s1, &a.name), bound_index(s2, &b.name)) {
                (Some(i), Some(j)) => i == j && a.sort == b.sort,
                (None, None) => a == b,
                _ => false,
            }
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_term(x, y, s1, s2))
        }
        (Term::Lit(a), Term::Lit(b)) => a == b,
        _ => false,
    }
}

fn alpha_formula<'a>(
    f1: &'a Formula,
    f2: &'a Formula,
    s1: &mut Vec<&'a Var>,
    s2: &mut Vec<&'a Var>,
) -> bool {
    match (f1, f2) {
        (Formula::Atom(a), Formula::Atom(b)) => alpha_term(a, b, s1, s2),
        (Formula::Eq(a1, b1), Formula::Eq(a2, b2)) => {
            alpha_term(a1, a2, s1, s2) && alpha_term(b1, b2, s1, s2)
        }
        (Formula::Not(a), Formula::Not(b)) => alpha_formula(a, b, s1, s2),
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Or(a1, b1), Formula::Or(a2, b2))
        | (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => {
            alpha_formula(a1, a2, s1, s2) && alpha_formula(b1, b2, s1, s2)
        }
        (Formula::Quant(q1, v1, b1), Formula::Quant(q2, v2, b2)) => {
            if q1 != q2 || v1.sort != v2.sort {
                return false;
            }
            s1.push(v1);
            s2.push(v2);
            let r = alpha_formula(b1, b2, s1, s2);
            s1.pop();
            s2.pop();
            r
        }
        _ => false,
    }
}

/// A child-index path from the formula root. Formula children: `Not` and
/// quantifiers have child 0; binary connectives 0 and 1; an atom's term is
/// child 0; an equation's sides are 0 and 1. Term children are arguments.
pub type Path = Vec<usize>;

pub fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Formula(Formula),
    Term(Term),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRef<'a> {
    Formula(&'a Formula),
    Term(&'a Term),
}

impl NodeRef<'_> {
    pub fn to_owned(self) -> Node {
        match self {
            NodeRef::Formula(f) => Node::Formula(f.clone()),
            NodeRef::Term(t) => Node::Term(t.clone()),
        }
    }
}

impl Formula {
    pub fn node_at(&self, path: &[usize]) -> Option<NodeRef<'_>> {
        let mut cur = NodeRef::Formula(self);
        for &i in path {
            cur = match cur {
                NodeRef::Formula(f) => match (f, i) {
                    (Formula::Atom(t), 0) => NodeRef::Term(t),
                    (Formula::Eq(a, _), 0) => NodeRef::Term(a),
                    (Formula::Eq(_, b), 1) => NodeRef::Term(b),
                    (Formula::Not(g), 0) | (Formula::Quant(_, _, g), 0) => NodeRef::Formula(g),
                    (Formula::And(a, _), 0)
                    | (Formula::Or(a, _), 0)
                    | (Formula::Implies(a, _), 0) => NodeRef::Formula(a),
                    (Formula::And(_, b), 1)
                    | (Formula::Or(_, b), 1)
                    | (Formula::Implies(_, b), 1) => NodeRef::Formula(b),
                    _ => return None,
                },
                NodeRef::Term(t) => NodeRef::Term(t.args().get(i)?),
            };
        }
        Some(cur)
    }

    /// Replaces the node at `path`. Returns `None` when the path does not
    /// exist or the replacement's layer does not fit the slot.
    pub fn replace_at(&self, path: &[usize], node: Node) -> Option<Formula> {
        let Some((&first, rest)) = path.split_first() else {
            return match node {
                Node::Formula(f) => Some(f),
                Node::Term(_) => None,
            };
        };
        let replace_term = |t: &Term, node: Node| -> Option<Term> {
            if rest.is_empty() {
                match node {
                    Node::Term(new) => Some(new),
                    Node::Formula(_) => None,
                }
            } else {
                replace_in_term(t, rest, node)
            }
        };
        Some(match (self, first) {
            (Formula::Atom(t), 0) => Formula::Atom(replace_term(t, node)?),
            (Formula::Eq(a, b), 0) => Formula::Eq(replace_term(a, node)?, b.clone()),
            (Formula::Eq(a, b), 1) => Formula::Eq(a.clone(), replace_term(b, node)?),
            (Formula::Not(g), 0) => Formula::not(g.replace_at(rest, node)?),
            (Formula::Quant(q, v, g), 0) => {
                Formula::Quant(*q, v.clone(), Box::new(g.replace_at(rest, node)?))
            }
            (Formula::And(a, b), 0) => Formula::and(a.replace_at(rest, node)?, (**b).clone()),
            (Formula::And(a, b), 1) => Formula::and((**a).clone(), b.replace_at(rest, node)?),
            (Formula::Or(a, b), 0) => Formula::or(a.replace_at(rest, node)?, (**b).clone()),
            (Formula::Or(a, b), 1) => Formula::or((**a).clone(), b.replace_at(rest, node)?),
            (Formula::Implies(a, b), 0) => {
                Formula::implies(a.replace_at(rest, node)?, (**b).clone())
            }
            (Formula::Implies(a, b), 1) => {
                Formula::implies((**a).clone(), b.replace_at(rest, node)?)
            }
            _ => return None,
        })
    }
}

fn replace_in_term(t: &Term, path: &[usize], node: Node) -> Option<Term> {
    let Some((&i, rest)) = path.split_first() else {
        return match node {
            Node::Term(new) => Some(new),
            Node::Formula(_) => None,
        };
    };
    match t {
        Term::App(sym, args) if i < args.len() => {
            let mut args = args.clone();
            args[i] = replace_in_term(&args[i], rest, node)?;
            Some(Term::App(sym.clone(), args))
        }
        _ => None,
    }
}

/// Symbol table: the builtin catalogue plus user declarations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    users: BTreeMap<String, Arc<SymbolDecl>>,
}

pub const KEYWORDS: [&str; 2] = ["EX", "ALL"];

impl Signature {
    pub fn builtin() -> Self {
        Signature::default()
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        Builtin::from_name(name)
            .map(Symbol::Builtin)
            .or_else(|| self.users.get(name).cloned().map(Symbol::User))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// Adds a user symbol. Redeclaring with the identical signature is a
    /// no-op; any change to an existing symbol is rejected.
    pub fn declare(
        &mut self,
        name: &str,
        args: Vec<Sort>,
        result: Sort,
    ) -> Result<Symbol, SortError> {
        if KEYWORDS.contains(&name) {
            return Err(SortError::new(format!("`{name}` is a keyword")));
        }
        if let Some(existing) = self.lookup(name) {
            if existing.arg_sorts() == args.as_slice() && existing.result_sort() == result {
                return Ok(existing);
            }
            return Err(SortError::new(format!(
                "symbol `{name}` is already declared with a different signature"
            )));
        }
        let decl = Arc::new(SymbolDecl {
            name: name.to_string(),
            args,
            result,
        });
        self.users.insert(name.to_string(), decl.clone());
        Ok(Symbol::User(decl))
    }

    pub fn user_symbols(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.users.values().map(|d| &**d)
    }
}
