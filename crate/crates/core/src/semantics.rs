//! Executable semantics of the builtin catalogue over small finite domains.
//!
//! Quantifiers range over bounded domains, but intermediate values are never
//! truncated: `append` of two maximal lists is twice the bound.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{Builtin, Formula, Literal, Quantifier, Sort, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Elem(u32),
    List(Vec<u32>),
    Nat(u64),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Elem(_) => Sort::Elem,
            Value::List(_) => Sort::List,
            Value::Nat(_) => Sort::Nat,
            Value::Bool(_) => Sort::Bool,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(a) => write!(f, "{a}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// The reversal symmetry on values: lists are reversed, everything else is
/// left alone.
pub fn rev_value(v: &Value) -> Value {
    match v {
        Value::List(xs) => Value::List(xs.iter().rev().copied().collect()),
        other => other.clone(),
    }
}

/// Small-scope bounds: alphabet size `alphabet` (elements `0..alphabet`),
/// lists up to `max_len`, naturals up to `max_nat`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DomainParams {
    pub alphabet: u32,
    pub max_len: usize,
    pub max_nat: u64,
}

impl DomainParams {
    /// `max_nat` defaults to twice the list bound.
    ///
    /// # Panics
    /// If `alphabet` is zero.
    pub fn new(alphabet: u32, max_len: usize) -> Self {
        assert!(alphabet >= 1, "alphabet must have at least one letter");
        DomainParams {
            alphabet,
            max_len,
            max_nat: 2 * max_len as u64,
        }
    }

    pub fn with_max_nat(mut self, max_nat: u64) -> Self {
        self.max_nat = max_nat;
        self
    }

    /// Bounds used to vet rules before admission.
    pub fn vetting() -> Self {
        DomainParams::new(2, 4)
    }

    /// Every value of `sort` within the bounds, in enumeration order. Lists
    /// are ordered by length, then lexicographically.
    pub fn domain(&self, sort: Sort) -> Vec<Value> {
        match sort {
            Sort::Elem => (0..self.alphabet).map(Value::Elem).collect(),
            Sort::Nat => (0..=self.max_nat).map(Value::Nat).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::List => {
                let mut out = Vec::new();
                for len in 0..=self.max_len {
                    let mut word = vec![0u32; len];
                    'words: loop {
                        out.push(Value::List(word.clone()));
                        // odometer, last letter fastest
                        for i in (0..len).rev() {
                            word[i] += 1;
                            if word[i] < self.alphabet {
                                continue 'words;
                            }
                            word[i] = 0;
                        }
                        break;
                    }
                }
                out
            }
        }
    }

    pub fn domain_size(&self, sort: Sort) -> u128 {
        match sort {
            Sort::Elem => u128::from(self.alphabet),
            Sort::Nat => u128::from(self.max_nat) + 1,
            Sort::Bool => 2,
            Sort::List => (0..=self.max_len as u32)
                .map(|l| u128::from(self.alphabet).pow(l))
                .sum(),
        }
    }
}

/// An assignment of values to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Valuation(pub BTreeMap<Var, Value>);

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn with(mut self, var: Var, value: Value) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn insert(&mut self, var: Var, value: Value) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: &Var) -> Option<&Value> {
        self.0.get(var)
    }

    /// `rev∘σ`: every list value reversed, others fixed.
    pub fn reversed(&self) -> Valuation {
        Valuation(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), rev_value(v)))
                .collect(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.0.iter()
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", k.name, v)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{}` of sort {}", .0.name, .0.sort.name())]
    UnboundVariable(Var),
    #[error("element {value} is outside the alphabet 0..{alphabet}")]
    OutOfAlphabet { value: u32, alphabet: u32 },
    #[error("symbol `{0}` has no executable semantics")]
    Uninterpreted(String),
}

/// Evaluator with the quantifier domains precomputed.
#[derive(Clone, Debug)]
pub struct Evaluator {
    params: DomainParams,
    domains: [Vec<Value>; 4],
}

struct Env<'a> {
    frames: Vec<(&'a str, Value)>,
    base: &'a Valuation,
}

impl<'a> Env<'a> {
    fn lookup(&self, v: &Var) -> Result<Value, EvalError> {
        if let Some((_, val)) = self.frames.iter().rev().find(|(n, _)| *n == v.name) {
            return Ok(val.clone());
        }
        self.base
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(v.clone()))
    }
}

fn sort_index(sort: Sort) -> usize {
    match sort {
        Sort::Elem => 0,
        Sort::List => 1,
        Sort::Nat => 2,
        Sort::Bool => 3,
    }
}

fn list(v: Value) -> Vec<u32> {
    match v {
        Value::List(xs) => xs,
        other => unreachable!("expected a list, got {other:?}; term was not sort-checked"),
    }
}

fn elem(v: Value) -> u32 {
    match v {
        Value::Elem(a) => a,
        other => unreachable!("expected an element, got {other:?}"),
    }
}

fn nat(v: Value) -> u64 {
    match v {
        Value::Nat(n) => n,
        other => unreachable!("expected a natural, got {other:?}"),
    }
}

/// The unique `z` with `u @ z = v`, or `[]` when `u` is not a prefix of `v`.
fn left_quotient(u: &[u32], v: &[u32]) -> Vec<u32> {
    if v.starts_with(u) {
        v[u.len()..].to_vec()
    } else {
        Vec::new()
    }
}

fn reversed(xs: &[u32]) -> Vec<u32> {
    xs.iter().rev().copied().collect()
}

impl Evaluator {
    pub fn new(params: DomainParams) -> Self {
        Evaluator {
            params,
            domains: Sort::ALL.map(|s| params.domain(s)),
        }
    }

    pub fn params(&self) -> DomainParams {
        self.params
    }

    pub fn domain(&self, sort: Sort) -> &[Value] {
        &self.domains[sort_index(sort)]
    }

    pub fn term(&self, t: &Term, sigma: &Valuation) -> Result<Value, EvalError> {
        self.eval_term(
            t,
            &mut Env {
                frames: Vec::new(),
                base: sigma,
            },
        )
    }

    pub fn formula(&self, f: &Formula, sigma: &Valuation) -> Result<bool, EvalError> {
        self.eval_formula(
            f,
            &mut Env {
                frames: Vec::new(),
                base: sigma,
            },
        )
    }

    fn eval_term<'a>(&self, t: &'a Term, env: &mut Env<'a>) -> Result<Value, EvalError> {
        Ok(match t {
            Term::Var(v) => env.lookup(v)?,
            Term::Lit(Literal::Elem(a)) => {
                if *a >= self.params.alphabet {
                    return Err(EvalError::OutOfAlphabet {
                        value: *a,
                        alphabet: self.params.alphabet,
                    });
                }
                Value::Elem(*a)
            }
            Term::Lit(Literal::Nat(n)) => Value::Nat(*n),
            Term::App(Symbol::User(decl), _) => {
                return Err(EvalError::Uninterpreted(decl.name.clone()))
            }
            Term::App(Symbol::Builtin(b), args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(a, env)?);
                }
                apply_builtin(*b, vals)
            }
        })
    }

    fn eval_formula<'a>(&self, f: &'a Formula, env: &mut Env<'a>) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::Atom(t) => match self.eval_term(t, env)? {
                Value::Bool(b) => b,
                other => unreachable!("atom evaluated to {other:?}"),
            },
            Formula::Eq(a, b) => self.eval_term(a, env)? == self.eval_term(b, env)?,
            Formula::Not(g) => !self.eval_formula(g, env)?,
            Formula::And(a, b) => self.eval_formula(a, env)? && self.eval_formula(b, env)?,
            Formula::Or(a, b) => self.eval_formula(a, env)? || self.eval_formula(b, env)?,
            Formula::Implies(a, b) => !self.eval_formula(a, env)? || self.eval_formula(b, env)?,
            Formula::Quant(q, v, body) => {
                let want = *q == Quantifier::Exists;
                for value in self.domain(v.sort) {
                    env.frames.push((&v.name, value.clone()));
                    let r = self.eval_formula(body, env);
                    env.frames.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                !want
            }
        })
    }
}

fn apply_builtin(b: Builtin, vals: Vec<Value>) -> Value {
    let mut it = vals.into_iter();
    let mut next = || it.next().expect("arity checked at construction");
    match b {
        Builtin::Nil => Value::List(Vec::new()),
        Builtin::Cons => {
            let a = elem(next());
            let mut xs = list(next());
            xs.insert(0, a);
            Value::List(xs)
        }
        Builtin::Snoc => {
            let mut xs = list(next());
            xs.push(elem(next()));
            Value::List(xs)
        }
        Builtin::Append => {
            let mut xs = list(next());
            xs.extend(list(next()));
            Value::List(xs)
        }
        Builtin::Rev => Value::List(reversed(&list(next()))),
        // hd [] and last [] share one default so hd (rev xs) = last xs holds everywhere
        Builtin::Hd => Value::Elem(list(next()).first().copied().unwrap_or(0)),
        Builtin::Last => Value::Elem(list(next()).last().copied().unwrap_or(0)),
        Builtin::Length => Value::Nat(list(next()).len() as u64),
        Builtin::Prefix => {
            let u = list(next());
            Value::Bool(list(next()).starts_with(&u))
        }
        Builtin::Suffix => {
            let u = list(next());
            Value::Bool(list(next()).ends_with(&u))
        }
        Builtin::LeftQuotient => {
            let u = list(next());
            Value::List(left_quotient(&u, &list(next())))
        }
        Builtin::RightQuotient => {
            // rev (left_quotient (rev v) (rev u))
            let u = list(next());
            let v = list(next());
            Value::List(reversed(&left_quotient(&reversed(&v), &reversed(&u))))
        }
        Builtin::Leq => {
            let a = nat(next());
            Value::Bool(a <= nat(next()))
        }
    }
}

pub fn eval_term(t: &Term, sigma: &Valuation, p: DomainParams) -> Result<Value, EvalError> {
    Evaluator::new(p).term(t, sigma)
}

pub fn eval_formula(f: &Formula, sigma: &Valuation, p: DomainParams) -> Result<bool, EvalError> {
    Evaluator::new(p).formula(f, sigma)
}
