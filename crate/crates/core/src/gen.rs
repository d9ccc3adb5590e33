//! Seeded generator of random well-sorted formulas.
//!
//! Free variables come from a fixed pool (`u`, `v`, `w` lists, `a` an
//! element, `n` a natural) so that generated formulas stay cheap to check
//! exhaustively. Quantifiers bind lists only. The same seed always yields
//! the same formula.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Builtin, Formula, Signature, Sort, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenOptions {
    /// Allow `hd`, `last` and the quotients inside quantifier bodies.
    pub partial_under_binders: bool,
    /// Maximum quantifier nesting.
    pub max_binders: usize,
    /// Maximum term depth.
    pub term_depth: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            partial_under_binders: false,
            max_binders: 2,
            term_depth: 2,
        }
    }
}

const FREE_LISTS: [&str; 3] = ["u", "v", "w"];
const BINDERS: [&str; 3] = ["r", "s", "t"];

struct Gen {
    rng: ChaCha8Rng,
    opts: GenOptions,
    bound: Vec<&'static str>,
}

impl Gen {
    fn partial_allowed(&self) -> bool {
        self.bound.is_empty() || self.opts.partial_under_binders
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return self.atom();
        }
        match self.rng.gen_range(0..7) {
            0 => Formula::not(self.formula(depth - 1)),
            1 => Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
            2 => Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
            3 | 4 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            _ if self.bound.len() < self.opts.max_binders => {
                let name = BINDERS[self.bound.len()];
                self.bound.push(name);
                let body = self.formula(depth - 1);
                self.bound.pop();
                let v = Var::list(name);
                if self.rng.gen_bool(0.5) {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Formula {
        let d = self.opts.term_depth;
        match self.rng.gen_range(0..8) {
            0 => Formula::atom(Term::app(Builtin::Prefix, vec![self.list(d), self.list(d)])),
            1 => Formula::atom(Term::app(Builtin::Suffix, vec![self.list(d), self.list(d)])),
            2 => Formula::atom(Term::app(Builtin::Leq, vec![self.nat(d), self.nat(d)])),
            3 => Formula::eq(self.elem(d), self.elem(d)),
            4 => Formula::eq(self.nat(d), self.nat(d)),
            _ => Formula::eq(self.list(d), self.list(d)),
        }
    }

    fn list_leaf(&mut self) -> Term {
        match self.rng.gen_range(0..10) {
            0 => Term::nil(),
            1 => {
                let len = self.rng.gen_range(1..=2);
                let items = (0..len).map(|_| Term::elem(self.rng.gen_range(0..2))).collect();
                Term::list_literal(items)
            }
            k if k < 5 && !self.bound.is_empty() => {
                Term::list_var(*self.bound.choose(&mut self.rng).unwrap())
            }
            _ => Term::list_var(*FREE_LISTS.choose(&mut self.rng).unwrap()),
        }
    }

    fn list(&mut self, depth: usize) -> Term {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return self.list_leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => Term::cons(self.elem(d), self.list(d)),
            1 => Term::app(Builtin::Snoc, vec![self.list(d), self.elem(d)]),
            2 | 3 => Term::append(self.list(d), self.list(d)),
            4 => Term::rev(self.list(d)),
            _ if self.partial_allowed() => {
                let q = if self.rng.gen_bool(0.5) {
                    Builtin::LeftQuotient
                } else {
                    Builtin::RightQuotient
                };
                Term::app(q, vec![self.list(d), self.list(d)])
            }
            _ => self.list_leaf(),
        }
    }

    fn elem(&mut self, depth: usize) -> Term {
        if depth > 0 && self.partial_allowed() && self.rng.gen_bool(0.5) {
            let f = if self.rng.gen_bool(0.5) {
                Builtin::Hd
            } else {
                Builtin::Last
            };
            return Term::app(f, vec![self.list(depth - 1)]);
        }
        if self.rng.gen_bool(0.5) {
            Term::var("a", Sort::Elem)
        } else {
            Term::elem(self.rng.gen_range(0..2))
        }
    }

    fn nat(&mut self, depth: usize) -> Term {
        if depth > 0 && self.rng.gen_bool(0.6) {
            return Term::app(Builtin::Length, vec![self.list(depth - 1)]);
        }
        if self.rng.gen_bool(0.5) {
            Term::var("n", Sort::Nat)
        } else {
            Term::nat(self.rng.gen_range(0..3))
        }
    }
}

/// A random formula of connective depth at most `depth`, built from the
/// builtin symbols of `sig`.
pub fn gen_formula(depth: usize, seed: u64, sig: &Signature) -> Formula {
    gen_formula_with(depth, seed, sig, GenOptions::default())
}

pub fn gen_formula_with(depth: usize, seed: u64, sig: &Signature, opts: GenOptions) -> Formula {
    assert!(
        Builtin::ALL.iter().all(|b| sig.contains(b.name())),
        "signature lacks a builtin symbol"
    );
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        opts,
        bound: Vec::new(),
    };
    g.formula(depth)
}
