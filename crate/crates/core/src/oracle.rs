//! Exhaustive small-scope verification.
//!
//! Every check enumerates the full valuation space of the free variables
//! under a [`DomainParams`] bound. Work is split across threads; the
//! reported counterexample is always the first one in enumeration order.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::error::SortError;
use crate::semantics::{DomainParams, EvalError, Evaluator, Valuation, Value};
use crate::term::{Formula, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub pass: bool,
    pub counterexample: Option<Valuation>,
    /// Valuations examined; the whole space on a pass.
    pub checked_count: u128,
    pub params: DomainParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("evaluation failed at {at}: {error}")]
    Eval { error: EvalError, at: Valuation },
}

/// The product of per-variable domains, indexed in mixed radix with the
/// first variable most significant.
#[derive(Clone, Debug)]
pub struct ValuationSpace {
    vars: Vec<Var>,
    domains: Vec<Vec<Value>>,
    size: u128,
}

impl ValuationSpace {
    pub fn new(vars: &BTreeSet<Var>, params: DomainParams) -> Self {
        let vars: Vec<Var> = vars.iter().cloned().collect();
        let domains: Vec<Vec<Value>> = vars.iter().map(|v| params.domain(v.sort)).collect();
        let size = domains.iter().map(|d| d.len() as u128).product();
        ValuationSpace {
            vars,
            domains,
            size,
        }
    }

    pub fn len(&self) -> u128 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn get(&self, mut index: u128) -> Valuation {
        let mut picks = vec![0usize; self.vars.len()];
        for (i, d) in self.domains.iter().enumerate().rev() {
            let n = d.len() as u128;
            picks[i] = (index % n) as usize;
            index /= n;
        }
        let mut sigma = Valuation::new();
        for ((v, d), k) in self.vars.iter().zip(&self.domains).zip(picks) {
            sigma.insert(v.clone(), d[k].clone());
        }
        sigma
    }

    pub fn iter(&self) -> impl Iterator<Item = Valuation> + '_ {
        (0..self.size).map(move |i| self.get(i))
    }

    /// Finds the first valuation where `pred` is false or fails.
    pub fn check<P>(&self, params: DomainParams, pred: P) -> Result<Verdict, OracleError>
    where
        P: Fn(&Valuation) -> Result<bool, EvalError> + Sync,
    {
        let n = u64::try_from(self.size).expect("valuation space exceeds u64");
        let first = (0..n)
            .into_par_iter()
            .map(|i| {
                let sigma = self.get(u128::from(i));
                let outcome = pred(&sigma);
                (i, sigma, outcome)
            })
            .find_first(|(_, _, outcome)| !matches!(outcome, Ok(true)));
        match first {
            None => Ok(Verdict {
                pass: true,
                counterexample: None,
                checked_count: self.size,
                params,
            }),
            Some((_, sigma, Err(error))) => Err(OracleError::Eval { error, at: sigma }),
            Some((i, sigma, Ok(_))) => Ok(Verdict {
                pass: false,
                counterexample: Some(sigma),
                checked_count: u128::from(i) + 1,
                params,
            }),
        }
    }
}

/// All valuations of `vars` under `p`, in lexicographic order.
pub fn enumerate_valuations(vars: &BTreeSet<Var>, p: DomainParams) -> Vec<Valuation> {
    ValuationSpace::new(vars, p).iter().collect()
}

fn same_free_vars(f: &Formula, g: &Formula) -> Result<BTreeSet<Var>, SortError> {
    let (ff, gf) = (f.free_vars(), g.free_vars());
    if ff != gf {
        let show = |s: &BTreeSet<Var>| {
            s.iter()
                .map(|v| format!("{}:{}", v.name, v.sort.name()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(SortError::new(format!(
            "free variables differ: {{{}}} vs {{{}}}",
            show(&ff),
            show(&gf)
        )));
    }
    Ok(ff)
}

/// Pointwise transport: `f` at σ agrees with `g` at rev∘σ for every σ.
pub fn check_transport(f: &Formula, g: &Formula, p: DomainParams) -> Result<Verdict, OracleError> {
    let vars = same_free_vars(f, g)?;
    let ev = Evaluator::new(p);
    ValuationSpace::new(&vars, p).check(p, |sigma| {
        Ok(ev.formula(f, sigma)? == ev.formula(g, &sigma.reversed())?)
    })
}

/// Closure equivalence: `f` holds everywhere iff `g` does. A failing verdict
/// carries the first valuation falsifying whichever side is not valid.
pub fn check_closure(f: &Formula, g: &Formula, p: DomainParams) -> Result<Verdict, OracleError> {
    let vars = same_free_vars(f, g)?;
    let ev = Evaluator::new(p);
    let space = ValuationSpace::new(&vars, p);
    let vf = space.check(p, |sigma| ev.formula(f, sigma))?;
    let vg = space.check(p, |sigma| ev.formula(g, sigma))?;
    if vf.pass == vg.pass {
        return Ok(Verdict {
            pass: true,
            counterexample: None,
            checked_count: space.len(),
            params: p,
        });
    }
    let failing = if vf.pass { vg } else { vf };
    Ok(Verdict {
        pass: false,
        counterexample: failing.counterexample,
        checked_count: space.len(),
        params: p,
    })
}

/// Checks that `f` holds at every valuation of its free variables.
pub fn check_valid(f: &Formula, p: DomainParams) -> Result<Verdict, OracleError> {
    let ev = Evaluator::new(p);
    ValuationSpace::new(&f.free_vars(), p).check(p, |sigma| ev.formula(f, sigma))
}
