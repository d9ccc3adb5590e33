//! Machine-readable run report. Field order is fixed by declaration order.

use std::collections::BTreeMap;

use serde::Serialize;

use revsym_core::engine::Residual;
use revsym_core::oracle::Verdict;
use revsym_core::semantics::DomainParams;
use revsym_core::term::format_path;

pub const SCHEMA: &str = "revsym/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Residual,
    Mismatch,
    VerificationFailed,
    FuelExhausted,
    Cycle,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Residual => 1,
            Status::Mismatch | Status::VerificationFailed => 3,
            Status::FuelExhausted | Status::Cycle => 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub alphabet: u32,
    pub max_len: usize,
    pub max_nat: u64,
}

impl From<DomainParams> for Bounds {
    fn from(p: DomainParams) -> Self {
        Bounds {
            alphabet: p.alphabet,
            max_len: p.max_len,
            max_nat: p.max_nat,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Options {
    pub rules: Option<String>,
    pub no_defaults: bool,
    pub without: Vec<String>,
    pub assoc_canon: bool,
    pub fuel: usize,
    pub verify: Option<Bounds>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Position {
    pub path: String,
    pub term: String,
}

impl From<&Residual> for Position {
    fn from(r: &Residual) -> Self {
        Position {
            path: format_path(&r.path),
            term: r.term.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub pass: bool,
    pub checked_count: u64,
    pub counterexample: Option<BTreeMap<String, String>>,
}

impl From<&Verdict> for VerdictReport {
    fn from(v: &Verdict) -> Self {
        VerdictReport {
            pass: v.pass,
            checked_count: u64::try_from(v.checked_count).unwrap_or(u64::MAX),
            counterexample: v.counterexample.as_ref().map(|s| {
                s.iter()
                    .map(|(var, val)| (var.name.clone(), val.to_string()))
                    .collect()
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub bounds: Bounds,
    pub transport: Option<VerdictReport>,
    pub closure: Option<VerdictReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub name: String,
    pub source: String,
    pub input: String,
    pub output: Option<String>,
    pub residual_count: usize,
    pub residual_positions: Vec<Position>,
    pub fuel_used: usize,
    pub expected: Option<String>,
    pub matched: Option<bool>,
    pub verification: Option<Verification>,
    pub status: Status,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub file: String,
    pub options: Options,
    pub lemmas: Vec<LemmaReport>,
    pub error: Option<String>,
    pub exit_code: i32,
}
