//! Mechanical production of reversal-symmetric counterparts of facts about
//! lists, with an exhaustive small-scope oracle that checks every rule and
//! every transformed fact.

pub mod error;
pub mod parse;
pub mod print;
pub mod term;

pub use error::{ParseError, SortError, SyntaxError};
pub use parse::{parse_formula, Pattern};
pub use term::{
    alpha_equal, schematic_equal, substitute, Builtin, Formula, Literal, Quantifier, Signature,
    Sort, Symbol, Term, Var,
};
pub mod engine;
pub mod gen;
pub mod oracle;
pub mod rules;
pub mod semantics;
