//! Command-line front end: theory files in, reversed lemmas and reports out.

pub mod app;
pub mod report;
pub mod theory;

pub use app::{run, run_check, run_gen, run_reverse, Cli};
