//! Theory files: symbol, rule, lemma and `reversed` declarations.
//!
//! ```text
//! symbol foo : list -> bool
//! rule hd_rev: hd (rev x) == last x
//! lemma prefix_prefix: prefix u v ==> prefix u (v @ z)
//! reversed prefix_prefix as suffix_appendI expecting "suffix u v ==> suffix u (z @ v)"
//! ```

use std::collections::BTreeSet;

use thiserror::Error;

use revsym_core::parse::{parse_formula_at, split_declarations};
use revsym_core::rules::{Origin, Rule};
use revsym_core::{Formula, Signature, Sort, SyntaxError};

pub const KEYWORDS: [&str; 4] = ["symbol", "rule", "lemma", "reversed"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct TheoryError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl TheoryError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        TheoryError {
            line,
            col,
            message: message.into(),
        }
    }

    fn syntax(e: SyntaxError, line: usize, col: usize) -> Self {
        match e {
            SyntaxError::Parse(p) => TheoryError::new(p.line, p.col, p.message),
            SyntaxError::Sort(s) => {
                let (line, col) = s.at.unwrap_or((line, col));
                TheoryError::new(line, col, format!("sort error: {}", s.message))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma {
    pub name: String,
    pub formula: Formula,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reversed {
    pub source: String,
    /// Name under which the product is recorded.
    pub name: String,
    pub expected: Option<Formula>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Symbol(String),
    Rule(Rule),
    Lemma(Lemma),
    Reversed(Reversed),
}

#[derive(Clone, Debug, Default)]
pub struct TheoryFile {
    pub decls: Vec<Decl>,
    pub sig: Signature,
}

impl TheoryFile {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Rule(r) => Some(r),
            _ => None,
        })
    }

    pub fn lemma(&self, name: &str) -> Option<&Lemma> {
        self.decls.iter().find_map(|d| match d {
            Decl::Lemma(l) if l.name == name => Some(l),
            _ => None,
        })
    }

    pub fn reversals(&self) -> impl Iterator<Item = &Reversed> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Reversed(r) => Some(r),
            _ => None,
        })
    }
}

fn ident_len(s: &str) -> usize {
    s.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
        .unwrap_or(s.len())
}

/// Splits `NAME: rest`, returning the name, the rest and the rest's offset.
fn named(body: &str, line: usize, col: usize) -> Result<(&str, &str, usize), TheoryError> {
    let n = ident_len(body);
    let after = &body[n..];
    let gap = after.len() - after.trim_start_matches([' ', '\t']).len();
    if n == 0 || !after[gap..].starts_with(':') {
        return Err(TheoryError::new(line, col, "expected `NAME: ...`"));
    }
    Ok((&body[..n], &body[n + gap + 1..], n + gap + 1))
}

fn parse_symbol(
    body: &str,
    sig: &mut Signature,
    line: usize,
    col: usize,
) -> Result<String, TheoryError> {
    let (name, rest, _) = named(body, line, col)?;
    let mut sorts = Vec::new();
    for part in rest.split("->") {
        let part = part.trim();
        let sort = Sort::from_name(part)
            .ok_or_else(|| TheoryError::new(line, col, format!("unknown sort `{part}`")))?;
        sorts.push(sort);
    }
    let result = sorts.pop().expect("split yields at least one part");
    sig.declare(name, sorts, result)
        .map_err(|e| TheoryError::new(line, col, e.message))?;
    Ok(name.to_string())
}

/// Advances `(line, col)` over `text`.
fn advance(mut line: usize, mut col: usize, text: &str) -> (usize, usize) {
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn parse_reversed(
    body: &str,
    sig: &Signature,
    line: usize,
    col: usize,
) -> Result<(String, Option<String>, Option<Formula>), TheoryError> {
    let err = |at: &str, msg: &str| {
        let (l, c) = advance(line, col, &body[..body.len() - at.len()]);
        TheoryError::new(l, c, msg)
    };
    let mut rest = body;
    let n = ident_len(rest);
    if n == 0 {
        return Err(err(rest, "expected a lemma name"));
    }
    let source = rest[..n].to_string();
    rest = rest[n..].trim_start();
    let mut name = None;
    if let Some(r) = rest.strip_prefix("as") {
        if r.starts_with(char::is_whitespace) {
            rest = r.trim_start();
            let n = ident_len(rest);
            if n == 0 {
                return Err(err(rest, "expected a name after `as`"));
            }
            name = Some(rest[..n].to_string());
            rest = rest[n..].trim_start();
        }
    }
    let mut expected = None;
    if let Some(r) = rest.strip_prefix("expecting") {
        rest = r.trim_start();
        let Some(quoted) = rest.strip_prefix('"') else {
            return Err(err(rest, "expected a quoted formula after `expecting`"));
        };
        let Some(end) = quoted.find('"') else {
            return Err(err(rest, "unterminated string"));
        };
        let (l, c) = advance(line, col, &body[..body.len() - quoted.len()]);
        let f = parse_formula_at(&quoted[..end], sig, l, c)
            .map_err(|e| TheoryError::syntax(e, l, c))?;
        expected = Some(f);
        rest = quoted[end + 1..].trim_start();
    }
    if !rest.is_empty() {
        return Err(err(rest, "unexpected text in `reversed` declaration"));
    }
    Ok((source, name, expected))
}

/// Parses a theory file. `sig` supplies symbols declared elsewhere; the
/// result carries it extended by the file's own `symbol` declarations.
pub fn parse_theory(text: &str, sig: Signature) -> Result<TheoryFile, TheoryError> {
    let decls = split_declarations(text, &KEYWORDS)
        .map_err(|e| TheoryError::new(e.line, e.col, e.message))?;
    let mut file = TheoryFile {
        decls: Vec::new(),
        sig,
    };
    let mut lemma_names = BTreeSet::new();
    let mut rule_names = BTreeSet::new();
    for d in decls {
        let (line, col) = (d.line, d.col);
        let decl = match d.keyword.as_str() {
            "symbol" => Decl::Symbol(parse_symbol(&d.body, &mut file.sig, line, col)?),
            "rule" => {
                let rule = Rule::parse_at(&d.body, &file.sig, Origin::User, line, col)
                    .map_err(|e| TheoryError::syntax(e, line, col))?;
                if !rule_names.insert(rule.name.clone()) {
                    return Err(TheoryError::new(
                        line,
                        col,
                        format!("rule `{}` is already defined", rule.name),
                    ));
                }
                Decl::Rule(rule)
            }
            "lemma" => {
                let (name, rest, offset) = named(&d.body, line, col)?;
                let formula = parse_formula_at(rest, &file.sig, line, col + offset)
                    .map_err(|e| TheoryError::syntax(e, line, col))?;
                if !lemma_names.insert(name.to_string()) {
                    return Err(TheoryError::new(
                        line,
                        col,
                        format!("lemma `{name}` is already defined"),
                    ));
                }
                Decl::Lemma(Lemma {
                    name: name.to_string(),
                    formula,
                    line,
                })
            }
            _ => {
                let (source, name, expected) = parse_reversed(&d.body, &file.sig, line, col)?;
                if !lemma_names.contains(&source) {
                    return Err(TheoryError::new(
                        line,
                        col,
                        format!("unknown lemma `{source}`"),
                    ));
                }
                let name = name.unwrap_or_else(|| format!("{source}_reversed"));
                if !lemma_names.insert(name.clone()) {
                    return Err(TheoryError::new(
                        line,
                        col,
                        format!("lemma `{name}` is already defined"),
                    ));
                }
                Decl::Reversed(Reversed {
                    source,
                    name,
                    expected,
                    line,
                })
            }
        };
        file.decls.push(decl);
    }
    Ok(file)
}
