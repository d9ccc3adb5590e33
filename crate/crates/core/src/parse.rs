//! Concrete syntax for formulas and rules.
//!
//! ```text
//! formula := ("EX" | "ALL") binder+ "." formula
//!          | disj ("==>" formula)?
//! disj    := conj ("\/" conj)*
//! conj    := unary ("/\" unary)*
//! unary   := "~" unary | quant | cmp
//! cmp     := term (("=" | "~=" | "<=") term)?
//! term    := app (("#" | "@") term)?
//! app     := SYMBOL atom* | atom
//! atom    := IDENT (":" SORT)? | NUM (":" SORT)? | "[" (term ("," term)*)? "]"
//!          | "(" formula ")"
//! ```
//!
//! Sorts are inferred by unification over the whole input. Free variables
//! nobody constrains are lists; numerals nobody constrains are naturals.

use std::collections::HashMap;

use crate::error::{ParseError, SortError, SyntaxError};
use crate::term::{Builtin, Formula, Literal, Quantifier, Signature, Sort, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

// Longest first.
const PUNCT: [&str; 17] = [
    "==>", "==", "~=", "/\\", "\\/", "<=", "=", "~", "@", "#", "[", "]", ",", "(", ")", ".", ":",
];

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits
                .parse::<u64>()
                .map_err(|_| ParseError::new(tl, tc, format!("numeral `{digits}` is too large")))?;
            out.push(Token {
                tok: Tok::Num(n),
                line: tl,
                col: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Token {
                    tok: Tok::Punct(p),
                    line: tl,
                    col: tc,
                });
            }
            None => return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Infix {
    Cons,
    Append,
    Eq,
    Neq,
    Leq,
}

#[derive(Clone, Debug)]
enum ExprKind {
    Ident(String, Option<Sort>),
    Num(u64, Option<Sort>),
    List(Vec<Expr>),
    Apply(Symbol, Vec<Expr>),
    Infix(Infix, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Quant(Quantifier, String, Option<Sort>, Box<Expr>),
}

/// Untyped syntax tree; `slot` is filled in by inference.
#[derive(Clone, Debug)]
struct Expr {
    kind: ExprKind,
    line: usize,
    col: usize,
    slot: usize,
}

impl Expr {
    fn is_formula_only(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Not(_)
                | ExprKind::And(..)
                | ExprKind::Or(..)
                | ExprKind::Implies(..)
                | ExprKind::Quant(..)
                | ExprKind::Infix(Infix::Eq | Infix::Neq, ..)
        )
    }
}

struct Parser<'s> {
    toks: Vec<Token>,
    pos: usize,
    sig: &'s Signature,
}

impl<'s> Parser<'s> {
    fn new(text: &str, sig: &'s Signature, line0: usize, col0: usize) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text, line0, col0)?,
            pos: 0,
            sig,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn at_keyword(&self) -> Option<Quantifier> {
        match &self.peek().tok {
            Tok::Ident(w) if w == "EX" => Some(Quantifier::Exists),
            Tok::Ident(w) if w == "ALL" => Some(Quantifier::Forall),
            _ => None,
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.col, msg)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(w) => format!("`{w}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ParseError> {
        if self.at(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", Self::describe(&self.peek().tok))))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Eof => Ok(()),
            ref t => Err(self.error(format!("unexpected {}", Self::describe(t)))),
        }
    }

    fn mk(&self, kind: ExprKind, tok: &Token) -> Expr {
        Expr {
            kind,
            line: tok.line,
            col: tok.col,
            slot: usize::MAX,
        }
    }

    fn formula(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword().is_some() {
            return self.quant();
        }
        let lhs = self.disj()?;
        if self.at("==>") {
            let op = self.bump();
            let rhs = self.formula()?;
            return Ok(self.mk(ExprKind::Implies(Box::new(lhs), Box::new(rhs)), &op));
        }
        Ok(lhs)
    }

    fn quant(&mut self) -> Result<Expr, ParseError> {
        let q = self.at_keyword().expect("caller checked");
        let kw = self.bump();
        let mut binders = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Ident(name) if self.sig.contains(name) || self.at_keyword().is_some() => {
                    return Err(self.error(format!("`{name}` cannot be bound")));
                }
                Tok::Ident(name) => {
                    self.bump();
                    let ann = self.annotation()?;
                    binders.push((name.clone(), ann, t));
                }
                _ if !binders.is_empty() && self.at(".") => break,
                other => {
                    return Err(self.error(format!(
                        "expected a bound variable, found {}",
                        Self::describe(other)
                    )))
                }
            }
        }
        self.expect(".")?;
        let mut body = self.formula()?;
        for (name, ann, t) in binders.into_iter().rev() {
            body = self.mk(ExprKind::Quant(q, name, ann, Box::new(body)), &t);
        }
        body.line = kw.line;
        body.col = kw.col;
        Ok(body)
    }

    fn disj(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conj()?;
        while self.at("\\/") {
            let op = self.bump();
            let rhs = self.conj()?;
            lhs = self.mk(ExprKind::Or(Box::new(lhs), Box::new(rhs)), &op);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.at("/\\") {
            let op = self.bump();
            let rhs = self.unary()?;
            lhs = self.mk(ExprKind::And(Box::new(lhs), Box::new(rhs)), &op);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at("~") {
            let op = self.bump();
            let inner = self.unary()?;
            return Ok(self.mk(ExprKind::Not(Box::new(inner)), &op));
        }
        if self.at_keyword().is_some() {
            return self.quant();
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.term()?;
        let op = match &self.peek().tok {
            Tok::Punct("=") => Infix::Eq,
            Tok::Punct("~=") => Infix::Neq,
            Tok::Punct("<=") => Infix::Leq,
            _ => return Ok(lhs),
        };
        let t = self.bump();
        let rhs = self.term()?;
        Ok(self.mk(ExprKind::Infix(op, Box::new(lhs), Box::new(rhs)), &t))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.app()?;
        let op = match &self.peek().tok {
            Tok::Punct("#") => Infix::Cons,
            Tok::Punct("@") => Infix::Append,
            _ => return Ok(lhs),
        };
        let t = self.bump();
        let rhs = self.term()?;
        Ok(self.mk(ExprKind::Infix(op, Box::new(lhs), Box::new(rhs)), &t))
    }

    fn starts_atom(&self) -> bool {
        match &self.peek().tok {
            Tok::Ident(_) => self.at_keyword().is_none(),
            Tok::Num(_) => true,
            Tok::Punct(p) => matches!(*p, "[" | "("),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        if let Tok::Ident(name) = &t.tok {
            if let Some(sym) = self.sig.lookup(name) {
                self.bump();
                let mut args = Vec::new();
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                return Ok(self.mk(ExprKind::Apply(sym, args), &t));
            }
        }
        let head = self.atom()?;
        if self.starts_atom() {
            if let ExprKind::Ident(name, _) = &head.kind {
                return Err(ParseError::new(
                    head.line,
                    head.col,
                    format!("`{name}` is not a declared symbol and cannot be applied"),
                ));
            }
            return Err(self.error("unexpected argument"));
        }
        Ok(head)
    }

    fn annotation(&mut self) -> Result<Option<Sort>, ParseError> {
        if !self.at(":") {
            return Ok(None);
        }
        self.bump();
        let t = self.bump();
        match &t.tok {
            Tok::Ident(w) => Sort::from_name(w)
                .map(Some)
                .ok_or_else(|| ParseError::new(t.line, t.col, format!("unknown sort `{w}`"))),
            other => Err(ParseError::new(
                t.line,
                t.col,
                format!("expected a sort name, found {}", Self::describe(other)),
            )),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(name) => {
                if self.at_keyword().is_some() {
                    return Err(self.error("quantifier must be parenthesized here"));
                }
                self.bump();
                if let Some(sym) = self.sig.lookup(name) {
                    return Ok(self.mk(ExprKind::Apply(sym, vec![]), &t));
                }
                let ann = self.annotation()?;
                Ok(self.mk(ExprKind::Ident(name.clone(), ann), &t))
            }
            Tok::Num(n) => {
                self.bump();
                let ann = self.annotation()?;
                Ok(self.mk(ExprKind::Num(*n, ann), &t))
            }
            Tok::Punct("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.at("]") {
                    items.push(self.term()?);
                    while self.at(",") {
                        self.bump();
                        items.push(self.term()?);
                    }
                }
                self.expect("]")?;
                Ok(self.mk(ExprKind::List(items), &t))
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.formula()?;
                self.expect(")")?;
                Ok(inner)
            }
            other => Err(self.error(format!("expected a term, found {}", Self::describe(other)))),
        }
    }
}

/// Union-find over sort variables.
#[derive(Default)]
struct Slots {
    parent: Vec<usize>,
    sort: Vec<Option<Sort>>,
    numeric: Vec<bool>,
}

impl Slots {
    fn fresh(&mut self, sort: Option<Sort>, numeric: bool) -> usize {
        self.parent.push(self.parent.len());
        self.sort.push(sort);
        self.numeric.push(numeric);
        self.parent.len() - 1
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn check(&self, root: usize) -> Result<(), String> {
        match self.sort[root] {
            Some(s @ (Sort::List | Sort::Bool)) if self.numeric[root] => {
                Err(format!("a numeral cannot have sort {}", s.name()))
            }
            _ => Ok(()),
        }
    }

    fn unify(&mut self, a: usize, b: usize) -> Result<(), String> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let sort = match (self.sort[ra], self.sort[rb]) {
            (Some(x), Some(y)) if x != y => {
                return Err(format!("expected {}, found {}", x.name(), y.name()))
            }
            (x, y) => x.or(y),
        };
        self.parent[rb] = ra;
        self.sort[ra] = sort;
        self.numeric[ra] |= self.numeric[rb];
        self.check(ra)
    }

    fn constrain(&mut self, slot: usize, sort: Sort) -> Result<(), String> {
        let fixed = self.fresh(Some(sort), false);
        self.unify(slot, fixed)
    }

    fn resolve(&mut self, slot: usize) -> Sort {
        let r = self.find(slot);
        match self.sort[r] {
            Some(s) => s,
            None if self.numeric[r] => Sort::Nat,
            None => Sort::List,
        }
    }
}

struct Infer {
    slots: Slots,
    free: HashMap<String, usize>,
    scope: Vec<(String, usize)>,
}

fn sort_err(e: &Expr, msg: String) -> SortError {
    SortError::at(e.line, e.col, msg)
}

impl Infer {
    fn new() -> Self {
        Infer {
            slots: Slots::default(),
            free: HashMap::new(),
            scope: Vec::new(),
        }
    }

    fn unify_at(&mut self, e: &Expr, a: usize, b: usize) -> Result<(), SortError> {
        self.slots.unify(a, b).map_err(|m| sort_err(e, m))
    }

    fn constrain_at(&mut self, e: &Expr, slot: usize, sort: Sort) -> Result<(), SortError> {
        self.slots.constrain(slot, sort).map_err(|m| sort_err(e, m))
    }

    fn formula(&mut self, e: &mut Expr) -> Result<(), SortError> {
        match &mut e.kind {
            ExprKind::Not(g) => self.formula(g),
            ExprKind::And(a, b) | ExprKind::Or(a, b) | ExprKind::Implies(a, b) => {
                self.formula(a)?;
                self.formula(b)
            }
            ExprKind::Quant(_, name, ann, body) => {
                let slot = self.slots.fresh(*ann, false);
                self.scope.push((name.clone(), slot));
                let r = self.formula(body);
                self.scope.pop();
                e.slot = slot;
                r
            }
            ExprKind::Infix(Infix::Eq | Infix::Neq, a, b) => {
                let sa = self.term(a)?;
                let sb = self.term(b)?;
                let (sa, sb) = (sa, sb);
                self.unify_at(e, sa, sb)
            }
            _ => {
                let s = self.term(e)?;
                self.constrain_at(e, s, Sort::Bool)
            }
        }
    }

    fn term(&mut self, e: &mut Expr) -> Result<usize, SortError> {
        if e.is_formula_only() {
            return Err(sort_err(e, "a proposition cannot appear inside a term".into()));
        }
        let slot = match &mut e.kind {
            ExprKind::Ident(name, ann) => {
                let slot = match self.scope.iter().rev().find(|(n, _)| n == name) {
                    Some((_, s)) => *s,
                    None => match self.free.get(name) {
                        Some(s) => *s,
                        None => {
                            let s = self.slots.fresh(None, false);
                            self.free.insert(name.clone(), s);
                            s
                        }
                    },
                };
                if let Some(a) = *ann {
                    self.slots.constrain(slot, a).map_err(|m| {
                        SortError::at(e.line, e.col, format!("variable `{name}`: {m}"))
                    })?;
                }
                slot
            }
            ExprKind::Num(_, ann) => {
                let s = self.slots.fresh(None, true);
                if let Some(a) = *ann {
                    self.slots
                        .constrain(s, a)
                        .map_err(|m| SortError::at(e.line, e.col, m))?;
                }
                s
            }
            ExprKind::List(items) => {
                for item in items.iter_mut() {
                    let s = self.term(item)?;
                    self.constrain_at(item, s, Sort::Elem)?;
                }
                self.slots.fresh(Some(Sort::List), false)
            }
            ExprKind::Apply(sym, args) => {
                let want = sym.arg_sorts().to_vec();
                if want.len() != args.len() {
                    return Err(SortError::at(
                        e.line,
                        e.col,
                        format!(
                            "`{}` expects {} argument(s), got {}",
                            sym.name(),
                            want.len(),
                            args.len()
                        ),
                    ));
                }
                let result = sym.result_sort();
                for (arg, w) in args.iter_mut().zip(want) {
                    let s = self.term(arg)?;
                    self.constrain_at(arg, s, w)?;
                }
                self.slots.fresh(Some(result), false)
            }
            ExprKind::Infix(op, a, b) => {
                let (left, right, result) = match op {
                    Infix::Cons => (Sort::Elem, Sort::List, Sort::List),
                    Infix::Append => (Sort::List, Sort::List, Sort::List),
                    Infix::Leq => (Sort::Nat, Sort::Nat, Sort::Bool),
                    Infix::Eq | Infix::Neq => unreachable!("handled by is_formula_only"),
                };
                let sa = self.term(a)?;
                self.constrain_at(a, sa, left)?;
                let sb = self.term(b)?;
                self.constrain_at(b, sb, right)?;
                self.slots.fresh(Some(result), false)
            }
            _ => unreachable!("handled by is_formula_only"),
        };
        e.slot = slot;
        Ok(slot)
    }

    fn build_formula(&mut self, e: &Expr) -> Formula {
        match &e.kind {
            ExprKind::Not(g) => Formula::not(self.build_formula(g)),
            ExprKind::And(a, b) => Formula::and(self.build_formula(a), self.build_formula(b)),
            ExprKind::Or(a, b) => Formula::or(self.build_formula(a), self.build_formula(b)),
            ExprKind::Implies(a, b) => {
                Formula::implies(self.build_formula(a), self.build_formula(b))
            }
            ExprKind::Quant(q, name, _, body) => {
                let v = Var::new(name.clone(), self.slots.resolve(e.slot));
                self.scope.push((name.clone(), e.slot));
                let body = self.build_formula(body);
                self.scope.pop();
                Formula::Quant(*q, v, Box::new(body))
            }
            ExprKind::Infix(Infix::Eq, a, b) => Formula::Eq(self.build_term(a), self.build_term(b)),
            ExprKind::Infix(Infix::Neq, a, b) => {
                Formula::not(Formula::Eq(self.build_term(a), self.build_term(b)))
            }
            _ => Formula::Atom(self.build_term(e)),
        }
    }

    fn build_term(&mut self, e: &Expr) -> Term {
        match &e.kind {
            ExprKind::Ident(name, _) => Term::var(name.clone(), self.slots.resolve(e.slot)),
            ExprKind::Num(n, _) => match self.slots.resolve(e.slot) {
                Sort::Elem => Term::Lit(Literal::Elem(*n as u32)),
                _ => Term::Lit(Literal::Nat(*n)),
            },
            ExprKind::List(items) => {
                Term::list_literal(items.iter().map(|i| self.build_term(i)).collect())
            }
            ExprKind::Apply(sym, args) => {
                Term::App(sym.clone(), args.iter().map(|a| self.build_term(a)).collect())
            }
            ExprKind::Infix(op, a, b) => {
                let builtin = match op {
                    Infix::Cons => Builtin::Cons,
                    Infix::Append => Builtin::Append,
                    Infix::Leq => Builtin::Leq,
                    Infix::Eq | Infix::Neq => unreachable!(),
                };
                Term::app(builtin, vec![self.build_term(a), self.build_term(b)])
            }
            _ => unreachable!("rejected during inference"),
        }
    }
}

fn check_elem_range(infer: &mut Infer, e: &Expr) -> Result<(), SortError> {
    let mut stack = vec![e];
    while let Some(e) = stack.pop() {
        match &e.kind {
            ExprKind::Num(n, _) => {
                if *n > u64::from(u32::MAX) && infer.slots.resolve(e.slot) == Sort::Elem {
                    return Err(sort_err(e, format!("element numeral {n} is too large")));
                }
            }
            ExprKind::List(items) | ExprKind::Apply(_, items) => stack.extend(items.iter()),
            ExprKind::Infix(_, a, b)
            | ExprKind::And(a, b)
            | ExprKind::Or(a, b)
            | ExprKind::Implies(a, b) => {
                stack.push(a);
                stack.push(b);
            }
            ExprKind::Not(g) | ExprKind::Quant(_, _, _, g) => stack.push(g),
            ExprKind::Ident(..) => {}
        }
    }
    Ok(())
}

/// Parses a closed or open proposition.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    parse_formula_at(text, sig, 1, 1)
}

/// Like [`parse_formula`], reporting positions relative to `line`/`col`.
pub fn parse_formula_at(
    text: &str,
    sig: &Signature,
    line: usize,
    col: usize,
) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text, sig, line, col)?;
    let mut e = p.formula()?;
    p.expect_eof()?;
    let mut infer = Infer::new();
    infer.formula(&mut e)?;
    check_elem_range(&mut infer, &e)?;
    Ok(infer.build_formula(&e))
}

/// One side of a rewrite rule: a term, or an equation used as a boolean.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Term(Term),
    Eq(Term, Term),
}

impl Pattern {
    pub fn sort(&self) -> Sort {
        match self {
            Pattern::Term(t) => t.sort(),
            Pattern::Eq(..) => Sort::Bool,
        }
    }

    pub fn as_formula(&self) -> Option<Formula> {
        match self {
            Pattern::Term(t) if t.sort() == Sort::Bool => Some(Formula::Atom(t.clone())),
            Pattern::Term(_) => None,
            Pattern::Eq(a, b) => Some(Formula::Eq(a.clone(), b.clone())),
        }
    }
}

/// Parses `LHS == RHS` with one variable scope shared by both sides.
pub fn parse_rule_sides(
    text: &str,
    sig: &Signature,
    line: usize,
    col: usize,
) -> Result<(Pattern, Pattern), SyntaxError> {
    let mut p = Parser::new(text, sig, line, col)?;
    let mut lhs = p.formula()?;
    p.expect("==")?;
    let mut rhs = p.formula()?;
    p.expect_eof()?;
    let mut infer = Infer::new();
    let ls = pattern_slot(&mut infer, &mut lhs)?;
    let rs = pattern_slot(&mut infer, &mut rhs)?;
    infer.unify_at(&rhs, ls, rs)?;
    check_elem_range(&mut infer, &lhs)?;
    check_elem_range(&mut infer, &rhs)?;
    Ok((build_pattern(&mut infer, &lhs), build_pattern(&mut infer, &rhs)))
}

fn pattern_slot(infer: &mut Infer, e: &mut Expr) -> Result<usize, SortError> {
    match &e.kind {
        ExprKind::Infix(Infix::Eq, ..) => {
            infer.formula(e)?;
            Ok(infer.slots.fresh(Some(Sort::Bool), false))
        }
        _ if e.is_formula_only() => Err(sort_err(
            e,
            "a rule side must be a term or a single equation".into(),
        )),
        _ => infer.term(e),
    }
}

fn build_pattern(infer: &mut Infer, e: &Expr) -> Pattern {
    match &e.kind {
        ExprKind::Infix(Infix::Eq, a, b) => Pattern::Eq(infer.build_term(a), infer.build_term(b)),
        _ => Pattern::Term(infer.build_term(e)),
    }
}

/// A keyword-led declaration in a line-oriented file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub keyword: String,
    /// Text after the keyword, with continuation lines joined by newlines.
    pub body: String,
    pub line: usize,
    /// Column where `body` starts on its first line.
    pub col: usize,
}

/// Splits a line-oriented file into declarations. A line whose first
/// non-blank character is `#` is a comment. A line that does not start
/// with one of `keywords` continues the previous declaration.
pub fn split_declarations(text: &str, keywords: &[&str]) -> Result<Vec<Declaration>, ParseError> {
    let mut out: Vec<Declaration> = Vec::new();
    let mut end_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let word: String = trimmed
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '-')
            .collect();
        if keywords.contains(&word.as_str()) {
            let after = &trimmed[word.len()..];
            let body = after.trim_start();
            out.push(Declaration {
                keyword: word.clone(),
                body: body.to_string(),
                line,
                col: indent + word.len() + (after.len() - body.len()) + 1,
            });
        } else if let Some(last) = out.last_mut() {
            // pad with newlines so lexer positions match the file
            for _ in end_line..line {
                last.body.push('\n');
            }
            last.body.push_str(raw);
        } else {
            return Err(ParseError::new(
                line,
                indent + 1,
                format!("expected one of {}", keywords.join(", ")),
            ));
        }
        end_line = line;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Builtin::*;

    fn sig() -> Signature {
        Signature::builtin()
    }

    fn v(n: &str) -> Term {
        Term::list_var(n)
    }

    #[test]
    fn parses_prefix_prefix() {
        let f = parse_formula("prefix u v ==> prefix u (v @ z)", &sig()).unwrap();
        let expected = Formula::implies(
            Formula::atom(Term::app(Prefix, vec![v("u"), v("v")])),
            Formula::atom(Term::app(Prefix, vec![v("u"), Term::append(v("v"), v("z"))])),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_trivial_equation_as_list() {
        let f = parse_formula("u = u", &sig()).unwrap();
        assert_eq!(f, Formula::eq(v("u"), v("u")));
    }

    #[test]
    fn infers_elem_sort_of_hd() {
        let f = parse_formula("hd u = hd v", &sig()).unwrap();
        let Formula::Eq(a, b) = &f else { panic!() };
        assert_eq!(a.sort(), Sort::Elem);
        assert_eq!(b.sort(), Sort::Elem);
    }

    #[test]
    fn infers_variable_sorts_from_positions() {
        let f = parse_formula("a # u = v /\\ length u <= n /\\ hd v = b", &sig()).unwrap();
        let fv = f.free_vars();
        assert!(fv.contains(&Var::new("a", Sort::Elem)));
        assert!(fv.contains(&Var::new("n", Sort::Nat)));
        assert!(fv.contains(&Var::new("b", Sort::Elem)));
        assert!(fv.contains(&Var::list("u")));
    }

    #[test]
    fn numerals_follow_context() {
        let f = parse_formula("hd u = 0 /\\ length u = 0 /\\ u = [1, 0]", &sig()).unwrap();
        let mut lits = Vec::new();
        f.visit(&mut |g| {
            if let Formula::Eq(_, Term::Lit(l)) = g {
                lits.push(*l);
            }
        });
        assert_eq!(lits, vec![Literal::Elem(0), Literal::Nat(0)]);
        let g = parse_formula("0 = 0", &sig()).unwrap();
        assert_eq!(g, Formula::eq(Term::nat(0), Term::nat(0)));
        let h = parse_formula("0:elem = 0", &sig()).unwrap();
        assert_eq!(h, Formula::eq(Term::elem(0), Term::elem(0)));
    }

    #[test]
    fn quantifier_body_extends_right_and_binders_scope() {
        let f = parse_formula("EX r. u = p @ r /\\ prefix r w", &sig()).unwrap();
        let Formula::Quant(Quantifier::Exists, r, body) = &f else { panic!("{f:?}") };
        assert_eq!(r, &Var::list("r"));
        assert!(matches!(**body, Formula::And(..)));

        let g = parse_formula("EX x:elem. ALL n:nat. hd u = x \\/ n <= length u", &sig()).unwrap();
        assert_eq!(g.free_vars(), [Var::list("u")].into());
    }

    #[test]
    fn implication_and_append_are_right_associative() {
        let f = parse_formula("A ==> B ==> C", &{
            let mut s = sig();
            s.declare("A", vec![], Sort::Bool).unwrap();
            s.declare("B", vec![], Sort::Bool).unwrap();
            s.declare("C", vec![], Sort::Bool).unwrap();
            s
        })
        .unwrap();
        let Formula::Implies(_, rhs) = &f else { panic!() };
        assert!(matches!(**rhs, Formula::Implies(..)));

        let g = parse_formula("u = p @ w @ q", &sig()).unwrap();
        assert_eq!(
            g,
            Formula::eq(v("u"), Term::append(v("p"), Term::append(v("w"), v("q"))))
        );
    }

    #[test]
    fn neq_is_negated_equation() {
        let f = parse_formula("u ~= []", &sig()).unwrap();
        assert_eq!(f, Formula::not(Formula::eq(v("u"), Term::nil())));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_formula("prefix u (v @", &sig()).unwrap_err();
        let SyntaxError::Parse(e) = err else { panic!("{err:?}") };
        assert_eq!((e.line, e.col), (1, 14));

        let err = parse_formula("prefix u\n  ) v", &sig()).unwrap_err();
        let SyntaxError::Parse(e) = err else { panic!() };
        assert_eq!((e.line, e.col), (2, 3));

        assert!(matches!(
            parse_formula("u $ v", &sig()),
            Err(SyntaxError::Parse(_))
        ));
        assert!(matches!(
            parse_formula("f u = v", &sig()),
            Err(SyntaxError::Parse(_))
        ));
    }

    #[test]
    fn sort_errors() {
        for bad in [
            "prefix u",
            "hd u = v /\\ prefix v u",
            "u:elem = [] ",
            "prefix (u = v) w",
            "length u = u",
            "[] = 0",
            "x:nat = y /\\ y:elem = x",
        ] {
            assert!(
                matches!(parse_formula(bad, &sig()), Err(SyntaxError::Sort(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn rule_sides_share_scope() {
        let (l, r) = parse_rule_sides("a # (rev x) == rev (x @ [a])", &sig(), 1, 1).unwrap();
        let a = Term::var("a", Sort::Elem);
        assert_eq!(l, Pattern::Term(Term::cons(a.clone(), Term::rev(v("x")))));
        assert_eq!(
            r,
            Pattern::Term(Term::rev(Term::append(v("x"), Term::list_literal(vec![a]))))
        );

        let (l, r) = parse_rule_sides("(rev x = rev y) == (x = y)", &sig(), 1, 1).unwrap();
        assert_eq!(l, Pattern::Eq(Term::rev(v("x")), Term::rev(v("y"))));
        assert_eq!(r, Pattern::Eq(v("x"), v("y")));

        assert!(parse_rule_sides("hd x == x", &sig(), 1, 1).is_err());
        assert!(parse_rule_sides("hd x", &sig(), 1, 1).is_err());
    }

    #[test]
    fn declarations_split_with_continuations() {
        let text = "# header\nrule a: x\n  == y\n\nlemma b: u\n";
        let decls = split_declarations(text, &["rule", "lemma"]).unwrap();
        assert_eq!(decls.len(), 2);
        assert_eq!(decls[0].body, "a: x\n  == y");
        assert_eq!((decls[0].line, decls[0].col), (2, 6));
        assert_eq!(decls[1].keyword, "lemma");
        assert!(split_declarations("oops\n", &["rule"]).is_err());
    }
}
