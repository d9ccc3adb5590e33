//! Printer for the concrete syntax accepted by [`crate::parse`].
//!
//! `Display` on a [`Formula`] emits re-parseable text: non-list free
//! variables carry a sort annotation at their first occurrence, non-list
//! binders are annotated, and an element numeral is annotated when it would
//! otherwise read back as a natural. `Display` on a bare [`Term`] omits
//! annotations and is meant for diagnostics.

use std::collections::HashSet;
use std::fmt::{self, Write};

use crate::parse::Pattern;
use crate::term::{Builtin, Formula, Literal, Quantifier, Sort, Term};

#[derive(Default)]
struct Printer {
    annotate: bool,
    seen: HashSet<String>,
    bound: Vec<String>,
    out: String,
}

// Term precedence levels.
const INFIX: u8 = 0;
const APP: u8 = 1;
const ATOM: u8 = 2;

// Formula precedence levels.
const IMPLIES: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

impl Printer {
    fn annotated() -> Self {
        Printer {
            annotate: true,
            ..Printer::default()
        }
    }

    fn term_prec(t: &Term) -> u8 {
        match t {
            Term::App(_, args) if args.is_empty() => ATOM,
            Term::App(_, _) if t.as_list_literal().is_some() => ATOM,
            Term::App(sym, _) if sym.is(Builtin::Cons) || sym.is(Builtin::Append) => INFIX,
            Term::App(..) => APP,
            Term::Var(_) | Term::Lit(_) => ATOM,
        }
    }

    fn term(&mut self, t: &Term, min: u8) {
        let paren = Self::term_prec(t) < min;
        if paren {
            self.out.push('(');
        }
        match t {
            Term::Var(v) => {
                self.out.push_str(&v.name);
                let is_bound = self.bound.iter().any(|b| *b == v.name);
                if self.annotate
                    && v.sort != Sort::List
                    && !is_bound
                    && self.seen.insert(v.name.clone())
                {
                    let _ = write!(self.out, ":{}", v.sort.name());
                }
            }
            Term::Lit(Literal::Elem(n)) => {
                let _ = write!(self.out, "{n}");
            }
            Term::Lit(Literal::Nat(n)) => {
                let _ = write!(self.out, "{n}");
            }
            Term::App(sym, args) => {
                if args.is_empty() {
                    if sym.is(Builtin::Nil) {
                        self.out.push_str("[]");
                    } else {
                        self.out.push_str(sym.name());
                    }
                } else if let Some(items) = t.as_list_literal() {
                    self.out.push('[');
                    for (i, item) in items.into_iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        self.term(item, INFIX);
                    }
                    self.out.push(']');
                } else if sym.is(Builtin::Cons) || sym.is(Builtin::Append) {
                    self.term(&args[0], APP);
                    self.out
                        .push_str(if sym.is(Builtin::Cons) { " # " } else { " @ " });
                    self.term(&args[1], INFIX);
                } else {
                    self.out.push_str(sym.name());
                    for a in args {
                        self.out.push(' ');
                        self.term(a, ATOM);
                    }
                }
            }
        }
        if paren {
            self.out.push(')');
        }
    }

    fn side(&mut self, t: &Term, other: &Term) {
        self.term(t, INFIX);
        if self.annotate {
            if let (Term::Lit(Literal::Elem(_)), Term::Lit(_)) = (t, other) {
                self.out.push_str(":elem");
            }
        }
    }

    fn formula_prec(f: &Formula) -> u8 {
        match f {
            Formula::Implies(..) => IMPLIES,
            Formula::Or(..) => OR,
            Formula::And(..) => AND,
            Formula::Quant(..) => IMPLIES,
            _ => UNARY,
        }
    }

    /// `rightmost`: nothing follows this formula inside its enclosing group,
    /// so a quantifier body may run to the end without parentheses.
    fn formula(&mut self, f: &Formula, min: u8, rightmost: bool) {
        let needs = match f {
            Formula::Quant(..) => !rightmost,
            _ => Self::formula_prec(f) < min,
        };
        if needs {
            self.out.push('(');
        }
        let rightmost = rightmost || needs;
        match f {
            Formula::Atom(Term::App(sym, args)) if sym.is(Builtin::Leq) => {
                self.term(&args[0], INFIX);
                self.out.push_str(" <= ");
                self.term(&args[1], INFIX);
            }
            Formula::Atom(t) => self.term(t, INFIX),
            Formula::Eq(a, b) => {
                self.side(a, b);
                self.out.push_str(" = ");
                self.side(b, a);
            }
            Formula::Not(g) => match &**g {
                Formula::Eq(a, b) => {
                    self.side(a, b);
                    self.out.push_str(" ~= ");
                    self.side(b, a);
                }
                Formula::Atom(_) | Formula::Quant(..) => {
                    self.out.push('~');
                    self.formula(g, UNARY, rightmost);
                }
                _ => {
                    self.out.push_str("~(");
                    self.formula(g, IMPLIES, true);
                    self.out.push(')');
                }
            },
            Formula::And(a, b) => {
                self.formula(a, AND, false);
                self.out.push_str(" /\\ ");
                self.formula(b, UNARY, rightmost);
            }
            Formula::Or(a, b) => {
                self.formula(a, OR, false);
                self.out.push_str(" \\/ ");
                self.formula(b, AND, rightmost);
            }
            Formula::Implies(a, b) => {
                self.formula(a, OR, false);
                self.out.push_str(" ==> ");
                self.formula(b, IMPLIES, rightmost);
            }
            Formula::Quant(q, v, body) => {
                self.out.push_str(match q {
                    Quantifier::Exists => "EX ",
                    Quantifier::Forall => "ALL ",
                });
                self.out.push_str(&v.name);
                if v.sort != Sort::List {
                    let _ = write!(self.out, ":{}", v.sort.name());
                }
                self.out.push_str(". ");
                self.bound.push(v.name.clone());
                self.formula(body, IMPLIES, rightmost);
                self.bound.pop();
            }
        }
        if needs {
            self.out.push(')');
        }
    }

    fn pattern(&mut self, p: &Pattern) {
        match p {
            Pattern::Term(t) => self.term(t, INFIX),
            Pattern::Eq(a, b) => {
                self.out.push('(');
                self.side(a, b);
                self.out.push_str(" = ");
                self.side(b, a);
                self.out.push(')');
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer::annotated();
        p.formula(self, IMPLIES, true);
        f.write_str(&p.out)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer::default();
        p.term(self, INFIX);
        f.write_str(&p.out)
    }
}

/// Prints `lhs == rhs` with one annotation scope shared by both sides.
pub fn print_rule_sides(lhs: &Pattern, rhs: &Pattern) -> String {
    let mut p = Printer::annotated();
    p.pattern(lhs);
    p.out.push_str(" == ");
    p.pattern(rhs);
    p.out
}

/// A formula without sort annotations, for diagnostics.
pub fn plain(f: &Formula) -> String {
    let mut p = Printer::default();
    p.formula(f, IMPLIES, true);
    p.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;
    use crate::term::{alpha_equal, Signature};

    fn round(text: &str) -> String {
        let sig = Signature::builtin();
        let f = parse_formula(text, &sig).unwrap();
        let printed = f.to_string();
        let back = parse_formula(&printed, &sig).unwrap();
        assert!(alpha_equal(&f, &back), "{text} -> {printed}");
        printed
    }

    #[test]
    fn prints_classic_statements_verbatim() {
        for s in [
            "prefix u v ==> prefix u (v @ z)",
            "u ~= [] ==> prefix u v ==> hd u = hd v",
            "suffix u ((q @ w) @ p) ==> length p <= length u ==> length u <= length (w @ p) ==> EX r. u = r @ p /\\ suffix r w",
            "u @ z = v ==> left_quotient u v = z",
            "rev [0, 1] = [1, 0]",
        ] {
            assert_eq!(round(s), s);
        }
    }

    #[test]
    fn annotations_and_grouping() {
        assert_eq!(round("hd u = x:elem"), "hd u = x:elem");
        assert_eq!(round("x:elem = hd u /\\ x = hd v"), "x:elem = hd u /\\ x = hd v");
        assert_eq!(round("0:elem = 1"), "0:elem = 1:elem");
        assert_eq!(round("(EX r. u = r) /\\ v = []"), "(EX r. u = r) /\\ v = []");
        assert_eq!(round("v = [] /\\ (EX r. u = r)"), "v = [] /\\ EX r. u = r");
        assert_eq!(round("(EX r. u = r) ==> v = []"), "(EX r. u = r) ==> v = []");
        assert_eq!(round("~(A \\/ B)".replace('A', "u = v").replace('B', "v = w").as_str()), "~(u = v \\/ v = w)");
        assert_eq!(round("(u = v ==> v = w) ==> w = u"), "(u = v ==> v = w) ==> w = u");
        assert_eq!(round("(u = v \\/ v = w) /\\ w = u"), "(u = v \\/ v = w) /\\ w = u");
        assert_eq!(round("ALL n:nat. n <= length u"), "ALL n:nat. n <= length u");
        assert_eq!(round("a # u = (a # v) @ w"), "a:elem # u = (a # v) @ w");
        assert_eq!(round("~prefix u v"), "~prefix u v");
        assert_eq!(round("~~(u = v)"), "~(u ~= v)");
    }

    #[test]
    fn plain_omits_annotations() {
        let f = parse_formula("hd u = x:elem /\\ 0:elem = 1", &Signature::builtin()).unwrap();
        assert_eq!(plain(&f), "hd u = x /\\ 0 = 1");
    }

    #[test]
    fn rule_sides_share_one_annotation_scope() {
        let lhs = Pattern::Term(Term::cons(
            Term::var("a", Sort::Elem),
            Term::rev(Term::list_var("x")),
        ));
        let rhs = Pattern::Eq(Term::var("a", Sort::Elem), Term::elem(0));
        assert_eq!(print_rule_sides(&lhs, &rhs), "a:elem # rev x == (a = 0)");
    }
}
