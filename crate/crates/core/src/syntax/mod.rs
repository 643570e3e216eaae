//! Vocabularies, algebra terms and many-valued first-order formulas.
//!
//! Concrete grammar (whitespace insensitive):
//!
//! ```text
//! formula  ::= quant | imp
//! quant    ::= ("forall" | "exists") ident ("," ident)* "." formula
//! imp      ::= or ("->" (quant | imp))?
//! or       ::= and ("|" and)*
//! and      ::= unary ("&" unary)*
//! unary    ::= ("not" | "box" | "dia") unary | quant | primary
//! primary  ::= "(" formula ")" | "#" label | ident "~" ident
//!            | "pow" "(" formula "," nat ")" | "times" "(" nat "," formula ")"
//!            | ("ge" | "le") "(" formula "," rational ")"
//!            | connective "(" formula ("," formula)* ")"
//!            | relation "(" ident ("," ident)* ")"
//!            | ident
//! ```
//!
//! Unicode aliases `∀ ∃ ¬ ∧ ∨ → ≈ □ ◇` are accepted. A bare identifier is a
//! variable in terms (`v`, `v1`, `v2`, ...) and a propositional letter in
//! modal formulas.

mod modal;
mod parser;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{names, Rational, Signature};
use crate::error::{Error, Result};

pub use modal::{s5_translate, ModalFormula};
pub use parser::{infer_vocabulary, parse_formula, parse_modal, parse_sentence, parse_term};

/// Relational vocabulary with an optional crisp identity predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    relations: Vec<(String, usize)>,
    crisp_identity: bool,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(
        relations: impl IntoIterator<Item = (S, usize)>,
        crisp_identity: bool,
    ) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut rels = Vec::new();
        for (name, arity) in relations {
            let name = name.into();
            if arity == 0 {
                return Err(Error::InvalidArgument(format!("relation {name} has arity 0")));
            }
            if !is_relation_name(&name) {
                return Err(Error::InvalidArgument(format!("invalid relation name `{name}`")));
            }
            if seen.insert(name.clone(), arity).is_some() {
                return Err(Error::InvalidArgument(format!("relation {name} declared twice")));
            }
            rels.push((name, arity));
        }
        Ok(Vocabulary { relations: rels, crisp_identity })
    }

    /// Parses `P/1,R/2` (optionally with `~` to request crisp identity).
    pub fn parse(text: &str) -> Result<Self> {
        let mut rels = Vec::new();
        let mut crisp = false;
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "~" {
                crisp = true;
                continue;
            }
            let (name, arity) = item
                .split_once('/')
                .ok_or_else(|| Error::InvalidArgument(format!("expected NAME/ARITY, got `{item}`")))?;
            let arity = arity
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad arity in `{item}`")))?;
            rels.push((name.trim().to_string(), arity));
        }
        Vocabulary::new(rels, crisp)
    }

    pub fn unary(name: &str) -> Self {
        Vocabulary::new([(name, 1)], false).expect("valid name")
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(n, _)| n == name).map(|&(_, a)| a)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn has_crisp_identity(&self) -> bool {
        self.crisp_identity
    }

    pub fn with_crisp_identity(mut self, on: bool) -> Self {
        self.crisp_identity = on;
        self
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|&(_, a)| a).max().unwrap_or(0)
    }

    pub fn is_unary(&self) -> bool {
        self.relations.iter().all(|&(_, a)| a == 1)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.relations.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        if self.crisp_identity {
            parts.push("~".into());
        }
        f.write_str(&parts.join(","))
    }
}

pub(crate) const KEYWORDS: &[&str] = &["forall", "exists", "not", "box", "dia", "pow", "times", "ge", "le"];

fn is_relation_name(name: &str) -> bool {
    let base = name.split('[').next().unwrap_or("");
    let mut chars = base.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&base)
        && (name.len() == base.len() || name.ends_with(']'))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Ge,
    Le,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Ge => "ge",
            Direction::Le => "le",
        }
    }
}

/// A many-valued first-order formula. Variables are kept by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom { rel: String, args: Vec<String> },
    /// Crisp identity `x ~ y`.
    Eq(String, String),
    /// A carrier element, written `#label`.
    Const(String),
    Apply { op: String, args: Vec<Formula> },
    /// `ge(φ, r)` / `le(φ, r)`: crisp threshold event on a value.
    Threshold { arg: Box<Formula>, dir: Direction, bound: Rational },
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, args: &[&str]) -> Self {
        Formula::Atom { rel: rel.into(), args: args.iter().map(|s| s.to_string()).collect() }
    }

    pub fn eq(x: &str, y: &str) -> Self {
        Formula::Eq(x.into(), y.into())
    }

    pub fn constant(label: &str) -> Self {
        Formula::Const(label.into())
    }

    pub fn apply(op: &str, args: Vec<Formula>) -> Self {
        Formula::Apply { op: op.into(), args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::apply(names::NOT, vec![f])
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::apply(names::AND, vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::apply(names::OR, vec![a, b])
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::apply(names::IMP, vec![a, b])
    }

    pub fn forall(x: &str, body: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: &str, body: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn threshold(arg: Formula, dir: Direction, bound: Rational) -> Self {
        Formula::Threshold { arg: Box::new(arg), dir, bound }
    }

    /// Left fold of `op` over `items`; `None` when empty.
    pub fn fold(op: &str, items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(|a, b| Formula::apply(op, vec![a, b]))
    }

    /// `∀x1 … ∀xk φ`, innermost last.
    pub fn forall_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    pub fn exists_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    /// Free variables in order of first occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let note = |v: &String, out: &mut Vec<String>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(|v| note(v, out)),
            Formula::Eq(x, y) => {
                note(x, out);
                note(y, out);
            }
            Formula::Const(_) => {}
            Formula::Apply { args, .. } => args.iter().for_each(|a| a.collect_free(bound, out)),
            Formula::Threshold { arg, .. } => arg.collect_free(bound, out),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) | Formula::Const(_) => 0,
            Formula::Apply { args, .. } => args.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Formula::Threshold { arg, .. } => arg.quantifier_depth(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.quantifier_depth(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) | Formula::Const(_) => 1,
            Formula::Apply { args, .. } => 1 + args.iter().map(Formula::size).sum::<usize>(),
            Formula::Threshold { arg, .. } => 1 + arg.size(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.size(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_depth() == 0
    }

    pub fn uses_identity(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Eq(..)))
    }

    pub fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Formula::Apply { args, .. } => args.iter().any(|a| a.any(pred)),
            Formula::Threshold { arg, .. } => arg.any(pred),
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.any(pred),
            _ => false,
        }
    }

    /// Relation names with arities, in order of first occurrence.
    pub fn relations(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom { rel, args } = f {
                if !out.iter().any(|(r, _)| r == rel) {
                    out.push((rel.clone(), args.len()));
                }
            }
        });
        out
    }

    /// Connective names used, including `not` but excluding thresholds.
    pub fn connectives(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Apply { op, .. } = f {
                if !out.contains(op) {
                    out.push(op.clone());
                }
            }
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Apply { args, .. } => args.iter().for_each(|a| a.visit(f)),
            Formula::Threshold { arg, .. } => arg.visit(f),
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.visit(f),
            _ => {}
        }
    }

    /// Renames free occurrences of `from` to `to`. Does not avoid capture.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let r = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            Formula::Atom { rel, args } => Formula::Atom { rel: rel.clone(), args: args.iter().map(r).collect() },
            Formula::Eq(x, y) => Formula::Eq(r(x), r(y)),
            Formula::Const(c) => Formula::Const(c.clone()),
            Formula::Apply { op, args } => Formula::Apply {
                op: op.clone(),
                args: args.iter().map(|a| a.rename_free(from, to)).collect(),
            },
            Formula::Threshold { arg, dir, bound } => {
                Formula::Threshold { arg: Box::new(arg.rename_free(from, to)), dir: *dir, bound: *bound }
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                let body = if x == from { (**b).clone() } else { b.rename_free(from, to) };
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(x.clone(), Box::new(body))
                } else {
                    Formula::Exists(x.clone(), Box::new(body))
                }
            }
        }
    }

    /// Checks connectives, constants and atoms against a signature and a
    /// vocabulary.
    pub fn check(&self, vocab: &Vocabulary, sig: &Signature) -> Result<()> {
        let mut err = None;
        self.visit(&mut |f| {
            if err.is_some() {
                return;
            }
            err = match f {
                Formula::Atom { rel, args } => match vocab.arity(rel) {
                    None => Some(Error::InvalidArgument(format!("unknown relation {rel}"))),
                    Some(a) if a != args.len() => {
                        Some(Error::Arity { name: rel.clone(), expected: a, found: args.len() })
                    }
                    _ => None,
                },
                Formula::Eq(..) if !vocab.has_crisp_identity() => {
                    Some(Error::InvalidArgument("identity used but vocabulary has no crisp identity".into()))
                }
                Formula::Const(c) if !sig.has_constant(c) => Some(Error::UnknownConstant(c.clone())),
                Formula::Apply { op, args } => match sig.arity(op) {
                    None => Some(Error::UnknownConnective(op.clone())),
                    Some(a) if a != args.len() => {
                        Some(Error::Arity { name: op.clone(), expected: a, found: args.len() })
                    }
                    _ => None,
                },
                Formula::Threshold { .. } if !sig.chain_values => {
                    Some(Error::Unsupported("thresholds need an algebra with rational values".into()))
                }
                _ => None,
            };
        });
        err.map_or(Ok(()), Err)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::formula(self, 0, f)
    }
}

/// An algebra term over variables `v1 … vk` (stored zero-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Const(String),
    Apply { op: String, args: Vec<Term> },
}

impl Term {
    pub fn var(i: usize) -> Self {
        Term::Var(i)
    }

    pub fn apply(op: &str, args: Vec<Term>) -> Self {
        Term::Apply { op: op.into(), args }
    }

    /// Number of variables, i.e. one past the largest index used.
    pub fn arity(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Const(_) => 0,
            Term::Apply { args, .. } => args.iter().map(Term::arity).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Apply { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Total number of variable occurrences.
    pub fn occurrences(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Const(_) => 0,
            Term::Apply { args, .. } => args.iter().map(Term::occurrences).sum(),
        }
    }

    /// Replaces `v_i` by `leaf(i)`.
    pub fn substitute(&self, leaf: &dyn Fn(usize) -> Formula) -> Formula {
        match self {
            Term::Var(i) => leaf(*i),
            Term::Const(c) => Formula::Const(c.clone()),
            Term::Apply { op, args } => Formula::Apply {
                op: op.clone(),
                args: args.iter().map(|a| a.substitute(leaf)).collect(),
            },
        }
    }

    /// Generic evaluation with a caller-supplied connective interpretation.
    pub fn eval<T: Copy>(
        &self,
        vars: &[T],
        constant: &dyn Fn(&str) -> Option<T>,
        op: &dyn Fn(&str, &[T]) -> Option<T>,
    ) -> Option<T> {
        match self {
            Term::Var(i) => vars.get(*i).copied(),
            Term::Const(c) => constant(c),
            Term::Apply { op: name, args } => {
                let vals = args.iter().map(|a| a.eval(vars, constant, op)).collect::<Option<Vec<T>>>()?;
                op(name, &vals)
            }
        }
    }

    pub fn connectives(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        fn walk(t: &Term, out: &mut Vec<(String, usize)>) {
            if let Term::Apply { op, args } = t {
                if !out.iter().any(|(o, _)| o == op) {
                    out.push((op.clone(), args.len()));
                }
                args.iter().for_each(|a| walk(a, out));
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Const(c) if sig.has_constant(c) => Ok(()),
            Term::Const(c) => Err(Error::UnknownConstant(c.clone())),
            Term::Apply { op, args } => {
                match sig.arity(op) {
                    None => return Err(Error::UnknownConnective(op.clone())),
                    Some(a) if a != args.len() => {
                        return Err(Error::Arity { name: op.clone(), expected: a, found: args.len() })
                    }
                    _ => {}
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let as_formula = self.substitute(&|i| Formula::Atom { rel: format!("v{}", i + 1), args: vec![] });
        print::formula(&as_formula, 0, f)
    }
}

/// The pair `(∀x1…∀xk t(R(x1),…,R(xk)), ∃x1…∃xk t(R(x1),…,R(xk)))`.
pub fn witness_sentences(t: &Term, rel: &str) -> (Formula, Formula) {
    let k = t.arity().max(1);
    let vars: Vec<String> = if k == 1 { vec!["x".into()] } else { (1..=k).map(|i| format!("x{i}")).collect() };
    let body = t.substitute(&|i| Formula::Atom { rel: rel.into(), args: vec![vars[i].clone()] });
    (Formula::forall_all(&vars, body.clone()), Formula::exists_all(&vars, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_examples() {
        assert_eq!(Formula::atom("R", &["x", "y"]).free_variables(), ["x", "y"]);
        assert_eq!(Formula::forall("x", Formula::atom("R", &["x", "y"])).free_variables(), ["y"]);
        let s = Formula::forall("x", Formula::exists("y", Formula::atom("R", &["x", "y"])));
        assert!(s.is_sentence());
    }

    #[test]
    fn vocabulary_validation() {
        assert!(Vocabulary::new([("P", 0)], false).is_err());
        assert!(Vocabulary::new([("P", 1), ("P", 2)], false).is_err());
        assert!(Vocabulary::new([("forall", 1)], false).is_err());
        let v = Vocabulary::parse("P/1, R/2, ~").unwrap();
        assert_eq!(v.max_arity(), 2);
        assert!(v.has_crisp_identity());
        assert_eq!(v.to_string(), "P/1,R/2,~");
        assert!(Vocabulary::new([("R[1/2]", 2)], false).is_ok());
    }

    #[test]
    fn witness_sentences_shapes() {
        let (a, e) = witness_sentences(&Term::Var(0), "R");
        assert_eq!(a, Formula::forall("x", Formula::atom("R", &["x"])));
        assert_eq!(e, Formula::exists("x", Formula::atom("R", &["x"])));
        let t = Term::apply("or", vec![Term::Var(0), Term::Var(1)]);
        let (a, _) = witness_sentences(&t, "R");
        assert_eq!(a.quantifier_depth(), 2);
        assert!(a.is_sentence());
    }
}
