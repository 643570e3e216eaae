use std::collections::BTreeMap;

use super::{Direction, Formula, ModalFormula, Term, Vocabulary};
use crate::algebra::{names, parse_rational, Rational, Signature};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Label(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Amp,
    Bar,
    Arrow,
    Tilde,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    while let Some(&(pos, c)) = chars.get(i) {
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' | '∧' => Some(Tok::Amp),
            '|' | '∨' => Some(Tok::Bar),
            '~' | '≈' => Some(Tok::Tilde),
            '→' => Some(Tok::Arrow),
            '∀' => Some(Tok::Ident("forall".into())),
            '∃' => Some(Tok::Ident("exists".into())),
            '¬' => Some(Tok::Ident("not".into())),
            '□' => Some(Tok::Ident("box".into())),
            '◇' => Some(Tok::Ident("dia".into())),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && at(i + 1) == Some('>') {
            out.push((pos, Tok::Arrow));
            i += 2;
        } else if c == '#' {
            i += 1;
            let start = i;
            if at(i) == Some('<') {
                let mut depth = 0;
                while let Some(ch) = at(i) {
                    i += 1;
                    match ch {
                        '<' => depth += 1,
                        '>' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                if depth != 0 {
                    return Err(Error::syntax(pos, "unterminated `<` in constant"));
                }
            } else {
                while matches!(at(i), Some(ch) if ch.is_alphanumeric() || "_/.'-".contains(ch)) {
                    i += 1;
                }
            }
            if i == start {
                return Err(Error::syntax(pos, "expected a label after `#`"));
            }
            out.push((pos, Tok::Label(chars[start..i].iter().map(|&(_, c)| c).collect())));
        } else if c.is_ascii_digit() {
            let start = i;
            while matches!(at(i), Some(ch) if ch.is_ascii_digit()) {
                i += 1;
            }
            if matches!(at(i), Some('/') | Some('.')) && matches!(at(i + 1), Some(ch) if ch.is_ascii_digit()) {
                i += 1;
                while matches!(at(i), Some(ch) if ch.is_ascii_digit()) {
                    i += 1;
                }
            }
            out.push((pos, Tok::Number(chars[start..i].iter().map(|&(_, c)| c).collect())));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while matches!(at(i), Some(ch) if ch.is_alphanumeric() || ch == '_' || ch == '\'') {
                i += 1;
            }
            if at(i) == Some('[') {
                let mut depth = 0;
                while let Some(ch) = at(i) {
                    i += 1;
                    match ch {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                if depth != 0 {
                    return Err(Error::syntax(pos, "unterminated `[` in relation name"));
                }
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|&(_, c)| c).collect())));
        } else {
            return Err(Error::syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// Parser output before the formula/term/modal distinction is applied.
#[derive(Clone, Debug)]
enum Expr {
    Ident(usize, String),
    Rel(usize, String, Vec<String>),
    Eq(String, String),
    Const(usize, String),
    Apply(usize, String, Vec<Expr>),
    Threshold(Box<Expr>, Direction, Rational),
    Quant(usize, bool, String, Box<Expr>),
    Modal(usize, bool, Box<Expr>),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(Error::syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !super::KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            _ => Err(Error::syntax(self.pos(), format!("expected {what}"))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn formula(&mut self) -> Result<Expr> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quant();
        }
        self.imp()
    }

    fn quant(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let forall = self.is_kw("forall");
        self.next();
        let mut vars = vec![self.ident("a variable")?];
        while *self.peek() == Tok::Comma {
            self.next();
            vars.push(self.ident("a variable")?);
        }
        self.expect(Tok::Dot, "`.` after quantified variables")?;
        let body = self.formula()?;
        Ok(vars
            .into_iter()
            .rev()
            .fold(body, |acc, v| Expr::Quant(pos, forall, v, Box::new(acc))))
    }

    fn imp(&mut self) -> Result<Expr> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            let pos = self.pos();
            self.next();
            let rhs = self.formula()?;
            return Ok(Expr::Apply(pos, names::IMP.into(), vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            let pos = self.pos();
            self.next();
            let rhs = self.and()?;
            lhs = Expr::Apply(pos, names::OR.into(), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            let pos = self.pos();
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Apply(pos, names::AND.into(), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_kw("not") {
            self.next();
            let arg = self.unary()?;
            return Ok(Expr::Apply(pos, names::NOT.into(), vec![arg]));
        }
        if self.is_kw("box") || self.is_kw("dia") {
            let is_box = self.is_kw("box");
            self.next();
            let arg = self.unary()?;
            return Ok(Expr::Modal(pos, is_box, Box::new(arg)));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quant();
        }
        self.primary()
    }

    fn number(&mut self) -> Result<String> {
        match self.next() {
            Tok::Number(s) => Ok(s),
            _ => Err(Error::syntax(self.toks[self.at.saturating_sub(1)].0, "expected a number")),
        }
    }

    fn count(&mut self) -> Result<usize> {
        let pos = self.pos();
        let s = self.number()?;
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::syntax(pos, "expected a positive integer")),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.next() {
            Tok::LParen => {
                let e = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Label(l) => Ok(Expr::Const(pos, l)),
            Tok::Ident(name) => self.after_ident(pos, name),
            Tok::End => Err(Error::syntax(pos, "unexpected end of input")),
            t => Err(Error::syntax(pos, format!("unexpected {}", describe(&t)))),
        }
    }

    fn after_ident(&mut self, pos: usize, name: String) -> Result<Expr> {
        match name.as_str() {
            "pow" | "times" => {
                self.expect(Tok::LParen, "`(`")?;
                let (arg, n) = if name == "pow" {
                    let arg = self.formula()?;
                    self.expect(Tok::Comma, "`,`")?;
                    (arg, self.count()?)
                } else {
                    let n = self.count()?;
                    self.expect(Tok::Comma, "`,`")?;
                    (self.formula()?, n)
                };
                self.expect(Tok::RParen, "`)`")?;
                let op = if name == "pow" { names::ODOT } else { names::OPLUS };
                if self.sig.arity(op) != Some(2) {
                    return Err(Error::syntax(pos, format!("`{name}` needs `{op}` in the algebra")));
                }
                let mut acc = arg.clone();
                for _ in 1..n {
                    acc = Expr::Apply(pos, op.into(), vec![acc, arg.clone()]);
                }
                return Ok(acc);
            }
            "ge" | "le" => {
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.formula()?;
                self.expect(Tok::Comma, "`,`")?;
                let bpos = self.pos();
                let b = self.number()?;
                let bound = parse_rational(&b)
                    .filter(|r| *r >= Rational::from_integer(0) && *r <= Rational::from_integer(1))
                    .ok_or_else(|| Error::syntax(bpos, "threshold must be a rational in [0,1]"))?;
                self.expect(Tok::RParen, "`)`")?;
                let dir = if name == "ge" { Direction::Ge } else { Direction::Le };
                return Ok(Expr::Threshold(Box::new(arg), dir, bound));
            }
            kw if super::KEYWORDS.contains(&kw) => {
                return Err(Error::syntax(pos, format!("unexpected keyword `{kw}`")));
            }
            _ => {}
        }
        if *self.peek() == Tok::Tilde {
            self.next();
            let rhs = self.ident("a variable after `~`")?;
            return Ok(Expr::Eq(name, rhs));
        }
        if *self.peek() != Tok::LParen {
            return Ok(Expr::Ident(pos, name));
        }
        self.next();
        if self.sig.arity(&name).is_some() {
            let mut args = vec![self.formula()?];
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.formula()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Apply(pos, name, args));
        }
        let mut args = vec![self.ident("a variable")?];
        while *self.peek() == Tok::Comma {
            self.next();
            args.push(self.ident("a variable")?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(Expr::Rel(pos, name, args))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Label(s) => format!("constant #{s}"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Tilde => "`~`".into(),
        Tok::End => "end of input".into(),
    }
}

fn parse_expr(text: &str, sig: &Signature) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, at: 0, sig };
    let e = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(Error::syntax(p.pos(), format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

fn check_op(sig: &Signature, pos: usize, op: &str, n: usize) -> Result<()> {
    match sig.arity(op) {
        None => Err(Error::syntax(pos, format!("unknown connective `{op}`"))),
        Some(a) if a != n => Err(Error::syntax(
            pos,
            format!("connective `{op}` expects {a} argument(s), found {n}"),
        )),
        _ => Ok(()),
    }
}

fn check_const(sig: &Signature, pos: usize, label: &str) -> Result<()> {
    if sig.has_constant(label) {
        Ok(())
    } else {
        Err(Error::syntax(pos, format!("unknown constant #{label}")))
    }
}

enum Relations<'v> {
    Fixed(&'v Vocabulary),
    Infer(BTreeMap<String, (usize, usize)>, bool),
}

fn lower_formula(e: Expr, sig: &Signature, rels: &mut Relations<'_>) -> Result<Formula> {
    Ok(match e {
        Expr::Ident(pos, name) => {
            return Err(Error::syntax(pos, format!("expected `(` after relation `{name}`")));
        }
        Expr::Rel(pos, rel, args) => {
            match rels {
                Relations::Fixed(v) => match v.arity(&rel) {
                    None => return Err(Error::syntax(pos, format!("unknown relation `{rel}`"))),
                    Some(a) if a != args.len() => {
                        return Err(Error::syntax(
                            pos,
                            format!("relation `{rel}` has arity {a}, found {} argument(s)", args.len()),
                        ))
                    }
                    _ => {}
                },
                Relations::Infer(seen, _) => {
                    let next = seen.len();
                    let entry = seen.entry(rel.clone()).or_insert((next, args.len()));
                    if entry.1 != args.len() {
                        return Err(Error::syntax(pos, format!("relation `{rel}` used with two arities")));
                    }
                }
            }
            Formula::Atom { rel, args }
        }
        Expr::Eq(x, y) => {
            match rels {
                Relations::Fixed(v) if !v.has_crisp_identity() => {
                    return Err(Error::InvalidArgument(
                        "`~` needs a vocabulary with crisp identity".into(),
                    ))
                }
                Relations::Infer(_, crisp) => *crisp = true,
                _ => {}
            }
            Formula::Eq(x, y)
        }
        Expr::Const(pos, label) => {
            check_const(sig, pos, &label)?;
            Formula::Const(label)
        }
        Expr::Apply(pos, op, args) => {
            check_op(sig, pos, &op, args.len())?;
            let args = args.into_iter().map(|a| lower_formula(a, sig, rels)).collect::<Result<_>>()?;
            Formula::Apply { op, args }
        }
        Expr::Threshold(arg, dir, bound) => {
            let arg = lower_formula(*arg, sig, rels)?;
            Formula::Threshold { arg: Box::new(arg), dir, bound }
        }
        Expr::Quant(_, forall, x, body) => {
            let body = Box::new(lower_formula(*body, sig, rels)?);
            if forall {
                Formula::Forall(x, body)
            } else {
                Formula::Exists(x, body)
            }
        }
        Expr::Modal(pos, ..) => return Err(Error::syntax(pos, "modal operator outside a modal formula")),
    })
}

/// Parses a formula; free variables are allowed.
pub fn parse_formula(text: &str, vocab: &Vocabulary, sig: &Signature) -> Result<Formula> {
    lower_formula(parse_expr(text, sig)?, sig, &mut Relations::Fixed(vocab))
}

/// Parses a sentence; any free variable is an error.
pub fn parse_sentence(text: &str, vocab: &Vocabulary, sig: &Signature) -> Result<Formula> {
    let f = parse_formula(text, vocab, sig)?;
    match f.free_variables().into_iter().next() {
        Some(v) => Err(Error::FreeVariable(v)),
        None => Ok(f),
    }
}

/// Collects the relations (and crisp identity use) of a formula without a
/// declared vocabulary.
pub fn infer_vocabulary(text: &str, sig: &Signature) -> Result<Vocabulary> {
    let mut rels = Relations::Infer(BTreeMap::new(), false);
    lower_formula(parse_expr(text, sig)?, sig, &mut rels)?;
    let Relations::Infer(seen, crisp) = rels else { unreachable!() };
    let mut ordered: Vec<(String, (usize, usize))> = seen.into_iter().collect();
    ordered.sort_by_key(|(_, (i, _))| *i);
    Vocabulary::new(ordered.into_iter().map(|(n, (_, a))| (n, a)), crisp)
}

fn var_index(name: &str) -> Option<usize> {
    if name == "v" {
        return Some(0);
    }
    let digits = name.strip_prefix('v')?;
    match digits.parse::<usize>() {
        Ok(i) if i >= 1 && !digits.starts_with('0') => Some(i - 1),
        _ => None,
    }
}

fn lower_term(e: Expr, sig: &Signature) -> Result<Term> {
    Ok(match e {
        Expr::Ident(pos, name) => {
            Term::Var(var_index(&name).ok_or_else(|| {
                Error::syntax(pos, format!("term variables are v, v1, v2, ...; found `{name}`"))
            })?)
        }
        Expr::Const(pos, label) => {
            check_const(sig, pos, &label)?;
            Term::Const(label)
        }
        Expr::Apply(pos, op, args) => {
            check_op(sig, pos, &op, args.len())?;
            Term::Apply { op, args: args.into_iter().map(|a| lower_term(a, sig)).collect::<Result<_>>()? }
        }
        Expr::Rel(pos, name, _) => return Err(Error::syntax(pos, format!("unknown connective `{name}`"))),
        Expr::Quant(pos, ..) | Expr::Modal(pos, ..) => {
            return Err(Error::syntax(pos, "not allowed in a term"))
        }
        Expr::Eq(..) | Expr::Threshold(..) => return Err(Error::syntax(0, "not allowed in a term")),
    })
}

/// Parses an algebra term over `v`/`v1`, `v2`, ...
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term> {
    lower_term(parse_expr(text, sig)?, sig)
}

fn lower_modal(e: Expr, sig: &Signature) -> Result<ModalFormula> {
    Ok(match e {
        Expr::Ident(_, name) => ModalFormula::Letter(name),
        Expr::Const(pos, label) => {
            check_const(sig, pos, &label)?;
            ModalFormula::Const(label)
        }
        Expr::Apply(pos, op, args) => {
            check_op(sig, pos, &op, args.len())?;
            ModalFormula::Apply {
                op,
                args: args.into_iter().map(|a| lower_modal(a, sig)).collect::<Result<_>>()?,
            }
        }
        Expr::Modal(_, is_box, arg) => {
            let a = Box::new(lower_modal(*arg, sig)?);
            if is_box {
                ModalFormula::Box(a)
            } else {
                ModalFormula::Dia(a)
            }
        }
        Expr::Rel(pos, ..) | Expr::Quant(pos, ..) => {
            return Err(Error::syntax(pos, "not allowed in a modal formula"))
        }
        Expr::Eq(..) | Expr::Threshold(..) => return Err(Error::syntax(0, "not allowed in a modal formula")),
    })
}

/// Parses a modal formula over propositional letters with `box`/`dia`.
pub fn parse_modal(text: &str, sig: &Signature) -> Result<ModalFormula> {
    lower_modal(parse_expr(text, sig)?, sig)
}
