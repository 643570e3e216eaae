use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{demorgan_constants, names, DeMorganConstants, Elem, LatticeAlgebra};
use crate::error::{Error, Result};
use crate::syntax::Formula;

/// Largest disjunctive or conjunctive normal form kept during elimination.
const MAX_CLAUSES: usize = 1 << 16;

/// An atom under zero, one or two negations. Three collapse to one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Lit {
    Atom { rel: String, args: Vec<String>, neg: u8 },
    Const(Elem),
}

enum Nnf {
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

struct Qe<'a> {
    alg: &'a LatticeAlgebra,
    k: DeMorganConstants,
    top: Elem,
    bottom: Elem,
}

/// Eliminates quantifiers from a `{and, or, not}` formula over an algebra
/// passing the De Morgan check. The result has the same free variables and
/// the same almost-sure value under every assignment; a sentence comes out
/// as a single constant.
pub fn qe_demorgan(f: &Formula, alg: &LatticeAlgebra) -> Result<Formula> {
    let k = demorgan_constants(alg)?;
    let qe = Qe { alg, k, top: alg.top().expect("bounded"), bottom: alg.bottom().expect("bounded") };
    qe.check(f)?;
    let out = qe.eliminate(f)?;
    if out.is_sentence() {
        // Closed quantifier-free formulas are built from constants only.
        let v = qe.constant_value(&out)?;
        return Ok(Formula::constant(alg.label(v)));
    }
    Ok(out)
}

/// `{0, ε, ε', δ, δ', 1}` for an algebra passing the De Morgan check.
pub fn almost_sure_set_demorgan(alg: &LatticeAlgebra) -> Result<BTreeSet<Elem>> {
    let k = demorgan_constants(alg)?;
    Ok([alg.bottom(), Some(k.eps), Some(k.eps_prime), Some(k.delta), Some(k.delta_prime), alg.top()]
        .into_iter()
        .flatten()
        .collect())
}

/// One sentence over a unary `rel` for each of `0, ε, ε', δ, δ', 1`, in
/// that order, paired with the value it should take almost surely.
pub fn demorgan_witnesses(alg: &LatticeAlgebra, rel: &str) -> Result<Vec<(Formula, Elem)>> {
    let k = demorgan_constants(alg)?;
    let p = || Formula::atom(rel, &["x"]);
    let np = || Formula::not(p());
    let nnp = || Formula::not(np());
    Ok(vec![
        (Formula::forall("x", p()), alg.bottom().expect("bounded")),
        (Formula::exists("x", Formula::and(p(), np())), k.eps),
        (Formula::exists("x", Formula::and(np(), nnp())), k.eps_prime),
        (Formula::forall("x", Formula::or(p(), np())), k.delta),
        (Formula::forall("x", Formula::or(np(), nnp())), k.delta_prime),
        (Formula::exists("x", p()), alg.top().expect("bounded")),
    ])
}

fn step(neg: u8) -> u8 {
    match neg {
        0 => 1,
        1 => 2,
        _ => 1,
    }
}

impl Qe<'_> {
    fn check(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::Atom { .. } => Ok(()),
            Formula::Const(c) => {
                self.alg.elem(c).ok_or_else(|| Error::UnknownConstant(c.clone()))?;
                Ok(())
            }
            Formula::Eq(..) => Err(Error::Unsupported("identity atoms in quantifier elimination".into())),
            Formula::Threshold { .. } => Err(Error::Unsupported("threshold events in quantifier elimination".into())),
            Formula::Apply { op, args } => {
                let arity = match op.as_str() {
                    names::AND | names::OR => 2,
                    names::NOT => 1,
                    _ => return Err(Error::Unsupported(format!("connective `{op}` in quantifier elimination"))),
                };
                if args.len() != arity {
                    return Err(Error::Arity { name: op.clone(), expected: arity, found: args.len() });
                }
                args.iter().try_for_each(|a| self.check(a))
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => self.check(b),
        }
    }

    fn negate(&self, e: Elem, times: u8) -> Elem {
        (0..times).fold(e, |e, _| self.alg.negate(e).expect("checked"))
    }

    fn eliminate(&self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Apply { op, args } => Formula::Apply {
                op: op.clone(),
                args: args.iter().map(|a| self.eliminate(a)).collect::<Result<_>>()?,
            },
            Formula::Exists(y, body) => {
                let body = self.eliminate(body)?;
                self.exists(y, &self.nnf(&body, 0))?
            }
            Formula::Forall(y, body) => {
                let body = self.eliminate(body)?;
                self.forall(y, &self.nnf(&body, 0))?
            }
            other => other.clone(),
        })
    }

    fn nnf(&self, f: &Formula, neg: u8) -> Nnf {
        match f {
            Formula::Atom { rel, args } => Nnf::Lit(Lit::Atom { rel: rel.clone(), args: args.clone(), neg }),
            Formula::Const(c) => Nnf::Lit(Lit::Const(self.negate(self.alg.elem(c).expect("checked"), neg))),
            Formula::Apply { op, args } if op == names::NOT => self.nnf(&args[0], step(neg)),
            Formula::Apply { op, args } => {
                let parts = args.iter().map(|a| self.nnf(a, neg)).collect();
                if (op == names::AND) == (neg != 1) {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                }
            }
            _ => unreachable!("quantifier-free input checked"),
        }
    }

    fn exists(&self, y: &str, body: &Nnf) -> Result<Formula> {
        let mut out = Vec::new();
        for conj in normal_form(body, true)? {
            let (rest, groups) = split(y, conj)?;
            let c = groups.values().fold(self.top, |acc, &mask| {
                let mask = match mask {
                    0b101 => 0b001,
                    0b111 => 0b011,
                    m => m,
                };
                let v = match mask {
                    0b011 => self.k.eps,
                    0b110 => self.k.eps_prime,
                    _ => self.top,
                };
                self.alg.meet(acc, v)
            });
            if c == self.bottom {
                continue;
            }
            let mut lits: Vec<Formula> = rest.iter().map(|l| self.lit_formula(l)).collect();
            if c != self.top || lits.is_empty() {
                lits.push(Formula::constant(self.alg.label(c)));
            }
            let conj = Formula::fold(names::AND, lits).expect("nonempty");
            if !out.contains(&conj) {
                out.push(conj);
            }
        }
        Ok(self.simplify(Formula::fold(names::OR, out).unwrap_or_else(|| Formula::constant(self.alg.label(self.bottom)))))
    }

    fn forall(&self, y: &str, body: &Nnf) -> Result<Formula> {
        let mut out = Vec::new();
        for clause in normal_form(body, false)? {
            let (rest, groups) = split(y, clause)?;
            let d = groups.values().fold(self.bottom, |acc, &mask| {
                let mask = match mask {
                    0b101 => 0b100,
                    0b111 => 0b110,
                    m => m,
                };
                let v = match mask {
                    0b011 => self.k.delta,
                    0b110 => self.k.delta_prime,
                    _ => self.bottom,
                };
                self.alg.join(acc, v)
            });
            if d == self.top {
                continue;
            }
            let mut lits: Vec<Formula> = rest.iter().map(|l| self.lit_formula(l)).collect();
            if d != self.bottom || lits.is_empty() {
                lits.push(Formula::constant(self.alg.label(d)));
            }
            let clause = Formula::fold(names::OR, lits).expect("nonempty");
            if !out.contains(&clause) {
                out.push(clause);
            }
        }
        Ok(self.simplify(Formula::fold(names::AND, out).unwrap_or_else(|| Formula::constant(self.alg.label(self.top)))))
    }

    fn lit_formula(&self, l: &Lit) -> Formula {
        match l {
            Lit::Const(e) => Formula::constant(self.alg.label(*e)),
            Lit::Atom { rel, args, neg } => (0..*neg).fold(
                Formula::Atom { rel: rel.clone(), args: args.clone() },
                |f, _| Formula::not(f),
            ),
        }
    }

    /// Folds constant-only subformulas to a single constant.
    fn simplify(&self, f: Formula) -> Formula {
        match f {
            Formula::Apply { op, args } => {
                let args: Vec<Formula> = args.into_iter().map(|a| self.simplify(a)).collect();
                let consts: Option<Vec<Elem>> = args
                    .iter()
                    .map(|a| match a {
                        Formula::Const(c) => self.alg.elem(c),
                        _ => None,
                    })
                    .collect();
                match consts {
                    Some(vals) => Formula::constant(self.alg.label(self.alg.apply(&op, &vals).expect("checked"))),
                    None => Formula::Apply { op, args },
                }
            }
            other => other,
        }
    }

    fn constant_value(&self, f: &Formula) -> Result<Elem> {
        match f {
            Formula::Const(c) => Ok(self.alg.elem(c).expect("checked")),
            Formula::Apply { op, args } => {
                let vals = args.iter().map(|a| self.constant_value(a)).collect::<Result<Vec<_>>>()?;
                Ok(self.alg.apply(op, &vals).expect("checked"))
            }
            other => Err(Error::Internal(format!("unexpected residue {other} after elimination"))),
        }
    }
}

/// DNF (`dnf = true`) or CNF as a list of literal sets.
fn normal_form(f: &Nnf, dnf: bool) -> Result<Vec<BTreeSet<Lit>>> {
    Ok(match f {
        Nnf::Lit(l) => vec![BTreeSet::from([l.clone()])],
        Nnf::And(parts) | Nnf::Or(parts) => {
            let product = matches!(f, Nnf::And(_)) == dnf;
            let mut acc: Vec<BTreeSet<Lit>> = if product { vec![BTreeSet::new()] } else { Vec::new() };
            for p in parts {
                let sub = normal_form(p, dnf)?;
                if product {
                    if acc.len().saturating_mul(sub.len()) > MAX_CLAUSES {
                        return Err(Error::Budget(format!("normal form exceeds {MAX_CLAUSES} clauses")));
                    }
                    acc = acc
                        .iter()
                        .flat_map(|a| sub.iter().map(move |b| a.union(b).cloned().collect()))
                        .collect();
                } else {
                    acc.extend(sub);
                    if acc.len() > MAX_CLAUSES {
                        return Err(Error::Budget(format!("normal form exceeds {MAX_CLAUSES} clauses")));
                    }
                }
            }
            acc.sort();
            acc.dedup();
            acc
        }
    })
}

type Groups = BTreeMap<(String, Vec<String>), u8>;

/// Separates literals free of `y` from atoms mentioning it; the latter are
/// grouped by atom with a bitmask of the negation depths present.
fn split(y: &str, lits: BTreeSet<Lit>) -> Result<(Vec<Lit>, Groups)> {
    let mut rest = Vec::new();
    let mut groups = Groups::new();
    for l in lits {
        match l {
            Lit::Atom { rel, args, neg } if args.iter().any(|a| a == y) => {
                *groups.entry((rel, args)).or_insert(0) |= 1 << neg;
            }
            other => rest.push(other),
        }
    }
    // Two atoms that differ only where both carry variables other than `y`
    // name the same cell whenever those variables coincide; the grouping
    // above would then be wrong for such assignments.
    let keys: Vec<_> = groups.iter().collect();
    for (i, ((r1, a1), m1)) in keys.iter().enumerate() {
        for ((r2, a2), m2) in &keys[i + 1..] {
            let unifiable = r1 == r2
                && a1.iter().zip(a2.iter()).all(|(u, v)| (u == y) == (v == y));
            if unifiable && m1 != m2 {
                return Err(Error::Unsupported(format!(
                    "atoms {r1}({}) and {r2}({}) may coincide when free variables are identified",
                    a1.join(","),
                    a2.join(",")
                )));
            }
        }
    }
    Ok((rest, groups))
}
