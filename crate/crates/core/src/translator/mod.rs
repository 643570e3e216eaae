//! Translation of A-valued formulas into classical first-order logic over
//! the vocabulary `τ × A`, and the matching model transform.
//!
//! Classical formulas reuse [`Formula`] over the two-element algebra: the
//! constants `#0`/`#1` are falsity and truth and `~` is equality. The
//! relation `R^a` is written `R[a]`.

mod profile;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{make_boolean, names, Elem, LatticeAlgebra};
use crate::error::{Error, Result};
use crate::semantics::{cell_tuple, diagonal, evaluate, WeightedStructure};
use crate::syntax::{Formula, Vocabulary};

pub use profile::ConstraintProfile;

/// `R[a]`.
pub fn classical_relation(rel: &str, label: &str) -> String {
    format!("{rel}[{label}]")
}

/// Splits `R[a]` into `("R", "a")`.
pub fn split_classical_relation(name: &str) -> Option<(&str, &str)> {
    let open = name.find('[')?;
    let label = name[open + 1..].strip_suffix(']')?;
    Some((&name[..open], label))
}

/// `τ × A`, with classical equality.
pub fn classical_vocabulary(vocab: &Vocabulary, alg: &LatticeAlgebra) -> Vocabulary {
    let rels = vocab
        .relations()
        .iter()
        .flat_map(|(r, k)| alg.labels().iter().map(move |l| (classical_relation(r, l), *k)));
    Vocabulary::new(rels, true).expect("bracketed names are valid and distinct")
}

pub(crate) fn truth() -> Formula {
    Formula::Const("1".into())
}

pub(crate) fn falsity() -> Formula {
    Formula::Const("0".into())
}

fn is_true(f: &Formula) -> bool {
    matches!(f, Formula::Const(c) if c == "1")
}

fn is_false(f: &Formula) -> bool {
    matches!(f, Formula::Const(c) if c == "0")
}

pub(crate) fn c_and(a: Formula, b: Formula) -> Formula {
    if is_false(&a) || is_false(&b) {
        falsity()
    } else if is_true(&a) {
        b
    } else if is_true(&b) || a == b {
        a
    } else {
        Formula::and(a, b)
    }
}

pub(crate) fn c_or(a: Formula, b: Formula) -> Formula {
    if is_true(&a) || is_true(&b) {
        truth()
    } else if is_false(&a) {
        b
    } else if is_false(&b) || a == b {
        a
    } else {
        Formula::or(a, b)
    }
}

pub(crate) fn big_and(items: impl IntoIterator<Item = Formula>) -> Formula {
    items.into_iter().fold(truth(), c_and)
}

pub(crate) fn big_or(items: impl IntoIterator<Item = Formula>) -> Formula {
    items.into_iter().fold(falsity(), c_or)
}

fn c_forall(x: &str, body: Formula) -> Formula {
    if matches!(body, Formula::Const(_)) {
        body
    } else {
        Formula::forall(x, body)
    }
}

fn c_exists(x: &str, body: Formula) -> Formula {
    if matches!(body, Formula::Const(_)) {
        body
    } else {
        Formula::exists(x, body)
    }
}

/// `∀^{≠} x1 … xk φ`: `∀x1 … ∀xk (⋀_{i<j} ¬ xi ~ xj → φ)`.
pub fn forall_distinct<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
    let mut diseq = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            diseq.push(Formula::not(Formula::eq(vars[i].as_ref(), vars[j].as_ref())));
        }
    }
    let inner = match Formula::fold(names::AND, diseq) {
        Some(guard) => Formula::imp(guard, body),
        None => body,
    };
    Formula::forall_all(vars, inner)
}

/// `θ ↦ ⟨θ^a⟩_{a ∈ A}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationBundle {
    pub source: Formula,
    labels: Vec<String>,
    parts: Vec<Formula>,
}

impl TranslationBundle {
    pub fn get(&self, a: Elem) -> &Formula {
        &self.parts[a.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Elem, &Formula)> {
        self.parts.iter().enumerate().map(|(i, f)| (Elem(i), f))
    }

    pub fn label(&self, a: Elem) -> &str {
        &self.labels[a.0]
    }
}

impl fmt::Display for TranslationBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, phi) in self.iter() {
            writeln!(f, "{}: {}", self.label(a), phi)?;
        }
        Ok(())
    }
}

/// Nonempty subsets of the carrier as bit masks, grouped by their meet (or
/// join).
fn subsets_by(alg: &LatticeAlgebra, meet: bool) -> Vec<Vec<Vec<Elem>>> {
    let n = alg.size();
    let mut out = vec![Vec::new(); n];
    for mask in 1u32..(1 << n) {
        let set: Vec<Elem> = (0..n).filter(|i| mask & (1 << i) != 0).map(Elem).collect();
        let v = if meet { alg.meet_all(set.iter().copied()) } else { alg.join_all(set.iter().copied()) };
        out[v.expect("nonempty").0].push(set);
    }
    out
}

struct Translator<'a> {
    alg: &'a LatticeAlgebra,
    by_meet: Vec<Vec<Vec<Elem>>>,
    by_join: Vec<Vec<Vec<Elem>>>,
}

impl Translator<'_> {
    fn tr(&self, f: &Formula) -> Result<Vec<Formula>> {
        let alg = self.alg;
        let n = alg.size();
        Ok(match f {
            Formula::Atom { rel, args } => alg
                .labels()
                .iter()
                .map(|l| Formula::Atom { rel: classical_relation(rel, l), args: args.clone() })
                .collect(),
            Formula::Eq(x, y) => {
                let (bottom, top) = (alg.bottom(), alg.top());
                alg.elements()
                    .map(|a| {
                        if Some(a) == top {
                            Formula::eq(x, y)
                        } else if Some(a) == bottom {
                            Formula::not(Formula::eq(x, y))
                        } else {
                            falsity()
                        }
                    })
                    .collect()
            }
            Formula::Const(c) => {
                let e = alg.elem(c).ok_or_else(|| Error::UnknownConstant(c.clone()))?;
                alg.elements().map(|a| if a == e { truth() } else { falsity() }).collect()
            }
            Formula::Apply { op, args } => {
                let table = alg.operation(op).ok_or_else(|| Error::UnknownConnective(op.clone()))?;
                if table.arity() != args.len() {
                    return Err(Error::Arity { name: op.clone(), expected: table.arity(), found: args.len() });
                }
                let children = args.iter().map(|a| self.tr(a)).collect::<Result<Vec<_>>>()?;
                let mut parts = vec![falsity(); n];
                let k = args.len();
                for idx in 0..n.pow(k as u32) {
                    let tuple: Vec<Elem> = cell_tuple(n, k, idx).into_iter().map(Elem).collect();
                    let conj = big_and(tuple.iter().zip(&children).map(|(b, c)| c[b.0].clone()));
                    if is_false(&conj) {
                        continue;
                    }
                    let a = table.apply(n, &tuple);
                    parts[a.0] = c_or(std::mem::replace(&mut parts[a.0], truth()), conj);
                }
                parts
            }
            Formula::Threshold { arg, dir, bound } => {
                let table = alg
                    .threshold_table(*dir == crate::syntax::Direction::Ge, *bound)
                    .ok_or_else(|| Error::Unsupported(format!("{} has no rational values", alg.name())))?;
                let child = self.tr(arg)?;
                let mut parts = vec![falsity(); n];
                for b in alg.elements() {
                    let a = table.apply(n, &[b]);
                    parts[a.0] = c_or(std::mem::replace(&mut parts[a.0], truth()), child[b.0].clone());
                }
                parts
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let forall = matches!(f, Formula::Forall(..));
                let inner = self.tr(body)?;
                let witness: Vec<Formula> = inner.iter().map(|phi| c_exists(x, phi.clone())).collect();
                let groups = if forall { &self.by_meet } else { &self.by_join };
                alg.elements()
                    .map(|a| {
                        let achieved = big_or(
                            groups[a.0].iter().map(|set| big_and(set.iter().map(|b| witness[b.0].clone()))),
                        );
                        let bounded = big_or(
                            alg.elements()
                                .filter(|&b| if forall { alg.leq(a, b) } else { alg.leq(b, a) })
                                .map(|b| inner[b.0].clone()),
                        );
                        c_and(achieved, c_forall(x, bounded))
                    })
                    .collect()
            }
        })
    }
}

/// The multi-translation. Quantifier clauses range over nonempty subsets of
/// the carrier with the given meet (for `∀`) or join (for `∃`).
pub fn translate(theta: &Formula, alg: &LatticeAlgebra) -> Result<TranslationBundle> {
    if alg.size() > 20 {
        return Err(Error::Budget(format!("carrier of size {} is too large to translate", alg.size())));
    }
    let t = Translator { alg, by_meet: subsets_by(alg, true), by_join: subsets_by(alg, false) };
    Ok(TranslationBundle { source: theta.clone(), labels: alg.labels().to_vec(), parts: t.tr(theta)? })
}

/// `M ↦ M_{τ×A}` with `R[a] = {ī : R(ī) = a}`, as a structure over B2.
pub fn transform_model(m: &WeightedStructure) -> Result<WeightedStructure> {
    let alg = m.algebra();
    let b2 = Arc::new(make_boolean());
    let (f, t) = (b2.bottom().expect("bounded"), b2.top().expect("bounded"));
    let vocab = classical_vocabulary(m.vocabulary(), alg);
    let mut tables = Vec::new();
    for table in m.tables() {
        for a in alg.elements() {
            tables.push(table.iter().map(|&v| if v == a { t } else { f }).collect());
        }
    }
    let identity = Some(diagonal(m.n(), &b2)?);
    WeightedStructure::from_tables_unchecked(m.n(), b2, vocab, tables, identity)
}

/// Inverse of [`transform_model`] on structures satisfying the partition
/// axioms.
pub fn inverse_transform(
    c: &WeightedStructure,
    vocab: &Vocabulary,
    alg: Arc<LatticeAlgebra>,
) -> Result<WeightedStructure> {
    let top = c.algebra().top().ok_or_else(|| Error::Internal("classical algebra unbounded".into()))?;
    let n = c.n();
    let mut tables = Vec::new();
    for (rel, arity) in vocab.relations() {
        let cells = n.pow(*arity as u32);
        let mut t = vec![None; cells];
        for a in alg.elements() {
            let name = classical_relation(rel, alg.label(a));
            let ct = c.table(&name).ok_or_else(|| Error::Structure(format!("missing classical relation {name}")))?;
            for (idx, &v) in ct.iter().enumerate() {
                if v == top {
                    if t[idx].is_some() {
                        return Err(Error::Structure(format!("{rel} has two values at cell {idx}")));
                    }
                    t[idx] = Some(a);
                }
            }
        }
        let t = t
            .into_iter()
            .enumerate()
            .map(|(idx, v)| v.ok_or_else(|| Error::Structure(format!("{rel} has no value at cell {idx}"))))
            .collect::<Result<Vec<_>>>()?;
        tables.push(t);
    }
    let identity = if vocab.has_crisp_identity() { Some(diagonal(n, &alg)?) } else { None };
    WeightedStructure::from_tables_unchecked(n, alg, vocab.clone(), tables, identity)
}

/// Coverage and exclusivity for every relation: `2·|τ|` sentences.
pub fn partition_axioms(vocab: &Vocabulary, alg: &LatticeAlgebra) -> Vec<Formula> {
    let mut out = Vec::new();
    for (rel, arity) in vocab.relations() {
        let vars: Vec<String> = (1..=*arity).map(|i| format!("x{i}")).collect();
        let args: Vec<&str> = vars.iter().map(String::as_str).collect();
        let atom = |a: Elem| Formula::atom(&classical_relation(rel, alg.label(a)), &args);
        let cover = Formula::fold(names::OR, alg.elements().map(atom)).expect("nonempty carrier");
        out.push(Formula::forall_all(&vars, cover));
        let mut pairs = Vec::new();
        for a in alg.elements() {
            for b in alg.elements().filter(|&b| b > a) {
                pairs.push(Formula::not(Formula::and(atom(a), atom(b))));
            }
        }
        let excl = Formula::fold(names::AND, pairs).unwrap_or_else(truth);
        out.push(Formula::forall_all(&vars, excl));
    }
    out
}

/// Classical truth in a structure over the two-element algebra.
pub fn classical_evaluate(c: &WeightedStructure, f: &Formula, asg: &BTreeMap<String, usize>) -> Result<bool> {
    if c.algebra().size() != 2 {
        return Err(Error::InvalidArgument(format!("{} is not two-valued", c.algebra().name())));
    }
    Ok(Some(evaluate(c, f, asg)?) == c.algebra().top())
}

/// Outcome of the parametric-shape check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametricVerdict {
    pub parametric: bool,
    pub offending: Option<Formula>,
    pub reason: String,
}

impl ParametricVerdict {
    fn yes() -> Self {
        ParametricVerdict { parametric: true, offending: None, reason: String::new() }
    }

    fn no(offending: Option<Formula>, reason: impl Into<String>) -> Self {
        ParametricVerdict { parametric: false, offending, reason: reason.into() }
    }
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Apply { op, args } if op == names::AND && args.len() == 2 => {
            conjuncts(&args[0], out);
            conjuncts(&args[1], out);
        }
        other => out.push(other.clone()),
    }
}

fn is_diseq(f: &Formula, vars: &[String]) -> bool {
    match f {
        Formula::Apply { op, args } if op == names::NOT && args.len() == 1 => {
            matches!(&args[0], Formula::Eq(x, y) if vars.contains(x) && vars.contains(y))
        }
        _ => false,
    }
}

/// Accepts finite conjunctions of `∀x1…xk φ` or `∀^{≠}x1…xk φ` with `φ`
/// quantifier-free and every non-identity atom using exactly `{x1,…,xk}`.
pub fn check_parametric(sentence: &Formula) -> ParametricVerdict {
    if !sentence.is_sentence() {
        return ParametricVerdict::no(None, "not a sentence");
    }
    let mut parts = Vec::new();
    conjuncts(sentence, &mut parts);
    for part in parts {
        let mut vars = Vec::new();
        let mut body = &part;
        while let Formula::Forall(x, b) = body {
            vars.push(x.clone());
            body = b;
        }
        if let Formula::Apply { op, args } = body {
            if op == names::IMP && args.len() == 2 {
                let mut guard = Vec::new();
                conjuncts(&args[0], &mut guard);
                if guard.iter().all(|g| is_diseq(g, &vars)) {
                    body = &args[1];
                }
            }
        }
        if !body.is_quantifier_free() {
            return ParametricVerdict::no(Some(part.clone()), "matrix is not quantifier-free");
        }
        let mut offending = None;
        body.visit(&mut |g| {
            if let Formula::Atom { args, .. } = g {
                let covers = vars.iter().all(|v| args.contains(v));
                if !covers && offending.is_none() {
                    offending = Some(g.clone());
                }
            }
        });
        if let Some(atom) = offending {
            let reason = format!("atom {atom} does not contain all of {}", vars.join(", "));
            return ParametricVerdict::no(Some(atom), reason);
        }
    }
    ParametricVerdict::yes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::semantics::make_structure;
    use crate::syntax::{parse_formula, parse_sentence};

    #[test]
    fn negation_in_l3() {
        let a = builtin("L3").unwrap();
        let f = parse_formula("not P(x)", &Vocabulary::unary("P"), &a.signature()).unwrap();
        let b = translate(&f, &a).unwrap();
        assert_eq!(b.get(a.elem("1/2").unwrap()).to_string(), "P[1/2](x)");
        assert_eq!(b.get(a.elem("0").unwrap()).to_string(), "P[1](x)");
        assert_eq!(b.get(a.elem("1").unwrap()).to_string(), "P[0](x)");
    }

    #[test]
    fn universal_clause_shape() {
        let a = builtin("L3").unwrap();
        let f = parse_sentence("forall x. P(x)", &Vocabulary::unary("P"), &a.signature()).unwrap();
        let b = translate(&f, &a).unwrap();
        let half = b.get(a.elem("1/2").unwrap()).to_string();
        assert!(half.ends_with("& (forall x. P[1/2](x) | P[1](x))"), "{half}");
        assert!(half.contains("exists x. P[1/2](x)"));
    }

    #[test]
    fn transform_and_invert() {
        let a = Arc::new(builtin("L3").unwrap());
        let v = Vocabulary::unary("P");
        let m = make_structure(1, a.clone(), &v, BTreeMap::from([("P".into(), vec![Elem(1)])]), &ConstraintProfile::none())
            .unwrap();
        let c = transform_model(&m).unwrap();
        assert_eq!(c.table("P[1/2]").unwrap(), &[Elem(1)]);
        assert_eq!(c.table("P[0]").unwrap(), &[Elem(0)]);
        assert_eq!(c.table("P[1]").unwrap(), &[Elem(0)]);
        assert_eq!(inverse_transform(&c, &v, a).unwrap(), m);
    }

    #[test]
    fn partition_axiom_shapes() {
        let a = builtin("L3").unwrap();
        let ax = partition_axioms(&Vocabulary::unary("R"), &a);
        assert_eq!(ax.len(), 2);
        assert_eq!(ax[0].to_string(), "forall x1. R[0](x1) | R[1/2](x1) | R[1](x1)");
        let mut parts = Vec::new();
        if let Formula::Forall(_, body) = &ax[1] {
            conjuncts(body, &mut parts);
        }
        assert_eq!(parts.len(), 3);
    }

    #[test]
    fn graph_axioms_and_parametric_examples() {
        let a = builtin("B2").unwrap();
        let v = Vocabulary::new([("R", 2)], false).unwrap();
        let ax = ConstraintProfile::graph().axioms(&v, &a);
        assert_eq!(ax[0].to_string(), "forall x. R[0](x, x)");
        assert!(ax.iter().all(|s| check_parametric(s).parametric));

        let cv = classical_vocabulary(&v, &a).with_crisp_identity(true);
        let sig = a.signature();
        let ok = parse_sentence(
            "(forall x. not R[1](x,x)) & (forall x, y. not x ~ y -> (R[1](x,y) -> R[1](y,x)))",
            &cv,
            &sig,
        )
        .unwrap();
        assert!(check_parametric(&ok).parametric);
        let trans = parse_sentence(
            "forall x, y, z. not x ~ y & not x ~ z & not y ~ z -> (R[1](x,y) & R[1](y,z) -> R[1](x,z))",
            &cv,
            &sig,
        )
        .unwrap();
        let verdict = check_parametric(&trans);
        assert!(!verdict.parametric);
        assert_eq!(verdict.offending.unwrap().to_string(), "R[1](x, y)");
        let k1 = parse_sentence("forall x. R[1](x,x) | not R[0](x,x)", &cv, &sig).unwrap();
        assert!(check_parametric(&k1).parametric);
    }

    #[test]
    fn classical_truth_tables() {
        let b2 = Arc::new(builtin("B2").unwrap());
        let v = Vocabulary::unary("P");
        let m = make_structure(2, b2, &v, BTreeMap::from([("P".into(), vec![Elem(0), Elem(1)])]), &ConstraintProfile::none())
            .unwrap();
        let sig = m.algebra().signature();
        let t = |s: &str| classical_evaluate(&m, &parse_sentence(s, &v, &sig).unwrap(), &BTreeMap::new()).unwrap();
        assert!(t("exists x. P(x)"));
        assert!(!t("forall x. P(x)"));
        assert!(t("forall x. P(x) -> P(x)"));
    }
}
