use std::collections::BTreeMap;

use super::WeightedStructure;
use crate::algebra::{Elem, LatticeAlgebra};
use crate::compiled::{Compiled, Node, NodeId, Resolved};
use crate::error::{Error, Result};
use crate::syntax::{Formula, Vocabulary};

/// A formula prepared for repeated evaluation over structures sharing one
/// algebra and vocabulary.
pub struct Evaluator<'a> {
    compiled: Compiled,
    resolved: Resolved<'a>,
    unary_only: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(f: &Formula, vocab: &Vocabulary, alg: &'a LatticeAlgebra) -> Result<Self> {
        let compiled = Compiled::new(f, vocab)?;
        let resolved = Resolved::new(&compiled, alg)?;
        let unary_only = vocab.is_unary() && !compiled.has_identity();
        Ok(Evaluator { compiled, resolved, unary_only })
    }

    /// Free variables, in the order expected by [`Evaluator::eval_slots`].
    pub fn free_variables(&self) -> &[String] {
        &self.compiled.free
    }

    /// Evaluates with the free variables bound to 0-based domain elements.
    pub fn eval_slots(&self, m: &WeightedStructure, free: &[usize]) -> Result<Elem> {
        if free.len() != self.compiled.free.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} free variable value(s), got {}",
                self.compiled.free.len(),
                free.len()
            )));
        }
        if let Some(&d) = free.iter().find(|&&d| d >= m.n) {
            return Err(Error::InvalidArgument(format!("element {d} is outside the domain")));
        }
        if m.algebra() != self.resolved.alg {
            return Err(Error::SignatureMismatch("structure and formula use different algebras".into()));
        }
        let domain = if self.unary_only { colour_representatives(m) } else { (0..m.n).collect() };
        let mut env = vec![0; self.compiled.slots];
        env[..free.len()].copy_from_slice(free);
        Ok(self.eval(m, self.compiled.root, &mut env, &domain))
    }

    pub fn eval_sentence(&self, m: &WeightedStructure) -> Result<Elem> {
        match self.compiled.free.first() {
            Some(v) => Err(Error::UnboundVariable(v.clone())),
            None => self.eval_slots(m, &[]),
        }
    }

    fn eval(&self, m: &WeightedStructure, id: NodeId, env: &mut [usize], domain: &[usize]) -> Elem {
        let r = &self.resolved;
        match &self.compiled.nodes[id] {
            Node::Atom { rel, slots } => m.tables[*rel][slots.iter().fold(0, |acc, &s| acc * m.n + env[s])],
            Node::Eq(a, b) => match &m.identity {
                Some(t) => t[env[*a] * m.n + env[*b]],
                None if env[*a] == env[*b] => r.top,
                None => r.bottom,
            },
            Node::Const(c) => r.consts[*c],
            Node::Op { op, args } => {
                let table = r.ops[*op];
                match args.as_slice() {
                    [a] => {
                        let x = self.eval(m, *a, env, domain);
                        table.apply(r.alg.size(), &[x])
                    }
                    [a, b] => {
                        let x = self.eval(m, *a, env, domain);
                        let y = self.eval(m, *b, env, domain);
                        table.apply(r.alg.size(), &[x, y])
                    }
                    _ => {
                        let vals: Vec<Elem> = args.iter().map(|&a| self.eval(m, a, env, domain)).collect();
                        table.apply(r.alg.size(), &vals)
                    }
                }
            }
            Node::Threshold { arg, .. } => {
                let x = self.eval(m, *arg, env, domain);
                r.thresholds[id].as_ref().expect("resolved").apply(r.alg.size(), &[x])
            }
            Node::Quant { forall, slot, body, .. } => {
                let (stop, mut acc) = if *forall { (r.bottom, r.top) } else { (r.top, r.bottom) };
                for &d in domain {
                    env[*slot] = d;
                    let v = self.eval(m, *body, env, domain);
                    acc = if *forall { r.alg.meet(acc, v) } else { r.alg.join(acc, v) };
                    if acc == stop {
                        break;
                    }
                }
                acc
            }
        }
    }
}

/// One element per class of elements with identical unary colours. Without
/// identity atoms such elements are indistinguishable, so quantifiers may
/// range over the representatives only.
fn colour_representatives(m: &WeightedStructure) -> Vec<usize> {
    let mut seen: BTreeMap<Vec<Elem>, usize> = BTreeMap::new();
    for d in 0..m.n {
        let colour: Vec<Elem> = m.tables.iter().map(|t| t[d]).collect();
        seen.entry(colour).or_insert(d);
    }
    let mut reps: Vec<usize> = seen.into_values().collect();
    reps.sort_unstable();
    reps
}

/// `||φ||^M(asg)` with a 0-based assignment of the free variables.
pub fn evaluate(m: &WeightedStructure, f: &Formula, asg: &BTreeMap<String, usize>) -> Result<Elem> {
    let ev = Evaluator::new(f, m.vocabulary(), m.algebra())?;
    let free = ev
        .free_variables()
        .iter()
        .map(|v| asg.get(v).copied().ok_or_else(|| Error::UnboundVariable(v.clone())))
        .collect::<Result<Vec<_>>>()?;
    ev.eval_slots(m, &free)
}

pub fn evaluate_sentence(m: &WeightedStructure, f: &Formula) -> Result<Elem> {
    evaluate(m, f, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::builtin;
    use crate::semantics::make_structure;
    use crate::syntax::parse_sentence;
    use crate::translator::ConstraintProfile;

    fn unary(alg: &str, values: &[&str]) -> WeightedStructure {
        let a = Arc::new(builtin(alg).unwrap());
        let t = values.iter().map(|l| a.elem(l).unwrap()).collect();
        make_structure(values.len(), a, &Vocabulary::unary("P"), BTreeMap::from([("P".into(), t)]), &ConstraintProfile::none())
            .unwrap()
    }

    fn value(m: &WeightedStructure, s: &str) -> String {
        let f = parse_sentence(s, m.vocabulary(), &m.algebra().signature()).unwrap();
        m.algebra().label(evaluate_sentence(m, &f).unwrap()).to_string()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(value(&unary("B2", &["0", "1"]), "exists x. P(x)"), "1");
        assert_eq!(value(&unary("L3", &["1/2", "1"]), "forall x. (P(x) | not P(x))"), "1/2");
        assert_eq!(value(&unary("L4", &["2/3"]), "forall x. oplus(pow(P(x),3), not P(x))"), "1/3");
    }

    #[test]
    fn free_variables_need_assignment() {
        let m = unary("L3", &["0", "1"]);
        let f = crate::syntax::parse_formula("P(x)", m.vocabulary(), &m.algebra().signature()).unwrap();
        assert!(matches!(evaluate(&m, &f, &BTreeMap::new()), Err(Error::UnboundVariable(_))));
        let v = evaluate(&m, &f, &BTreeMap::from([("x".into(), 1)])).unwrap();
        assert_eq!(m.algebra().label(v), "1");
    }

    #[test]
    fn identity_is_resolved_from_the_diagonal() {
        let a = Arc::new(builtin("L3").unwrap());
        let v = Vocabulary::unary("P").with_crisp_identity(true);
        let m = make_structure(3, a, &v, BTreeMap::from([("P".into(), vec![Elem(1); 3])]), &ConstraintProfile::none())
            .unwrap();
        assert_eq!(value(&m, "forall x. x ~ x"), "1");
        assert_eq!(value(&m, "forall x. exists y. not x ~ y"), "1");
    }
}
