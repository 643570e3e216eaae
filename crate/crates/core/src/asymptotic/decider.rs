use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::{CompleteDescription, ExpansionPlan};
use crate::algebra::{Elem, LatticeAlgebra};
use crate::budget::Budget;
use crate::compiled::{Compiled, Node, NodeId, Resolved};
use crate::error::{Error, Result};
use crate::semantics::cell_index;
use crate::syntax::{Formula, Vocabulary};
use crate::translator::ConstraintProfile;

/// Values seen at one quantifier node during an explained run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantifierTrace {
    pub formula: String,
    pub evaluations: usize,
    /// Union of the achieved-value sets over all evaluations.
    pub achieved: BTreeSet<Elem>,
    /// Values the node itself returned.
    pub results: BTreeSet<Elem>,
}

/// The complete-description decision procedure.
///
/// A quantifier over a description `Δ` of `k` elements ranges over the `k`
/// elements themselves and over every profile-consistent expansion of `Δ`
/// by a fresh element; its value is the meet (or join) of what the body
/// takes there. Before that, `Δ` is cut down to the elements named by the
/// quantified formula's free variables, which makes results reusable.
pub struct Decider<'a> {
    alg: &'a LatticeAlgebra,
    vocab: &'a Vocabulary,
    profile: &'a ConstraintProfile,
    budget: Budget,
    memo: bool,
}

impl<'a> Decider<'a> {
    pub fn new(alg: &'a LatticeAlgebra, vocab: &'a Vocabulary, profile: &'a ConstraintProfile) -> Result<Self> {
        profile.validate(vocab, alg)?;
        Ok(Decider { alg, vocab, profile, budget: Budget::default(), memo: true })
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    /// Disables the memo table: every quantifier re-enumerates.
    pub fn with_memo(mut self, on: bool) -> Self {
        self.memo = on;
        self
    }

    fn check_budget(&self, f: &Formula) -> Result<()> {
        let b = &self.budget;
        if self.alg.size() > b.max_carrier {
            return Err(Error::Budget(format!("carrier size {} exceeds {}", self.alg.size(), b.max_carrier)));
        }
        if self.vocab.max_arity() > b.max_arity {
            return Err(Error::Budget(format!("arity {} exceeds {}", self.vocab.max_arity(), b.max_arity)));
        }
        let depth = f.quantifier_depth();
        if depth > b.max_quantifier_depth {
            return Err(Error::Budget(format!("quantifier depth {depth} exceeds {}", b.max_quantifier_depth)));
        }
        Ok(())
    }

    fn run(
        &self,
        f: &Formula,
        d: &CompleteDescription,
        asg: &BTreeMap<String, usize>,
        explain: bool,
    ) -> Result<(Elem, Vec<QuantifierTrace>)> {
        self.check_budget(f)?;
        if d.tables.len() != self.vocab.relations().len() {
            return Err(Error::InvalidArgument("description does not match the vocabulary".into()));
        }
        let compiled = Compiled::new(f, self.vocab)?;
        let resolved = Resolved::new(&compiled, self.alg)?;
        let mut env = vec![0; compiled.slots];
        for (i, v) in compiled.free.iter().enumerate() {
            let p = *asg.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            if p >= d.k {
                return Err(Error::InvalidArgument(format!("{v} is mapped to element {p} of {}", d.k)));
            }
            env[i] = p;
        }
        let mut texts = HashMap::new();
        if explain {
            collect_quantifier_texts(f, &compiled, &mut texts);
        }
        let mut run = Run {
            dec: self,
            compiled: &compiled,
            resolved: &resolved,
            plans: Vec::new(),
            memo: HashMap::new(),
            explain,
            traces: BTreeMap::new(),
            texts,
        };
        let v = run.eval(compiled.root, d, &mut env)?;
        let mut order = Vec::new();
        preorder_quantifiers(&compiled, compiled.root, &mut order);
        let traces = order.into_iter().filter_map(|id| run.traces.remove(&id)).collect();
        Ok((v, traces))
    }

    /// The unique `a` with `Ext + Δ ⊢ φ^a`, with free variables of `φ`
    /// mapped to elements of `Δ`.
    pub fn generic_value(&self, f: &Formula, d: &CompleteDescription, asg: &BTreeMap<String, usize>) -> Result<Elem> {
        Ok(self.run(f, d, asg, false)?.0)
    }

    pub fn almost_sure_value(&self, sentence: &Formula) -> Result<Elem> {
        if let Some(v) = sentence.free_variables().into_iter().next() {
            return Err(Error::FreeVariable(v));
        }
        self.generic_value(sentence, &CompleteDescription::empty(self.vocab), &BTreeMap::new())
    }

    /// The value together with the achieved sets at each quantifier. Early
    /// exits are disabled so the sets are complete.
    pub fn explain(&self, sentence: &Formula) -> Result<(Elem, Vec<QuantifierTrace>)> {
        if let Some(v) = sentence.free_variables().into_iter().next() {
            return Err(Error::FreeVariable(v));
        }
        self.run(sentence, &CompleteDescription::empty(self.vocab), &BTreeMap::new(), true)
    }
}

fn collect_quantifier_texts(f: &Formula, c: &Compiled, out: &mut HashMap<NodeId, String>) {
    let mut quants = Vec::new();
    f.visit(&mut |g| {
        if matches!(g, Formula::Forall(..) | Formula::Exists(..)) {
            quants.push(g.to_string());
        }
    });
    let mut ids = Vec::new();
    preorder_quantifiers(c, c.root, &mut ids);
    out.extend(ids.into_iter().zip(quants));
}

fn preorder_quantifiers(c: &Compiled, id: NodeId, out: &mut Vec<NodeId>) {
    match &c.nodes[id] {
        Node::Quant { body, .. } => {
            out.push(id);
            preorder_quantifiers(c, *body, out);
        }
        Node::Op { args, .. } => args.iter().for_each(|&a| preorder_quantifiers(c, a, out)),
        Node::Threshold { arg, .. } => preorder_quantifiers(c, *arg, out),
        _ => {}
    }
}

/// Shortcut for the unconstrained case with default budgets.
pub fn almost_sure_value(sentence: &Formula, vocab: &Vocabulary, alg: &LatticeAlgebra, profile: &ConstraintProfile) -> Result<Elem> {
    Decider::new(alg, vocab, profile)?.almost_sure_value(sentence)
}

struct Run<'r, 'a> {
    dec: &'r Decider<'a>,
    compiled: &'r Compiled,
    resolved: &'r Resolved<'r>,
    plans: Vec<Option<Rc<ExpansionPlan<'a>>>>,
    memo: HashMap<(NodeId, Vec<u16>), Elem>,
    explain: bool,
    traces: BTreeMap<NodeId, QuantifierTrace>,
    texts: HashMap<NodeId, String>,
}

impl<'a> Run<'_, 'a> {
    fn plan(&mut self, k: usize) -> Result<Rc<ExpansionPlan<'a>>> {
        if self.plans.len() <= k {
            self.plans.resize(k + 1, None);
        }
        if let Some(p) = &self.plans[k] {
            return Ok(p.clone());
        }
        let d = self.dec;
        let p = Rc::new(ExpansionPlan::new(k, d.vocab, d.alg, d.profile, d.budget.max_expansions)?);
        self.plans[k] = Some(p.clone());
        Ok(p)
    }

    fn eval(&mut self, id: NodeId, d: &CompleteDescription, env: &mut [usize]) -> Result<Elem> {
        let r = self.resolved;
        let n = r.alg.size();
        Ok(match &self.compiled.nodes[id] {
            Node::Atom { rel, slots } => d.tables[*rel][cell_index(d.k, slots.iter().map(|&s| env[s]))],
            Node::Eq(a, b) => {
                if env[*a] == env[*b] {
                    r.top
                } else {
                    r.bottom
                }
            }
            Node::Const(c) => r.consts[*c],
            Node::Op { op, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for &a in args {
                    vals.push(self.eval(a, d, env)?);
                }
                r.ops[*op].apply(n, &vals)
            }
            Node::Threshold { arg, .. } => {
                let x = self.eval(*arg, d, env)?;
                r.thresholds[id].as_ref().expect("resolved").apply(n, &[x])
            }
            Node::Quant { forall, slot, body, free } => self.quant(id, *forall, *slot, *body, free, d, env)?,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn quant(
        &mut self,
        id: NodeId,
        forall: bool,
        slot: usize,
        body: NodeId,
        free: &[usize],
        d: &CompleteDescription,
        env: &[usize],
    ) -> Result<Elem> {
        let mut positions: Vec<usize> = Vec::new();
        let mut pattern = Vec::with_capacity(free.len());
        for &s in free {
            let p = env[s];
            let i = match positions.iter().position(|&q| q == p) {
                Some(i) => i,
                None => {
                    positions.push(p);
                    positions.len() - 1
                }
            };
            pattern.push(i);
        }
        let restricted;
        let dr = if positions.len() == d.k && positions.iter().enumerate().all(|(i, &p)| i == p) {
            d
        } else {
            restricted = d.restrict(&positions, self.dec.vocab);
            &restricted
        };
        let use_memo = self.dec.memo && !self.explain;
        let key = if use_memo {
            let mut k: Vec<u16> = pattern.iter().map(|&p| p as u16).collect();
            k.push(u16::MAX);
            for t in &dr.tables {
                k.extend(t.iter().map(|e| e.0 as u16));
            }
            let key = (id, k);
            if let Some(&v) = self.memo.get(&key) {
                return Ok(v);
            }
            Some(key)
        } else {
            None
        };

        let r = self.resolved;
        let (stop, mut acc) = if forall { (r.bottom, r.top) } else { (r.top, r.bottom) };
        let mut achieved = BTreeSet::new();
        let mut env2 = env.to_vec();
        for (s, &i) in free.iter().zip(&pattern) {
            env2[*s] = i;
        }
        let m = dr.k;
        let mut done = false;
        for j in 0..m {
            env2[slot] = j;
            let v = self.eval(body, dr, &mut env2)?;
            achieved.insert(v);
            acc = if forall { r.alg.meet(acc, v) } else { r.alg.join(acc, v) };
            if acc == stop && !self.explain {
                done = true;
                break;
            }
        }
        if !done {
            let plan = self.plan(m)?;
            let mut failure = None;
            let mut seen = 0u64;
            let explain = self.explain;
            plan.for_each(dr, |e| {
                seen += 1;
                env2[slot] = m;
                match self.eval(body, e, &mut env2) {
                    Ok(v) => {
                        achieved.insert(v);
                        acc = if forall { r.alg.meet(acc, v) } else { r.alg.join(acc, v) };
                        explain || acc != stop
                    }
                    Err(err) => {
                        failure = Some(err);
                        false
                    }
                }
            })?;
            if let Some(err) = failure {
                return Err(err);
            }
            if seen == 0 {
                return Err(Error::Profile(format!(
                    "no expansion of a {m}-element description satisfies the profile"
                )));
            }
        }
        if self.explain {
            let text = self.texts.get(&id).cloned().unwrap_or_default();
            let t = self.traces.entry(id).or_insert_with(|| QuantifierTrace {
                formula: text,
                evaluations: 0,
                achieved: BTreeSet::new(),
                results: BTreeSet::new(),
            });
            t.evaluations += 1;
            t.achieved.extend(achieved);
            t.results.insert(acc);
        }
        if let Some(key) = key {
            if self.memo.len() < self.dec.budget.memo_capacity {
                self.memo.insert(key, acc);
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::syntax::parse_sentence;

    fn value(alg: &str, vocab: &Vocabulary, profile: &ConstraintProfile, s: &str) -> String {
        let a = builtin(alg).unwrap();
        let f = parse_sentence(s, vocab, &a.signature()).unwrap();
        let v = almost_sure_value(&f, vocab, &a, profile).unwrap();
        a.label(v).to_string()
    }

    #[test]
    fn spec_examples() {
        let p = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        assert_eq!(value("L3", &p, &none, "forall x. (P(x) | not P(x))"), "1/2");
        assert_eq!(value("B2", &p, &none, "exists x. P(x)"), "1");
        assert_eq!(value("L4", &p, &none, "forall x. oplus(pow(P(x),3), not P(x))"), "1/3");
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        assert_eq!(value("B2", &r, &none, "forall x. exists y. R(x,y)"), "1");
        assert_eq!(value("G3", &p, &none, "forall x. (P(x) | not P(x))"), "g1");
        let pc = p.clone().with_crisp_identity(true);
        assert_eq!(value("L3", &pc, &ConstraintProfile::crisp_identity(), "forall x. x ~ x"), "1");
    }

    #[test]
    fn identification_counts() {
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        let none = ConstraintProfile::none();
        assert_eq!(value("B2", &r, &none, "forall x. exists y. R(x,y) & R(y,x) & not R(y,y)"), "1");
        assert_eq!(value("B2", &r, &none, "forall x. R(x,x)"), "0");
        assert_eq!(value("L3", &r, &none, "exists x. forall y. R(x,y)"), "0");
        let g = ConstraintProfile::graph();
        assert_eq!(value("L3", &r, &g, "exists x. R(x,x)"), "0");
        assert_eq!(value("L3", &r, &g, "forall x. forall y. (R(x,y) -> R(y,x))"), "1");
    }

    #[test]
    fn support_restriction_changes_value() {
        let p = Vocabulary::unary("P");
        let prof = ConstraintProfile::none().with_forbidden("P", ["1/2"]);
        assert_eq!(value("L3", &p, &prof, "forall x. (P(x) | not P(x))"), "1");
    }

    #[test]
    fn memo_and_explain_agree() {
        let a = builtin("L3").unwrap();
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        let none = ConstraintProfile::none();
        let f = parse_sentence("forall x. exists y. (R(x,y) & not R(y,x)) | forall z. R(z,x)", &r, &a.signature()).unwrap();
        let with = Decider::new(&a, &r, &none).unwrap().almost_sure_value(&f).unwrap();
        let without = Decider::new(&a, &r, &none).unwrap().with_memo(false).almost_sure_value(&f).unwrap();
        assert_eq!(with, without);
        let (v, traces) = Decider::new(&a, &r, &none).unwrap().explain(&f).unwrap();
        assert_eq!(v, with);
        assert_eq!(traces.len(), 3);
        assert!(traces[0].formula.starts_with("forall x."));
    }

    #[test]
    fn budget_guards() {
        let a = builtin("B2").unwrap();
        let p = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        let f = parse_sentence("forall a. forall b. forall c. forall d. forall e. P(a)", &p, &a.signature()).unwrap();
        assert!(matches!(almost_sure_value(&f, &p, &a, &none), Err(Error::Budget(_))));
        let r = Vocabulary::new([("R", 3)], false).unwrap();
        let f = parse_sentence("exists x. exists y. exists z. R(x,y,z) & not R(x,y,z)", &r, &a.signature()).unwrap();
        let tight = Budget { max_expansions: 1000, ..Budget::default() };
        let d = Decider::new(&a, &r, &none).unwrap().with_budget(tight);
        assert!(matches!(d.almost_sure_value(&f), Err(Error::Budget(_))));
    }
}
