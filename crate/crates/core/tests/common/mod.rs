//! Random formulas and structures shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use mvzero::algebra::builtin;
use mvzero::semantics::{make_structure, WeightedStructure};
use mvzero::translator::ConstraintProfile;
use mvzero::{Elem, Formula, LatticeAlgebra, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alg(name: &str) -> Arc<LatticeAlgebra> {
    Arc::new(builtin(name).unwrap())
}

/// Formula generator over a fixed vocabulary and connective set.
pub struct FormulaGen<'a> {
    pub vocab: &'a Vocabulary,
    pub ops: Vec<(&'static str, usize)>,
    pub constants: Vec<String>,
    /// Chance that a leaf is a constant when constants are available.
    pub constant_rate: f64,
    pub quantifier_rate: f64,
}

impl<'a> FormulaGen<'a> {
    pub fn new(vocab: &'a Vocabulary, ops: &[(&'static str, usize)]) -> Self {
        FormulaGen { vocab, ops: ops.to_vec(), constants: Vec::new(), constant_rate: 0.1, quantifier_rate: 0.3 }
    }

    pub fn with_constants(mut self, alg: &LatticeAlgebra) -> Self {
        self.constants = alg.labels().to_vec();
        self
    }

    fn leaf(&self, rng: &mut TestRng, scope: &[String]) -> Formula {
        if scope.is_empty() || (!self.constants.is_empty() && rng.gen_bool(self.constant_rate)) {
            if self.constants.is_empty() {
                // No variable and no constant: fall back to a closed atom.
                let (rel, arity) = self.vocab.relations().choose(rng).unwrap().clone();
                let args = vec!["z".to_string(); arity];
                return Formula::exists("z", Formula::Atom { rel, args });
            }
            return Formula::constant(self.constants.choose(rng).unwrap());
        }
        let (rel, arity) = self.vocab.relations().choose(rng).unwrap().clone();
        let args = (0..arity).map(|_| scope.choose(rng).unwrap().clone()).collect();
        Formula::Atom { rel, args }
    }

    /// A formula of nesting depth at most `depth` over the variables in
    /// `scope`. Bound variables are drawn from `names`, sometimes shadowing.
    pub fn formula(&self, rng: &mut TestRng, depth: usize, scope: &mut Vec<String>) -> Formula {
        if depth == 0 {
            return self.leaf(rng, scope);
        }
        if rng.gen_bool(self.quantifier_rate) || scope.is_empty() {
            let names = ["x", "y", "z", "u"];
            let v = names[rng.gen_range(0..names.len())].to_string();
            scope.push(v.clone());
            let body = self.formula(rng, depth - 1, scope);
            scope.pop();
            return if rng.gen_bool(0.5) { Formula::forall(&v, body) } else { Formula::exists(&v, body) };
        }
        if rng.gen_bool(0.15) {
            return self.leaf(rng, scope);
        }
        let (op, arity) = *self.ops.choose(rng).unwrap();
        let args = (0..arity).map(|_| self.formula(rng, depth - 1, scope)).collect();
        Formula::apply(op, args)
    }

    pub fn sentence(&self, rng: &mut TestRng, depth: usize) -> Formula {
        self.formula(rng, depth, &mut Vec::new())
    }
}

pub const LUK_OPS: &[(&str, usize)] = &[("and", 2), ("or", 2), ("not", 1), ("imp", 2), ("oplus", 2), ("odot", 2)];
pub const LATTICE_NEG_OPS: &[(&str, usize)] = &[("and", 2), ("or", 2), ("not", 1)];

pub fn random_structure(rng: &mut TestRng, n: usize, alg: &Arc<LatticeAlgebra>, vocab: &Vocabulary) -> WeightedStructure {
    let mut tables = std::collections::BTreeMap::new();
    for (name, arity) in vocab.relations() {
        let t = (0..n.pow(*arity as u32)).map(|_| Elem(rng.gen_range(0..alg.size()))).collect();
        tables.insert(name.clone(), t);
    }
    make_structure(n, alg.clone(), vocab, tables, &ConstraintProfile::none()).unwrap()
}

/// Every structure on `n` elements, in odometer order.
pub fn all_structures(n: usize, alg: &Arc<LatticeAlgebra>, vocab: &Vocabulary) -> Vec<WeightedStructure> {
    let cells: Vec<usize> = vocab.relations().iter().map(|(_, a)| n.pow(*a as u32)).collect();
    let total: usize = cells.iter().sum();
    let count = alg.size().pow(total as u32);
    (0..count)
        .map(|mut code| {
            let mut tables = std::collections::BTreeMap::new();
            for ((name, _), &c) in vocab.relations().iter().zip(&cells) {
                let t = (0..c)
                    .map(|_| {
                        let e = Elem(code % alg.size());
                        code /= alg.size();
                        e
                    })
                    .collect();
                tables.insert(name.clone(), t);
            }
            make_structure(n, alg.clone(), vocab, tables, &ConstraintProfile::none()).unwrap()
        })
        .collect()
}

/// `ε, ε', δ, δ'` by scanning the carrier directly.
pub fn demorgan_brute_force(a: &LatticeAlgebra) -> [Elem; 4] {
    let not = |x| a.apply("not", &[x]).unwrap();
    let bottom = a.bottom().unwrap();
    let top = a.top().unwrap();
    let (mut eps, mut eps2, mut del, mut del2) = (bottom, bottom, top, top);
    for x in a.elements() {
        eps = a.join(eps, a.meet(x, not(x)));
        eps2 = a.join(eps2, a.meet(not(x), not(not(x))));
        del = a.meet(del, a.join(x, not(x)));
        del2 = a.meet(del2, a.join(not(x), not(not(x))));
    }
    [eps, eps2, del, del2]
}

/// A random term over `v1 … v{vars}` with nesting depth at most `depth`.
pub fn random_term(rng: &mut TestRng, ops: &[(&'static str, usize)], vars: usize, depth: usize) -> mvzero::Term {
    use mvzero::Term;
    if depth == 0 || rng.gen_bool(0.2) {
        return Term::Var(rng.gen_range(0..vars));
    }
    let (op, arity) = *ops.choose(rng).unwrap();
    Term::apply(op, (0..arity).map(|_| random_term(rng, ops, vars, depth - 1)).collect())
}

/// Reference `[0,1]` semantics of the continuum connectives.
pub fn interval_op(op: &str, a: &[f64]) -> Option<f64> {
    Some(match (op, a) {
        ("and", [x, y]) => x.min(*y),
        ("or", [x, y]) => x.max(*y),
        ("not", [x]) => 1.0 - x,
        ("imp", [x, y]) => (1.0 - x + y).min(1.0),
        ("oplus", [x, y]) => (x + y).min(1.0),
        ("odot", [x, y]) => (x + y - 1.0).max(0.0),
        ("mul", [x, y]) => x * y,
        _ => return None,
    })
}

pub const GODEL_OPS: &[(&str, usize)] = &[("and", 2), ("or", 2), ("not", 1), ("imp", 2)];

/// The connectives generated for a builtin chain.
pub fn ops_for(name: &str) -> &'static [(&'static str, usize)] {
    if name.starts_with('G') {
        GODEL_OPS
    } else {
        LUK_OPS
    }
}
