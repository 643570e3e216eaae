use std::collections::BTreeSet;

use super::{Elem, LatticeAlgebra};
use crate::error::{Error, Result};

/// Verdict for one law, with a counterexample when it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Law {
    pub name: &'static str,
    pub holds: bool,
    pub witness: Option<Vec<Elem>>,
}

impl Law {
    fn check(name: &'static str, witness: Option<Vec<Elem>>) -> Self {
        Law { name, holds: witness.is_none(), witness }
    }
}

/// `ε = sup(x ∧ ¬x)`, `ε' = sup(¬x ∧ ¬¬x)`, `δ = inf(x ∨ ¬x)`, `δ' = inf(¬x ∨ ¬¬x)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DeMorganConstants {
    pub eps: Elem,
    pub eps_prime: Elem,
    pub delta: Elem,
    pub delta_prime: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeMorganReport {
    /// The lattice must be distributive for the normal forms to exist.
    pub distributive: Law,
    /// Negation swaps meet and join; `v ≤ ¬¬v`; `¬1 = 0`.
    pub conditions: Vec<Law>,
    /// Consequences of the conditions, checked independently.
    pub derived: Vec<Law>,
    pub constants: Option<DeMorganConstants>,
}

impl DeMorganReport {
    pub fn passes(&self) -> bool {
        self.distributive.holds && self.conditions.iter().all(|l| l.holds)
    }

    pub fn failures(&self) -> Vec<&Law> {
        std::iter::once(&self.distributive)
            .chain(&self.conditions)
            .filter(|l| !l.holds)
            .collect()
    }
}

fn find1(alg: &LatticeAlgebra, bad: impl Fn(Elem) -> bool) -> Option<Vec<Elem>> {
    alg.elements().find(|&a| bad(a)).map(|a| vec![a])
}

fn find2(alg: &LatticeAlgebra, bad: impl Fn(Elem, Elem) -> bool) -> Option<Vec<Elem>> {
    for a in alg.elements() {
        for b in alg.elements() {
            if bad(a, b) {
                return Some(vec![a, b]);
            }
        }
    }
    None
}

fn compute_constants(alg: &LatticeAlgebra, neg: impl Fn(Elem) -> Elem) -> DeMorganConstants {
    let sup = |f: &dyn Fn(Elem) -> Elem| alg.join_all(alg.elements().map(f)).unwrap();
    let inf = |f: &dyn Fn(Elem) -> Elem| alg.meet_all(alg.elements().map(f)).unwrap();
    DeMorganConstants {
        eps: sup(&|x| alg.meet(x, neg(x))),
        eps_prime: sup(&|x| alg.meet(neg(x), neg(neg(x)))),
        delta: inf(&|x| alg.join(x, neg(x))),
        delta_prime: inf(&|x| alg.join(neg(x), neg(neg(x)))),
    }
}

/// Checks the De Morgan-style conditions on `¬` and the derived laws.
pub fn demorgan_check(alg: &LatticeAlgebra) -> Result<DeMorganReport> {
    let not = alg
        .operation("not")
        .filter(|op| op.arity() == 1)
        .ok_or_else(|| Error::DeMorgan(format!("{} has no unary `not`", alg.name())))?;
    let (bottom, top) = match (alg.bottom(), alg.top()) {
        (Some(b), Some(t)) => (b, t),
        _ => return Err(Error::DeMorgan(format!("{} is not bounded", alg.name()))),
    };
    let n = alg.size();
    let neg = |a: Elem| not.apply(n, &[a]);

    let mut distributive = None;
    'dist: for a in alg.elements() {
        for b in alg.elements() {
            for c in alg.elements() {
                if alg.meet(a, alg.join(b, c)) != alg.join(alg.meet(a, b), alg.meet(a, c)) {
                    distributive = Some(vec![a, b, c]);
                    break 'dist;
                }
            }
        }
    }

    let conditions = vec![
        Law::check(
            "negation swaps meet and join",
            find2(alg, |v, w| {
                neg(alg.meet(v, w)) != alg.join(neg(v), neg(w))
                    || neg(alg.join(v, w)) != alg.meet(neg(v), neg(w))
            }),
        ),
        Law::check("v <= not not v", find1(alg, |v| !alg.leq(v, neg(neg(v))))),
        Law::check("not 1 = 0", (neg(top) != bottom).then(|| vec![top])),
    ];

    let c = compute_constants(alg, neg);
    let ordered = [bottom, c.eps, c.eps_prime, c.delta, c.delta_prime, top];
    let chain_ok = ordered.windows(2).all(|w| alg.leq(w[0], w[1]));
    let neg_ok = neg(c.eps) == c.delta_prime
        && neg(c.eps_prime) == c.delta_prime
        && neg(c.delta) == c.eps_prime
        && neg(c.delta_prime) == c.eps_prime;
    let set: BTreeSet<Elem> = ordered.iter().copied().collect();
    let closed = set.iter().all(|&x| {
        set.contains(&neg(x)) && set.iter().all(|&y| set.contains(&alg.meet(x, y)) && set.contains(&alg.join(x, y)))
    });
    let derived = vec![
        Law::check("antitone", find2(alg, |v, w| alg.leq(v, w) && !alg.leq(neg(w), neg(v)))),
        Law::check("triple negation", find1(alg, |v| neg(neg(neg(v))) != neg(v))),
        Law::check(
            "not 0 = 1, not not 0 = 0",
            (neg(bottom) != top || neg(neg(bottom)) != bottom).then(|| vec![bottom]),
        ),
        Law::check(
            "constants ordered with negation identities",
            (!(chain_ok && neg_ok)).then(|| vec![c.eps, c.eps_prime, c.delta, c.delta_prime]),
        ),
        Law::check("constants form a subalgebra", (!closed).then(|| set.iter().copied().collect())),
    ];

    Ok(DeMorganReport {
        distributive: Law::check("distributivity", distributive),
        conditions,
        derived,
        constants: Some(c),
    })
}

/// The four constants, computed by exhaustive sup/inf over the carrier.
/// Refuses algebras that fail the conditions.
pub fn demorgan_constants(alg: &LatticeAlgebra) -> Result<DeMorganConstants> {
    let report = demorgan_check(alg)?;
    if !report.passes() {
        let failed: Vec<&str> = report.failures().iter().map(|l| l.name).collect();
        return Err(Error::DeMorgan(format!(
            "{} fails {}; run the De Morgan check for witnesses",
            alg.name(),
            failed.join(", ")
        )));
    }
    Ok(report.constants.expect("set when the check runs"))
}
