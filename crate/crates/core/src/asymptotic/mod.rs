//! Almost-sure values over finite algebras: complete descriptions, the
//! expansion-based decision procedure, extension axioms and quantifier
//! elimination for De Morgan-like algebras.

mod decider;
mod qe;

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{Elem, LatticeAlgebra};
use crate::error::{Error, Result};
use crate::semantics::{cell_index, cell_tuple, WeightedStructure};
use crate::syntax::{Formula, Vocabulary};
use crate::translator::{classical_evaluate, classical_relation, forall_distinct, transform_model, ConstraintProfile};

pub use decider::{almost_sure_value, Decider, QuantifierTrace};
pub use qe::{almost_sure_set_demorgan, demorgan_witnesses, qe_demorgan};

/// Values of every atom over `k` distinct abstract elements `0..k`.
/// Identity atoms are not stored; distinct positions are distinct elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompleteDescription {
    k: usize,
    tables: Vec<Vec<Elem>>,
}

impl CompleteDescription {
    pub fn empty(vocab: &Vocabulary) -> Self {
        CompleteDescription { k: 0, tables: vec![Vec::new(); vocab.relations().len()] }
    }

    /// Builds a description from explicit tables (row-major over `k^arity`).
    pub fn from_tables(k: usize, vocab: &Vocabulary, tables: Vec<Vec<Elem>>) -> Result<Self> {
        if tables.len() != vocab.relations().len() {
            return Err(Error::InvalidArgument("one table per relation expected".into()));
        }
        for ((name, arity), t) in vocab.relations().iter().zip(&tables) {
            if t.len() != k.pow(*arity as u32) {
                return Err(Error::InvalidArgument(format!("table for {name} has the wrong size")));
            }
        }
        Ok(CompleteDescription { k, tables })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tables(&self) -> &[Vec<Elem>] {
        &self.tables
    }

    pub fn value(&self, rel: usize, tuple: &[usize]) -> Elem {
        self.tables[rel][cell_index(self.k, tuple.iter().copied())]
    }

    /// The description of the sub-tuple `positions` (distinct), re-indexed
    /// in the given order.
    pub fn restrict(&self, positions: &[usize], vocab: &Vocabulary) -> CompleteDescription {
        let m = positions.len();
        let tables = vocab
            .relations()
            .iter()
            .zip(&self.tables)
            .map(|((_, arity), t)| {
                (0..m.pow(*arity as u32))
                    .map(|idx| {
                        let tuple = cell_tuple(m, *arity, idx);
                        t[cell_index(self.k, tuple.into_iter().map(|i| positions[i]))]
                    })
                    .collect()
            })
            .collect();
        CompleteDescription { k: m, tables }
    }

    /// The description as an A-valued structure on `k` elements.
    pub fn to_structure(
        &self,
        vocab: &Vocabulary,
        alg: std::sync::Arc<LatticeAlgebra>,
    ) -> Result<WeightedStructure> {
        let identity = if vocab.has_crisp_identity() { Some(crate::semantics::diagonal(self.k, &alg)?) } else { None };
        WeightedStructure::from_tables_unchecked(self.k, alg, vocab.clone(), self.tables.clone(), identity)
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary, alg: &'a LatticeAlgebra) -> impl fmt::Display + 'a {
        DescriptionDisplay { d: self, vocab, alg }
    }
}

struct DescriptionDisplay<'a> {
    d: &'a CompleteDescription,
    vocab: &'a Vocabulary,
    alg: &'a LatticeAlgebra,
}

impl fmt::Display for DescriptionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for ((name, arity), t) in self.vocab.relations().iter().zip(&self.d.tables) {
            for (idx, &v) in t.iter().enumerate() {
                let args: Vec<String> = cell_tuple(self.d.k, *arity, idx).iter().map(|i| format!("x{}", i + 1)).collect();
                parts.push(format!("{name}({})={}", args.join(","), self.alg.label(v)));
            }
        }
        if parts.is_empty() {
            f.write_str("(empty)")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// A cell of `F_{k+1}`: an atom over positions `0..=k` that uses `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionAtom {
    pub rel: usize,
    pub tuple: Vec<usize>,
}

/// `F_{k+1}` in row-major order per relation.
pub fn extension_atoms(k: usize, vocab: &Vocabulary) -> Vec<ExtensionAtom> {
    let mut out = Vec::new();
    for (r, (_, arity)) in vocab.relations().iter().enumerate() {
        for idx in 0..(k + 1).pow(*arity as u32) {
            let tuple = cell_tuple(k + 1, *arity, idx);
            if tuple.contains(&k) {
                out.push(ExtensionAtom { rel: r, tuple });
            }
        }
    }
    out
}

/// What a fresh element may do, given the profile.
enum CellRule {
    Free(Vec<Elem>),
    Fixed(Elem),
    Mirror(usize),
}

/// Profile-aware enumeration of one-element expansions.
pub(crate) struct ExpansionPlan<'a> {
    vocab: &'a Vocabulary,
    alg: &'a LatticeAlgebra,
    profile: &'a ConstraintProfile,
    atoms: Vec<ExtensionAtom>,
    rules: Vec<CellRule>,
    free: Vec<usize>,
}

impl<'a> ExpansionPlan<'a> {
    pub(crate) fn new(
        k: usize,
        vocab: &'a Vocabulary,
        alg: &'a LatticeAlgebra,
        profile: &'a ConstraintProfile,
        max_expansions: u64,
    ) -> Result<Self> {
        let atoms = extension_atoms(k, vocab);
        let bottom = alg.bottom();
        let mut rules = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            let (name, arity) = &vocab.relations()[a.rel];
            let graph = profile.graph && *arity == 2;
            let rule = if graph && a.tuple[0] == a.tuple[1] {
                CellRule::Fixed(bottom.ok_or_else(|| Error::Profile("graph profile needs a bottom".into()))?)
            } else if graph && a.tuple[0] == k {
                let twin = atoms[..i]
                    .iter()
                    .position(|b| b.rel == a.rel && b.tuple == [a.tuple[1], a.tuple[0]]);
                match twin {
                    Some(t) => CellRule::Mirror(t),
                    None => CellRule::Free(profile.allowed(name, alg)),
                }
            } else {
                CellRule::Free(profile.allowed(name, alg))
            };
            rules.push(rule);
        }
        let free: Vec<usize> = (0..rules.len()).filter(|&i| matches!(rules[i], CellRule::Free(_))).collect();
        let mut count: u64 = 1;
        for &i in &free {
            if let CellRule::Free(vals) = &rules[i] {
                count = count.saturating_mul(vals.len() as u64);
            }
        }
        if count > max_expansions {
            return Err(Error::Budget(format!(
                "{count} expansions at {} element(s) exceed the limit of {max_expansions}",
                k + 1
            )));
        }
        Ok(ExpansionPlan { vocab, alg, profile, atoms, rules, free })
    }

    /// Calls `f` on every expansion of `d` in lexicographic order of the
    /// free cells; stops early when `f` returns `false`.
    pub(crate) fn for_each(&self, d: &CompleteDescription, mut f: impl FnMut(&CompleteDescription) -> bool) -> Result<()> {
        let k = d.k;
        let mut next = CompleteDescription {
            k: k + 1,
            tables: self
                .vocab
                .relations()
                .iter()
                .zip(&d.tables)
                .map(|((_, arity), t)| {
                    let mut out = vec![Elem(0); (k + 1).pow(*arity as u32)];
                    for (idx, &v) in t.iter().enumerate() {
                        out[cell_index(k + 1, cell_tuple(k, *arity, idx))] = v;
                    }
                    out
                })
                .collect(),
        };
        let cells: Vec<usize> = self.atoms.iter().map(|a| cell_index(k + 1, a.tuple.iter().copied())).collect();
        let mut digits = vec![0usize; self.free.len()];
        loop {
            let mut values = vec![Elem(0); self.atoms.len()];
            let mut fi = 0;
            for (i, rule) in self.rules.iter().enumerate() {
                values[i] = match rule {
                    CellRule::Fixed(e) => *e,
                    CellRule::Mirror(j) => values[*j],
                    CellRule::Free(vals) => {
                        let v = vals[digits[fi]];
                        fi += 1;
                        v
                    }
                };
                next.tables[self.atoms[i].rel][cells[i]] = values[i];
            }
            if self.consistent(&next)? && !f(&next) {
                return Ok(());
            }
            let mut pos = self.free.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                let CellRule::Free(vals) = &self.rules[self.free[pos]] else { unreachable!() };
                digits[pos] += 1;
                if digits[pos] < vals.len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Custom parametric sentences, checked on assignments that use the new
    /// element.
    fn consistent(&self, d: &CompleteDescription) -> Result<bool> {
        if self.profile.custom.is_empty() {
            return Ok(true);
        }
        let m = d.to_structure(self.vocab, std::sync::Arc::new(self.alg.clone()))?;
        let c = transform_model(&m)?;
        let newest = d.k - 1;
        for s in &self.profile.custom {
            if !holds_near(&c, s, newest)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Evaluates the universal prefix of a parametric sentence only on
/// assignments that mention `newest`.
fn holds_near(c: &WeightedStructure, s: &Formula, newest: usize) -> Result<bool> {
    if let Formula::Apply { op, args } = s {
        if op == "and" && args.len() == 2 {
            return Ok(holds_near(c, &args[0], newest)? && holds_near(c, &args[1], newest)?);
        }
    }
    let mut vars = Vec::new();
    let mut body = s;
    while let Formula::Forall(x, b) = body {
        vars.push(x.clone());
        body = b;
    }
    let n = c.n();
    for idx in 0..n.pow(vars.len() as u32) {
        let tuple = cell_tuple(n, vars.len(), idx);
        if !tuple.contains(&newest) {
            continue;
        }
        let asg: BTreeMap<String, usize> = vars.iter().cloned().zip(tuple).collect();
        if !classical_evaluate(c, body, &asg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All expansions of `d` by one element, honouring the profile.
pub fn enumerate_expansions(
    d: &CompleteDescription,
    vocab: &Vocabulary,
    alg: &LatticeAlgebra,
    profile: &ConstraintProfile,
    budget: &crate::Budget,
) -> Result<Vec<CompleteDescription>> {
    let plan = ExpansionPlan::new(d.k, vocab, alg, profile, budget.max_expansions)?;
    let mut out = Vec::new();
    plan.for_each(d, |e| {
        out.push(e.clone());
        true
    })?;
    Ok(out)
}

/// `Ext_A(k, f)` as a classical sentence over `τ × A`; `f` follows the order
/// of [`extension_atoms`].
pub fn extension_axiom(
    k: usize,
    f: &[Elem],
    vocab: &Vocabulary,
    alg: &LatticeAlgebra,
    profile: &ConstraintProfile,
) -> Result<Formula> {
    let atoms = extension_atoms(k, vocab);
    if f.len() != atoms.len() {
        return Err(Error::InvalidArgument(format!("f has {} values for {} atoms", f.len(), atoms.len())));
    }
    let bottom = alg.bottom();
    for (i, a) in atoms.iter().enumerate() {
        let (name, arity) = &vocab.relations()[a.rel];
        if f[i].0 >= alg.size() {
            return Err(Error::InvalidArgument(format!("element index {} is outside the carrier", f[i].0)));
        }
        if !profile.allowed(name, alg).contains(&f[i]) {
            return Err(Error::Profile(format!("{name} may not take {}", alg.label(f[i]))));
        }
        if profile.graph && *arity == 2 {
            if a.tuple[0] == a.tuple[1] && Some(f[i]) != bottom {
                return Err(Error::Profile(format!("{name} must be bottom on the diagonal")));
            }
            if let Some(j) = atoms.iter().position(|b| b.rel == a.rel && b.tuple == [a.tuple[1], a.tuple[0]]) {
                if f[j] != f[i] {
                    return Err(Error::Profile(format!("{name} must be symmetric")));
                }
            }
        }
    }
    let vars: Vec<String> = (1..=k + 1).map(|i| format!("x{i}")).collect();
    let fresh = &vars[k];
    let mut conj: Vec<Formula> = vars[..k].iter().map(|v| Formula::not(Formula::eq(fresh, v))).collect();
    for (a, v) in atoms.iter().zip(f) {
        let (name, _) = &vocab.relations()[a.rel];
        let args: Vec<&str> = a.tuple.iter().map(|&i| vars[i].as_str()).collect();
        conj.push(Formula::atom(&classical_relation(name, alg.label(*v)), &args));
    }
    let body = Formula::exists(fresh, Formula::fold("and", conj).expect("F_{k+1} is nonempty"));
    Ok(if k == 0 { body } else { forall_distinct(&vars[..k], body) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::Budget;

    #[test]
    fn expansion_counts() {
        let l3 = builtin("L3").unwrap();
        let p = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        let d1 = &enumerate_expansions(&CompleteDescription::empty(&p), &p, &l3, &none, &Budget::default()).unwrap()[0];
        assert_eq!(d1.k(), 1);
        assert_eq!(enumerate_expansions(d1, &p, &l3, &none, &Budget::default()).unwrap().len(), 3);

        let b2 = builtin("B2").unwrap();
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        let e = enumerate_expansions(&CompleteDescription::empty(&r), &r, &b2, &none, &Budget::default()).unwrap();
        assert_eq!(e.len(), 2);

        let g = ConstraintProfile::graph();
        let d1 = &enumerate_expansions(&CompleteDescription::empty(&r), &r, &l3, &g, &Budget::default()).unwrap()[0];
        let e2 = enumerate_expansions(d1, &r, &l3, &g, &Budget::default()).unwrap();
        assert_eq!(e2.len(), 3);
        for d in &e2 {
            assert_eq!(d.value(0, &[0, 1]), d.value(0, &[1, 0]));
            assert_eq!(d.value(0, &[1, 1]), Elem(0));
        }
    }

    #[test]
    fn expansions_extend_the_description() {
        let l3 = builtin("L3").unwrap();
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        let none = ConstraintProfile::none();
        let d = CompleteDescription::from_tables(1, &r, vec![vec![Elem(1)]]).unwrap();
        let e = enumerate_expansions(&d, &r, &l3, &none, &Budget::default()).unwrap();
        assert_eq!(e.len(), 27);
        assert!(e.iter().all(|x| x.value(0, &[0, 0]) == Elem(1)));
        assert!(e.iter().all(|x| x.restrict(&[0], &r) == d));
    }

    #[test]
    fn forbidden_values_shrink_expansions() {
        let l3 = builtin("L3").unwrap();
        let p = Vocabulary::unary("P");
        let prof = ConstraintProfile::none().with_forbidden("P", ["1/2"]);
        let e = enumerate_expansions(&CompleteDescription::empty(&p), &p, &l3, &prof, &Budget::default()).unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn extension_axiom_shapes() {
        let l3 = builtin("L3").unwrap();
        let p = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        let ax = extension_axiom(0, &[Elem(1)], &p, &l3, &none).unwrap();
        assert_eq!(ax.to_string(), "exists x1. P[1/2](x1)");

        let b2 = builtin("B2").unwrap();
        let r = Vocabulary::new([("R", 2)], false).unwrap();
        assert_eq!(extension_atoms(1, &r).len(), 3);
        let ax = extension_axiom(1, &[Elem(1), Elem(0), Elem(1)], &r, &b2, &none).unwrap();
        let mut conj = 0;
        ax.visit(&mut |g| {
            if matches!(g, Formula::Atom { .. }) {
                conj += 1;
            }
        });
        assert_eq!(conj, 3);

        let g = ConstraintProfile::graph();
        assert!(extension_axiom(1, &[Elem(1), Elem(0), Elem(0)], &r, &l3, &g).is_err());
        assert!(extension_axiom(1, &[Elem(1), Elem(1), Elem(0)], &r, &l3, &g).is_ok());
    }
}
