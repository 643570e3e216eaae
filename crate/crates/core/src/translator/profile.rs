use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{check_parametric, classical_relation, forall_distinct};
use crate::algebra::LatticeAlgebra;
use crate::error::{Error, Result};
use crate::syntax::{Formula, Vocabulary};

/// Restrictions on the admissible A-valued structures.
///
/// Every binary relation is an irreflexive symmetric graph when `graph` is
/// set. `forbidden` lists carrier labels a relation never takes (a support
/// restriction). `custom` holds parametric classical sentences over `τ × A`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintProfile {
    pub crisp_identity: bool,
    pub graph: bool,
    pub custom: Vec<Formula>,
    pub forbidden: BTreeMap<String, BTreeSet<String>>,
}

impl ConstraintProfile {
    pub fn none() -> Self {
        ConstraintProfile::default()
    }

    pub fn crisp_identity() -> Self {
        ConstraintProfile { crisp_identity: true, ..Default::default() }
    }

    pub fn graph() -> Self {
        ConstraintProfile { graph: true, ..Default::default() }
    }

    /// Accepts only sentences passing [`check_parametric`].
    pub fn custom(sentences: Vec<Formula>) -> Result<Self> {
        for s in &sentences {
            let verdict = check_parametric(s);
            if !verdict.parametric {
                return Err(Error::Profile(format!("`{s}` is not parametric: {}", verdict.reason)));
            }
        }
        Ok(ConstraintProfile { custom: sentences, ..Default::default() })
    }

    pub fn with_forbidden(mut self, rel: &str, labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.forbidden.entry(rel.to_string()).or_default().extend(labels.into_iter().map(Into::into));
        self
    }

    /// `none`, `crisp-id`, `graph` or a `+`-joined combination.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = ConstraintProfile::none();
        for part in text.split('+').map(str::trim) {
            match part {
                "none" | "" => {}
                "crisp-id" | "crisp" => p.crisp_identity = true,
                "graph" => p.graph = true,
                other => return Err(Error::Profile(format!("unknown profile `{other}`"))),
            }
        }
        Ok(p)
    }

    pub fn is_trivial(&self) -> bool {
        !self.graph && self.custom.is_empty() && self.forbidden.values().all(BTreeSet::is_empty)
    }

    /// Checks that forbidden labels exist and leave each relation some value,
    /// and that graph relations may take the bottom element.
    pub fn validate(&self, vocab: &Vocabulary, alg: &LatticeAlgebra) -> Result<()> {
        for (rel, labels) in &self.forbidden {
            if vocab.arity(rel).is_none() {
                return Err(Error::Profile(format!("forbidden values for unknown relation {rel}")));
            }
            if let Some(bad) = labels.iter().find(|l| alg.elem(l).is_none()) {
                return Err(Error::Profile(format!("`{bad}` is not an element of {}", alg.name())));
            }
            if labels.len() >= alg.size() {
                return Err(Error::Profile(format!("relation {rel} has empty support")));
            }
        }
        if self.graph {
            let bottom = alg.bottom().ok_or_else(|| Error::Profile("graph profile needs a bottom".into()))?;
            for (rel, arity) in vocab.relations() {
                if *arity == 2 && self.forbidden.get(rel).is_some_and(|f| f.contains(alg.label(bottom))) {
                    return Err(Error::Profile(format!("graph profile forces {rel}(x,x) = bottom, which is forbidden")));
                }
            }
        }
        Ok(())
    }

    pub fn allowed(&self, rel: &str, alg: &LatticeAlgebra) -> Vec<crate::algebra::Elem> {
        let bad = self.forbidden.get(rel);
        alg.elements().filter(|&e| !bad.is_some_and(|b| b.contains(alg.label(e)))).collect()
    }

    /// The profile as parametric classical sentences over `τ × A`.
    pub fn axioms(&self, vocab: &Vocabulary, alg: &LatticeAlgebra) -> Vec<Formula> {
        let mut out = Vec::new();
        if self.crisp_identity || vocab.has_crisp_identity() {
            out.push(Formula::forall("x", Formula::eq("x", "x")));
            out.push(forall_distinct(&["x", "y"], Formula::not(Formula::eq("x", "y"))));
        }
        if self.graph {
            for (rel, arity) in vocab.relations() {
                if *arity != 2 {
                    continue;
                }
                let bottom = alg.bottom().expect("validated");
                out.push(Formula::forall("x", Formula::atom(&classical_relation(rel, alg.label(bottom)), &["x", "x"])));
                let iff = alg.elements().map(|a| {
                    let name = classical_relation(rel, alg.label(a));
                    let xy = Formula::atom(&name, &["x", "y"]);
                    let yx = Formula::atom(&name, &["y", "x"]);
                    Formula::and(Formula::imp(xy.clone(), yx.clone()), Formula::imp(yx, xy))
                });
                out.push(forall_distinct(&["x", "y"], Formula::fold("and", iff).expect("nonempty carrier")));
            }
        }
        for (rel, labels) in &self.forbidden {
            let Some(arity) = vocab.arity(rel) else { continue };
            let vars: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
            let args: Vec<&str> = vars.iter().map(String::as_str).collect();
            for l in labels {
                let atom = Formula::atom(&classical_relation(rel, l), &args);
                out.push(Formula::forall_all(&vars, Formula::not(atom)));
            }
        }
        out.extend(self.custom.iter().cloned());
        out
    }
}

impl fmt::Display for ConstraintProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.crisp_identity {
            parts.push("crisp-id".to_string());
        }
        if self.graph {
            parts.push("graph".to_string());
        }
        for (rel, labels) in &self.forbidden {
            let l: Vec<&str> = labels.iter().map(String::as_str).collect();
            parts.push(format!("{rel}!={{{}}}", l.join(",")));
        }
        if !self.custom.is_empty() {
            parts.push(format!("{} custom", self.custom.len()));
        }
        if parts.is_empty() {
            parts.push("none".into());
        }
        f.write_str(&parts.join("+"))
    }
}

