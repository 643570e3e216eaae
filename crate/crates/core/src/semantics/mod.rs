//! Finite A-valued structures and Tarski-style evaluation.

mod eval;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{builtin, Elem, LatticeAlgebra};
use crate::error::{Error, Result};
use crate::syntax::{Formula, Vocabulary};
use crate::translator::{classical_evaluate, transform_model, ConstraintProfile};

pub use eval::{evaluate, evaluate_sentence, Evaluator};

/// A finite A-valued τ-structure on the domain `0..n` (printed 1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStructure {
    n: usize,
    algebra: Arc<LatticeAlgebra>,
    vocab: Vocabulary,
    tables: Vec<Vec<Elem>>,
    identity: Option<Vec<Elem>>,
}

/// Row-major index of `tuple` in `[n]^k`.
#[inline]
pub(crate) fn cell_index(n: usize, tuple: impl IntoIterator<Item = usize>) -> usize {
    tuple.into_iter().fold(0, |acc, i| acc * n + i)
}

/// The `idx`-th tuple of `[n]^k` in row-major order.
pub(crate) fn cell_tuple(n: usize, k: usize, idx: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    let mut rest = idx;
    for slot in out.iter_mut().rev() {
        *slot = rest % n;
        rest /= n;
    }
    out
}

impl WeightedStructure {
    /// Assembles a structure, checking only shapes. The crisp identity
    /// table is taken as given; see [`check_constraints`].
    pub fn from_tables_unchecked(
        n: usize,
        algebra: Arc<LatticeAlgebra>,
        vocab: Vocabulary,
        tables: Vec<Vec<Elem>>,
        identity: Option<Vec<Elem>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("domain must be nonempty".into()));
        }
        if tables.len() != vocab.relations().len() {
            return Err(Error::Structure(format!(
                "{} tables for {} relations",
                tables.len(),
                vocab.relations().len()
            )));
        }
        for ((name, arity), t) in vocab.relations().iter().zip(&tables) {
            let want = n.checked_pow(*arity as u32).ok_or_else(|| Error::Budget("table too large".into()))?;
            if t.len() != want {
                return Err(Error::Structure(format!("table for {name} has {} cells, expected {want}", t.len())));
            }
            if let Some(bad) = t.iter().find(|e| e.0 >= algebra.size()) {
                return Err(Error::Structure(format!("table for {name} holds element index {}", bad.0)));
            }
        }
        if let Some(id) = &identity {
            if id.len() != n * n {
                return Err(Error::Structure("identity table has wrong size".into()));
            }
        }
        Ok(WeightedStructure { n, algebra, vocab, tables, identity })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &LatticeAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> &Arc<LatticeAlgebra> {
        &self.algebra
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tables(&self) -> &[Vec<Elem>] {
        &self.tables
    }

    pub fn table(&self, rel: &str) -> Option<&[Elem]> {
        self.vocab.index(rel).map(|i| self.tables[i].as_slice())
    }

    pub fn identity_table(&self) -> Option<&[Elem]> {
        self.identity.as_deref()
    }

    /// Value of `rel` at a 0-based tuple.
    pub fn get(&self, rel: &str, tuple: &[usize]) -> Option<Elem> {
        let i = self.vocab.index(rel)?;
        if tuple.len() != self.vocab.relations()[i].1 || tuple.iter().any(|&d| d >= self.n) {
            return None;
        }
        Some(self.tables[i][cell_index(self.n, tuple.iter().copied())])
    }

    /// Applies a domain permutation: the new structure has
    /// `R'(π(i1),…,π(ik)) = R(i1,…,ik)`.
    pub fn permuted(&self, perm: &[usize]) -> Result<WeightedStructure> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("not a permutation of the domain".into()));
        }
        let map = |k: usize, t: &[Elem]| {
            let mut out = vec![Elem(0); t.len()];
            for (idx, &v) in t.iter().enumerate() {
                let tuple = cell_tuple(self.n, k, idx);
                out[cell_index(self.n, tuple.into_iter().map(|i| perm[i]))] = v;
            }
            out
        };
        let tables = self.vocab.relations().iter().zip(&self.tables).map(|((_, k), t)| map(*k, t)).collect();
        let identity = self.identity.as_ref().map(|t| map(2, t));
        Ok(WeightedStructure { tables, identity, ..self.clone() })
    }

    pub fn to_json(&self) -> String {
        let mut relations = BTreeMap::new();
        for ((name, arity), t) in self.vocab.relations().iter().zip(&self.tables) {
            let cells: BTreeMap<String, String> = t
                .iter()
                .enumerate()
                .map(|(idx, &v)| {
                    let tuple = cell_tuple(self.n, *arity, idx);
                    let key = tuple.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
                    (format!("({key})"), self.algebra.label(v).to_string())
                })
                .collect();
            relations.insert(name.clone(), cells);
        }
        let file = StructureFile { n: self.n, algebra: self.algebra.name().to_string(), relations };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// Reads the JSON structure format. `algebra` overrides the name in the
    /// file; otherwise it must be a builtin.
    pub fn from_json(
        text: &str,
        algebra: Option<Arc<LatticeAlgebra>>,
        vocab: Option<&Vocabulary>,
        profile: &ConstraintProfile,
    ) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text)?;
        let alg = match algebra {
            Some(a) => a,
            None => Arc::new(builtin(&file.algebra)?),
        };
        let mut parsed: BTreeMap<String, (usize, BTreeMap<Vec<usize>, Elem>)> = BTreeMap::new();
        for (rel, cells) in &file.relations {
            let mut arity = None;
            let mut map = BTreeMap::new();
            for (key, label) in cells {
                let tuple = parse_tuple(key, file.n)?;
                if *arity.get_or_insert(tuple.len()) != tuple.len() {
                    return Err(Error::Structure(format!("relation {rel} used with two arities")));
                }
                let v = alg
                    .elem(label)
                    .ok_or_else(|| Error::Structure(format!("{rel}{key}: `{label}` is not in {}", alg.name())))?;
                map.insert(tuple, v);
            }
            let arity = arity.ok_or_else(|| Error::Structure(format!("relation {rel} has no cells")))?;
            parsed.insert(rel.clone(), (arity, map));
        }
        let vocab = match vocab {
            Some(v) => v.clone(),
            None => Vocabulary::new(parsed.iter().map(|(r, (a, _))| (r.clone(), *a)), profile.crisp_identity)?,
        };
        let mut tables = BTreeMap::new();
        for (rel, arity) in vocab.relations() {
            let (a, cells) = parsed
                .remove(rel)
                .ok_or_else(|| Error::Structure(format!("missing table for {rel}")))?;
            if a != *arity {
                return Err(Error::Arity { name: rel.clone(), expected: *arity, found: a });
            }
            let total = file.n.pow(a as u32);
            let mut t = Vec::with_capacity(total);
            for idx in 0..total {
                let tuple = cell_tuple(file.n, a, idx);
                match cells.get(&tuple) {
                    Some(&v) => t.push(v),
                    None => {
                        let shown: Vec<String> = tuple.iter().map(|i| (i + 1).to_string()).collect();
                        return Err(Error::Structure(format!("missing entry {rel}({})", shown.join(","))));
                    }
                }
            }
            tables.insert(rel.clone(), t);
        }
        if let Some(extra) = parsed.keys().next() {
            return Err(Error::Structure(format!("relation {extra} is not in the vocabulary")));
        }
        make_structure(file.n, alg, &vocab, tables, profile)
    }
}

fn parse_tuple(key: &str, n: usize) -> Result<Vec<usize>> {
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|k| k.strip_suffix(')'))
        .ok_or_else(|| Error::Structure(format!("cell key `{key}` must look like (1,2)")))?;
    inner
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
            _ => Err(Error::Structure(format!("cell key `{key}` is outside 1..={n}"))),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct StructureFile {
    n: usize,
    algebra: String,
    relations: BTreeMap<String, BTreeMap<String, String>>,
}

impl fmt::Display for WeightedStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain 1..{} over {}", self.n, self.algebra.name())?;
        for ((name, arity), t) in self.vocab.relations().iter().zip(&self.tables) {
            let cells: Vec<String> = t
                .iter()
                .enumerate()
                .map(|(idx, &v)| {
                    let tuple = cell_tuple(self.n, *arity, idx);
                    let key: Vec<String> = tuple.iter().map(|i| (i + 1).to_string()).collect();
                    format!("({})={}", key.join(","), self.algebra.label(v))
                })
                .collect();
            writeln!(f, "  {name}: {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// The diagonal table: top on `(i,i)`, bottom elsewhere.
pub(crate) fn diagonal(n: usize, alg: &LatticeAlgebra) -> Result<Vec<Elem>> {
    let (bottom, top) = alg
        .bottom()
        .zip(alg.top())
        .ok_or_else(|| Error::Unsupported(format!("{} is not bounded", alg.name())))?;
    Ok((0..n * n).map(|idx| if idx / n == idx % n { top } else { bottom }).collect())
}

/// Builds a validated structure. The diagonal identity table is installed
/// when the vocabulary or the profile asks for crisp identity.
pub fn make_structure(
    n: usize,
    algebra: Arc<LatticeAlgebra>,
    vocab: &Vocabulary,
    mut tables: BTreeMap<String, Vec<Elem>>,
    profile: &ConstraintProfile,
) -> Result<WeightedStructure> {
    let mut dense = Vec::new();
    for (name, _) in vocab.relations() {
        dense.push(tables.remove(name).ok_or_else(|| Error::Structure(format!("missing table for {name}")))?);
    }
    if let Some(extra) = tables.keys().next() {
        return Err(Error::Structure(format!("relation {extra} is not in the vocabulary")));
    }
    let crisp = vocab.has_crisp_identity() || profile.crisp_identity;
    let identity = if crisp { Some(diagonal(n, &algebra)?) } else { None };
    let m = WeightedStructure::from_tables_unchecked(n, algebra, vocab.clone(), dense, identity)?;
    let report = check_constraints(&m, profile)?;
    match report.violations.first() {
        None => Ok(m),
        Some(v) => Err(Error::Profile(format!(
            "{v}{}",
            if report.violations.len() > 1 {
                format!(" (and {} more)", report.violations.len() - 1)
            } else {
                String::new()
            }
        ))),
    }
}

/// Builds a structure from a cell function `(relation index, tuple) ↦ value`.
pub fn structure_from_fn(
    n: usize,
    algebra: Arc<LatticeAlgebra>,
    vocab: &Vocabulary,
    profile: &ConstraintProfile,
    mut cell: impl FnMut(usize, &[usize]) -> Elem,
) -> Result<WeightedStructure> {
    let mut tables = BTreeMap::new();
    for (r, (name, arity)) in vocab.relations().iter().enumerate() {
        let total = n.pow(*arity as u32);
        let t = (0..total).map(|idx| cell(r, &cell_tuple(n, *arity, idx))).collect();
        tables.insert(name.clone(), t);
    }
    make_structure(n, algebra, vocab, tables, profile)
}

/// One violated constraint, with a 1-based cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: String,
    pub relation: String,
    pub cell: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell: Vec<String> = self.cell.iter().map(usize::to_string).collect();
        write!(f, "{} fails at {}({})", self.constraint, self.relation, cell.join(","))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every cell that breaks the profile (crisp identity, graph shape,
/// forbidden support values, custom parametric sentences).
pub fn check_constraints(m: &WeightedStructure, profile: &ConstraintProfile) -> Result<ConstraintReport> {
    let alg = m.algebra();
    let n = m.n;
    let mut out = Vec::new();
    let crisp = m.vocab.has_crisp_identity() || profile.crisp_identity;
    if crisp {
        let diag = diagonal(n, alg)?;
        match &m.identity {
            None => out.push(Violation { constraint: "crisp identity".into(), relation: "~".into(), cell: vec![] }),
            Some(t) => {
                for (idx, (&have, &want)) in t.iter().zip(&diag).enumerate() {
                    if have != want {
                        out.push(Violation {
                            constraint: "crisp identity".into(),
                            relation: "~".into(),
                            cell: vec![idx / n + 1, idx % n + 1],
                        });
                    }
                }
            }
        }
    }
    let bottom = alg.bottom();
    for ((name, arity), t) in m.vocab.relations().iter().zip(&m.tables) {
        if profile.graph && *arity == 2 {
            for i in 0..n {
                if Some(t[i * n + i]) != bottom {
                    out.push(Violation { constraint: "irreflexivity".into(), relation: name.clone(), cell: vec![i + 1, i + 1] });
                }
                for j in i + 1..n {
                    if t[i * n + j] != t[j * n + i] {
                        out.push(Violation { constraint: "symmetry".into(), relation: name.clone(), cell: vec![i + 1, j + 1] });
                    }
                }
            }
        }
        if let Some(bad) = profile.forbidden.get(name) {
            for (idx, &v) in t.iter().enumerate() {
                if bad.contains(alg.label(v)) {
                    out.push(Violation {
                        constraint: format!("support excludes {}", alg.label(v)),
                        relation: name.clone(),
                        cell: cell_tuple(n, *arity, idx).iter().map(|i| i + 1).collect(),
                    });
                }
            }
        }
    }
    if !profile.custom.is_empty() {
        let classical = transform_model(m)?;
        for s in &profile.custom {
            if !classical_evaluate(&classical, s, &BTreeMap::new())? {
                out.push(Violation { constraint: format!("custom sentence `{s}`"), relation: String::new(), cell: vec![] });
            }
        }
    }
    Ok(ConstraintReport { violations: out })
}

/// Convenience: sentence value with an empty assignment, rendered.
pub fn describe_value(m: &WeightedStructure, f: &Formula) -> Result<String> {
    let v = evaluate_sentence(m, f)?;
    Ok(m.algebra().describe(v))
}
