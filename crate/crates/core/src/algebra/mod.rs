//! Finite lattice algebras: carriers, operation tables, named connectives.

mod builtin;
mod demorgan;
mod range;
mod spec;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

pub use builtin::{builtin, builtin_names, make_boolean, make_godel_chain, make_mv_chain, product, reduct};
pub use demorgan::{demorgan_check, demorgan_constants, DeMorganConstants, DeMorganReport, Law};
pub use range::{term_range_finite, TermRange};
pub use spec::{validate_algebra, AlgebraSpec, Diagnostic, TableSpec};

/// Exact rational used for chain annotations.
pub type Rational = Ratio<i64>;

/// Index of a carrier element.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub usize);

impl Elem {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A total operation table of arity at most 3, stored densely in row-major
/// order over element indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    arity: usize,
    table: Vec<Elem>,
}

impl Operation {
    pub(crate) fn new(arity: usize, table: Vec<Elem>) -> Self {
        Operation { arity, table }
    }

    pub(crate) fn from_fn(size: usize, arity: usize, f: impl Fn(&[Elem]) -> Elem) -> Self {
        let total = size.pow(arity as u32);
        let mut args = vec![Elem(0); arity];
        let mut table = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            for slot in args.iter_mut().rev() {
                *slot = Elem(rest % size);
                rest /= size;
            }
            table.push(f(&args));
        }
        Operation { arity, table }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, size: usize, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity);
        let idx = args.iter().fold(0, |acc, a| acc * size + a.0);
        self.table[idx]
    }
}

/// Connective names used throughout the crate.
pub mod names {
    pub const AND: &str = "and";
    pub const OR: &str = "or";
    pub const NOT: &str = "not";
    pub const IMP: &str = "imp";
    pub const OPLUS: &str = "oplus";
    pub const ODOT: &str = "odot";
    pub const MUL: &str = "mul";
}

/// A validated finite algebra with a lattice reduct.
///
/// Elements are opaque indices with labels. Meet and join are always present
/// (as the connectives `and` and `or`); everything else lives in a table of
/// named operations. Chains may carry exact rational annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeAlgebra {
    name: String,
    labels: Vec<String>,
    meet: Operation,
    join: Operation,
    ops: BTreeMap<String, Operation>,
    bottom: Option<Elem>,
    top: Option<Elem>,
    values: Option<Vec<Rational>>,
}

impl LatticeAlgebra {
    /// Assembles an algebra without re-running validation. Callers must
    /// guarantee the lattice axioms.
    pub(crate) fn from_parts(
        name: String,
        labels: Vec<String>,
        meet: Operation,
        join: Operation,
        ops: BTreeMap<String, Operation>,
        values: Option<Vec<Rational>>,
    ) -> Self {
        let mut alg = LatticeAlgebra {
            name,
            labels,
            meet,
            join,
            ops,
            bottom: None,
            top: None,
            values,
        };
        alg.bottom = alg.find_bottom();
        alg.top = alg.find_top();
        alg
    }

    fn find_bottom(&self) -> Option<Elem> {
        self.elements().find(|&b| self.elements().all(|x| self.leq(b, x)))
    }

    fn find_top(&self) -> Option<Elem> {
        self.elements().find(|&t| self.elements().all(|x| self.leq(x, t)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.labels.len()).map(Elem)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, e: Elem) -> &str {
        &self.labels[e.0]
    }

    pub fn elem(&self, label: &str) -> Option<Elem> {
        self.labels.iter().position(|l| l == label).map(Elem)
    }

    pub fn bottom(&self) -> Option<Elem> {
        self.bottom
    }

    pub fn top(&self) -> Option<Elem> {
        self.top
    }

    /// Exact rational annotation, when the algebra carries one.
    pub fn value(&self, e: Elem) -> Option<Rational> {
        self.values.as_ref().map(|v| v[e.0])
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }

    /// `"label"` or `"label (=p/q)"` when the label differs from the value.
    pub fn describe(&self, e: Elem) -> String {
        match self.value(e) {
            Some(v) if v.to_string() != self.label(e) => format!("{} (={})", self.label(e), v),
            _ => self.label(e).to_string(),
        }
    }

    #[inline]
    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet.table[a.0 * self.size() + b.0]
    }

    #[inline]
    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join.table[a.0 * self.size() + b.0]
    }

    #[inline]
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.meet(a, b) == a
    }

    pub fn meet_all(&self, items: impl IntoIterator<Item = Elem>) -> Option<Elem> {
        items.into_iter().reduce(|a, b| self.meet(a, b))
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = Elem>) -> Option<Elem> {
        items.into_iter().reduce(|a, b| self.join(a, b))
    }

    /// Looks up a connective, including `and`/`or`.
    pub fn operation(&self, name: &str) -> Option<&Operation> {
        match name {
            names::AND => Some(&self.meet),
            names::OR => Some(&self.join),
            _ => self.ops.get(name),
        }
    }

    /// Extra (non-lattice) operations.
    pub fn extra_ops(&self) -> &BTreeMap<String, Operation> {
        &self.ops
    }

    pub fn apply(&self, name: &str, args: &[Elem]) -> Option<Elem> {
        let op = self.operation(name)?;
        (op.arity == args.len()).then(|| op.apply(self.size(), args))
    }

    pub fn negate(&self, a: Elem) -> Option<Elem> {
        self.apply(names::NOT, &[a])
    }

    /// Connective names with arities, lattice operations first.
    pub fn signature(&self) -> Signature {
        let mut ops = BTreeMap::new();
        ops.insert(names::AND.to_string(), 2);
        ops.insert(names::OR.to_string(), 2);
        for (name, op) in &self.ops {
            ops.insert(name.clone(), op.arity);
        }
        Signature {
            ops,
            constants: self.labels.clone(),
            chain_values: self.values.is_some(),
        }
    }

    /// A unary table `x ↦ top if value(x) ⋈ bound else bottom`, used for
    /// threshold events on rational chains.
    pub fn threshold_table(&self, ge: bool, bound: Rational) -> Option<Operation> {
        let values = self.values.as_ref()?;
        let (top, bottom) = (self.top?, self.bottom?);
        let table = values
            .iter()
            .map(|&v| {
                let hit = if ge { v >= bound } else { v <= bound };
                if hit {
                    top
                } else {
                    bottom
                }
            })
            .collect();
        Some(Operation::new(1, table))
    }

    /// Whether the order is total.
    pub fn is_chain(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.leq(a, b) || self.leq(b, a)))
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        spec::to_spec(self)
    }
}

impl fmt::Display for LatticeAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{{}}}", self.name, self.labels.join(", "))
    }
}

/// The connective signature of an algebra, as seen by the parser.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub ops: BTreeMap<String, usize>,
    pub constants: Vec<String>,
    pub chain_values: bool,
}

impl Signature {
    pub fn arity(&self, name: &str) -> Option<usize> {
        self.ops.get(name).copied()
    }

    pub fn has_constant(&self, label: &str) -> bool {
        self.constants.iter().any(|c| c == label)
    }
}

/// Formats a rational the way chain labels are written: `0`, `1`, `p/q`.
pub fn format_rational(r: Rational) -> String {
    if r.is_zero() {
        "0".into()
    } else if r.is_one() {
        "1".into()
    } else {
        r.to_string()
    }
}

/// Parses `p/q`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        return (q != 0).then(|| Ratio::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let denom = 10i64.checked_pow(frac.len() as u32)?;
        let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        let mag = int_part.abs().checked_mul(denom)?.checked_add(frac_part)?;
        return Some(Ratio::new(if neg { -mag } else { mag }, denom));
    }
    t.parse::<i64>().ok().map(Ratio::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_rational("0.25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_rational("1"), Some(Ratio::from_integer(1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn operation_from_fn_is_row_major() {
        let op = Operation::from_fn(3, 2, |a| Elem((a[0].0 + a[1].0) % 3));
        assert_eq!(op.apply(3, &[Elem(2), Elem(2)]), Elem(1));
        assert_eq!(op.table().len(), 9);
    }

    #[test]
    fn mv_chain_double_negation_is_identity() {
        for n in 1..=7 {
            let a = make_mv_chain(n).unwrap();
            for x in a.elements() {
                let nn = a.negate(a.negate(x).unwrap()).unwrap();
                assert_eq!(nn, x, "L{} at {}", n + 1, a.label(x));
            }
        }
    }

    #[test]
    fn threshold_table_on_chain() {
        let a = make_mv_chain(2).unwrap();
        let t = a.threshold_table(true, Ratio::new(1, 2)).unwrap();
        assert_eq!(t.table(), &[Elem(0), Elem(2), Elem(2)]);
        let g = make_godel_chain(&["0", "a", "1"]).unwrap();
        assert!(g.threshold_table(true, Ratio::new(1, 2)).is_none());
    }
}
