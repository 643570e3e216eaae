use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{format_rational, names, parse_rational, Elem, LatticeAlgebra, Operation};

/// Raw, unvalidated algebra description; also the JSON file format.
///
/// ```json
/// {"carrier": ["0","1/2","1"],
///  "ops": {"and": [["0","0","0"], ...], "or": [...], "not": ["1","1/2","0"]},
///  "bottom": "0", "top": "1", "values": {"1/2": "1/2"}}
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub carrier: Vec<String>,
    pub ops: BTreeMap<String, TableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, String>>,
}

/// An operation table written with element labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableSpec {
    Unary(Vec<String>),
    Binary(Vec<Vec<String>>),
    Ternary(Vec<Vec<Vec<String>>>),
}

impl TableSpec {
    fn arity(&self) -> usize {
        match self {
            TableSpec::Unary(_) => 1,
            TableSpec::Binary(_) => 2,
            TableSpec::Ternary(_) => 3,
        }
    }

    /// Flattens in row-major order, reporting the first ragged row.
    fn flatten(&self, size: usize) -> Result<Vec<&str>, String> {
        let check = |len: usize, what: &str| {
            if len == size {
                Ok(())
            } else {
                Err(format!("{what} has {len} entries, expected {size}"))
            }
        };
        let mut out = Vec::new();
        match self {
            TableSpec::Unary(row) => {
                check(row.len(), "table")?;
                out.extend(row.iter().map(String::as_str));
            }
            TableSpec::Binary(rows) => {
                check(rows.len(), "table")?;
                for (i, row) in rows.iter().enumerate() {
                    check(row.len(), &format!("row {i}"))?;
                    out.extend(row.iter().map(String::as_str));
                }
            }
            TableSpec::Ternary(planes) => {
                check(planes.len(), "table")?;
                for (i, plane) in planes.iter().enumerate() {
                    check(plane.len(), &format!("plane {i}"))?;
                    for (j, row) in plane.iter().enumerate() {
                        check(row.len(), &format!("row {i},{j}"))?;
                        out.extend(row.iter().map(String::as_str));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One violated requirement found by [`validate_algebra`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    EmptyCarrier,
    DuplicateLabel(String),
    MissingOperation(String),
    WrongArity { op: String, expected: usize, found: usize },
    NonTotal { op: String, detail: String },
    UnknownLabel { op: String, label: String },
    Idempotency { op: String, a: String },
    Commutativity { op: String, a: String, b: String },
    Associativity { op: String, a: String, b: String, c: String },
    Absorption { a: String, b: String },
    UnknownBound { which: &'static str, label: String },
    BoundNotExtremal { which: &'static str, label: String, witness: String },
    BadValue { label: String, text: String },
    MissingValue(String),
    ValueOrder { a: String, b: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Diagnostic::*;
        match self {
            EmptyCarrier => write!(f, "carrier is empty"),
            DuplicateLabel(l) => write!(f, "duplicate label `{l}`"),
            MissingOperation(op) => write!(f, "missing lattice operation `{op}`"),
            WrongArity { op, expected, found } => {
                write!(f, "`{op}` must have arity {expected}, found {found}")
            }
            NonTotal { op, detail } => write!(f, "table `{op}` is not total: {detail}"),
            UnknownLabel { op, label } => write!(f, "table `{op}` mentions unknown element `{label}`"),
            Idempotency { op, a } => write!(f, "idempotency fails at ({a}) for `{op}`"),
            Commutativity { op, a, b } => write!(f, "commutativity fails at ({a},{b}) for `{op}`"),
            Associativity { op, a, b, c } => {
                write!(f, "associativity fails at ({a},{b},{c}) for `{op}`")
            }
            Absorption { a, b } => write!(f, "absorption fails at ({a},{b})"),
            UnknownBound { which, label } => write!(f, "{which} `{label}` is not in the carrier"),
            BoundNotExtremal { which, label, witness } => {
                write!(f, "declared {which} `{label}` is not extremal (witness `{witness}`)")
            }
            BadValue { label, text } => write!(f, "value `{text}` of `{label}` is not a rational"),
            MissingValue(l) => write!(f, "no value annotation for `{l}`"),
            ValueOrder { a, b } => {
                write!(f, "value annotations disagree with the order at ({a},{b})")
            }
        }
    }
}

/// Validates a description and builds the algebra, or returns every
/// violated requirement with a witnessing tuple.
pub fn validate_algebra(spec: &AlgebraSpec) -> Result<LatticeAlgebra, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let size = spec.carrier.len();
    if size == 0 {
        return Err(vec![Diagnostic::EmptyCarrier]);
    }
    let mut index: HashMap<&str, Elem> = HashMap::new();
    for (i, l) in spec.carrier.iter().enumerate() {
        if index.insert(l.as_str(), Elem(i)).is_some() {
            diags.push(Diagnostic::DuplicateLabel(l.clone()));
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut tables: BTreeMap<String, Operation> = BTreeMap::new();
    for (name, table) in &spec.ops {
        let flat = match table.flatten(size) {
            Ok(flat) => flat,
            Err(detail) => {
                diags.push(Diagnostic::NonTotal { op: name.clone(), detail });
                continue;
            }
        };
        let mut entries = Vec::with_capacity(flat.len());
        let mut ok = true;
        for label in flat {
            match index.get(label) {
                Some(&e) => entries.push(e),
                None => {
                    diags.push(Diagnostic::UnknownLabel { op: name.clone(), label: label.to_string() });
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            tables.insert(name.clone(), Operation::new(table.arity(), entries));
        }
    }

    for lattice_op in [names::AND, names::OR] {
        match tables.get(lattice_op) {
            None if !spec.ops.contains_key(lattice_op) => {
                diags.push(Diagnostic::MissingOperation(lattice_op.into()))
            }
            Some(op) if op.arity() != 2 => diags.push(Diagnostic::WrongArity {
                op: lattice_op.into(),
                expected: 2,
                found: op.arity(),
            }),
            _ => {}
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let meet = tables.remove(names::AND).expect("checked above");
    let join = tables.remove(names::OR).expect("checked above");
    let label = |e: Elem| spec.carrier[e.0].clone();
    let at = |op: &Operation, a: Elem, b: Elem| op.table()[a.0 * size + b.0];

    for (name, op) in [(names::AND, &meet), (names::OR, &join)] {
        let elems = || (0..size).map(Elem);
        for a in elems() {
            if at(op, a, a) != a {
                diags.push(Diagnostic::Idempotency { op: name.into(), a: label(a) });
            }
        }
        for a in elems() {
            for b in elems().filter(|b| b.0 > a.0) {
                if at(op, a, b) != at(op, b, a) {
                    diags.push(Diagnostic::Commutativity { op: name.into(), a: label(a), b: label(b) });
                }
            }
        }
        'assoc: for a in elems() {
            for b in elems() {
                for c in elems() {
                    if at(op, at(op, a, b), c) != at(op, a, at(op, b, c)) {
                        diags.push(Diagnostic::Associativity {
                            op: name.into(),
                            a: label(a),
                            b: label(b),
                            c: label(c),
                        });
                        break 'assoc;
                    }
                }
            }
        }
    }
    'absorb: for a in (0..size).map(Elem) {
        for b in (0..size).map(Elem) {
            if at(&meet, a, at(&join, a, b)) != a || at(&join, a, at(&meet, a, b)) != a {
                diags.push(Diagnostic::Absorption { a: label(a), b: label(b) });
                break 'absorb;
            }
        }
    }

    let leq = |a: Elem, b: Elem| at(&meet, a, b) == a;
    for (which, declared, want_bottom) in [("bottom", &spec.bottom, true), ("top", &spec.top, false)] {
        let Some(l) = declared else { continue };
        match index.get(l.as_str()) {
            None => diags.push(Diagnostic::UnknownBound { which, label: l.clone() }),
            Some(&e) => {
                let bad = (0..size)
                    .map(Elem)
                    .find(|&x| if want_bottom { !leq(e, x) } else { !leq(x, e) });
                if let Some(w) = bad {
                    diags.push(Diagnostic::BoundNotExtremal { which, label: l.clone(), witness: label(w) });
                }
            }
        }
    }

    let mut values = None;
    if let Some(map) = &spec.values {
        let mut vals = Vec::with_capacity(size);
        for l in &spec.carrier {
            match map.get(l) {
                None => diags.push(Diagnostic::MissingValue(l.clone())),
                Some(text) => match parse_rational(text) {
                    Some(v) => vals.push(v),
                    None => diags.push(Diagnostic::BadValue { label: l.clone(), text: text.clone() }),
                },
            }
        }
        if vals.len() == size {
            'order: for a in 0..size {
                for b in 0..size {
                    if leq(Elem(a), Elem(b)) != (vals[a] <= vals[b]) {
                        diags.push(Diagnostic::ValueOrder {
                            a: spec.carrier[a].clone(),
                            b: spec.carrier[b].clone(),
                        });
                        break 'order;
                    }
                }
            }
            values = Some(vals);
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let name = spec.name.clone().unwrap_or_else(|| "custom".to_string());
    Ok(LatticeAlgebra::from_parts(name, spec.carrier.clone(), meet, join, tables, values))
}

fn table_spec(alg: &LatticeAlgebra, op: &Operation) -> TableSpec {
    let n = alg.size();
    let l = |e: &Elem| alg.label(*e).to_string();
    let t = op.table();
    match op.arity() {
        1 => TableSpec::Unary(t.iter().map(l).collect()),
        2 => TableSpec::Binary(t.chunks(n).map(|r| r.iter().map(l).collect()).collect()),
        _ => TableSpec::Ternary(
            t.chunks(n * n)
                .map(|p| p.chunks(n).map(|r| r.iter().map(l).collect()).collect())
                .collect(),
        ),
    }
}

pub(super) fn to_spec(alg: &LatticeAlgebra) -> AlgebraSpec {
    let mut ops = BTreeMap::new();
    for name in [names::AND, names::OR] {
        ops.insert(name.to_string(), table_spec(alg, alg.operation(name).unwrap()));
    }
    for (name, op) in alg.extra_ops() {
        ops.insert(name.clone(), table_spec(alg, op));
    }
    AlgebraSpec {
        name: Some(alg.name().to_string()),
        carrier: alg.labels().to_vec(),
        ops,
        bottom: alg.bottom().map(|e| alg.label(e).to_string()),
        top: alg.top().map(|e| alg.label(e).to_string()),
        values: alg.has_values().then(|| {
            alg.elements()
                .map(|e| (alg.label(e).to_string(), format_rational(alg.value(e).unwrap())))
                .collect()
        }),
    }
}
