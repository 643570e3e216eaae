use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use super::{format_rational, names, Elem, LatticeAlgebra, Operation, Rational};
use crate::error::{Error, Result};

fn chain_lattice(size: usize) -> (Operation, Operation) {
    let meet = Operation::from_fn(size, 2, |a| a[0].min(a[1]));
    let join = Operation::from_fn(size, 2, |a| a[0].max(a[1]));
    (meet, join)
}

/// The Łukasiewicz chain `Ł_{N+1} = {0, 1/N, …, 1}` with `¬`, `→`, `⊕`, `⊙`.
pub fn make_mv_chain(n: usize) -> Result<LatticeAlgebra> {
    if n == 0 {
        return Err(Error::InvalidArgument("an MV-chain needs N >= 1".into()));
    }
    let size = n + 1;
    let top = n;
    let values: Vec<Rational> = (0..size).map(|i| Ratio::new(i as i64, n as i64)).collect();
    let labels = values.iter().map(|&v| format_rational(v)).collect();
    let (meet, join) = chain_lattice(size);
    // Work on numerators i/N directly.
    let mut ops = BTreeMap::new();
    ops.insert(names::NOT.into(), Operation::from_fn(size, 1, |a| Elem(top - a[0].0)));
    ops.insert(
        names::IMP.into(),
        Operation::from_fn(size, 2, |a| Elem((top + a[1].0).saturating_sub(a[0].0).min(top))),
    );
    ops.insert(names::OPLUS.into(), Operation::from_fn(size, 2, |a| Elem((a[0].0 + a[1].0).min(top))));
    ops.insert(names::ODOT.into(), Operation::from_fn(size, 2, |a| Elem((a[0].0 + a[1].0).saturating_sub(top))));
    Ok(LatticeAlgebra::from_parts(format!("L{size}"), labels, meet, join, ops, Some(values)))
}

/// The Gödel chain over the given ascending labels, with Gödel `→` and `¬`.
pub fn make_godel_chain<S: AsRef<str>>(labels: &[S]) -> Result<LatticeAlgebra> {
    let size = labels.len();
    if size < 2 {
        return Err(Error::InvalidArgument("a G-chain needs at least 2 elements".into()));
    }
    let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
    if labels.iter().collect::<BTreeSet<_>>().len() != size {
        return Err(Error::InvalidArgument("G-chain labels must be distinct".into()));
    }
    let top = Elem(size - 1);
    let imp = move |a: Elem, b: Elem| if a <= b { top } else { b };
    let (meet, join) = chain_lattice(size);
    let mut ops = BTreeMap::new();
    ops.insert(names::IMP.into(), Operation::from_fn(size, 2, |a| imp(a[0], a[1])));
    ops.insert(names::NOT.into(), Operation::from_fn(size, 1, |a| imp(a[0], Elem(0))));
    Ok(LatticeAlgebra::from_parts(format!("G{size}"), labels, meet, join, ops, None))
}

/// `G_{N+1}` with labels `0, g1, …, g{N-1}, 1`.
pub fn godel_chain(size: usize) -> Result<LatticeAlgebra> {
    let labels: Vec<String> = (0..size)
        .map(|i| match i {
            0 => "0".to_string(),
            i if i + 1 == size => "1".to_string(),
            i => format!("g{i}"),
        })
        .collect();
    make_godel_chain(&labels)
}

/// The two-element Boolean algebra (`Ł_2` renamed).
pub fn make_boolean() -> LatticeAlgebra {
    let mut b = make_mv_chain(1).expect("N = 1 is valid");
    b.set_name("B2");
    b
}

/// Componentwise product; both factors must have the same connectives.
pub fn product(a: &LatticeAlgebra, b: &LatticeAlgebra) -> Result<LatticeAlgebra> {
    let sig_a: Vec<(&String, usize)> = a.extra_ops().iter().map(|(k, op)| (k, op.arity())).collect();
    let sig_b: Vec<(&String, usize)> = b.extra_ops().iter().map(|(k, op)| (k, op.arity())).collect();
    if sig_a != sig_b {
        return Err(Error::SignatureMismatch(format!(
            "{} has {:?} but {} has {:?}",
            a.name(),
            sig_a.iter().map(|(k, _)| k).collect::<Vec<_>>(),
            b.name(),
            sig_b.iter().map(|(k, _)| k).collect::<Vec<_>>()
        )));
    }
    let (na, nb) = (a.size(), b.size());
    let size = na * nb;
    let split = |e: Elem| (Elem(e.0 / nb), Elem(e.0 % nb));
    let pair = |x: Elem, y: Elem| Elem(x.0 * nb + y.0);
    let lift = |name: &str, arity: usize| {
        let (oa, ob) = (a.operation(name).unwrap(), b.operation(name).unwrap());
        Operation::from_fn(size, arity, |args| {
            let xs: Vec<Elem> = args.iter().map(|&e| split(e).0).collect();
            let ys: Vec<Elem> = args.iter().map(|&e| split(e).1).collect();
            pair(oa.apply(na, &xs), ob.apply(nb, &ys))
        })
    };
    let labels = (0..size)
        .map(|i| {
            let (x, y) = split(Elem(i));
            format!("<{},{}>", a.label(x), b.label(y))
        })
        .collect();
    let ops = a
        .extra_ops()
        .iter()
        .map(|(k, op)| (k.clone(), lift(k, op.arity())))
        .collect();
    Ok(LatticeAlgebra::from_parts(
        format!("prod({},{})", a.name(), b.name()),
        labels,
        lift(names::AND, 2),
        lift(names::OR, 2),
        ops,
        None,
    ))
}

/// Restricts the signature to `keep`; the lattice reduct is always retained.
pub fn reduct<S: AsRef<str>>(a: &LatticeAlgebra, keep: &[S]) -> Result<LatticeAlgebra> {
    let keep: BTreeSet<&str> = keep.iter().map(|s| s.as_ref()).collect();
    for name in &keep {
        if a.operation(name).is_none() {
            return Err(Error::UnknownConnective(name.to_string()));
        }
    }
    let ops: BTreeMap<String, Operation> = a
        .extra_ops()
        .iter()
        .filter(|(k, _)| keep.contains(k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let mut out = a.clone();
    if ops.len() != a.extra_ops().len() {
        let mut shown: Vec<&str> = vec![names::AND, names::OR];
        shown.extend(ops.keys().map(String::as_str));
        out.set_name(format!("{}{{{}}}", a.name(), shown.join(",")));
    }
    out.ops = ops;
    Ok(out)
}

/// Names accepted by [`builtin`], for listings.
pub fn builtin_names() -> Vec<&'static str> {
    vec!["B2", "L<k> (k >= 2)", "G<k> (k >= 2)", "prod(<name>,<name>)"]
}

/// Resolves `B2`, `L<k>`, `G<k>` and `prod(X,Y)`. A product of factors
/// with different signatures is taken over their common connectives.
pub fn builtin(name: &str) -> Result<LatticeAlgebra> {
    let name = name.trim();
    if name == "B2" {
        return Ok(make_boolean());
    }
    if let Some(inner) = name.strip_prefix("prod(").and_then(|s| s.strip_suffix(')')) {
        let mut depth = 0usize;
        let split = inner.char_indices().find(|&(_, c)| {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => return true,
                _ => {}
            }
            false
        });
        let Some((at, _)) = split else {
            return Err(Error::UnknownAlgebra(name.into()));
        };
        let a = builtin(&inner[..at])?;
        let b = builtin(&inner[at + 1..])?;
        let common: Vec<String> = a
            .extra_ops()
            .iter()
            .filter(|(k, op)| b.extra_ops().get(*k).map(|o| o.arity()) == Some(op.arity()))
            .map(|(k, _)| k.clone())
            .collect();
        let mut p = product(&reduct(&a, &common)?, &reduct(&b, &common)?)?;
        p.set_name(format!("prod({},{})", a.name(), b.name()));
        return Ok(p);
    }
    let parse_size = |rest: &str| rest.parse::<usize>().ok().filter(|&k| k >= 2);
    if let Some(k) = name.strip_prefix('L').and_then(parse_size) {
        return make_mv_chain(k - 1);
    }
    if let Some(k) = name.strip_prefix('G').and_then(parse_size) {
        return godel_chain(k);
    }
    Err(Error::UnknownAlgebra(name.into()))
}
