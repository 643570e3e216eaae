use super::{Elem, LatticeAlgebra, Operation};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::syntax::Term;

/// Exact extrema of a term function `A^k → A` with lexicographically first
/// witnesses. On non-chains `min`/`max` are the meet and join of all values,
/// and the witnesses are `None` unless that bound is attained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermRange {
    pub min: Elem,
    pub max: Elem,
    pub argmin: Option<Vec<Elem>>,
    pub argmax: Option<Vec<Elem>>,
}

enum Step<'a> {
    Var(usize),
    Const(Elem),
    Op(&'a Operation),
}

/// Postfix program for repeated evaluation of one term.
pub(crate) struct TermProgram<'a> {
    steps: Vec<Step<'a>>,
    size: usize,
}

impl<'a> TermProgram<'a> {
    pub(crate) fn compile(alg: &'a LatticeAlgebra, t: &Term) -> Result<Self> {
        fn walk<'a>(alg: &'a LatticeAlgebra, t: &Term, out: &mut Vec<Step<'a>>) -> Result<()> {
            match t {
                Term::Var(i) => out.push(Step::Var(*i)),
                Term::Const(c) => out.push(Step::Const(
                    alg.elem(c).ok_or_else(|| Error::UnknownConstant(c.clone()))?,
                )),
                Term::Apply { op, args } => {
                    let table = alg.operation(op).ok_or_else(|| Error::UnknownConnective(op.clone()))?;
                    if table.arity() != args.len() {
                        return Err(Error::Arity { name: op.clone(), expected: table.arity(), found: args.len() });
                    }
                    for a in args {
                        walk(alg, a, out)?;
                    }
                    out.push(Step::Op(table));
                }
            }
            Ok(())
        }
        let mut steps = Vec::new();
        walk(alg, t, &mut steps)?;
        Ok(TermProgram { steps, size: alg.size() })
    }

    pub(crate) fn eval(&self, vars: &[Elem], stack: &mut Vec<Elem>) -> Elem {
        stack.clear();
        for s in &self.steps {
            match s {
                Step::Var(i) => stack.push(vars[*i]),
                Step::Const(e) => stack.push(*e),
                Step::Op(op) => {
                    let at = stack.len() - op.arity();
                    let v = op.apply(self.size, &stack[at..]);
                    stack.truncate(at);
                    stack.push(v);
                }
            }
        }
        stack[0]
    }
}

/// Brute force over `A^k`, bounded by `budget.max_term_tuples`.
pub fn term_range_finite(alg: &LatticeAlgebra, t: &Term, budget: &Budget) -> Result<TermRange> {
    let k = t.arity();
    let n = alg.size();
    let total = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > budget.max_term_tuples as u128 {
        return Err(Error::Budget(format!(
            "{n}^{k} argument tuples exceed the limit of {}",
            budget.max_term_tuples
        )));
    }
    let prog = TermProgram::compile(alg, t)?;
    let mut stack = Vec::new();
    let decode = |idx: usize, tuple: &mut [Elem]| {
        let mut rest = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = Elem(rest % n);
            rest /= n;
        }
    };
    let mut args = vec![Elem(0); k];
    let values: Vec<Elem> = (0..total as usize)
        .map(|idx| {
            decode(idx, &mut args);
            prog.eval(&args, &mut stack)
        })
        .collect();
    let min = alg.meet_all(values.iter().copied()).expect("nonempty");
    let max = alg.join_all(values.iter().copied()).expect("nonempty");
    let witness = |idx: usize| {
        let mut tuple = vec![Elem(0); k];
        decode(idx, &mut tuple);
        tuple
    };
    Ok(TermRange {
        min,
        max,
        argmin: values.iter().position(|&v| v == min).map(witness),
        argmax: values.iter().position(|&v| v == max).map(witness),
    })
}
