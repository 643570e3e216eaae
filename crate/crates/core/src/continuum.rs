//! `[0,1]`-valued Łukasiewicz logic with product: evaluation, uniform
//! sampling, concentration estimates and grid-certified term extrema.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{names, parse_rational, Rational, Signature};
use crate::asymptotic::extension_atoms;
use crate::budget::Budget;
use crate::compiled::{Compiled, Node, NodeId};
use crate::error::{Error, Result};
use crate::semantics::cell_index;
use crate::syntax::{Direction, Formula, Term, Vocabulary};
use crate::translator::forall_distinct;

/// Slack used when comparing a value against a threshold bound.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Op {
    And,
    Or,
    Not,
    Imp,
    Oplus,
    Odot,
    Mul,
}

impl Op {
    fn from_name(name: &str, arity: usize) -> Result<Op> {
        let (op, want) = match name {
            names::AND => (Op::And, 2),
            names::OR => (Op::Or, 2),
            names::NOT => (Op::Not, 1),
            names::IMP => (Op::Imp, 2),
            names::OPLUS => (Op::Oplus, 2),
            names::ODOT => (Op::Odot, 2),
            names::MUL => (Op::Mul, 2),
            _ => return Err(Error::UnknownConnective(name.into())),
        };
        if arity != want {
            return Err(Error::Arity { name: name.into(), expected: want, found: arity });
        }
        Ok(op)
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Op::And => a.min(b),
            Op::Or => a.max(b),
            Op::Not => 1.0 - a,
            Op::Imp => (1.0 - a + b).min(1.0),
            Op::Oplus => (a + b).min(1.0),
            Op::Odot => (a + b - 1.0).max(0.0),
            Op::Mul => a * b,
        }
    }
}

/// Connectives available on `[0,1]`, with the constants `0` and `1`.
pub fn signature() -> Signature {
    let ops = [
        (names::AND, 2),
        (names::OR, 2),
        (names::NOT, 1),
        (names::IMP, 2),
        (names::OPLUS, 2),
        (names::ODOT, 2),
        (names::MUL, 2),
    ];
    Signature {
        ops: ops.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
        constants: vec!["0".into(), "1".into()],
        chain_values: true,
    }
}

fn constant(label: &str) -> Result<f64> {
    let r = parse_rational(label).ok_or_else(|| Error::UnknownConstant(label.into()))?;
    let x = ratio_f64(r);
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::UnknownConstant(label.into()));
    }
    Ok(x)
}

fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A finite structure with relation values in `[0,1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalStructure {
    n: usize,
    vocab: Vocabulary,
    tables: Vec<Vec<f64>>,
}

impl IntervalStructure {
    pub fn new(n: usize, vocab: Vocabulary, tables: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("domain must be nonempty".into()));
        }
        if tables.len() != vocab.relations().len() {
            return Err(Error::Structure(format!("{} tables for {} relations", tables.len(), vocab.relations().len())));
        }
        for ((name, arity), t) in vocab.relations().iter().zip(&tables) {
            if t.len() != n.pow(*arity as u32) {
                return Err(Error::Structure(format!("table for {name} has {} cells", t.len())));
            }
            if t.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::Structure(format!("table for {name} leaves [0,1]")));
            }
        }
        Ok(IntervalStructure { n, vocab, tables })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn table(&self, rel: &str) -> Option<&[f64]> {
        self.vocab.index(rel).map(|i| self.tables[i].as_slice())
    }

    pub fn get(&self, rel: &str, tuple: &[usize]) -> Option<f64> {
        let i = self.vocab.index(rel)?;
        if tuple.len() != self.vocab.relations()[i].1 || tuple.iter().any(|&d| d >= self.n) {
            return None;
        }
        Some(self.tables[i][cell_index(self.n, tuple.iter().copied())])
    }
}

fn sample_indexed(n: usize, vocab: &Vocabulary, seed: u64, index: u64) -> IntervalStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let tables = vocab
        .relations()
        .iter()
        .enumerate()
        .map(|(r, (_, arity))| {
            rng.set_word_pos((r as u128) << 32);
            (0..n.pow(*arity as u32)).map(|_| rng.gen::<f64>()).collect()
        })
        .collect();
    IntervalStructure { n, vocab: vocab.clone(), tables }
}

/// Every cell uniform on `[0,1]`, independently. Identity stays crisp.
pub fn sample_interval_structure(n: usize, vocab: &Vocabulary, seed: u64) -> Result<IntervalStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("domain size must be at least 1".into()));
    }
    Ok(sample_indexed(n, vocab, seed, 0))
}

/// A formula compiled for repeated evaluation on interval structures.
pub struct IntervalEvaluator {
    compiled: Compiled,
    ops: Vec<Op>,
    consts: Vec<f64>,
}

impl IntervalEvaluator {
    pub fn new(f: &Formula, vocab: &Vocabulary) -> Result<Self> {
        // Identity is resolved from positions, so it is always available.
        let compiled = Compiled::new(f, &vocab.clone().with_crisp_identity(true))?;
        let ops = compiled.ops.iter().map(|(n, a)| Op::from_name(n, *a)).collect::<Result<_>>()?;
        let consts = compiled.consts.iter().map(|c| constant(c)).collect::<Result<_>>()?;
        Ok(IntervalEvaluator { compiled, ops, consts })
    }

    pub fn free_variables(&self) -> &[String] {
        &self.compiled.free
    }

    pub fn eval_slots(&self, m: &IntervalStructure, free: &[usize]) -> Result<f64> {
        if free.len() != self.compiled.free.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} free variable value(s), got {}",
                self.compiled.free.len(),
                free.len()
            )));
        }
        if free.iter().any(|&d| d >= m.n) {
            return Err(Error::InvalidArgument("assignment outside the domain".into()));
        }
        let mut env = vec![0; self.compiled.slots];
        env[..free.len()].copy_from_slice(free);
        Ok(self.eval(m, self.compiled.root, &mut env))
    }

    pub fn eval_sentence(&self, m: &IntervalStructure) -> Result<f64> {
        match self.compiled.free.first() {
            Some(v) => Err(Error::UnboundVariable(v.clone())),
            None => self.eval_slots(m, &[]),
        }
    }

    fn eval(&self, m: &IntervalStructure, id: NodeId, env: &mut [usize]) -> f64 {
        match &self.compiled.nodes[id] {
            Node::Atom { rel, slots } => m.tables[*rel][cell_index(m.n, slots.iter().map(|&s| env[s]))],
            Node::Eq(a, b) => f64::from(u8::from(env[*a] == env[*b])),
            Node::Const(c) => self.consts[*c],
            Node::Op { op, args } => {
                let a = self.eval(m, args[0], env);
                let b = if args.len() > 1 { self.eval(m, args[1], env) } else { 0.0 };
                self.ops[*op].apply(a, b)
            }
            Node::Threshold { arg, dir, bound } => {
                let x = self.eval(m, *arg, env);
                let r = ratio_f64(*bound);
                let holds = match dir {
                    Direction::Ge => x >= r - THRESHOLD_SLACK,
                    Direction::Le => x <= r + THRESHOLD_SLACK,
                };
                f64::from(u8::from(holds))
            }
            Node::Quant { forall, slot, body, .. } => {
                let (stop, mut acc) = if *forall { (0.0, 1.0) } else { (1.0, 0.0) };
                for d in 0..m.n {
                    env[*slot] = d;
                    let v = self.eval(m, *body, env);
                    acc = if *forall { f64::min(acc, v) } else { f64::max(acc, v) };
                    if acc == stop {
                        break;
                    }
                }
                acc
            }
        }
    }
}

/// Value of `f` with free variables mapped to 0-based elements.
pub fn evaluate_interval(m: &IntervalStructure, f: &Formula, asg: &BTreeMap<String, usize>) -> Result<f64> {
    let ev = IntervalEvaluator::new(f, &m.vocab)?;
    let free = ev
        .free_variables()
        .iter()
        .map(|v| asg.get(v).copied().ok_or_else(|| Error::UnboundVariable(v.clone())))
        .collect::<Result<Vec<_>>>()?;
    ev.eval_slots(m, &free)
}

/// The crisp event `value(f) >= r` or `value(f) <= r`, as a formula.
pub fn threshold_event(f: Formula, r: Rational, dir: Direction) -> Formula {
    Formula::threshold(f, dir, r)
}

/// A closed subinterval of `[0,1]` with rational endpoints.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueInterval {
    #[serde(serialize_with = "ser_ratio")]
    pub lower: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub upper: Rational,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(ratio_f64(*r))
}

impl ValueInterval {
    pub fn new(lower: Rational, upper: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if lower < zero || upper > one || lower > upper {
            return Err(Error::InvalidArgument(format!("[{lower}, {upper}] is not a subinterval of [0,1]")));
        }
        Ok(ValueInterval { lower, upper })
    }

    /// `[j/N, (j+1)/N]`.
    pub fn grid(n: i64, j: i64) -> Result<Self> {
        if n < 1 || !(0..n).contains(&j) {
            return Err(Error::InvalidArgument(format!("no cell {j} in a grid of {n}")));
        }
        Self::new(Rational::new(j, n), Rational::new(j + 1, n))
    }

    pub fn contains(&self, x: f64) -> bool {
        ratio_f64(self.lower) - THRESHOLD_SLACK <= x && x <= ratio_f64(self.upper) + THRESHOLD_SLACK
    }

    /// `ge(f, lower) & le(f, upper)`.
    pub fn membership(&self, f: Formula) -> Formula {
        Formula::and(
            threshold_event(f.clone(), self.lower, Direction::Ge),
            threshold_event(f, self.upper, Direction::Le),
        )
    }
}

impl fmt::Display for ValueInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", crate::algebra::format_rational(self.lower), crate::algebra::format_rational(self.upper))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub frequency: f64,
}

/// Sampled values of a sentence on uniform random structures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub sentence: String,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub histogram: Vec<Bin>,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub interval: Option<ValueInterval>,
    /// Fraction of samples inside `interval`.
    pub in_interval: Option<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl fmt::Display for ConcentrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}  (n = {}, {} samples, seed {})", self.sentence, self.n, self.samples, self.seed)?;
        writeln!(f, "median {:.6}, range [{:.6}, {:.6}]", self.median, self.min, self.max)?;
        if let (Some(v), Some(p)) = (self.interval, self.in_interval) {
            writeln!(f, "fraction in {v}: {p:.4}")?;
        }
        for b in &self.histogram {
            writeln!(f, "  [{:.3}, {:.3})  {:.4}", b.low, b.high, b.frequency)?;
        }
        Ok(())
    }
}

/// Histogram, median and interval mass of `sentence` over `samples`
/// uniform structures on `n` elements.
pub fn estimate_concentration(
    sentence: &Formula,
    vocab: &Vocabulary,
    n: usize,
    samples: u64,
    bins: usize,
    seed: u64,
    interval: Option<ValueInterval>,
) -> Result<ConcentrationReport> {
    if samples == 0 || bins == 0 || n == 0 {
        return Err(Error::InvalidArgument("n, samples and bins must be positive".into()));
    }
    let ev = IntervalEvaluator::new(sentence, vocab)?;
    if let Some(v) = ev.free_variables().first() {
        return Err(Error::FreeVariable(v.clone()));
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| ev.eval_sentence(&sample_indexed(n, vocab, seed, i)))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; bins];
    for &v in &values {
        counts[((v * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| Bin {
            low: i as f64 / bins as f64,
            high: (i + 1) as f64 / bins as f64,
            frequency: c as f64 / samples as f64,
        })
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { (sorted[mid - 1] + sorted[mid]) / 2.0 };
    let in_interval =
        interval.map(|v| values.iter().filter(|&&x| v.contains(x)).count() as f64 / samples as f64);
    Ok(ConcentrationReport {
        sentence: sentence.to_string(),
        n,
        samples,
        seed,
        histogram,
        median,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        interval,
        in_interval,
        values,
    })
}

/// `Ext(k, N, g)`: any `k` distinct elements have a further element whose
/// atoms over the `k + 1` fall into the grid cells `[g_i/N, (g_i+1)/N]`,
/// one cell per atom of `extension_atoms(k, vocab)`.
pub fn extension_axiom_interval(k: usize, n: i64, g: &[i64], vocab: &Vocabulary) -> Result<Formula> {
    let atoms = extension_atoms(k, vocab);
    if g.len() != atoms.len() {
        return Err(Error::InvalidArgument(format!("g has {} cells for {} atoms", g.len(), atoms.len())));
    }
    let vars: Vec<String> = (1..=k + 1).map(|i| format!("x{i}")).collect();
    let fresh = &vars[k];
    let mut conj: Vec<Formula> = vars[..k].iter().map(|v| Formula::not(Formula::eq(fresh, v))).collect();
    for (a, &j) in atoms.iter().zip(g) {
        let (name, _) = &vocab.relations()[a.rel];
        let args: Vec<&str> = a.tuple.iter().map(|&i| vars[i].as_str()).collect();
        conj.push(ValueInterval::grid(n, j)?.membership(Formula::atom(name, &args)));
    }
    let body = Formula::exists(fresh, Formula::fold(names::AND, conj).expect("nonempty"));
    Ok(if k == 0 { body } else { forall_distinct(&vars[..k], body) })
}

enum Step {
    Var(usize),
    Const(f64),
    Op(Op, usize),
}

/// A term flattened to postfix order.
struct Program {
    steps: Vec<Step>,
}

impl Program {
    fn compile(t: &Term) -> Result<Program> {
        fn walk(t: &Term, out: &mut Vec<Step>) -> Result<()> {
            match t {
                Term::Var(i) => out.push(Step::Var(*i)),
                Term::Const(c) => out.push(Step::Const(constant(c)?)),
                Term::Apply { op, args } => {
                    let o = Op::from_name(op, args.len())?;
                    for a in args {
                        walk(a, out)?;
                    }
                    out.push(Step::Op(o, args.len()));
                }
            }
            Ok(())
        }
        let mut steps = Vec::new();
        walk(t, &mut steps)?;
        Ok(Program { steps })
    }

    fn eval(&self, vars: &[f64], stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        for s in &self.steps {
            match s {
                Step::Var(i) => stack.push(vars[*i]),
                Step::Const(c) => stack.push(*c),
                Step::Op(op, 1) => {
                    let a = stack.pop().expect("arity");
                    stack.push(op.apply(a, 0.0));
                }
                Step::Op(op, _) => {
                    let b = stack.pop().expect("arity");
                    let a = stack.pop().expect("arity");
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremumResult {
    pub inf: f64,
    pub sup: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
    /// Reported extrema are within this distance of the true ones.
    pub error_bound: f64,
    pub lipschitz: f64,
    pub spacing: f64,
    pub evaluations: u64,
    pub notes: Vec<String>,
}

impl fmt::Display for ExtremumResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt = |p: &[f64]| p.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
        writeln!(f, "inf {:.6} at ({})", self.inf, pt(&self.argmin))?;
        writeln!(f, "sup {:.6} at ({})", self.sup, pt(&self.argmax))?;
        write!(f, "error bound {:.2e} (Lipschitz {}, spacing {:.2e}, {} evaluations)", self.error_bound, self.lipschitz, self.spacing, self.evaluations)?;
        for n in &self.notes {
            write!(f, "\nnote: {n}")?;
        }
        Ok(())
    }
}

/// `not v | mul(v, v)` in either argument order.
fn is_golden_term(t: &Term) -> bool {
    let Term::Apply { op, args } = t else { return false };
    if op != names::OR || args.len() != 2 {
        return false;
    }
    let neg = |t: &Term| matches!(t, Term::Apply { op, args } if op == names::NOT && args == &[Term::Var(0)]);
    let sq = |t: &Term| matches!(t, Term::Apply { op, args } if op == names::MUL && args == &[Term::Var(0), Term::Var(0)]);
    (neg(&args[0]) && sq(&args[1])) || (sq(&args[0]) && neg(&args[1]))
}

/// Infimum and supremum of `t` over `[0,1]^k` by grid search.
///
/// Every connective is 1-Lipschitz in each argument, so `t` is Lipschitz
/// in the max-norm with constant `L` = number of variable occurrences. The
/// spacing is halved from 1/16 until `L·h <= tol`; only that final grid is
/// evaluated, and the grid extrema are within `L·h/2` of the true ones.
pub fn term_extremum_interval(t: &Term, tol: f64, budget: &Budget) -> Result<ExtremumResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let program = Program::compile(t)?;
    let k = t.arity();
    let lipschitz = t.occurrences() as f64;
    let mut steps: u64 = 16;
    while lipschitz / steps as f64 > tol {
        steps = steps
            .checked_mul(2)
            .filter(|s| *s <= budget.max_grid_evaluations)
            .ok_or_else(|| Error::Budget(format!("tolerance {tol} is unreachable")))?;
    }
    let side = steps + 1;
    let total = (0..k).try_fold(1u64, |acc, _| acc.checked_mul(side)).filter(|&t| t <= budget.max_grid_evaluations);
    let total = total.ok_or_else(|| {
        Error::Budget(format!(
            "tolerance {tol} needs {side}^{k} grid points, more than {}",
            budget.max_grid_evaluations
        ))
    })?;
    let h = 1.0 / steps as f64;
    let point = |idx: u64| {
        let mut rest = idx;
        let mut p = vec![0.0; k];
        for x in p.iter_mut().rev() {
            *x = (rest % side) as f64 * h;
            rest /= side;
        }
        p
    };
    // (min value, its index, max value, its index); ties keep the first index.
    type Acc = (f64, u64, f64, u64);
    let merge = |a: Acc, b: Acc| -> Acc {
        let lo = if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { (b.0, b.1) } else { (a.0, a.1) };
        let hi = if b.2 > a.2 || (b.2 == a.2 && b.3 < a.3) { (b.2, b.3) } else { (a.2, a.3) };
        (lo.0, lo.1, hi.0, hi.1)
    };
    let empty: Acc = (f64::INFINITY, u64::MAX, f64::NEG_INFINITY, u64::MAX);
    let (inf, imin, sup, imax) = (0..total)
        .into_par_iter()
        .fold(
            || (empty, Vec::new()),
            |(acc, mut stack), idx| {
                let v = program.eval(&point(idx), &mut stack);
                (merge(acc, (v, idx, v, idx)), stack)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| empty, merge);
    let mut notes = Vec::new();
    if is_golden_term(t) {
        notes.push(format!(
            "the minimum value is (3-√5)/2 ≈ {:.6}, attained at v = (√5-1)/2 ≈ {:.6}; \
             the latter number is the minimizer, not the minimum",
            (3.0 - 5f64.sqrt()) / 2.0,
            (5f64.sqrt() - 1.0) / 2.0
        ));
    }
    Ok(ExtremumResult {
        inf,
        sup,
        argmin: point(imin),
        argmax: point(imax),
        error_bound: lipschitz * h / 2.0,
        lipschitz,
        spacing: h,
        evaluations: total,
        notes,
    })
}
