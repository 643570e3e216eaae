//! Formulas lowered to an arena with variables resolved to slots.

use crate::algebra::{Elem, LatticeAlgebra, Operation, Rational};
use crate::error::{Error, Result};
use crate::syntax::{Direction, Formula, Vocabulary};

pub(crate) type NodeId = usize;

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Atom { rel: usize, slots: Vec<usize> },
    Eq(usize, usize),
    Const(usize),
    Op { op: usize, args: Vec<NodeId> },
    Threshold { arg: NodeId, dir: Direction, bound: Rational },
    Quant { forall: bool, slot: usize, body: NodeId, free: Vec<usize> },
}

/// A formula with every variable occurrence mapped to a slot. Free
/// variables occupy slots `0..free.len()`; each binder gets its own slot.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub nodes: Vec<Node>,
    pub root: NodeId,
    pub slots: usize,
    pub free: Vec<String>,
    pub ops: Vec<(String, usize)>,
    pub consts: Vec<String>,
}

struct Builder<'v> {
    vocab: &'v Vocabulary,
    nodes: Vec<Node>,
    scope: Vec<(String, usize)>,
    slots: usize,
    ops: Vec<(String, usize)>,
    consts: Vec<String>,
}

impl Builder<'_> {
    fn slot(&self, v: &str) -> Result<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn build(&mut self, f: &Formula) -> Result<NodeId> {
        let node = match f {
            Formula::Atom { rel, args } => {
                let idx = self
                    .vocab
                    .index(rel)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown relation {rel}")))?;
                let arity = self.vocab.relations()[idx].1;
                if arity != args.len() {
                    return Err(Error::Arity { name: rel.clone(), expected: arity, found: args.len() });
                }
                let slots = args.iter().map(|a| self.slot(a)).collect::<Result<_>>()?;
                Node::Atom { rel: idx, slots }
            }
            Formula::Eq(x, y) => Node::Eq(self.slot(x)?, self.slot(y)?),
            Formula::Const(c) => {
                let idx = match self.consts.iter().position(|k| k == c) {
                    Some(i) => i,
                    None => {
                        self.consts.push(c.clone());
                        self.consts.len() - 1
                    }
                };
                Node::Const(idx)
            }
            Formula::Apply { op, args } => {
                let idx = match self.ops.iter().position(|(o, a)| o == op && *a == args.len()) {
                    Some(i) => i,
                    None => {
                        self.ops.push((op.clone(), args.len()));
                        self.ops.len() - 1
                    }
                };
                let args = args.iter().map(|a| self.build(a)).collect::<Result<_>>()?;
                Node::Op { op: idx, args }
            }
            Formula::Threshold { arg, dir, bound } => {
                let arg = self.build(arg)?;
                Node::Threshold { arg, dir: *dir, bound: *bound }
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let free = f
                    .free_variables()
                    .iter()
                    .map(|v| self.slot(v))
                    .collect::<Result<Vec<_>>>()?;
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((x.clone(), slot));
                let body = self.build(body)?;
                self.scope.pop();
                Node::Quant { forall: matches!(f, Formula::Forall(..)), slot, body, free }
            }
        };
        Ok(self.push(node))
    }
}

impl Compiled {
    pub fn new(f: &Formula, vocab: &Vocabulary) -> Result<Self> {
        let free = f.free_variables();
        let mut b = Builder {
            vocab,
            nodes: Vec::new(),
            scope: free.iter().cloned().zip(0..).collect(),
            slots: free.len(),
            ops: Vec::new(),
            consts: Vec::new(),
        };
        let root = b.build(f)?;
        Ok(Compiled { nodes: b.nodes, root, slots: b.slots, free, ops: b.ops, consts: b.consts })
    }

    pub fn has_identity(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, Node::Eq(..)))
    }
}

/// Connective tables and constants of a compiled formula resolved against
/// a finite algebra. Thresholds become unary tables.
pub(crate) struct Resolved<'a> {
    pub alg: &'a LatticeAlgebra,
    pub ops: Vec<&'a Operation>,
    pub consts: Vec<Elem>,
    pub thresholds: Vec<Option<Operation>>,
    pub top: Elem,
    pub bottom: Elem,
}

impl<'a> Resolved<'a> {
    pub fn new(c: &Compiled, alg: &'a LatticeAlgebra) -> Result<Self> {
        let ops = c
            .ops
            .iter()
            .map(|(name, arity)| match alg.operation(name) {
                Some(op) if op.arity() == *arity => Ok(op),
                Some(op) => Err(Error::Arity { name: name.clone(), expected: op.arity(), found: *arity }),
                None => Err(Error::UnknownConnective(name.clone())),
            })
            .collect::<Result<_>>()?;
        let consts = c
            .consts
            .iter()
            .map(|l| alg.elem(l).ok_or_else(|| Error::UnknownConstant(l.clone())))
            .collect::<Result<_>>()?;
        let thresholds = c
            .nodes
            .iter()
            .map(|n| match n {
                Node::Threshold { dir, bound, .. } => alg
                    .threshold_table(*dir == Direction::Ge, *bound)
                    .map(Some)
                    .ok_or_else(|| {
                        Error::Unsupported(format!("thresholds need rational values; {} has none", alg.name()))
                    }),
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        let (bottom, top) = match (alg.bottom(), alg.top()) {
            (Some(b), Some(t)) => (b, t),
            _ => return Err(Error::Unsupported(format!("{} is not bounded", alg.name()))),
        };
        Ok(Resolved { alg, ops, consts, thresholds, top, bottom })
    }
}
