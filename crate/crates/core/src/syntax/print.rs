use std::fmt;

use super::Formula;
use crate::algebra::{format_rational, names};

const QUANT: u8 = 0;
const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

fn infix(op: &str) -> Option<(&'static str, u8)> {
    match op {
        names::IMP => Some(("->", IMP)),
        names::OR => Some(("|", OR)),
        names::AND => Some(("&", AND)),
        _ => None,
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => QUANT,
        Formula::Apply { op, args } if args.len() == 2 => infix(op).map_or(UNARY, |(_, p)| p),
        _ => UNARY,
    }
}

/// Writes `f` in a context of precedence `ctx`, adding parentheses when
/// the formula binds looser than the context.
pub(super) fn formula(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(f);
    let paren = p < ctx || (p == QUANT && ctx > QUANT);
    if paren {
        out.write_str("(")?;
    }
    match f {
        Formula::Atom { rel, args } if args.is_empty() => out.write_str(rel)?,
        Formula::Atom { rel, args } => write!(out, "{}({})", rel, args.join(", "))?,
        Formula::Eq(x, y) => write!(out, "{x} ~ {y}")?,
        Formula::Const(c) => write!(out, "#{c}")?,
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            let q = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            write!(out, "{q} {x}. ")?;
            formula(b, QUANT, out)?;
        }
        Formula::Threshold { arg, dir, bound } => {
            write!(out, "{}(", dir.keyword())?;
            formula(arg, QUANT, out)?;
            write!(out, ", {})", format_rational(*bound))?;
        }
        Formula::Apply { op, args } => match (infix(op), args.as_slice()) {
            (Some((sym, p)), [l, r]) => {
                let (lp, rp) = if p == IMP { (p + 1, p) } else { (p, p + 1) };
                formula(l, lp, out)?;
                write!(out, " {sym} ")?;
                formula(r, rp, out)?;
            }
            (_, [a]) if op == names::NOT => {
                out.write_str("not ")?;
                formula(a, UNARY, out)?;
            }
            _ => {
                write!(out, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_str(", ")?;
                    }
                    formula(a, QUANT, out)?;
                }
                out.write_str(")")?;
            }
        },
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}
