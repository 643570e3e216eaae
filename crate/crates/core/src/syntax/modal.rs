use std::fmt;

use super::{Formula, Vocabulary};

/// Propositional S5 formula with `box`/`dia`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModalFormula {
    Letter(String),
    Const(String),
    Apply { op: String, args: Vec<ModalFormula> },
    Box(Box<ModalFormula>),
    Dia(Box<ModalFormula>),
}

impl ModalFormula {
    /// Every letter occurs in the scope of a modality.
    pub fn is_fully_modal(&self) -> bool {
        match self {
            ModalFormula::Letter(_) => false,
            ModalFormula::Const(_) => true,
            ModalFormula::Apply { args, .. } => args.iter().all(ModalFormula::is_fully_modal),
            ModalFormula::Box(_) | ModalFormula::Dia(_) => true,
        }
    }

    pub fn letters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut Vec<String>) {
        match self {
            ModalFormula::Letter(p) if !out.contains(p) => out.push(p.clone()),
            ModalFormula::Apply { args, .. } => args.iter().for_each(|a| a.collect_letters(out)),
            ModalFormula::Box(a) | ModalFormula::Dia(a) => a.collect_letters(out),
            _ => {}
        }
    }

    /// The unary vocabulary `{P_i}` the translation lands in.
    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.letters().iter().map(|p| (predicate(p), 1)), false)
            .expect("letters map to distinct predicate names")
    }
}

/// `p` becomes `P`, `q1` becomes `Q1`.
fn predicate(letter: &str) -> String {
    let mut c = letter.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

const WORLD: &str = "w";

/// Standard translation into the one-variable fragment: letters become
/// `P(w)`, `box` becomes `forall w` and `dia` becomes `exists w`.
pub fn s5_translate(m: &ModalFormula) -> Formula {
    match m {
        ModalFormula::Letter(p) => Formula::atom(&predicate(p), &[WORLD]),
        ModalFormula::Const(c) => Formula::Const(c.clone()),
        ModalFormula::Apply { op, args } => Formula::Apply {
            op: op.clone(),
            args: args.iter().map(s5_translate).collect(),
        },
        ModalFormula::Box(a) => Formula::forall(WORLD, s5_translate(a)),
        ModalFormula::Dia(a) => Formula::exists(WORLD, s5_translate(a)),
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModalFormula::Letter(p) => f.write_str(p),
            ModalFormula::Const(c) => write!(f, "#{c}"),
            ModalFormula::Apply { op, args } => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ModalFormula::Box(a) => write!(f, "box ({a})"),
            ModalFormula::Dia(a) => write!(f, "dia ({a})"),
        }
    }
}
