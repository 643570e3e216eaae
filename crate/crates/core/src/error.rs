use thiserror::Error;

use crate::algebra::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra:\n{}", format_diagnostics(.0))]
    InvalidAlgebra(Vec<Diagnostic>),

    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("unknown connective `{0}`")]
    UnknownConnective(String),

    #[error("unknown constant `#{0}`")]
    UnknownConstant(String),

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("free variable {0}")]
    FreeVariable(String),

    #[error("unbound variable {0}")]
    UnboundVariable(String),

    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("constraint profile: {0}")]
    Profile(String),

    #[error("De Morgan conditions fail: {0}")]
    DeMorgan(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }
}
