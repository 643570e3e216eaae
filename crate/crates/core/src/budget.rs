use crate::error::{Error, Result};

/// Guardrails for the exponential procedures. All limits are configuration,
/// never hard-wired; [`Budget::from_env`] applies `MVZERO_*` overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum quantifier nesting handled by the decision procedure.
    pub max_quantifier_depth: usize,
    /// Maximum carrier size for the decision procedure.
    pub max_carrier: usize,
    /// Maximum relation arity for the decision procedure.
    pub max_arity: usize,
    /// Maximum number of expansions enumerated at a single quantifier.
    pub max_expansions: u64,
    /// Maximum number of argument tuples in brute-force term extrema.
    pub max_term_tuples: u64,
    /// Maximum number of structures enumerated for exact distributions.
    pub max_models: u64,
    /// Maximum total grid evaluations for continuous extrema.
    pub max_grid_evaluations: u64,
    /// Maximum number of entries kept in the decision-procedure memo table.
    pub memo_capacity: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_quantifier_depth: 4,
            max_carrier: 12,
            max_arity: 3,
            max_expansions: 1_000_000,
            max_term_tuples: 10_000_000,
            max_models: 1_000_000,
            max_grid_evaluations: 1 << 24,
            memo_capacity: 1 << 20,
        }
    }
}

impl Budget {
    pub fn from_env() -> Result<Self> {
        let mut b = Budget::default();
        fn read<T: std::str::FromStr>(key: &str, slot: &mut T) -> Result<()> {
            if let Ok(v) = std::env::var(key) {
                *slot = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("{key}={v} is not a number")))?;
            }
            Ok(())
        }
        read("MVZERO_MAX_DEPTH", &mut b.max_quantifier_depth)?;
        read("MVZERO_MAX_CARRIER", &mut b.max_carrier)?;
        read("MVZERO_MAX_ARITY", &mut b.max_arity)?;
        read("MVZERO_MAX_EXPANSIONS", &mut b.max_expansions)?;
        read("MVZERO_MAX_TERM_TUPLES", &mut b.max_term_tuples)?;
        read("MVZERO_MAX_MODELS", &mut b.max_models)?;
        read("MVZERO_MAX_GRID", &mut b.max_grid_evaluations)?;
        read("MVZERO_MEMO_CAPACITY", &mut b.memo_capacity)?;
        Ok(b)
    }
}
