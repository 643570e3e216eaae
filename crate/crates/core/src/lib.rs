//! Almost-sure truth values of many-valued first-order sentences.
//!
//! The crate covers finite lattice algebras ([`algebra`]), the syntax of
//! many-valued first-order formulas ([`syntax`]), Tarski-style evaluation on
//! finite weighted structures ([`semantics`]), the translation into classical
//! first-order logic over `τ × A` ([`translator`]), the complete-description
//! decision procedure and De Morgan quantifier elimination ([`asymptotic`]),
//! random structures and empirical value distributions ([`montecarlo`]) and
//! the `[0,1]`-valued Łukasiewicz case ([`continuum`]).

pub mod algebra;
pub mod asymptotic;
mod budget;
mod compiled;
pub mod continuum;
mod error;
pub mod montecarlo;
pub mod semantics;
pub mod syntax;
pub mod translator;

pub use algebra::{Elem, LatticeAlgebra};
pub use budget::Budget;
pub use error::{Error, Result};
pub use syntax::{Formula, Term, Vocabulary};
