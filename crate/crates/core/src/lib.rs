//! Reasoning engine for the hybrid temporal situation calculus.
//!
//! The crate compiles declarative action theories with continuous change
//! (temporal change axioms) into state evolution axioms, answers projection
//! queries by temporal regression followed by exact evaluation over the
//! initial theory, and encodes hybrid automata as temporal basic action
//! theories whose executable narratives correspond to automaton trajectories.
//!
//! Layout:
//!
//! - [`logic`]: sorted terms and formulas, substitution, classification,
//!   simplification.
//! - [`arith`]: exact rational arithmetic helpers, linear quantifier
//!   elimination, univariate polynomial root isolation.
//! - [`dsl`]: the `.tbat` theory format, its parser, printer and validator.
//! - [`sea`]: derivation of state evolution axioms and init successor state
//!   axioms, plus the consistency checks those axioms must satisfy.
//! - [`eval`]: the initial model, sentence evaluation, forward simulation,
//!   executability and threshold solving.
//! - [`regression`]: temporal regression, partial regression and diagnosis.
//! - [`hybrid`]: basic hybrid automata, their translation, trajectories.
//! - [`cli`]: the `hsc` command line surface.

pub mod arith;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod eval;
pub mod hybrid;
pub mod logic;
pub mod regression;
pub mod sea;

pub use error::{Error, Result};
