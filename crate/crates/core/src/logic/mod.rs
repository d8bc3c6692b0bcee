//! Sorted terms and formulas of the temporal situation calculus.

pub mod classify;
pub mod formula;
pub mod pretty;
pub mod rational;
pub mod simplify;
pub mod subst;
pub mod symbol;
pub mod term;

pub use classify::{is_regressable, is_regressable_with, is_uniform_in};
pub use formula::{CmpOp, Formula};
pub use rational::{format_rat, parse_rat, rat, ratio, Rat};
pub use simplify::{simplify, simplify_with, GroundFacts, SimplifyContext};
pub use subst::{alpha_eq, subst_formula, subst_term, substitute, Subst, SubstError};
pub use symbol::Symbol;
pub use term::{ArithOp, Sort, Term, Var};
