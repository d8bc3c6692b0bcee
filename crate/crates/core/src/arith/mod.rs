//! Exact arithmetic: linear expressions, linear quantifier elimination,
//! polynomials and root isolation, and one-variable solution sets.

pub mod linear;
pub mod mpoly;
pub mod qe;
pub mod sat;
pub mod timeset;
pub mod upoly;

pub use linear::LinExpr;
pub use qe::{Lra, QeError};
pub use timeset::{Bound, Interval, TimeSet, TimeSetError};
pub use upoly::{Real, UPoly};
