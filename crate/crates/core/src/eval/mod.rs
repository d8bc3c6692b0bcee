//! Evaluation over the complete initial theory, forward simulation as an
//! independent oracle, narrative executability and threshold solving.

pub mod evaluate;
pub mod executable;
pub mod model;
pub mod oracle;
pub mod simulate;
pub mod threshold;

pub use evaluate::{evaluate, evaluate_term, ground, EvalError};
pub use executable::{check_executable, Executability};
pub use model::InitialModel;
pub use oracle::Oracle;
pub use simulate::{forward_simulate, Simulation, SimulationError, TimedValuation};
pub use threshold::{solve_threshold, Threshold, ThresholdError};
