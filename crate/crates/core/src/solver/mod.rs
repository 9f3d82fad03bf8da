//! Sparse direct linear solves and Newton's method.

mod linear;
mod newton;

pub use linear::{solve_sparse, LinearSolver};
pub use newton::{newton_solve, newton_solve_with, NewtonOptions, NewtonReport, NonlinearSystem, StopCriterion};
