//! Problem definitions: manufactured solutions, boundary data, the
//! convergence-study driver and the transient excitable-media system.

mod convergence;
mod exact;
mod spec;
mod transient;

pub use convergence::{
    run_convergence_study, solve_on_unit_box, solve_stationary, ConvergenceReport, LevelRecord, StudyOptions,
};
pub use exact::{exact_solution, manufactured_forcing, Case, ExactEval, ExactSolution, Manufactured};
pub use spec::{BoundaryKind, DgPenalty, ProblemSpec, ScalarFn};
pub use transient::{transient_initial_state, Snapshot, TransientSolver, TransientSpec};
