//! Error norms, convergence orders, uniqueness conditions and energy bounds.

mod conditions;
mod norms;

pub use conditions::{
    energy_bound, lambda1_box, uniqueness_thresholds, verify_energy_bound, Condition, ConditionInputs, ConditionReport,
    EnergyCheck,
};
pub use norms::{eoc, error_norms, ErrorTriple, ERROR_QUAD_ORDER};
