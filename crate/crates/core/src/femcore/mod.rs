//! Reference elements, quadrature, dof maps and pointwise kernels.

pub mod basis;
pub mod dofmap;
pub mod kernels;
pub mod quadrature;
pub mod space;

pub use basis::{eval_basis, BasisEval, SpaceKind};
pub use dofmap::{DofEntity, DofMap};
pub use kernels::{d_signed_pow, nonlinear_kernels, signed_pow, KernelValues, ModelParams};
pub use quadrature::{quadrature_rule, QuadRule};
pub use space::FunctionSpace;

/// Quadrature order for terms involving the nonlinearity: `ceil(2δ) + 2`, capped at 6.
pub fn nonlinear_quad_order(delta: f64) -> usize {
    ((2.0 * delta).ceil() as usize + 2).min(quadrature::MAX_ORDER)
}
