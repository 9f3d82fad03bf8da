//! Finite element toolkit for the stationary and transient generalized
//! Burgers-Huxley equation
//!
//! `-ν Δu + α u^δ Σ ∂_i u - β u (1 - u^δ)(u^δ - γ) = f`
//!
//! with conforming P1, Crouzeix-Raviart and SIPG discontinuous P1 elements.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod femcore;
pub mod io;
pub mod mesh;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
