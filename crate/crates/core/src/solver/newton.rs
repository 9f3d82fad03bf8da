use crate::assembly::{Assembler, SparseMatrix};
use crate::error::{Error, Result};

use super::linear::LinearSolver;

/// A square nonlinear system `R(u) = 0` with an assembled Jacobian.
pub trait NonlinearSystem {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>>;
    fn residual_and_jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, SparseMatrix)>;
}

impl NonlinearSystem for Assembler {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.residual_constrained(u)
    }

    fn residual_and_jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        self.assemble_constrained(u)
    }
}

/// Quantity compared against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// Euclidean norm of the residual.
    #[default]
    Residual,
    /// Euclidean norm of the last Newton update.
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance.
    pub tol: f64,
    pub criterion: StopCriterion,
    pub max_iter: usize,
    /// Backtrack by halving until the residual norm decreases.
    pub line_search: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            criterion: StopCriterion::Residual,
            max_iter: 25,
            line_search: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    /// Number of Newton updates applied.
    pub iterations: usize,
    /// Residual norm before each update and after the last one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Plain Newton iteration from `initial`.
pub fn newton_solve(
    system: &impl NonlinearSystem,
    initial: Vec<f64>,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut lin = LinearSolver::new();
    newton_solve_with(system, initial, opts, &mut lin)
}

/// As [`newton_solve`], reusing `lin` so repeated solves on one pattern share
/// the symbolic factorization.
pub fn newton_solve_with(
    system: &impl NonlinearSystem,
    initial: Vec<f64>,
    opts: &NewtonOptions,
    lin: &mut LinearSolver,
) -> Result<(Vec<f64>, NewtonReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!(
            "Newton tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let mut u = initial;
    let mut history = Vec::new();
    let (mut r, mut jac) = system.residual_and_jacobian(&u)?;
    let mut rn = norm(&r);
    let mut last_step = f64::INFINITY;
    for it in 0..=opts.max_iter {
        history.push(rn);
        if !rn.is_finite() {
            break;
        }
        let small = match opts.criterion {
            StopCriterion::Residual => rn,
            // a zero residual needs no step under either rule
            StopCriterion::Increment if rn == 0.0 => 0.0,
            StopCriterion::Increment => last_step,
        };
        if small <= opts.tol {
            return Ok((
                u,
                NewtonReport {
                    iterations: it,
                    residual_history: history,
                    converged: true,
                    final_residual: rn,
                },
            ));
        }
        if it == opts.max_iter {
            break;
        }
        let du = lin
            .solve(&jac, &r)
            .map_err(|e| e.context(format!("Newton iteration {}", it + 1)))?;
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a - step * d).collect();
            let accept = !opts.line_search || step < 1e-4 || norm(&system.residual(&trial)?) < rn;
            if accept {
                u = trial;
                last_step = step * norm(&du);
                break;
            }
            step *= 0.5;
        }
        (r, jac) = system.residual_and_jacobian(&u)?;
        rn = norm(&r);
    }
    Err(Error::NonConvergence {
        iterations: history.len().saturating_sub(1),
        last_residual: rn,
        history,
    })
}
