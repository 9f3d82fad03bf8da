use std::sync::Arc;

use super::{Case, DgPenalty, ProblemSpec};
use crate::analysis::{eoc, error_norms, verify_energy_bound, EnergyCheck, ERROR_QUAD_ORDER};
use crate::assembly::{Assembler, DiscreteField};
use crate::error::{Error, Result};
use crate::femcore::{FunctionSpace, ModelParams, SpaceKind};
use crate::mesh::{BoxDomain, Mesh};
use crate::solver::{newton_solve, NewtonOptions, NewtonReport};

/// Wall-clock timer; `std::time::Instant` is unavailable on bare wasm32, where
/// levels report zero seconds.
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Knobs shared by every level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub newton: NewtonOptions,
    pub penalty: DgPenalty,
    /// Overrides the default nonlinear quadrature order.
    pub quad_order: Option<usize>,
    pub error_quad_order: usize,
    /// Evaluate the energy bound on conforming solves.
    pub check_energy: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            penalty: DgPenalty::default(),
            quad_order: None,
            error_quad_order: ERROR_QUAD_ORDER,
            check_energy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    /// Subdivisions per axis.
    pub n: usize,
    /// Largest cell diameter.
    pub h: f64,
    pub l2_error: f64,
    /// Broken gradient seminorm of the error.
    pub h1_error: f64,
    pub dg_energy_error: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1: Option<f64>,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub n_dofs: usize,
    pub energy: Option<EnergyCheck>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: SpaceKind,
    pub case: Case,
    pub dim: usize,
    pub params: ModelParams,
    pub levels: Vec<LevelRecord>,
}

impl ConvergenceReport {
    pub fn finest(&self) -> &LevelRecord {
        self.levels.last().expect("report has at least one level")
    }
}

/// Builds a unit-box mesh with `n` subdivisions and solves `problem` by Newton
/// from the zero guess with boundary dofs preset.
pub fn solve_on_unit_box(
    problem: &ProblemSpec,
    n: usize,
    newton: &NewtonOptions,
) -> Result<(DiscreteField, NewtonReport)> {
    let mesh = Mesh::structured(problem.dim, n, BoxDomain::unit(problem.dim))?;
    let space = FunctionSpace::new(Arc::new(mesh), problem.discretization)?;
    solve_stationary(space, problem.clone(), newton)
}

pub fn solve_stationary(
    space: Arc<FunctionSpace>,
    problem: ProblemSpec,
    newton: &NewtonOptions,
) -> Result<(DiscreteField, NewtonReport)> {
    let asm = Assembler::new(space.clone(), problem)?;
    let (u, report) = newton_solve(&asm, asm.initial_guess(), newton)?;
    Ok((DiscreteField::from_coeffs(space, u)?, report))
}

/// Solves on each level, measures errors against the closed form and
/// computes orders between consecutive levels.
pub fn run_convergence_study(
    case: Case,
    method: SpaceKind,
    dim: usize,
    levels: &[usize],
    params: ModelParams,
    opts: &StudyOptions,
) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::Parameter("at least one refinement level is required".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!(
            "levels must be strictly increasing, got {levels:?}"
        )));
    }
    let mut problem = ProblemSpec::manufactured(case, params, dim, method)?.with_penalty(opts.penalty);
    if let Some(q) = opts.quad_order {
        problem = problem.with_quad_order(q);
    }
    let exact = problem.exact().expect("manufactured problem has a closed form");
    let mut records: Vec<LevelRecord> = Vec::with_capacity(levels.len());
    for &n in levels {
        let start = Stopwatch::start();
        let ctx = || format!("{method} {case} {dim}D level n={n}");
        let (field, rep) = solve_on_unit_box(&problem, n, &opts.newton).map_err(|e| e.context(ctx()))?;
        let err = error_norms(&field.space, &field.coeffs, &exact, opts.error_quad_order)?;
        let energy = if opts.check_energy && method == SpaceKind::CfemP1 {
            Some(verify_energy_bound(
                &field,
                &params,
                &*problem.forcing,
                opts.error_quad_order,
            )?)
        } else {
            None
        };
        let h = field.space.mesh.h();
        let (eoc_l2, eoc_h1) = match records.last() {
            Some(prev) => (
                Some(eoc(&[prev.l2_error, err.l2], &[prev.h, h])[0]),
                Some(eoc(&[prev.h1_error, err.h1_broken], &[prev.h, h])[0]),
            ),
            None => (None, None),
        };
        records.push(LevelRecord {
            n,
            h,
            l2_error: err.l2,
            h1_error: err.h1_broken,
            dg_energy_error: err.dg_energy,
            eoc_l2,
            eoc_h1,
            newton_iters: rep.iterations,
            final_residual: rep.final_residual,
            n_dofs: field.space.n_dofs(),
            energy,
            seconds: start.seconds(),
        });
    }
    Ok(ConvergenceReport {
        method,
        case,
        dim,
        params,
        levels: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_problem_takes_one_newton_step() {
        let p = ModelParams {
            alpha: 0.0,
            beta: 0.0,
            ..ModelParams::example1()
        };
        for kind in SpaceKind::ALL {
            let problem = ProblemSpec::manufactured(Case::Ex1Poly, p, 2, kind).unwrap();
            let (_, rep) = solve_on_unit_box(&problem, 4, &NewtonOptions::default()).unwrap();
            assert_eq!(rep.iterations, 1, "{kind}");
        }
    }

    #[test]
    fn levels_must_increase() {
        let p = ModelParams::example1();
        let r = run_convergence_study(
            Case::Ex1Poly,
            SpaceKind::CfemP1,
            2,
            &[4, 4],
            p,
            &StudyOptions::default(),
        );
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn small_study_converges_at_expected_orders() {
        let p = ModelParams::example1();
        for kind in SpaceKind::ALL {
            let r = run_convergence_study(Case::Ex1Sine, kind, 2, &[4, 8, 16], p, &StudyOptions::default()).unwrap();
            let f = r.finest();
            assert!((f.eoc_h1.unwrap() - 1.0).abs() < 0.15, "{kind}: {f:?}");
            assert!((f.eoc_l2.unwrap() - 2.0).abs() < 0.25, "{kind}: {f:?}");
            assert!(r.levels[0].eoc_h1.is_none());
        }
    }
}
