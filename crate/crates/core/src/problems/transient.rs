//! Backward-Euler time stepping of the excitable system
//! `∂_t u + α u^δ Σ∂_i u - νΔu - β u(1-u^δ)(u^δ-γ) + v = 0`, `∂_t v = ε(u - ρv)`
//! with natural boundary conditions.
//!
//! The gating update is linear in `u_{n+1}`,
//! `v_{n+1} = (v_n + εΔt u_{n+1}) / (1 + ερΔt)`, and is eliminated so each
//! step is a single Newton solve for `u_{n+1}`.

use std::sync::Arc;

use super::{BoundaryKind, DgPenalty, ProblemSpec};
use crate::assembly::{Assembler, DiscreteField, SparseMatrix};
use crate::error::{Error, Result};
use crate::femcore::{FunctionSpace, ModelParams, SpaceKind};
use crate::mesh::{BoxDomain, Mesh};
use crate::solver::{newton_solve_with, LinearSolver, NewtonOptions, NewtonReport, NonlinearSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct TransientSpec {
    pub params: ModelParams,
    pub epsilon: f64,
    pub rho: f64,
    pub dt: f64,
    pub t_end: f64,
    pub mesh_n: usize,
    pub domain: BoxDomain,
    pub discretization: SpaceKind,
    pub snapshot_times: Vec<f64>,
    pub penalty: DgPenalty,
    pub newton: NewtonOptions,
}

impl TransientSpec {
    /// Nerve-pulse setup on `(0, 300)²`: α = 0.1, δ = 1.5, β = ν = 1,
    /// ε = γ = 0.01, ρ = 0.05, Δt = 0.2 up to t = 650.
    pub fn nerve_pulse() -> Self {
        Self {
            params: ModelParams {
                nu: 1.0,
                alpha: 0.1,
                beta: 1.0,
                gamma: 0.01,
                delta: 1.5,
            },
            epsilon: 0.01,
            rho: 0.05,
            dt: 0.2,
            t_end: 650.0,
            mesh_n: 100,
            domain: BoxDomain::cube(2, 0.0, 300.0),
            discretization: SpaceKind::CfemP1,
            snapshot_times: vec![80.0, 200.0, 650.0],
            penalty: DgPenalty::default(),
            newton: NewtonOptions {
                line_search: true,
                ..NewtonOptions::default()
            },
        }
    }

    /// The classical FitzHugh-Nagumo limit δ = 1, α = 0.
    pub fn fitzhugh_nagumo() -> Self {
        let mut s = Self::nerve_pulse();
        s.params.alpha = 0.0;
        s.params.delta = 1.0;
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(Error::Parameter(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if !(self.epsilon >= 0.0 && self.rho >= 0.0) {
            return Err(Error::Parameter("epsilon and rho must be non-negative".into()));
        }
        if self.domain.dim != 2 {
            return Err(Error::Parameter("the transient driver is two-dimensional".into()));
        }
        if self.discretization == SpaceKind::Cr {
            return Err(Error::Parameter("transient runs support cfem and dgfem only".into()));
        }
        if self.mesh_n == 0 {
            return Err(Error::Parameter("mesh_n must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

/// Cross-field stimulus: `u0 = 1` on the lower half `y <= c` and `v0 = 0.1`
/// on the left half `x <= c`. The excited and refractory halves cross at the
/// centre, so the upward front has a free end there that curls into a spiral.
pub fn transient_initial_state(spec: &TransientSpec, space: &FunctionSpace) -> (Vec<f64>, Vec<f64>) {
    let c = spec.domain.center();
    let u0 = space.interpolate(|x| if x[1] <= c[1] { 1.0 } else { 0.0 });
    let v0 = space.interpolate(|x| if x[0] <= c[0] { 0.1 } else { 0.0 });
    (u0, v0)
}

/// One backward-Euler step as a nonlinear system in `u_{n+1}`.
struct StepSystem<'a> {
    asm: &'a Assembler,
    mass: &'a SparseMatrix,
    /// `M(-u_n/Δt + v_n/(1+ερΔt))`
    rhs_shift: Vec<f64>,
    /// `1/Δt + εΔt/(1+ερΔt)`
    mass_coeff: f64,
}

impl NonlinearSystem for StepSystem<'_> {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.asm.residual(u)?;
        let mu = self.mass.mul_vec(u);
        for k in 0..r.len() {
            r[k] += self.mass_coeff * mu[k] + self.rhs_shift[k];
        }
        Ok(r)
    }

    fn residual_and_jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        let (mut r, mut j) = self.asm.assemble(u)?;
        let mu = self.mass.mul_vec(u);
        for k in 0..r.len() {
            r[k] += self.mass_coeff * mu[k] + self.rhs_shift[k];
        }
        j.axpy(self.mass_coeff, self.mass);
        Ok((r, j))
    }
}

/// A field captured at a requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub u: DiscreteField,
    pub v: DiscreteField,
}

/// Time-stepping state for one transient run.
pub struct TransientSolver {
    spec: TransientSpec,
    asm: Assembler,
    mass: SparseMatrix,
    lin: LinearSolver,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub step: usize,
}

impl TransientSolver {
    pub fn new(spec: TransientSpec) -> Result<Self> {
        spec.validate()?;
        let mesh = Mesh::structured(2, spec.mesh_n, spec.domain)?;
        let space = FunctionSpace::new(Arc::new(mesh), spec.discretization)?;
        let problem = ProblemSpec::custom(
            spec.params,
            2,
            spec.discretization,
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        )?
        .with_boundary(BoundaryKind::Neumann)
        .with_penalty(spec.penalty);
        let asm = Assembler::new(space.clone(), problem)?;
        let mass = asm.mass_matrix();
        let (u, v) = transient_initial_state(&spec, &space);
        Ok(Self {
            spec,
            asm,
            mass,
            lin: LinearSolver::new(),
            u,
            v,
            step: 0,
        })
    }

    pub fn spec(&self) -> &TransientSpec {
        &self.spec
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        self.asm.space()
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.spec.dt
    }

    pub fn u_field(&self) -> DiscreteField {
        DiscreteField {
            space: self.space().clone(),
            coeffs: self.u.clone(),
        }
    }

    pub fn v_field(&self) -> DiscreteField {
        DiscreteField {
            space: self.space().clone(),
            coeffs: self.v.clone(),
        }
    }

    /// Advances one step, starting Newton from the previous state.
    pub fn advance(&mut self) -> Result<NewtonReport> {
        let TransientSpec { dt, epsilon, rho, .. } = self.spec;
        let damp = 1.0 + epsilon * rho * dt;
        let mass_coeff = 1.0 / dt + epsilon * dt / damp;
        let shift: Vec<f64> = self.u.iter().zip(&self.v).map(|(u, v)| -u / dt + v / damp).collect();
        let system = StepSystem {
            asm: &self.asm,
            mass: &self.mass,
            rhs_shift: self.mass.mul_vec(&shift),
            mass_coeff,
        };
        let step = self.step + 1;
        let (u, rep) = newton_solve_with(&system, self.u.clone(), &self.spec.newton, &mut self.lin)
            .map_err(|e| e.context(format!("time step {step} (t = {:.3})", step as f64 * dt)))?;
        if let Some(k) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::Assembly {
                location: format!("time step {step}, dof {k}"),
                message: "non-finite state".into(),
            });
        }
        for (v, &un) in self.v.iter_mut().zip(&u) {
            *v = (*v + epsilon * dt * un) / damp;
        }
        self.u = u;
        self.step = step;
        Ok(rep)
    }

    /// Steps to `t_end`, calling `on_snapshot` at each requested time
    /// (rounded to the nearest step).
    pub fn run(&mut self, mut on_snapshot: impl FnMut(&Snapshot) -> Result<()>) -> Result<usize> {
        let dt = self.spec.dt;
        let n_steps = self.spec.n_steps();
        let mut targets: Vec<usize> = self
            .spec
            .snapshot_times
            .iter()
            .map(|t| (t / dt).round() as usize)
            .filter(|&k| k <= n_steps)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let mut newton_total = 0;
        let mut emit = |s: &Self| -> Result<()> {
            if targets.binary_search(&s.step).is_ok() {
                on_snapshot(&Snapshot {
                    time: s.time(),
                    step: s.step,
                    u: s.u_field(),
                    v: s.v_field(),
                })?;
            }
            Ok(())
        };
        emit(self)?;
        while self.step < n_steps {
            newton_total += self.advance()?.iterations;
            emit(self)?;
        }
        Ok(newton_total)
    }
}
