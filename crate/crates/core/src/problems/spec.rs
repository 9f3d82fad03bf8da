use std::fmt;
use std::sync::Arc;

use super::exact::{manufactured_forcing, Case, ExactSolution, Manufactured};
use crate::error::{Error, Result};
use crate::femcore::{nonlinear_quad_order, ModelParams, SpaceKind};

/// A scalar function of a physical point.
pub type ScalarFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// Interior-penalty scale σ; the facet penalty is `σ / h_E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgPenalty {
    pub sigma: f64,
}

impl Default for DgPenalty {
    fn default() -> Self {
        Self { sigma: 10.0 }
    }
}

impl DgPenalty {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Parameter(format!("penalty sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn on_facet(&self, h_e: f64) -> f64 {
        self.sigma / h_e
    }
}

/// How the boundary is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `u = g` on ∂Ω (strongly for CFEM/CR, by Nitsche terms for DG).
    Dirichlet,
    /// Natural (zero-flux) boundary: all boundary facet terms are dropped.
    Neumann,
}

/// Everything needed to assemble one stationary problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub params: ModelParams,
    pub dim: usize,
    pub case: Case,
    pub forcing: ScalarFn,
    pub dirichlet: ScalarFn,
    pub discretization: SpaceKind,
    pub penalty: DgPenalty,
    pub boundary: BoundaryKind,
    /// Quadrature order for the nonlinear and load terms.
    pub quad_order: usize,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("params", &self.params)
            .field("dim", &self.dim)
            .field("case", &self.case)
            .field("discretization", &self.discretization)
            .field("penalty", &self.penalty)
            .field("boundary", &self.boundary)
            .field("quad_order", &self.quad_order)
            .finish()
    }
}

impl ProblemSpec {
    /// Manufactured problem: forcing from the closed form, boundary data its trace.
    pub fn manufactured(case: Case, params: ModelParams, dim: usize, space: SpaceKind) -> Result<Self> {
        if case == Case::Custom {
            return Err(Error::Parameter(
                "custom problems need explicit forcing and boundary data".into(),
            ));
        }
        let exact = Manufactured::new(case, dim, params.alpha);
        let forcing: ScalarFn = Arc::new(move |x| manufactured_forcing(&exact, &params, x));
        let dirichlet: ScalarFn = Arc::new(move |x| exact.value(x));
        Self::new(params, dim, case, forcing, dirichlet, space)
    }

    pub fn custom(
        params: ModelParams,
        dim: usize,
        space: SpaceKind,
        forcing: ScalarFn,
        dirichlet: ScalarFn,
    ) -> Result<Self> {
        Self::new(params, dim, Case::Custom, forcing, dirichlet, space)
    }

    fn new(
        params: ModelParams,
        dim: usize,
        case: Case,
        forcing: ScalarFn,
        dirichlet: ScalarFn,
        space: SpaceKind,
    ) -> Result<Self> {
        params.validate()?;
        if dim != 2 && dim != 3 {
            return Err(Error::Parameter(format!("dimension must be 2 or 3, got {dim}")));
        }
        Ok(Self {
            params,
            dim,
            case,
            forcing,
            dirichlet,
            discretization: space,
            penalty: DgPenalty::default(),
            boundary: BoundaryKind::Dirichlet,
            quad_order: nonlinear_quad_order(params.delta),
        })
    }

    pub fn with_penalty(mut self, penalty: DgPenalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryKind) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_quad_order(mut self, order: usize) -> Self {
        self.quad_order = order;
        self
    }

    pub fn with_space(mut self, space: SpaceKind) -> Self {
        self.discretization = space;
        self
    }

    /// The closed-form solution, if this is a manufactured problem.
    pub fn exact(&self) -> Option<Manufactured> {
        (self.case != Case::Custom).then(|| Manufactured::new(self.case, self.dim, self.params.alpha))
    }
}
