//! Nonlinear residual and analytic Jacobian for the conforming, Crouzeix-Raviart
//! and symmetric interior-penalty DG discretizations.
//!
//! For coefficients `u` the residual is
//! `R_k = ν a(u, φ_k) + α b(u; u, φ_k) - β (C(u), φ_k) - (f, φ_k)`.
//! DG adds the SIPG face terms (boundary penalty `2σ/h_E`, Dirichlet data
//! imposed weakly) and an upwind flux `½ (w·n - |w·n|)(u^e - u)` for the
//! advection `w = u^δ (1, …, 1)` evaluated from the cell's own trace.

mod field;
mod sparse;

pub use field::DiscreteField;
pub use sparse::SparseMatrix;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::femcore::{
    d_signed_pow, eval_basis, nonlinear_kernels, quadrature_rule, signed_pow, FunctionSpace, QuadRule, SpaceKind,
};
use crate::mesh::factorial;
use crate::problems::{BoundaryKind, ProblemSpec};

/// Assembles residuals and Jacobians of one problem on one space.
pub struct Assembler {
    space: Arc<FunctionSpace>,
    problem: ProblemSpec,
    cell_quad: QuadRule,
    /// Basis values at the cell quadrature points.
    cell_basis: Vec<[f64; 4]>,
    facet_quad: QuadRule,
    load: Vec<f64>,
    template: SparseMatrix,
}

/// Quadrature point on a facet: physical location and physical weight.
struct FacetPoint {
    x: [f64; 3],
    w: f64,
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Assembler {
    pub fn new(space: Arc<FunctionSpace>, problem: ProblemSpec) -> Result<Self> {
        if space.kind() != problem.discretization {
            return Err(Error::Contract(format!(
                "space is {} but problem asks for {}",
                space.kind(),
                problem.discretization
            )));
        }
        if space.dim() != problem.dim {
            return Err(Error::Contract(format!(
                "mesh dimension {} differs from problem dimension {}",
                space.dim(),
                problem.dim
            )));
        }
        let dim = space.dim();
        let cell_quad = quadrature_rule(dim, problem.quad_order)?;
        let facet_quad = quadrature_rule(dim - 1, problem.quad_order)?;
        let cell_basis = cell_quad
            .points
            .iter()
            .map(|p| eval_basis(space.kind(), dim, p).values)
            .collect();
        let template = sparsity(&space);
        let mut asm = Self {
            space,
            problem,
            cell_quad,
            cell_basis,
            facet_quad,
            load: Vec::new(),
            template,
        };
        asm.load = asm.load_vector();
        Ok(asm)
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// Zero matrix carrying the assembly sparsity pattern.
    pub fn empty_matrix(&self) -> SparseMatrix {
        self.template.clone()
    }

    /// `(f, φ_k)` by cell quadrature of the forcing.
    pub fn load_vector(&self) -> Vec<f64> {
        let space = &self.space;
        let dim = space.dim();
        let mut load = vec![0.0; space.n_dofs()];
        for c in 0..space.mesh.n_cells() {
            let map = space.map(c);
            let dofs = space.dofmap.cell_dofs(c);
            for (q, (p, w)) in self.cell_quad.points.iter().zip(&self.cell_quad.weights).enumerate() {
                let x = map.map(p);
                let fw = (self.problem.forcing)(&x) * w * map.det;
                for i in 0..=dim {
                    load[dofs[i]] += fw * self.cell_basis[q][i];
                }
            }
        }
        load
    }

    /// Consistent mass matrix `(φ_j, φ_k)` on the assembly pattern.
    pub fn mass_matrix(&self) -> SparseMatrix {
        let space = &self.space;
        let dim = space.dim();
        let mut m = self.empty_matrix();
        for c in 0..space.mesh.n_cells() {
            let det = space.map(c).det;
            let dofs = space.dofmap.cell_dofs(c);
            for (q, w) in self.cell_quad.weights.iter().enumerate() {
                let phi = &self.cell_basis[q];
                for i in 0..=dim {
                    for j in 0..=dim {
                        m.add(dofs[i], dofs[j], w * det * phi[i] * phi[j]);
                    }
                }
            }
        }
        m
    }

    pub fn residual(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.assemble_impl(coeffs, None)
    }

    /// Residual and exact Jacobian at `coeffs` (Dirichlet rows not yet applied).
    pub fn assemble(&self, coeffs: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        let mut jac = self.empty_matrix();
        let r = self.assemble_impl(coeffs, Some(&mut jac))?;
        Ok((r, jac))
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.space.n_dofs() {
            return Err(Error::Contract(format!(
                "field has {} coefficients, space has {} dofs",
                coeffs.len(),
                self.space.n_dofs()
            )));
        }
        Ok(())
    }

    fn assemble_impl(&self, coeffs: &[f64], mut jac: Option<&mut SparseMatrix>) -> Result<Vec<f64>> {
        self.check_len(coeffs)?;
        let mut r: Vec<f64> = self.load.iter().map(|v| -v).collect();
        let space = &self.space;
        let dim = space.dim();
        let nl = dim + 1;
        let p = &self.problem.params;
        for c in 0..space.mesh.n_cells() {
            let det = space.map(c).det;
            let vol = det / factorial(dim);
            let dofs = space.dofmap.cell_dofs(c);
            let grads = space.cell_gradients(c);
            let mut uc = [0.0; 4];
            for i in 0..nl {
                uc[i] = coeffs[dofs[i]];
            }
            let mut gu = [0.0; 3];
            for i in 0..nl {
                for k in 0..dim {
                    gu[k] += uc[i] * grads[i][k];
                }
            }
            let div_phi: [f64; 4] = std::array::from_fn(|i| grads[i][..dim].iter().sum());
            let mut rl = [0.0; 4];
            let mut jl = [[0.0; 4]; 4];
            // diffusion, exact with constant gradients
            for i in 0..nl {
                rl[i] += p.nu * vol * dot3(&gu, &grads[i]);
                for j in 0..nl {
                    jl[i][j] += p.nu * vol * dot3(&grads[j], &grads[i]);
                }
            }
            if p.alpha != 0.0 || p.beta != 0.0 {
                for (q, w) in self.cell_quad.weights.iter().enumerate() {
                    let phi = &self.cell_basis[q];
                    let wd = w * det;
                    let u: f64 = (0..nl).map(|i| uc[i] * phi[i]).sum();
                    let k = nonlinear_kernels(u, &gu[..dim], p);
                    let src = p.alpha * k.b - p.beta * k.c;
                    for i in 0..nl {
                        rl[i] += wd * src * phi[i];
                    }
                    if jac.is_some() {
                        let du = p.alpha * k.db_du - p.beta * k.dc_du;
                        for i in 0..nl {
                            for j in 0..nl {
                                jl[i][j] += wd * (du * phi[j] + p.alpha * k.db_dgrad * div_phi[j]) * phi[i];
                            }
                        }
                    }
                }
            }
            if rl[..nl].iter().any(|v| !v.is_finite()) {
                return Err(Error::Assembly {
                    location: format!("cell {c}"),
                    message: "non-finite residual contribution".into(),
                });
            }
            for i in 0..nl {
                r[dofs[i]] += rl[i];
            }
            if let Some(jac) = jac.as_deref_mut() {
                for i in 0..nl {
                    for j in 0..nl {
                        jac.add(dofs[i], dofs[j], jl[i][j]);
                    }
                }
            }
        }
        if space.kind() == SpaceKind::DgP1 {
            self.dg_facets(coeffs, &mut r, jac)?;
        }
        Ok(r)
    }

    fn facet_points(&self, f: usize) -> Vec<FacetPoint> {
        let mesh = &self.space.mesh;
        let dim = mesh.dim();
        let fv = mesh.facet(f);
        let a = *mesh.vertex(fv[0]);
        let scale = self.space.facet(f).measure * factorial(dim - 1);
        self.facet_quad
            .points
            .iter()
            .zip(&self.facet_quad.weights)
            .map(|(s, w)| {
                let mut x = a;
                for k in 1..dim {
                    let v = mesh.vertex(fv[k]);
                    for ax in 0..3 {
                        x[ax] += s[k - 1] * (v[ax] - a[ax]);
                    }
                }
                FacetPoint { x, w: w * scale }
            })
            .collect()
    }

    fn dg_facets(&self, coeffs: &[f64], r: &mut [f64], mut jac: Option<&mut SparseMatrix>) -> Result<()> {
        let space = &self.space;
        let mesh = &space.mesh;
        let dim = mesh.dim();
        let nl = dim + 1;
        let p = &self.problem.params;
        let nu = p.nu;
        let alpha = p.alpha;
        let delta = p.delta;
        for f in 0..mesh.n_facets() {
            let (plus, minus) = mesh.facet_cells(f);
            if minus.is_none() && self.problem.boundary == BoundaryKind::Neumann {
                continue;
            }
            let geo = space.facet(f);
            let n = geo.normal;
            let nsum: f64 = n[..dim].iter().sum();
            let pen = self.problem.penalty.on_facet(space.facet_diameter(f));
            let pts = self.facet_points(f);
            let dofs_p = space.dofmap.cell_dofs(plus);
            let gp = space.cell_gradients(plus);
            let gup = space.grad_in_cell(coeffs, plus);
            let gnp: [f64; 4] = std::array::from_fn(|i| dot3(&gp[i], &n));
            match minus {
                Some(minus) => {
                    let dofs_m = space.dofmap.cell_dofs(minus);
                    let gm = space.cell_gradients(minus);
                    let gum = space.grad_in_cell(coeffs, minus);
                    let gnm: [f64; 4] = std::array::from_fn(|i| dot3(&gm[i], &n));
                    let avg_flux = 0.5 * (dot3(&gup, &n) + dot3(&gum, &n));
                    // local numbering: 0..nl plus, nl..2nl minus
                    let mut rl = [0.0; 8];
                    let mut jl = [[0.0; 8]; 8];
                    for pt in &pts {
                        let bp = space.basis_values_at(plus, &pt.x);
                        let bm = space.basis_values_at(minus, &pt.x);
                        let up: f64 = (0..nl).map(|i| coeffs[dofs_p[i]] * bp[i]).sum();
                        let um: f64 = (0..nl).map(|i| coeffs[dofs_m[i]] * bm[i]).sum();
                        let jump = up - um;
                        // test/trial jump and normal-gradient average per local dof
                        let mut tj = [0.0; 8];
                        let mut ta = [0.0; 8];
                        let mut val = [0.0; 8];
                        for i in 0..nl {
                            tj[i] = bp[i];
                            ta[i] = 0.5 * gnp[i];
                            val[i] = bp[i];
                            tj[nl + i] = -bm[i];
                            ta[nl + i] = 0.5 * gnm[i];
                            val[nl + i] = bm[i];
                        }
                        let w = pt.w;
                        for a in 0..2 * nl {
                            rl[a] += w * nu * (-avg_flux * tj[a] - ta[a] * jump + pen * jump * tj[a]);
                        }
                        if jac.is_some() {
                            for a in 0..2 * nl {
                                for b in 0..2 * nl {
                                    jl[a][b] += w * nu * (-ta[b] * tj[a] - ta[a] * tj[b] + pen * tj[b] * tj[a]);
                                }
                            }
                        }
                        if alpha != 0.0 {
                            // plus side, n_K = n, exterior = minus trace
                            // minus side, n_K = -n, exterior = plus trace
                            for (side, u_in, u_ex, sign) in [(0usize, up, um, 1.0), (1usize, um, up, -1.0)] {
                                let s = signed_pow(u_in, delta);
                                let x = sign * s * nsum;
                                let upw = 0.5 * (x - x.abs());
                                let diff = u_ex - u_in;
                                let (off_in, off_ex) = if side == 0 { (0, nl) } else { (nl, 0) };
                                for i in 0..nl {
                                    rl[off_in + i] += w * alpha * upw * diff * val[off_in + i];
                                }
                                if jac.is_some() {
                                    let dx = 0.5 * (1.0 - sgn(x)) * sign * nsum * d_signed_pow(u_in, delta);
                                    for i in 0..nl {
                                        let ti = w * alpha * val[off_in + i];
                                        for j in 0..nl {
                                            jl[off_in + i][off_in + j] += ti * (dx * diff - upw) * val[off_in + j];
                                            jl[off_in + i][off_ex + j] += ti * upw * val[off_ex + j];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    if rl[..2 * nl].iter().any(|v| !v.is_finite()) {
                        return Err(Error::Assembly {
                            location: format!("facet {f}"),
                            message: "non-finite residual contribution".into(),
                        });
                    }
                    let gdofs: [usize; 8] = std::array::from_fn(|a| {
                        if a < nl {
                            dofs_p[a]
                        } else if a < 2 * nl {
                            dofs_m[a - nl]
                        } else {
                            0
                        }
                    });
                    for a in 0..2 * nl {
                        r[gdofs[a]] += rl[a];
                    }
                    if let Some(jac) = jac.as_deref_mut() {
                        for a in 0..2 * nl {
                            for b in 0..2 * nl {
                                jac.add(gdofs[a], gdofs[b], jl[a][b]);
                            }
                        }
                    }
                }
                None => {
                    let flux_in = dot3(&gup, &n);
                    let mut rl = [0.0; 4];
                    let mut jl = [[0.0; 4]; 4];
                    for pt in &pts {
                        let bp = space.basis_values_at(plus, &pt.x);
                        let u: f64 = (0..nl).map(|i| coeffs[dofs_p[i]] * bp[i]).sum();
                        let g = (self.problem.dirichlet)(&pt.x);
                        let excess = u - g;
                        let w = pt.w;
                        for a in 0..nl {
                            rl[a] += w * nu * (2.0 * pen * excess * bp[a] - flux_in * bp[a] - gnp[a] * excess);
                        }
                        if jac.is_some() {
                            for a in 0..nl {
                                for b in 0..nl {
                                    jl[a][b] += w * nu * (2.0 * pen * bp[b] * bp[a] - gnp[b] * bp[a] - gnp[a] * bp[b]);
                                }
                            }
                        }
                        if alpha != 0.0 {
                            let s = signed_pow(u, delta);
                            let x = s * nsum;
                            let upw = 0.5 * (x - x.abs());
                            let diff = g - u;
                            for a in 0..nl {
                                rl[a] += w * alpha * upw * diff * bp[a];
                            }
                            if jac.is_some() {
                                let dx = 0.5 * (1.0 - sgn(x)) * nsum * d_signed_pow(u, delta);
                                for a in 0..nl {
                                    for b in 0..nl {
                                        jl[a][b] += w * alpha * (dx * diff - upw) * bp[b] * bp[a];
                                    }
                                }
                            }
                        }
                    }
                    if rl[..nl].iter().any(|v| !v.is_finite()) {
                        return Err(Error::Assembly {
                            location: format!("boundary facet {f}"),
                            message: "non-finite residual contribution".into(),
                        });
                    }
                    for a in 0..nl {
                        r[dofs_p[a]] += rl[a];
                    }
                    if let Some(jac) = jac.as_deref_mut() {
                        for a in 0..nl {
                            for b in 0..nl {
                                jac.add(dofs_p[a], dofs_p[b], jl[a][b]);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Dirichlet values at the constrained dofs (CFEM vertices, CR facet centroids).
    pub fn boundary_values(&self) -> Vec<(usize, f64)> {
        let space = &self.space;
        space
            .dofmap
            .boundary_dofs
            .iter()
            .map(|&d| (d, (self.problem.dirichlet)(&space.dofmap.dof_point(&space.mesh, d))))
            .collect()
    }

    /// Initial coefficients: zero with constrained dofs preset to the boundary data.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.space.n_dofs()];
        if self.problem.boundary == BoundaryKind::Dirichlet {
            for (d, g) in self.boundary_values() {
                u[d] = g;
            }
        }
        u
    }

    /// Assembles and applies strong Dirichlet rows when the space needs them.
    pub fn assemble_constrained(&self, coeffs: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        let (mut r, mut j) = self.assemble(coeffs)?;
        if self.needs_strong_bc() {
            apply_dirichlet(&mut r, &mut j, coeffs, &self.boundary_values())?;
        }
        Ok((r, j))
    }

    /// Residual with strong Dirichlet rows applied.
    pub fn residual_constrained(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.residual(coeffs)?;
        if self.needs_strong_bc() {
            for (d, g) in self.boundary_values() {
                r[d] = coeffs[d] - g;
            }
        }
        Ok(r)
    }

    fn needs_strong_bc(&self) -> bool {
        self.problem.boundary == BoundaryKind::Dirichlet && self.space.kind() != SpaceKind::DgP1
    }
}

/// Sparsity of all cell couplings plus DG face-neighbour blocks.
fn sparsity(space: &FunctionSpace) -> SparseMatrix {
    let n = space.n_dofs();
    let mesh = &space.mesh;
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..mesh.n_cells() {
        let d = space.dofmap.cell_dofs(c);
        for &i in d {
            rows[i].extend_from_slice(d);
        }
    }
    if space.kind() == SpaceKind::DgP1 {
        for f in 0..mesh.n_facets() {
            if let (p, Some(m)) = mesh.facet_cells(f) {
                let dp = space.dofmap.cell_dofs(p);
                let dm = space.dofmap.cell_dofs(m);
                for &i in dp {
                    rows[i].extend_from_slice(dm);
                }
                for &i in dm {
                    rows[i].extend_from_slice(dp);
                }
            }
        }
    }
    SparseMatrix::from_rows(n, rows)
}

/// Replaces constrained rows by identity rows with residual `u_k - g_k`.
pub fn apply_dirichlet(r: &mut [f64], jac: &mut SparseMatrix, coeffs: &[f64], bc: &[(usize, f64)]) -> Result<()> {
    for &(d, g) in bc {
        if !g.is_finite() {
            return Err(Error::BoundaryData { dof: d });
        }
        jac.set_identity_row(d);
        r[d] = coeffs[d] - g;
    }
    Ok(())
}

/// Finite-difference check of the Jacobian along `direction`:
/// `min_t ‖(R(u + t w) - R(u))/t - J(u) w‖ / ‖J(u) w‖` over `t ∈ steps`.
pub fn directional_derivative_check(
    assembler: &Assembler,
    coeffs: &[f64],
    direction: &[f64],
    steps: &[f64],
) -> Result<f64> {
    if direction.len() != coeffs.len() {
        return Err(Error::Contract("direction length differs from field length".into()));
    }
    if direction.iter().all(|&v| v == 0.0) {
        return Err(Error::Parameter("zero direction".into()));
    }
    let (r0, jac) = assembler.assemble(coeffs)?;
    let jw = jac.mul_vec(direction);
    let norm_jw = jw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut best = f64::INFINITY;
    for &t in steps {
        let shifted: Vec<f64> = coeffs.iter().zip(direction).map(|(u, w)| u + t * w).collect();
        let r1 = assembler.residual(&shifted)?;
        let err = r1
            .iter()
            .zip(&r0)
            .zip(&jw)
            .map(|((a, b), j)| {
                let e = (a - b) / t - j;
                e * e
            })
            .sum::<f64>()
            .sqrt();
        best = best.min(if norm_jw > 0.0 { err / norm_jw } else { err });
    }
    Ok(best)
}

/// Default step ladder `1e-2 … 1e-7`.
pub const FD_STEPS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::{quadrature::gauss_legendre01, ModelParams};
    use crate::mesh::{BoxDomain, Mesh};
    use crate::problems::Case;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(nu: f64, alpha: f64, beta: f64, delta: f64) -> ModelParams {
        ModelParams {
            nu,
            alpha,
            beta,
            gamma: 0.5,
            delta,
        }
    }

    fn unit_space(dim: usize, n: usize, kind: SpaceKind) -> Arc<FunctionSpace> {
        let mesh = Mesh::structured(dim, n, BoxDomain::unit(dim)).unwrap();
        FunctionSpace::new(Arc::new(mesh), kind).unwrap()
    }

    fn custom(p: ModelParams, dim: usize, kind: SpaceKind, g: fn(&[f64; 3]) -> f64) -> ProblemSpec {
        ProblemSpec::custom(p, dim, kind, Arc::new(|_| 0.0), Arc::new(g)).unwrap()
    }

    fn random_field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(lo..hi)).collect()
    }

    #[test]
    fn reference_triangle_stiffness() {
        let mesh = Mesh::from_parts(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![0, 1, 2],
            BoxDomain::unit(2),
        )
        .unwrap();
        let space = FunctionSpace::new(Arc::new(mesh), SpaceKind::CfemP1).unwrap();
        let asm = Assembler::new(space, custom(params(1.0, 0.0, 0.0, 1.0), 2, SpaceKind::CfemP1, |_| 0.0)).unwrap();
        let (_, j) = asm.assemble(&[0.0; 3]).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for k in 0..3 {
                assert_relative_eq!(j.get(i, k), expect[i][k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn linear_solution_has_zero_residual() {
        // -Δu = 0 for affine u; every scheme reproduces it exactly
        for dim in [2, 3] {
            for kind in SpaceKind::ALL {
                let space = unit_space(dim, 3, kind);
                let g = |x: &[f64; 3]| 0.3 + x[0] - 2.0 * x[1] + 0.5 * x[2];
                let asm = Assembler::new(space.clone(), custom(params(1.3, 0.0, 0.0, 1.0), dim, kind, g)).unwrap();
                let u = space.interpolate(g);
                let r = asm.residual_constrained(&u).unwrap();
                let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(worst < 1e-12, "{kind} {dim}D residual {worst}");
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in SpaceKind::ALL {
            for delta in [1.0, 1.5, 3.0] {
                let space = unit_space(2, 3, kind);
                let p = params(0.7, 0.9, 1.1, delta);
                let asm = Assembler::new(space.clone(), custom(p, 2, kind, |x| x[0] - 0.4)).unwrap();
                let n = space.n_dofs();
                let u = random_field(&mut rng, n, -1.0, 1.0);
                for _ in 0..3 {
                    let w = random_field(&mut rng, n, -1.0, 1.0);
                    let err = directional_derivative_check(&asm, &u, &w, &FD_STEPS).unwrap();
                    assert!(err < 1e-5, "{kind} delta {delta}: {err}");
                }
            }
        }
    }

    #[test]
    fn symmetric_without_advection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            for kind in SpaceKind::ALL {
                let space = unit_space(dim, 2, kind);
                let asm =
                    Assembler::new(space.clone(), custom(params(1.0, 0.0, 2.0, 2.0), dim, kind, |_| 0.0)).unwrap();
                let u = random_field(&mut rng, space.n_dofs(), -1.0, 1.0);
                let (_, j) = asm.assemble(&u).unwrap();
                assert!(j.max_asymmetry() <= 1e-11 * j.max_abs(), "{kind} {dim}D");
            }
        }
    }

    #[test]
    fn sipg_laplacian_is_coercive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = unit_space(2, 4, SpaceKind::DgP1);
        let asm = Assembler::new(
            space.clone(),
            custom(params(1.0, 0.0, 0.0, 1.0), 2, SpaceKind::DgP1, |_| 0.0),
        )
        .unwrap();
        let (_, j) = asm.assemble(&vec![0.0; space.n_dofs()]).unwrap();
        for _ in 0..100 {
            let v = random_field(&mut rng, space.n_dofs(), -1.0, 1.0);
            let jv = j.mul_vec(&v);
            let energy: f64 = v.iter().zip(&jv).map(|(a, b)| a * b).sum();
            assert!(energy > 0.0);
        }
    }

    #[test]
    fn mass_matrix_sums_to_volume() {
        for kind in SpaceKind::ALL {
            let space = unit_space(3, 2, kind);
            let asm = Assembler::new(space, custom(params(1.0, 0.0, 0.0, 1.0), 3, kind, |_| 0.0)).unwrap();
            let m = asm.mass_matrix();
            assert_relative_eq!(m.values().iter().sum::<f64>(), 1.0, max_relative = 1e-13);
            assert!(m.max_asymmetry() < 1e-15);
        }
    }

    #[test]
    fn mismatched_space_is_rejected() {
        let space = unit_space(2, 2, SpaceKind::Cr);
        let p = ProblemSpec::manufactured(Case::Ex1Poly, ModelParams::example1(), 2, SpaceKind::DgP1).unwrap();
        assert!(matches!(Assembler::new(space, p), Err(Error::Contract(_))));
    }

    #[test]
    fn dirichlet_rows_become_identity() {
        let space = unit_space(2, 2, SpaceKind::CfemP1);
        let asm = Assembler::new(
            space.clone(),
            custom(ModelParams::example1(), 2, SpaceKind::CfemP1, |_| 0.25),
        )
        .unwrap();
        let u = asm.initial_guess();
        let (r, j) = asm.assemble_constrained(&u).unwrap();
        for &d in &space.dofmap.boundary_dofs {
            assert_eq!(r[d], 0.0);
            assert_eq!(j.row(d).map(|(_, v)| v).sum::<f64>(), 1.0);
            assert_eq!(j.get(d, d), 1.0);
        }
        let mut r = r;
        let mut j = j;
        assert!(matches!(
            apply_dirichlet(&mut r, &mut j, &u, &[(0, f64::NAN)]),
            Err(Error::BoundaryData { dof: 0 })
        ));
    }

    /// Advection form written after integration by parts on each cell, with
    /// centered plus upwind-dissipation fluxes. Evaluated independently of the
    /// assembler: only positive fields, so all integrands are polynomial.
    fn advection_conservative_form(space: &FunctionSpace, u: &[f64], g: fn(&[f64; 3]) -> f64) -> Vec<f64> {
        let mesh = &space.mesh;
        let q = quadrature_rule(2, 4).unwrap();
        let (gx, gw) = gauss_legendre01(3);
        let mut out = vec![0.0; space.n_dofs()];
        for c in 0..mesh.n_cells() {
            let map = space.map(c);
            let dofs = space.dofmap.cell_dofs(c);
            let grads = space.cell_gradients(c);
            let gu = space.grad_in_cell(u, c);
            for (p, w) in q.points.iter().zip(&q.weights) {
                let x = map.map(p);
                let phi = space.basis_values_at(c, &x);
                let uh = space.eval_in_cell(u, c, &x);
                // w = uh (1, 1), div w = ∂x uh + ∂y uh
                for i in 0..3 {
                    let w_grad_v = uh * (grads[i][0] + grads[i][1]);
                    out[dofs[i]] += w * map.det * (-uh * w_grad_v - (gu[0] + gu[1]) * uh * phi[i]);
                }
            }
            let cv = mesh.cell(c);
            let centroid = mesh.cell_centroid(c);
            for e in 0..3 {
                let a = *mesh.vertex(cv[(e + 1) % 3]);
                let b = *mesh.vertex(cv[(e + 2) % 3]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                let mid = [(a[0] + b[0]) / 2.0 - centroid[0], (a[1] + b[1]) / 2.0 - centroid[1]];
                if n[0] * mid[0] + n[1] * mid[1] < 0.0 {
                    n = [-n[0], -n[1]];
                }
                let f = mesh.cell_facets(c)[e];
                let (plus, minus) = mesh.facet_cells(f);
                let other = if plus == c { minus } else { Some(plus) };
                for (s, ws) in gx.iter().zip(&gw) {
                    let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), 0.0];
                    let ui = space.eval_in_cell(u, c, &x);
                    let ue = match other {
                        Some(o) => space.eval_in_cell(u, o, &x),
                        None => g(&x),
                    };
                    let wn = ui * (n[0] + n[1]);
                    let flux = 0.5 * wn * (ui + ue) - 0.5 * wn.abs() * (ue - ui);
                    let phi = space.basis_values_at(c, &x);
                    for i in 0..3 {
                        out[dofs[i]] += ws * len * flux * phi[i];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn upwind_advection_matches_conservative_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = |x: &[f64; 3]| 0.5 + 0.25 * x[0] * x[1];
        let space = unit_space(2, 2, SpaceKind::DgP1);
        let u = random_field(&mut rng, space.n_dofs(), 0.1, 1.0);
        let with = Assembler::new(
            space.clone(),
            custom(params(1.0, 1.0, 0.0, 1.0), 2, SpaceKind::DgP1, g).with_quad_order(4),
        )
        .unwrap();
        let without = Assembler::new(
            space.clone(),
            custom(params(1.0, 0.0, 0.0, 1.0), 2, SpaceKind::DgP1, g).with_quad_order(4),
        )
        .unwrap();
        let r1 = with.residual(&u).unwrap();
        let r0 = without.residual(&u).unwrap();
        let other = advection_conservative_form(&space, &u, g);
        for k in 0..u.len() {
            assert_relative_eq!(r1[k] - r0[k], other[k], epsilon = 1e-13);
        }
    }
}
