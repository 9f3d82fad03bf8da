//! Helpers shared by the integration test binaries.
#![allow(dead_code)]

use std::sync::Arc;

use bhfem::femcore::{quadrature_rule, FunctionSpace, SpaceKind};
use bhfem::mesh::{BoxDomain, Mesh};
use bhfem::problems::{ExactEval, ExactSolution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn unit_space(dim: usize, n: usize, kind: SpaceKind) -> Arc<FunctionSpace> {
    let mesh = Mesh::structured(dim, n, BoxDomain::unit(dim)).unwrap();
    FunctionSpace::new(Arc::new(mesh), kind).unwrap()
}

/// `a + b·x`.
#[derive(Clone, Copy)]
pub struct Affine {
    pub a: f64,
    pub b: [f64; 3],
}

impl Affine {
    pub fn at(&self, x: &[f64; 3]) -> f64 {
        self.a + self.b[0] * x[0] + self.b[1] * x[1] + self.b[2] * x[2]
    }
}

impl ExactSolution for Affine {
    fn eval(&self, x: &[f64; 3]) -> ExactEval {
        ExactEval {
            u: self.at(x),
            grad: self.b,
            laplacian: 0.0,
        }
    }
}

/// Points and weights of a degree-2 rule on facet `f` (physical measure).
pub fn facet_points(mesh: &Mesh, f: usize) -> Vec<([f64; 3], f64)> {
    let dim = mesh.dim();
    let q = quadrature_rule(dim - 1, 2).unwrap();
    let verts: Vec<[f64; 3]> = mesh.facet(f).iter().map(|&v| *mesh.vertex(v)).collect();
    let geo = mesh.facet_geometry(f).unwrap();
    let ref_measure: f64 = q.weights.iter().sum();
    q.points
        .iter()
        .zip(&q.weights)
        .map(|(p, w)| {
            let mut x = verts[0];
            for k in 1..dim {
                for c in 0..3 {
                    x[c] += p[k - 1] * (verts[k][c] - verts[0][c]);
                }
            }
            (x, w / ref_measure * geo.measure)
        })
        .collect()
}

/// Largest `|∫_E [u] ds|` over interior facets.
pub fn max_facet_jump_integral(space: &FunctionSpace, coeffs: &[f64]) -> f64 {
    let mesh = &space.mesh;
    let mut worst: f64 = 0.0;
    for f in 0..mesh.n_facets() {
        let (plus, minus) = mesh.facet_cells(f);
        let Some(minus) = minus else { continue };
        let integral: f64 = facet_points(mesh, f)
            .iter()
            .map(|(x, w)| w * (space.eval_in_cell(coeffs, plus, x) - space.eval_in_cell(coeffs, minus, x)))
            .sum();
        worst = worst.max(integral.abs());
    }
    worst
}

/// Largest pointwise jump over interior facet quadrature points.
pub fn max_pointwise_jump(space: &FunctionSpace, coeffs: &[f64]) -> f64 {
    let mesh = &space.mesh;
    let mut worst: f64 = 0.0;
    for f in 0..mesh.n_facets() {
        let (plus, minus) = mesh.facet_cells(f);
        let Some(minus) = minus else { continue };
        for (x, _) in facet_points(mesh, f) {
            let j = space.eval_in_cell(coeffs, plus, &x) - space.eval_in_cell(coeffs, minus, &x);
            worst = worst.max(j.abs());
        }
    }
    worst
}

/// Conforming field copied into the DG space cell by cell.
pub fn embed_in_dg(cg: &FunctionSpace, coeffs: &[f64], dg: &FunctionSpace) -> Vec<f64> {
    let mut out = vec![0.0; dg.n_dofs()];
    for c in 0..cg.mesh.n_cells() {
        for (i, &d) in dg.dofmap.cell_dofs(c).iter().enumerate() {
            out[d] = coeffs[cg.dofmap.cell_dofs(c)[i]];
        }
    }
    out
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}
