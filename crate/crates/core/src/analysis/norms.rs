use crate::error::Result;
use crate::femcore::{quadrature_rule, FunctionSpace};
use crate::mesh::factorial;
use crate::problems::ExactSolution;

/// Errors of a discrete solution against a closed-form one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTriple {
    pub l2: f64,
    /// `‖∇_h(u - u_h)‖₀`, the cellwise gradient seminorm.
    pub h1_broken: f64,
    /// `(‖u - u_h‖₀² + ‖∇_h(u - u_h)‖₀²)^{1/2}`.
    pub h1_full: f64,
    /// Broken gradient plus unweighted facet jumps of `u - u_h`.
    pub dg_energy: f64,
}

pub const ERROR_QUAD_ORDER: usize = 6;

/// Elementwise quadrature of the L², broken H¹ and DG energy errors.
pub fn error_norms(
    space: &FunctionSpace,
    coeffs: &[f64],
    exact: &dyn ExactSolution,
    quad_order: usize,
) -> Result<ErrorTriple> {
    let mesh = &space.mesh;
    let dim = mesh.dim();
    let q = quadrature_rule(dim, quad_order)?;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for c in 0..mesh.n_cells() {
        let map = space.map(c);
        let gh = space.grad_in_cell(coeffs, c);
        for (p, w) in q.points.iter().zip(&q.weights) {
            let x = map.map(p);
            let e = exact.eval(&x);
            let uh = space.eval_in_cell(coeffs, c, &x);
            let wd = w * map.det;
            l2 += wd * (e.u - uh).powi(2);
            h1 += wd * (0..dim).map(|k| (e.grad[k] - gh[k]).powi(2)).sum::<f64>();
        }
    }
    // jumps of u_h across facets; on the boundary against the exact trace
    let mut jumps = 0.0;
    let fq = quadrature_rule(dim - 1, quad_order)?;
    let fact = factorial(dim - 1);
    for f in 0..mesh.n_facets() {
        let fv = mesh.facet(f);
        let a = *mesh.vertex(fv[0]);
        let scale = space.facet(f).measure * fact;
        let (plus, minus) = mesh.facet_cells(f);
        for (s, w) in fq.points.iter().zip(&fq.weights) {
            let mut x = a;
            for k in 1..dim {
                let v = mesh.vertex(fv[k]);
                for ax in 0..3 {
                    x[ax] += s[k - 1] * (v[ax] - a[ax]);
                }
            }
            let up = space.eval_in_cell(coeffs, plus, &x);
            let other = match minus {
                Some(m) => space.eval_in_cell(coeffs, m, &x),
                None => exact.value(&x),
            };
            jumps += w * scale * (up - other).powi(2);
        }
    }
    Ok(ErrorTriple {
        l2: l2.sqrt(),
        h1_broken: h1.sqrt(),
        h1_full: (l2 + h1).sqrt(),
        dg_energy: (h1 + jumps).sqrt(),
    })
}

/// Experimental orders `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)`; one entry per
/// consecutive pair. A zero error yields `+∞`.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Vec<f64> {
    assert_eq!(errors.len(), hs.len(), "errors and mesh sizes differ in length");
    errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| {
            if e[1] == 0.0 {
                f64::INFINITY
            } else {
                (e[0] / e[1]).ln() / (h[0] / h[1]).ln()
            }
        })
        .collect()
}
