use std::sync::Arc;

use crate::error::{Error, Result};
use crate::femcore::FunctionSpace;

/// Coefficient vector over a function space.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: Arc<FunctionSpace>,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(space: Arc<FunctionSpace>) -> Self {
        let n = space.n_dofs();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<FunctionSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::Contract(format!(
                "field has {} coefficients but the space has {} dofs",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn interpolate(space: Arc<FunctionSpace>, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let coeffs = space.interpolate(f);
        Self { space, coeffs }
    }

    /// Value at local vertex `i` of cell `c`.
    pub fn cell_vertex_value(&self, c: usize, i: usize) -> f64 {
        let x = *self.space.mesh.vertex(self.space.mesh.cell(c)[i]);
        self.space.eval_in_cell(&self.coeffs, c, &x)
    }

    /// Vertex values averaged over incident cells (exact for continuous P1).
    pub fn vertex_average(&self) -> Vec<f64> {
        let mesh = &self.space.mesh;
        let mut sum = vec![0.0; mesh.n_vertices()];
        let mut count = vec![0u32; mesh.n_vertices()];
        for c in 0..mesh.n_cells() {
            for (i, &v) in mesh.cell(c).iter().enumerate() {
                sum[v] += self.cell_vertex_value(c, i);
                count[v] += 1;
            }
        }
        sum.iter().zip(&count).map(|(s, &k)| s / k.max(1) as f64).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }
}
