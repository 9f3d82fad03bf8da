use std::sync::Arc;

use super::basis::{eval_basis, SpaceKind};
use super::dofmap::DofMap;
use crate::error::Result;
use crate::mesh::{AffineMap, FacetGeometry, Mesh};

/// A mesh, its dof layout, and the per-cell / per-facet geometry that
/// assembly and error measurement reuse.
#[derive(Debug)]
pub struct FunctionSpace {
    pub mesh: Arc<Mesh>,
    pub dofmap: DofMap,
    maps: Vec<AffineMap>,
    /// Physical basis gradients per cell (constant on each cell).
    gradients: Vec<[[f64; 3]; 4]>,
    facets: Vec<FacetGeometry>,
    facet_diameters: Vec<f64>,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, kind: SpaceKind) -> Result<Arc<Self>> {
        let dim = mesh.dim();
        let dofmap = DofMap::new(&mesh, kind);
        let ref_grads = eval_basis(kind, dim, &[0.0; 3]).ref_gradients;
        let mut maps = Vec::with_capacity(mesh.n_cells());
        let mut gradients = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let map = mesh.cell_affine_map(c)?;
            let mut g = [[0.0; 3]; 4];
            for i in 0..=dim {
                g[i] = map.gradient(&ref_grads[i]);
            }
            maps.push(map);
            gradients.push(g);
        }
        let facets = (0..mesh.n_facets())
            .map(|f| mesh.facet_geometry(f))
            .collect::<Result<Vec<_>>>()?;
        let facet_diameters = (0..mesh.n_facets()).map(|f| mesh.facet_diameter(f)).collect();
        Ok(Arc::new(Self {
            mesh,
            dofmap,
            maps,
            gradients,
            facets,
            facet_diameters,
        }))
    }

    pub fn kind(&self) -> SpaceKind {
        self.dofmap.space
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    pub fn map(&self, c: usize) -> &AffineMap {
        &self.maps[c]
    }

    pub fn cell_gradients(&self, c: usize) -> &[[f64; 3]; 4] {
        &self.gradients[c]
    }

    pub fn facet(&self, f: usize) -> &FacetGeometry {
        &self.facets[f]
    }

    pub fn facet_diameter(&self, f: usize) -> f64 {
        self.facet_diameters[f]
    }

    /// Basis values of cell `c` at a physical point (extrapolated if outside).
    pub fn basis_values_at(&self, c: usize, x: &[f64; 3]) -> [f64; 4] {
        let xi = self.maps[c].to_reference(x);
        eval_basis(self.kind(), self.dim(), &xi).values
    }

    /// Evaluates `coeffs` restricted to cell `c` at a physical point.
    pub fn eval_in_cell(&self, coeffs: &[f64], c: usize, x: &[f64; 3]) -> f64 {
        let vals = self.basis_values_at(c, x);
        self.dofmap
            .cell_dofs(c)
            .iter()
            .zip(vals.iter())
            .map(|(&d, v)| coeffs[d] * v)
            .sum()
    }

    /// Gradient of `coeffs` on cell `c`.
    pub fn grad_in_cell(&self, coeffs: &[f64], c: usize) -> [f64; 3] {
        let g = &self.gradients[c];
        let mut out = [0.0; 3];
        for (i, &d) in self.dofmap.cell_dofs(c).iter().enumerate() {
            for k in 0..3 {
                out[k] += coeffs[d] * g[i][k];
            }
        }
        out
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&[f64; 3]) -> f64) -> Vec<f64> {
        self.dofmap.interpolate(&self.mesh, f)
    }
}
