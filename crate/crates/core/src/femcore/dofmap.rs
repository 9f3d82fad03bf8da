use super::basis::SpaceKind;
use crate::mesh::Mesh;

/// Mesh entity that owns a degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    Facet(usize),
    /// Cell and local vertex index.
    CellVertex(usize, usize),
}

/// Degree-of-freedom layout of one space on one mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: SpaceKind,
    pub dim: usize,
    pub n_dofs: usize,
    cell_dofs: Vec<usize>,
    pub dof_entity: Vec<DofEntity>,
    /// Dofs constrained by Dirichlet data; empty for DG.
    pub boundary_dofs: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, space: SpaceKind) -> Self {
        let dim = mesh.dim();
        let nv = dim + 1;
        let n_cells = mesh.n_cells();
        let mut cell_dofs = Vec::with_capacity(n_cells * nv);
        let (dof_entity, boundary_dofs) = match space {
            SpaceKind::CfemP1 => {
                for c in 0..n_cells {
                    cell_dofs.extend_from_slice(mesh.cell(c));
                }
                let on = mesh.boundary_vertices();
                (
                    (0..mesh.n_vertices()).map(DofEntity::Vertex).collect::<Vec<_>>(),
                    (0..mesh.n_vertices()).filter(|&v| on[v]).collect(),
                )
            }
            SpaceKind::Cr => {
                for c in 0..n_cells {
                    cell_dofs.extend_from_slice(mesh.cell_facets(c));
                }
                (
                    (0..mesh.n_facets()).map(DofEntity::Facet).collect(),
                    (0..mesh.n_facets()).filter(|&f| mesh.is_boundary_facet(f)).collect(),
                )
            }
            SpaceKind::DgP1 => {
                cell_dofs.extend(0..n_cells * nv);
                (
                    (0..n_cells * nv)
                        .map(|k| DofEntity::CellVertex(k / nv, k % nv))
                        .collect(),
                    Vec::new(),
                )
            }
        };
        Self {
            space,
            dim,
            n_dofs: dof_entity.len(),
            cell_dofs,
            dof_entity,
            boundary_dofs,
        }
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cell_dofs[c * nv..(c + 1) * nv]
    }

    /// Physical location where a nodal dof is evaluated.
    pub fn dof_point(&self, mesh: &Mesh, dof: usize) -> [f64; 3] {
        match self.dof_entity[dof] {
            DofEntity::Vertex(v) => *mesh.vertex(v),
            DofEntity::Facet(f) => {
                let mut x = [0.0; 3];
                for &v in mesh.facet(f) {
                    for k in 0..3 {
                        x[k] += mesh.vertex(v)[k] / self.dim as f64;
                    }
                }
                x
            }
            DofEntity::CellVertex(c, i) => *mesh.vertex(mesh.cell(c)[i]),
        }
    }

    /// Interpolates a function into the space (nodal values at dof points).
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(&[f64; 3]) -> f64) -> Vec<f64> {
        (0..self.n_dofs).map(|d| f(&self.dof_point(mesh, d))).collect()
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_dofs];
        for &d in &self.boundary_dofs {
            m[d] = true;
        }
        m
    }
}
