use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Which piecewise-linear space a field lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous P1, vertex dofs.
    CfemP1,
    /// Crouzeix-Raviart, one dof per facet (value at the facet centroid).
    Cr,
    /// Discontinuous P1, cell-local vertex dofs.
    DgP1,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 3] = [SpaceKind::CfemP1, SpaceKind::Cr, SpaceKind::DgP1];

    /// Method label used in tables: CGFEM / NCFEM / DGFEM.
    pub fn method_name(&self) -> &'static str {
        match self {
            SpaceKind::CfemP1 => "CGFEM",
            SpaceKind::Cr => "NCFEM",
            SpaceKind::DgP1 => "DGFEM",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::CfemP1 => "cfem",
            SpaceKind::Cr => "ncfem",
            SpaceKind::DgP1 => "dgfem",
        })
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "cfem" | "cgfem" | "p1" | "cfem_p1" => Ok(SpaceKind::CfemP1),
            "ncfem" | "cr" => Ok(SpaceKind::Cr),
            "dgfem" | "dg" | "dg_p1" => Ok(SpaceKind::DgP1),
            other => Err(Error::Parameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Basis values and reference gradients at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct BasisEval {
    pub values: [f64; 4],
    pub ref_gradients: [[f64; 3]; 4],
}

/// Barycentric coordinates of a reference point; `λ_0 = 1 - Σξ`, `λ_i = ξ_i`.
pub fn barycentric(dim: usize, xi: &[f64]) -> [f64; 4] {
    let mut l = [0.0; 4];
    l[0] = 1.0 - xi[..dim].iter().sum::<f64>();
    l[1..=dim].copy_from_slice(&xi[..dim]);
    l
}

fn barycentric_gradients(dim: usize) -> [[f64; 3]; 4] {
    let mut g = [[0.0; 3]; 4];
    for k in 0..dim {
        g[0][k] = -1.0;
        g[k + 1][k] = 1.0;
    }
    g
}

/// Evaluates the `d+1` local shape functions of `space` at `xi`.
///
/// P1 and DG-P1 use the barycentric hats. The Crouzeix-Raviart function `i`
/// is `1 - d λ_i`, which is one at the centroid of facet `i` (the facet
/// opposite vertex `i`) and zero at the other facet centroids.
pub fn eval_basis(space: SpaceKind, dim: usize, xi: &[f64]) -> BasisEval {
    let lambda = barycentric(dim, xi);
    let grads = barycentric_gradients(dim);
    match space {
        SpaceKind::CfemP1 | SpaceKind::DgP1 => BasisEval {
            values: lambda,
            ref_gradients: grads,
        },
        SpaceKind::Cr => {
            let d = dim as f64;
            let mut values = [0.0; 4];
            let mut ref_gradients = [[0.0; 3]; 4];
            for i in 0..=dim {
                values[i] = 1.0 - d * lambda[i];
                for k in 0..dim {
                    ref_gradients[i][k] = -d * grads[i][k];
                }
            }
            BasisEval { values, ref_gradients }
        }
    }
}

/// Reference coordinates of local vertex `i`.
pub fn reference_vertex(i: usize) -> [f64; 3] {
    let mut x = [0.0; 3];
    if i > 0 {
        x[i - 1] = 1.0;
    }
    x
}
