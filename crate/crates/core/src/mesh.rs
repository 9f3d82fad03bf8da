//! Structured simplicial meshes of axis-aligned boxes.
//!
//! Cells are stored with a positive orientation. Local facet `i` of a cell is
//! the facet opposite local vertex `i`. Every facet records its adjacent cells
//! with the lower cell index first; normals are outward from that cell.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Axis-aligned box `[lower, upper]` in `dim` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub dim: usize,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl BoxDomain {
    pub fn unit(dim: usize) -> Self {
        Self::cube(dim, 0.0, 1.0)
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        for k in 0..dim.min(3) {
            lower[k] = lo;
            upper[k] = hi;
        }
        Self { dim, lower, upper }
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|k| self.side(k)).product()
    }

    /// Total measure of the boundary (perimeter in 2D, surface area in 3D).
    pub fn boundary_measure(&self) -> f64 {
        match self.dim {
            2 => 2.0 * (self.side(0) + self.side(1)),
            _ => 2.0 * (self.side(0) * self.side(1) + self.side(1) * self.side(2) + self.side(0) * self.side(2)),
        }
    }

    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for k in 0..self.dim {
            c[k] = 0.5 * (self.lower[k] + self.upper[k]);
        }
        c
    }

    fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Parameter(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        for k in 0..self.dim {
            let s = self.side(k);
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Parameter(format!("degenerate extent along axis {k}")));
            }
        }
        Ok(())
    }
}

/// Reference-to-physical affine map of one simplex, `x = origin + J ξ`.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub dim: usize,
    pub jacobian: [[f64; 3]; 3],
    pub det: f64,
    pub inv_transpose: [[f64; 3]; 3],
    pub origin: [f64; 3],
}

impl AffineMap {
    fn from_vertices(dim: usize, pts: &[[f64; 3]]) -> Self {
        let mut jac = [[0.0; 3]; 3];
        for col in 0..dim {
            for row in 0..dim {
                jac[row][col] = pts[col + 1][row] - pts[0][row];
            }
        }
        let (det, inv) = invert(dim, &jac);
        let mut inv_t = [[0.0; 3]; 3];
        for r in 0..dim {
            for c in 0..dim {
                inv_t[r][c] = inv[c][r];
            }
        }
        Self {
            dim,
            jacobian: jac,
            det,
            inv_transpose: inv_t,
            origin: pts[0],
        }
    }

    pub fn map(&self, xi: &[f64]) -> [f64; 3] {
        let mut x = self.origin;
        for r in 0..self.dim {
            for c in 0..self.dim {
                x[r] += self.jacobian[r][c] * xi[c];
            }
        }
        x
    }

    /// Inverse map, physical point to reference coordinates.
    pub fn to_reference(&self, x: &[f64]) -> [f64; 3] {
        let mut xi = [0.0; 3];
        for r in 0..self.dim {
            // (J^-1)_{rc} = inv_transpose[c][r]
            for c in 0..self.dim {
                xi[r] += self.inv_transpose[c][r] * (x[c] - self.origin[c]);
            }
        }
        xi
    }

    /// Pushes a reference gradient forward: `J^{-T} g`.
    pub fn gradient(&self, ref_grad: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for r in 0..self.dim {
            for c in 0..self.dim {
                g[r] += self.inv_transpose[r][c] * ref_grad[c];
            }
        }
        g
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() / factorial(self.dim)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn invert(dim: usize, m: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if dim == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        inv[0][0] = m[1][1] / det;
        inv[0][1] = -m[0][1] / det;
        inv[1][0] = -m[1][0] / det;
        inv[1][1] = m[0][0] / det;
        (det, inv)
    } else {
        let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
        let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
        inv[0][0] = c00 / det;
        inv[1][0] = c01 / det;
        inv[2][0] = c02 / det;
        inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
        inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
        inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
        inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
        inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
        inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        (det, inv)
    }
}

/// Unit normal, measure and centroid of a facet.
#[derive(Debug, Clone, Copy)]
pub struct FacetGeometry {
    pub normal: [f64; 3],
    pub measure: f64,
    pub midpoint: [f64; 3],
}

/// Simplicial mesh with cell/facet topology.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    cells: Vec<usize>,
    facets: Vec<usize>,
    facet_cells: Vec<(usize, Option<usize>)>,
    /// Local facet index of each facet within its adjacent cells.
    facet_local: Vec<(usize, usize)>,
    cell_facets: Vec<usize>,
    boundary: Vec<bool>,
    extent: BoxDomain,
}

impl Mesh {
    /// Uniform mesh of `extent` with `n` subdivisions per axis.
    ///
    /// 2D squares are split along the lower-left to upper-right diagonal;
    /// 3D cubes use the six-tetrahedron Kuhn split.
    pub fn structured(dim: usize, n: usize, extent: BoxDomain) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("number of subdivisions must be positive".into()));
        }
        if extent.dim != dim {
            return Err(Error::Parameter(format!(
                "extent has dimension {} but mesh dimension is {dim}",
                extent.dim
            )));
        }
        extent.validate()?;
        let np = n + 1;
        let coord = |axis: usize, i: usize| extent.lower[axis] + extent.side(axis) * i as f64 / n as f64;
        let mut vertices = Vec::new();
        let mut cells = Vec::new();
        match dim {
            2 => {
                vertices.reserve(np * np);
                for j in 0..np {
                    for i in 0..np {
                        vertices.push([coord(0, i), coord(1, j), 0.0]);
                    }
                }
                let id = |i: usize, j: usize| i + np * j;
                for j in 0..n {
                    for i in 0..n {
                        let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                        cells.extend_from_slice(&[v00, v10, v11]);
                        cells.extend_from_slice(&[v00, v11, v01]);
                    }
                }
            }
            _ => {
                vertices.reserve(np * np * np);
                for k in 0..np {
                    for j in 0..np {
                        for i in 0..np {
                            vertices.push([coord(0, i), coord(1, j), coord(2, k)]);
                        }
                    }
                }
                let id = |p: [usize; 3]| p[0] + np * (p[1] + np * p[2]);
                const PERMS: [([usize; 3], bool); 6] = [
                    ([0, 1, 2], true),
                    ([0, 2, 1], false),
                    ([1, 0, 2], false),
                    ([1, 2, 0], true),
                    ([2, 0, 1], true),
                    ([2, 1, 0], false),
                ];
                for k in 0..n {
                    for j in 0..n {
                        for i in 0..n {
                            for (perm, even) in PERMS {
                                let mut p = [i, j, k];
                                let mut tet = [id(p); 4];
                                for (step, &axis) in perm.iter().enumerate() {
                                    p[axis] += 1;
                                    tet[step + 1] = id(p);
                                }
                                if !even {
                                    tet.swap(2, 3);
                                }
                                cells.extend_from_slice(&tet);
                            }
                        }
                    }
                }
            }
        }
        Self::from_parts(dim, vertices, cells, extent)
    }

    /// Builds the topology for explicit vertices and cells.
    ///
    /// Fails with a mesh-integrity error if any cell has non-positive volume.
    pub fn from_parts(dim: usize, vertices: Vec<[f64; 3]>, cells: Vec<usize>, extent: BoxDomain) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Parameter(format!("dimension must be 2 or 3, got {dim}")));
        }
        let nv = dim + 1;
        if cells.len() % nv != 0 {
            return Err(Error::MeshIntegrity(
                "cell connectivity length is not a multiple of d+1".into(),
            ));
        }
        if let Some(&bad) = cells.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::MeshIntegrity(format!("cell references missing vertex {bad}")));
        }
        let n_cells = cells.len() / nv;
        let mut facet_index: HashMap<[usize; 3], usize> = HashMap::with_capacity(n_cells * nv);
        let mut facets = Vec::new();
        let mut facet_cells: Vec<(usize, Option<usize>)> = Vec::new();
        let mut facet_local: Vec<(usize, usize)> = Vec::new();
        let mut cell_facets = vec![0; cells.len()];
        for c in 0..n_cells {
            let cv = &cells[c * nv..(c + 1) * nv];
            for local in 0..nv {
                let mut key = [usize::MAX; 3];
                let mut m = 0;
                for (k, &v) in cv.iter().enumerate() {
                    if k != local {
                        key[m] = v;
                        m += 1;
                    }
                }
                key[..dim].sort_unstable();
                let f = match facet_index.get(&key) {
                    Some(&f) => {
                        if facet_cells[f].1.is_some() {
                            return Err(Error::MeshIntegrity(format!("facet {f} shared by more than two cells")));
                        }
                        facet_cells[f].1 = Some(c);
                        facet_local[f] = (facet_local[f].0, local);
                        f
                    }
                    None => {
                        let f = facet_cells.len();
                        facet_index.insert(key, f);
                        facets.extend_from_slice(&key[..dim]);
                        facet_cells.push((c, None));
                        facet_local.push((local, usize::MAX));
                        f
                    }
                };
                cell_facets[c * nv + local] = f;
            }
        }
        let boundary = facet_cells.iter().map(|(_, m)| m.is_none()).collect();
        let mesh = Self {
            dim,
            vertices,
            cells,
            facets,
            facet_cells,
            facet_local,
            cell_facets,
            boundary,
            extent,
        };
        for c in 0..mesh.n_cells() {
            let det = mesh.cell_affine_map_unchecked(c).det;
            if !(det > 0.0) {
                return Err(Error::MeshIntegrity(format!(
                    "cell {c} has non-positive volume (det {det:e})"
                )));
            }
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> &BoxDomain {
        &self.extent
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn n_facets(&self) -> usize {
        self.facet_cells.len()
    }

    pub fn n_boundary_facets(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn vertex(&self, v: usize) -> &[f64; 3] {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    /// Global facet indices of a cell; entry `i` is opposite local vertex `i`.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cell_facets[c * nv..(c + 1) * nv]
    }

    /// Sorted vertex indices of a facet.
    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f * self.dim..(f + 1) * self.dim]
    }

    /// `(plus, minus)` adjacent cells; `minus` is `None` on the boundary.
    pub fn facet_cells(&self, f: usize) -> (usize, Option<usize>) {
        self.facet_cells[f]
    }

    /// Local index of the facet inside its plus and minus cells.
    pub fn facet_local_indices(&self, f: usize) -> (usize, Option<usize>) {
        let (p, m) = self.facet_local[f];
        (p, self.facet_cells[f].1.map(|_| m))
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.boundary[f]
    }

    /// Vertex indices lying on a boundary facet.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_vertices()];
        for f in 0..self.n_facets() {
            if self.boundary[f] {
                for &v in self.facet(f) {
                    on[v] = true;
                }
            }
        }
        on
    }

    fn cell_points(&self, c: usize) -> [[f64; 3]; 4] {
        let mut pts = [[0.0; 3]; 4];
        for (k, &v) in self.cell(c).iter().enumerate() {
            pts[k] = self.vertices[v];
        }
        pts
    }

    fn cell_affine_map_unchecked(&self, c: usize) -> AffineMap {
        AffineMap::from_vertices(self.dim, &self.cell_points(c))
    }

    /// Affine map from the reference simplex onto cell `c`.
    pub fn cell_affine_map(&self, c: usize) -> Result<AffineMap> {
        if c >= self.n_cells() {
            return Err(Error::Parameter(format!("cell index {c} out of range")));
        }
        let map = self.cell_affine_map_unchecked(c);
        if !(map.det > 0.0) {
            return Err(Error::MeshIntegrity(format!("cell {c} is inverted")));
        }
        Ok(map)
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 3] {
        let pts = self.cell_points(c);
        let mut x = [0.0; 3];
        for p in pts.iter().take(self.dim + 1) {
            for k in 0..3 {
                x[k] += p[k] / (self.dim + 1) as f64;
            }
        }
        x
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let pts = self.cell_points(c);
        max_pairwise_distance(&pts[..self.dim + 1])
    }

    /// Mesh size `h`: the largest cell diameter.
    pub fn h(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Diameter of a facet (edge length in 2D, longest triangle edge in 3D).
    pub fn facet_diameter(&self, f: usize) -> f64 {
        let pts: Vec<[f64; 3]> = self.facet(f).iter().map(|&v| self.vertices[v]).collect();
        max_pairwise_distance(&pts)
    }

    /// Outward normal with respect to the plus cell, measure and centroid.
    pub fn facet_geometry(&self, f: usize) -> Result<FacetGeometry> {
        if f >= self.n_facets() {
            return Err(Error::Parameter(format!("facet index {f} out of range")));
        }
        let fv = self.facet(f);
        let a = self.vertices[fv[0]];
        let b = self.vertices[fv[1]];
        let mut midpoint = [0.0; 3];
        for &v in fv {
            for k in 0..3 {
                midpoint[k] += self.vertices[v][k] / self.dim as f64;
            }
        }
        let (mut normal, measure) = if self.dim == 2 {
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = t[0].hypot(t[1]);
            ([t[1] / len, -t[0] / len, 0.0], len)
        } else {
            let c = self.vertices[fv[2]];
            let u = sub(&b, &a);
            let v = sub(&c, &a);
            let n = cross(&u, &v);
            let norm = dot(&n, &n).sqrt();
            ([n[0] / norm, n[1] / norm, n[2] / norm], 0.5 * norm)
        };
        let (plus, _) = self.facet_cells[f];
        let (local, _) = self.facet_local[f];
        let opposite = self.vertices[self.cell(plus)[local]];
        if dot(&normal, &sub(&opposite, &a)) > 0.0 {
            for x in normal.iter_mut() {
                *x = -*x;
            }
        }
        Ok(FacetGeometry {
            normal,
            measure,
            midpoint,
        })
    }
}

fn max_pairwise_distance(pts: &[[f64; 3]]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let e = sub(&pts[i], &pts[j]);
            d = d.max(dot(&e, &e).sqrt());
        }
    }
    d
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
