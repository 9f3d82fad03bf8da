//! Legacy ASCII VTK output of fields as point data.
//!
//! Every field is written at the mesh vertices. Discontinuous and
//! Crouzeix-Raviart fields are averaged over the cells around each vertex,
//! which is lossy and meant for viewing only.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::DiscreteField;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const VTK_TRIANGLE: u8 = 5;
pub const VTK_TETRA: u8 = 10;

fn same_mesh(a: &Mesh, b: &Mesh) -> bool {
    std::ptr::eq(a, b)
        || (a.dim() == b.dim()
            && a.n_cells() == b.n_cells()
            && a.vertices() == b.vertices()
            && (0..a.n_cells()).all(|c| a.cell(c) == b.cell(c)))
}

pub fn vtk_string(mesh: &Mesh, fields: &[(&str, &DiscreteField)]) -> Result<String> {
    for (name, f) in fields {
        if !same_mesh(mesh, &f.space.mesh) {
            return Err(Error::Contract(format!("field '{name}' lives on a different mesh")));
        }
    }
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let k = mesh.dim() + 1;
    let cell_type = if mesh.dim() == 2 { VTK_TRIANGLE } else { VTK_TETRA };

    let mut out = String::with_capacity(64 * (nv + nc));
    out.push_str("# vtk DataFile Version 3.0\nbhfem output\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {nv} double").unwrap();
    for x in mesh.vertices() {
        writeln!(out, "{} {} {}", x[0], x[1], x[2]).unwrap();
    }
    writeln!(out, "CELLS {nc} {}", nc * (k + 1)).unwrap();
    for c in 0..nc {
        write!(out, "{k}").unwrap();
        for v in mesh.cell(c) {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "CELL_TYPES {nc}").unwrap();
    for _ in 0..nc {
        writeln!(out, "{cell_type}").unwrap();
    }
    if !fields.is_empty() {
        writeln!(out, "POINT_DATA {nv}").unwrap();
        for (name, f) in fields {
            let name: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
            for v in f.vertex_average() {
                writeln!(out, "{v}").unwrap();
            }
        }
    }
    Ok(out)
}

pub fn write_vtk(mesh: &Mesh, fields: &[(&str, &DiscreteField)], path: &Path) -> Result<()> {
    let text = vtk_string(mesh, fields)?;
    std::fs::write(path, text).map_err(|e| Error::Io(e).context(format!("writing {}", path.display())))
}
