//! Legacy ASCII VTK output of triangle meshes with point and cell scalars.

use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Named scalar array.
pub type Field<'a> = (&'a str, &'a [f64]);

fn check(fields: &[Field], expected: usize) -> Result<()> {
    for (name, v) in fields {
        if v.len() != expected {
            return Err(Error::LengthMismatch {
                name: name.to_string(),
                expected,
                actual: v.len(),
            });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::param("field", format!("array name `{name}` must be a non-empty word")));
        }
    }
    Ok(())
}

fn scalars(out: &mut String, fields: &[Field]) {
    for (name, values) in fields {
        writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in *values {
            writeln!(out, "{v:.16e}").unwrap();
        }
    }
}

/// Renders the file contents; point fields hold one value per vertex, cell
/// fields one per triangle.
pub fn vtk_string(mesh: &Mesh, point: &[Field], cell: &[Field]) -> Result<String> {
    check(point, mesh.n_vertices())?;
    check(cell, mesh.n_triangles())?;
    let mut out = String::from("# vtk DataFile Version 3.0\nbuckle\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.n_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], 0.0).unwrap();
    }
    let nt = mesh.n_triangles();
    writeln!(out, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        out.push_str("5\n");
    }
    if !point.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.n_vertices()).unwrap();
        scalars(&mut out, point);
    }
    if !cell.is_empty() {
        writeln!(out, "CELL_DATA {nt}").unwrap();
        scalars(&mut out, cell);
    }
    Ok(out)
}

pub fn export_vtk(mesh: &Mesh, point: &[Field], cell: &[Field], path: &Path) -> Result<()> {
    let text = vtk_string(mesh, point, cell)?;
    std::fs::write(path, text)?;
    Ok(())
}
