//! Plain-text mesh format:
//!
//! ```text
//! VERTICES n
//! x y
//! TRIANGLES m
//! i j k
//! BOUNDARY t
//! i j tagname
//! ```

use std::fmt::Write;

use super::Mesh;
use crate::error::{Error, Result};

pub(super) fn write(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "VERTICES {}", mesh.n_vertices()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e}", v[0], v[1]).unwrap();
    }
    writeln!(out, "TRIANGLES {}", mesh.n_triangles()).unwrap();
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    let segments = mesh.boundary_segments();
    writeln!(out, "BOUNDARY {}", segments.len()).unwrap();
    for ([i, j], tag) in segments {
        writeln!(out, "{i} {j} {tag}").unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Ok((i + 1, fields));
            }
        }
        Err(Error::Mesh("unexpected end of mesh file".into()))
    }

    fn header(&mut self, name: &str) -> Result<usize> {
        let (line, f) = self.next()?;
        if f.len() != 2 || f[0] != name {
            return Err(Error::Mesh(format!("line {line}: expected `{name} <count>`")));
        }
        f[1].parse()
            .map_err(|_| Error::Mesh(format!("line {line}: bad count `{}`", f[1])))
    }
}

fn parse<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Mesh(format!("line {line}: cannot parse `{s}`")))
}

pub(super) fn read(src: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: src.lines().enumerate(),
    };
    let nv = lines.header("VERTICES")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, f) = lines.next()?;
        if f.len() != 2 {
            return Err(Error::Mesh(format!("line {line}: expected `x y`")));
        }
        vertices.push([parse(line, f[0])?, parse(line, f[1])?]);
    }
    let nt = lines.header("TRIANGLES")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, f) = lines.next()?;
        if f.len() != 3 {
            return Err(Error::Mesh(format!("line {line}: expected `i j k`")));
        }
        triangles.push([parse(line, f[0])?, parse(line, f[1])?, parse(line, f[2])?]);
    }
    let nb = lines.header("BOUNDARY")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, f) = lines.next()?;
        if f.len() != 3 {
            return Err(Error::Mesh(format!("line {line}: expected `i j tag`")));
        }
        boundary.push(([parse(line, f[0])?, parse(line, f[1])?], f[2].to_string()));
    }
    Mesh::new(vertices, triangles, &boundary)
}

#[cfg(test)]
mod tests {
    use crate::mesh::{bisect, build_lshape, Mesh};

    #[test]
    fn round_trip_preserves_mesh() {
        let m = build_lshape(2).unwrap();
        let m = bisect(&m, &[0, 5, 11]).unwrap().mesh;
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_segments(), m.boundary_segments());
        assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn header_errors_carry_line_numbers() {
        let err = Mesh::from_text("VERTICES 1\n0 0\nTRIANGLE 0\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(Mesh::from_text("VERTICES 2\n0 0\n").is_err());
    }
}
