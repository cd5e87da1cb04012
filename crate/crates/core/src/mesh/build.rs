//! Structured initial meshes. Every square is split along one diagonal; the
//! diagonal is the refinement edge of both halves and the right-angle vertex
//! is the newest vertex.

use super::Mesh;
use crate::error::{Error, Result};

/// Boundary tags of the L-shaped domain.
pub const LSHAPE_TAGS: [&str; 6] = ["bottom", "reentrant_x", "reentrant_y", "right", "top", "left"];

/// Boundary tags of the unit square.
pub const SQUARE_TAGS: [&str; 4] = ["bottom", "right", "top", "left"];

#[derive(Clone, Copy)]
enum Diagonal {
    /// From lower-left to upper-right.
    Rising,
    /// From upper-left to lower-right.
    Falling,
}

/// Splits the square with corners `p00, p10, p11, p01` into two triangles.
fn split_square(p00: usize, p10: usize, p11: usize, p01: usize, diag: Diagonal) -> [[usize; 3]; 2] {
    match diag {
        Diagonal::Rising => [[p11, p00, p10], [p00, p11, p01]],
        Diagonal::Falling => [[p10, p01, p00], [p01, p10, p11]],
    }
}

/// Triangulation of `(0,1)^2 \ (1/2,1) x (0,1/2)` from three blocks of
/// `n x n` squares. Diagonals run along the rays through the reentrant corner
/// `(1/2, 1/2)`.
pub fn build_lshape(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::param("n", "subdivision count must be at least 1"));
    }
    let m = 2 * n;
    let h = 1.0 / m as f64;
    let inside = |i: usize, j: usize| i <= n || j >= n;
    let mut index = vec![usize::MAX; (m + 1) * (m + 1)];
    let mut vertices = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            if inside(i, j) {
                index[j * (m + 1) + i] = vertices.len();
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
    }
    let id = |i: usize, j: usize| index[j * (m + 1) + i];

    let mut triangles = Vec::with_capacity(6 * n * n);
    for j in 0..m {
        for i in 0..m {
            let diag = match (i < n, j < n) {
                (true, true) => Diagonal::Rising,
                (true, false) => Diagonal::Falling,
                (false, false) => Diagonal::Rising,
                (false, true) => continue,
            };
            triangles.extend(split_square(id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), diag));
        }
    }

    let mut boundary = Vec::new();
    let mut push = |a: usize, b: usize, tag: &str| boundary.push(([a, b], tag.to_string()));
    for i in 0..n {
        push(id(i, 0), id(i + 1, 0), "bottom");
    }
    for j in 0..n {
        push(id(n, j), id(n, j + 1), "reentrant_x");
    }
    for i in n..m {
        push(id(i, n), id(i + 1, n), "reentrant_y");
    }
    for j in n..m {
        push(id(m, j), id(m, j + 1), "right");
    }
    for i in 0..m {
        push(id(i, m), id(i + 1, m), "top");
    }
    for j in 0..m {
        push(id(0, j), id(0, j + 1), "left");
    }
    Mesh::new(vertices, triangles, &boundary)
}

/// Uniform `n x n` grid on the unit square, every cell split along its
/// rising diagonal.
pub fn build_unit_square(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::param("n", "subdivision count must be at least 1"));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.extend(split_square(
                id(i, j),
                id(i + 1, j),
                id(i + 1, j + 1),
                id(i, j + 1),
                Diagonal::Rising,
            ));
        }
    }
    let mut boundary = Vec::new();
    for k in 0..n {
        boundary.push(([id(k, 0), id(k + 1, 0)], "bottom".to_string()));
        boundary.push(([id(n, k), id(n, k + 1)], "right".to_string()));
        boundary.push(([id(k, n), id(k + 1, n)], "top".to_string()));
        boundary.push(([id(0, k), id(0, k + 1)], "left".to_string()));
    }
    Mesh::new(vertices, triangles, &boundary)
}
