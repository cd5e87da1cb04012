//! Newest-vertex bisection with conforming closure.

use super::Mesh;
use crate::error::{Error, Result};

/// Result of one refinement pass.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub mesh: Mesh,
    /// For each triangle of the new mesh, the triangle of the input mesh it
    /// was cut from.
    pub parent: Vec<usize>,
}

/// Bisects every marked triangle along its refinement edge, then closes the
/// refinement so that no hanging nodes remain. Each triangle is bisected at
/// most twice per pass.
pub fn bisect(mesh: &Mesh, marked: &[usize]) -> Result<Refinement> {
    let nt = mesh.n_triangles();
    if let Some(&bad) = marked.iter().find(|&&t| t >= nt) {
        return Err(Error::param("marked", format!("triangle {bad} out of range ({nt} triangles)")));
    }
    if marked.is_empty() {
        return Ok(Refinement {
            mesh: mesh.clone(),
            parent: (0..nt).collect(),
        });
    }

    // Closure: any triangle with a split edge must split its refinement edge.
    let mut split = vec![false; mesh.n_edges()];
    let mut stack: Vec<usize> = Vec::new();
    for &t in marked {
        let r = mesh.triangle_edges(t)[2];
        if !split[r] {
            split[r] = true;
            stack.push(r);
        }
    }
    while let Some(e) = stack.pop() {
        let edge = &mesh.edges()[e];
        for t in std::iter::once(edge.plus).chain(edge.minus) {
            let r = mesh.triangle_edges(t)[2];
            if !split[r] {
                split[r] = true;
                stack.push(r);
            }
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint = vec![usize::MAX; mesh.n_edges()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if split[e] {
            let [p, q] = edge.endpoints.map(|v| mesh.vertices()[v]);
            midpoint[e] = vertices.len();
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
    }

    let mut triangles = Vec::with_capacity(nt + 2 * marked.len());
    let mut parent = Vec::with_capacity(triangles.capacity());
    for t in 0..nt {
        let [a, b, c] = mesh.triangles()[t];
        let [e0, e1, e2] = mesh.triangle_edges(t);
        let mut push = |tri: [usize; 3]| {
            triangles.push(tri);
            parent.push(t);
        };
        if !split[e2] {
            push([a, b, c]);
            continue;
        }
        let m = midpoint[e2];
        // child [c, a, m] has refinement edge (c, a) = e1
        if split[e1] {
            let m1 = midpoint[e1];
            push([m, c, m1]);
            push([a, m, m1]);
        } else {
            push([c, a, m]);
        }
        // child [b, c, m] has refinement edge (b, c) = e0
        if split[e0] {
            let m0 = midpoint[e0];
            push([m, b, m0]);
            push([c, m, m0]);
        } else {
            push([b, c, m]);
        }
    }

    let mut boundary = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        let Some(tag) = edge.tag else { continue };
        let name = &mesh.tag_names()[tag];
        let [p, q] = edge.endpoints;
        if split[e] {
            boundary.push(([p, midpoint[e]], name.clone()));
            boundary.push(([midpoint[e], q], name.clone()));
        } else {
            boundary.push(([p, q], name.clone()));
        }
    }

    let mesh = Mesh::new(vertices, triangles, &boundary)?;
    Ok(Refinement { mesh, parent })
}
