//! Conforming triangle meshes with the edge bookkeeping needed by the
//! interior-penalty edge sums.
//!
//! Conventions:
//! - Triangles are stored counter-clockwise as `[a, b, c]`. The vertex `c` is
//!   the newest vertex and `(a, b)` is the refinement edge used by bisection.
//! - Local edge `i` of a triangle is the edge opposite local vertex `i`, so
//!   local edge 2 is always the refinement edge.
//! - Every edge carries one fixed unit normal. It is the exterior normal of
//!   the `plus` triangle, and `plus` is the lower-indexed of the two adjacent
//!   triangles. On the boundary this is the exterior normal of the domain.

mod build;
mod refine;
mod text;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use build::{build_lshape, build_unit_square, LSHAPE_TAGS, SQUARE_TAGS};
pub use refine::{bisect, Refinement};

/// Interior or boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Interior,
    Boundary,
}

/// Mesh edge with its fixed orientation and adjacency.
#[derive(Debug, Clone)]
pub struct Edge {
    /// Vertex indices, smaller index first.
    pub endpoints: [usize; 2],
    /// Fixed unit normal, exterior to `plus`.
    pub normal: [f64; 2],
    pub plus: usize,
    /// Absent on boundary edges.
    pub minus: Option<usize>,
    /// Index into [`Mesh::tag_names`] for boundary edges.
    pub tag: Option<usize>,
    pub length: f64,
    /// `(|T+| + |T-|) / (2|E|)`, or `|T+| / (2|E|)` on the boundary.
    pub h_e: f64,
}

impl Edge {
    pub fn kind(&self) -> EdgeKind {
        if self.minus.is_some() {
            EdgeKind::Interior
        } else {
            EdgeKind::Boundary
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// Immutable conforming triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    tag_names: Vec<String>,
    areas: Vec<f64>,
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

impl Mesh {
    /// Builds a mesh from vertex coordinates, counter-clockwise triangles and
    /// tagged boundary segments. Boundary edges without a tag receive the tag
    /// `boundary`.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: &[([usize; 2], String)],
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(Error::Mesh(format!(
                    "triangle {t} has non-positive signed area {a:e}"
                )));
            }
            areas.push(a);
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 2);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let p = tri[(i + 1) % 3];
                let q = tri[(i + 2) % 3];
                let key = if p < q { [p, q] } else { [q, p] };
                if let Some(&e) = lookup.get(&key) {
                    let edge = &mut edges[e];
                    if edge.minus.is_some() {
                        return Err(Error::Mesh(format!(
                            "edge {key:?} is shared by more than two triangles"
                        )));
                    }
                    edge.minus = Some(t);
                    *slot = e;
                } else {
                    let (pp, qq) = (vertices[p], vertices[q]);
                    let length = dist(pp, qq);
                    let normal = [(qq[1] - pp[1]) / length, -(qq[0] - pp[0]) / length];
                    lookup.insert(key, edges.len());
                    *slot = edges.len();
                    edges.push(Edge {
                        endpoints: key,
                        normal,
                        plus: t,
                        minus: None,
                        tag: None,
                        length,
                        h_e: 0.0,
                    });
                }
            }
            tri_edges.push(local);
        }

        let mut tag_names: Vec<String> = Vec::new();
        for (seg, name) in boundary {
            let key = if seg[0] < seg[1] {
                [seg[0], seg[1]]
            } else {
                [seg[1], seg[0]]
            };
            let Some(&e) = lookup.get(&key) else {
                return Err(Error::Mesh(format!("boundary segment {seg:?} is not a mesh edge")));
            };
            if edges[e].minus.is_some() {
                return Err(Error::Mesh(format!("boundary segment {seg:?} is an interior edge")));
            }
            let tag = match tag_names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    tag_names.push(name.clone());
                    tag_names.len() - 1
                }
            };
            edges[e].tag = Some(tag);
        }
        if edges.iter().any(|e| e.is_boundary() && e.tag.is_none()) {
            let tag = tag_names.len();
            tag_names.push("boundary".to_string());
            for e in edges.iter_mut().filter(|e| e.is_boundary() && e.tag.is_none()) {
                e.tag = Some(tag);
            }
        }

        for e in &mut edges {
            let area = areas[e.plus] + e.minus.map_or(0.0, |m| areas[m]);
            e.h_e = area / (2.0 * e.length);
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            tag_names,
            areas,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices of triangle `t`; entry `i` is opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tag_names
    }

    pub fn tag_index(&self, name: &str) -> Option<usize> {
        self.tag_names.iter().position(|n| n == name)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [p, q, r] = self.corners(t);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Element diameter `h_T` (longest edge).
    pub fn diameter(&self, t: usize) -> f64 {
        self.tri_edges[t]
            .iter()
            .map(|&e| self.edges[e].length)
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle of triangle `t`, in radians.
    pub fn min_angle(&self, t: usize) -> f64 {
        let c = self.corners(t);
        (0..3)
            .map(|i| {
                let p = c[i];
                let q = c[(i + 1) % 3];
                let r = c[(i + 2) % 3];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                cos.clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Ratio of circumscribed to inscribed circle diameter.
    pub fn shape_ratio(&self, t: usize) -> f64 {
        let l: Vec<f64> = self.tri_edges[t].iter().map(|&e| self.edges[e].length).collect();
        let area = self.areas[t];
        let circum = l[0] * l[1] * l[2] / (4.0 * area);
        let inr = 2.0 * area / (l[0] + l[1] + l[2]);
        circum / inr
    }

    /// Triangles sharing an edge with `t` (not including `t`).
    pub fn edge_neighbors(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.tri_edges[t].iter().filter_map(move |&e| {
            let edge = &self.edges[e];
            if edge.plus == t {
                edge.minus
            } else {
                Some(edge.plus)
            }
        })
    }

    /// Disjoint split of edge indices into interior and boundary sets.
    pub fn classify_edges(&self) -> (Vec<usize>, Vec<usize>) {
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            match e.kind() {
                EdgeKind::Interior => interior.push(i),
                EdgeKind::Boundary => boundary.push(i),
            }
        }
        (interior, boundary)
    }

    /// Boundary segments as `(endpoints, tag name)` in edge order.
    pub fn boundary_segments(&self) -> Vec<([usize; 2], String)> {
        self.edges
            .iter()
            .filter_map(|e| e.tag.map(|tag| (e.endpoints, self.tag_names[tag].clone())))
            .collect()
    }

    /// Counter-clockwise orientation of the local edge `i` of triangle `t`
    /// as `(start, end)` vertex indices.
    pub fn local_edge_vertices(&self, t: usize, i: usize) -> (usize, usize) {
        let tri = self.triangles[t];
        (tri[(i + 1) % 3], tri[(i + 2) % 3])
    }

    /// Local index of edge `e` within triangle `t`.
    pub fn local_edge_index(&self, t: usize, e: usize) -> Option<usize> {
        self.tri_edges[t].iter().position(|&x| x == e)
    }

    pub fn to_text(&self) -> String {
        text::write(self)
    }

    pub fn from_text(src: &str) -> Result<Self> {
        text::read(src)
    }
}

/// Edge length scale `h_E` (stored on the edge at construction).
pub fn compute_h_e(edge: &Edge) -> f64 {
    edge.h_e
}
