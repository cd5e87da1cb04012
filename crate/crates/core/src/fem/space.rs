//! Continuous Lagrange spaces over a mesh.

use std::sync::Arc;

use super::basis::{ElementMap, NodeKind, PhysTable, RefElement, RefTable};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Continuous `P_k` space, scalar or with two interleaved components.
///
/// Global node numbering: mesh vertices first, then `k - 1` nodes per edge
/// ordered from the lower to the higher vertex index, then cell interiors.
/// Vector spaces number component `c` of node `s` as `2 s + c`.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    element: Arc<RefElement>,
    components: usize,
    n_nodes: usize,
    cell_nodes: Vec<usize>,
    node_coords: Vec<[f64; 2]>,
    /// Boundary nodes per mesh tag, sorted.
    tag_nodes: Vec<Vec<usize>>,
}

impl FeSpace {
    pub fn scalar(mesh: Arc<Mesh>, k: usize) -> Result<Self> {
        Self::build(mesh, k, 1)
    }

    pub fn vector(mesh: Arc<Mesh>, k: usize) -> Result<Self> {
        Self::build(mesh, k, 2)
    }

    fn build(mesh: Arc<Mesh>, k: usize, components: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::param("degree", format!("polynomial degree must be at least 1, got {k}")));
        }
        let element = Arc::new(RefElement::new(k)?);
        let nv = mesh.n_vertices();
        let ne = mesh.n_edges();
        let nt = mesh.n_triangles();
        let per_edge = k - 1;
        let per_cell = if k >= 3 { (k - 1) * (k - 2) / 2 } else { 0 };
        let n_nodes = nv + per_edge * ne + per_cell * nt;
        let n_local = element.n_local();
        let mut cell_nodes = Vec::with_capacity(nt * n_local);
        let mut node_coords = vec![[0.0; 2]; n_nodes];
        for t in 0..nt {
            let tri = mesh.triangles()[t];
            let edges = mesh.triangle_edges(t);
            let map = ElementMap::new(mesh.corners(t));
            for (kind, xi) in element.basis.node_kinds().iter().zip(element.basis.nodes()) {
                let node = match *kind {
                    NodeKind::Vertex(i) => tri[i],
                    NodeKind::Edge { edge, position } => {
                        let e = edges[edge];
                        let (start, _) = mesh.local_edge_vertices(t, edge);
                        let along = if start == mesh.edges()[e].endpoints[0] {
                            position
                        } else {
                            k - position
                        };
                        nv + e * per_edge + along - 1
                    }
                    NodeKind::Interior(i) => nv + ne * per_edge + t * per_cell + i,
                };
                node_coords[node] = map.to_physical(*xi);
                cell_nodes.push(node);
            }
        }
        let mut tag_nodes = vec![Vec::new(); mesh.tag_names().len()];
        for (e, edge) in mesh.edges().iter().enumerate() {
            let Some(tag) = edge.tag else { continue };
            let list = &mut tag_nodes[tag];
            list.extend(edge.endpoints);
            list.extend((0..per_edge).map(|i| nv + e * per_edge + i));
        }
        for list in &mut tag_nodes {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            mesh,
            element,
            components,
            n_nodes,
            cell_nodes,
            node_coords,
            tag_nodes,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn element(&self) -> &RefElement {
        &self.element
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.components
    }

    pub fn n_local(&self) -> usize {
        self.element.n_local()
    }

    /// Global node indices of the local nodes of triangle `t`.
    pub fn cell_nodes(&self, t: usize) -> &[usize] {
        let n = self.n_local();
        &self.cell_nodes[t * n..(t + 1) * n]
    }

    /// Global DOFs of triangle `t`; vector spaces interleave components.
    pub fn cell_dofs(&self, t: usize) -> Vec<usize> {
        let nodes = self.cell_nodes(t);
        if self.components == 1 {
            return nodes.to_vec();
        }
        nodes.iter().flat_map(|&s| (0..self.components).map(move |c| self.components * s + c)).collect()
    }

    pub fn node_coordinates(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    pub fn element_map(&self, t: usize) -> ElementMap {
        ElementMap::new(self.mesh.corners(t))
    }

    /// Local coefficients of a scalar field (or of component `c`).
    pub fn local_coefficients(&self, t: usize, u: &[f64], c: usize) -> Vec<f64> {
        self.cell_nodes(t).iter().map(|&s| u[self.components * s + c]).collect()
    }

    /// Nodes on boundary edges carrying `tag`.
    pub fn tag_nodes(&self, tag: &str) -> Result<&[usize]> {
        let i = self
            .mesh
            .tag_index(tag)
            .ok_or_else(|| Error::Mesh(format!("unknown boundary tag `{tag}`")))?;
        Ok(&self.tag_nodes[i])
    }

    /// Constrained DOFs of one component on one boundary tag.
    pub fn dirichlet_set(&self, tag: &str, component: usize) -> Result<Vec<usize>> {
        if component >= self.components {
            return Err(Error::param("component", format!("space has {} components", self.components)));
        }
        Ok(self.tag_nodes(tag)?.iter().map(|&s| self.components * s + component).collect())
    }

    /// All DOFs on the boundary, every component.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .tag_nodes
            .iter()
            .flatten()
            .flat_map(|&s| (0..self.components).map(move |c| self.components * s + c))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        assert_eq!(self.components, 1, "scalar interpolation on a vector space");
        self.node_coords.iter().map(|&x| f(x)).collect()
    }

    /// Nodal interpolant of a vector function.
    pub fn interpolate_vector(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        assert_eq!(self.components, 2, "vector interpolation on a scalar space");
        self.node_coords.iter().flat_map(|&x| f(x)).collect()
    }

    /// Value of component `c` of `u` at reference point `xi` of triangle `t`.
    pub fn evaluate(&self, u: &[f64], t: usize, xi: [f64; 2], c: usize) -> f64 {
        let v = self.element.basis.ref_derivatives(xi, 0);
        self.cell_nodes(t)
            .iter()
            .zip(v)
            .map(|(&s, phi)| u[self.components * s + c] * phi)
            .sum()
    }

    /// Edge quadrature table of triangle `t` on its edge `e`, with points
    /// running from `endpoints[0]` to `endpoints[1]` of the edge.
    pub fn edge_table(&self, e: usize, t: usize) -> &RefTable {
        let le = self.mesh.local_edge_index(t, e).expect("edge does not belong to triangle");
        let (start, _) = self.mesh.local_edge_vertices(t, le);
        self.element.edge_table(le, start != self.mesh.edges()[e].endpoints[0])
    }

    /// Physical derivatives up to `order` of the basis of `t` on edge `e`.
    pub fn edge_phys(&self, e: usize, t: usize, order: usize) -> PhysTable {
        PhysTable::new(self.edge_table(e, t), &self.element_map(t), order)
    }

    /// Physical edge quadrature: points and weights (scaled by length).
    pub fn edge_quadrature(&self, e: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let edge = &self.mesh.edges()[e];
        let [p, q] = edge.endpoints.map(|v| self.mesh.vertices()[v]);
        let pts = self
            .element
            .edge_points
            .iter()
            .map(|&s| [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])])
            .collect();
        let w = self.element.edge_weights.iter().map(|w| w * edge.length).collect();
        (pts, w)
    }

    /// Reference table of the space's basis at arbitrary points.
    pub fn table(&self, points: &[[f64; 2]], max_order: usize) -> RefTable {
        RefTable::new(&self.element.basis, points, max_order)
    }

    /// Interpolates a field from a coarser space onto this one. `parent[t]`
    /// is the triangle of `coarse` containing triangle `t` of this space.
    pub fn transfer_from(&self, coarse: &FeSpace, u: &[f64], parent: &[usize]) -> Vec<f64> {
        assert_eq!(self.components, coarse.components);
        assert_eq!(parent.len(), self.mesh.n_triangles());
        let mut out = vec![0.0; self.n_dofs()];
        for (t, &p) in parent.iter().enumerate() {
            let map = coarse.element_map(p);
            for &s in self.cell_nodes(t) {
                let xi = map.to_reference(self.node_coords[s]);
                for c in 0..self.components {
                    out[self.components * s + c] = coarse.evaluate(u, p, xi, c);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{bisect, build_lshape, build_unit_square};
    use approx::assert_relative_eq;

    fn expected(m: &Mesh, k: usize) -> usize {
        m.n_vertices() + (k - 1) * m.n_edges() + (k - 1) * (k.saturating_sub(2)) / 2 * m.n_triangles()
    }

    #[test]
    fn dof_counts() {
        let l = Arc::new(build_lshape(1).unwrap());
        assert_eq!(FeSpace::scalar(l.clone(), 2).unwrap().n_dofs(), 21);
        let s = Arc::new(build_unit_square(1).unwrap());
        assert_eq!(FeSpace::scalar(s, 2).unwrap().n_dofs(), 9);
        for k in 1..=4 {
            let sp = FeSpace::scalar(l.clone(), k).unwrap();
            assert_eq!(sp.n_dofs(), expected(&l, k));
        }
        let v = FeSpace::vector(l.clone(), 3).unwrap();
        assert_eq!(v.n_dofs(), 2 * (l.n_vertices() + 2 * l.n_edges() + l.n_triangles()));
        assert!(FeSpace::scalar(l, 0).is_err());
    }

    #[test]
    fn shared_nodes_have_shared_coordinates() {
        let m = Arc::new(build_lshape(2).unwrap());
        let m = Arc::new(bisect(&m, &[0, 3, 7]).unwrap().mesh);
        for k in 2..=4 {
            let sp = FeSpace::scalar(m.clone(), k).unwrap();
            for t in 0..m.n_triangles() {
                let map = sp.element_map(t);
                for (&s, xi) in sp.cell_nodes(t).iter().zip(sp.element().basis.nodes()) {
                    let x = map.to_physical(*xi);
                    let y = sp.node_coordinates()[s];
                    assert_relative_eq!(x[0], y[0], epsilon = 1e-14);
                    assert_relative_eq!(x[1], y[1], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn dirichlet_sets_lie_on_their_segments() {
        let m = Arc::new(build_lshape(2).unwrap());
        let sp = FeSpace::vector(m, 2).unwrap();
        let right = sp.dirichlet_set("right", 1).unwrap();
        assert!(!right.is_empty());
        for d in right {
            assert_eq!(d % 2, 1);
            assert_relative_eq!(sp.node_coordinates()[d / 2][0], 1.0, epsilon = 1e-15);
        }
        assert!(sp.dirichlet_set("nowhere", 0).is_err());
        assert!(sp.dirichlet_set("right", 2).is_err());
    }

    #[test]
    fn transfer_reproduces_polynomials() {
        let m = Arc::new(build_lshape(1).unwrap());
        let r = bisect(&m, &[0, 2, 4]).unwrap();
        let coarse = FeSpace::scalar(m, 3).unwrap();
        let fine = FeSpace::scalar(Arc::new(r.mesh), 3).unwrap();
        let f = |p: [f64; 2]| p[0].powi(3) - p[0] * p[1] + 2.0;
        let u = coarse.interpolate(f);
        let v = fine.transfer_from(&coarse, &u, &r.parent);
        for (val, x) in v.iter().zip(fine.node_coordinates()) {
            assert_relative_eq!(*val, f(*x), epsilon = 1e-12);
        }
    }
}
