//! Lagrange finite element spaces of order one and two.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mesh::Mesh;
use std::collections::HashMap;
use std::sync::Arc;

/// Degrees of freedom sit on vertices (order 1) plus edges (order 2). The
/// numbering is vertices first, edges after, in first-seen element order.
pub struct FeSpace {
    mesh: Arc<Mesh>,
    order: usize,
    ndofs: usize,
    /// Per element: 3 (order 1) or 6 (order 2) global dof indices, ordered to
    /// match the reference shape functions.
    elem_dofs: Vec<[usize; 6]>,
    /// Sorted list of dofs on the outer boundary.
    dirichlet: Vec<usize>,
    dirichlet_mask: Vec<bool>,
    /// Physical coordinates of every dof (edge dofs use the curved mid node
    /// where one exists).
    dof_coords: Vec<Vec2>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: usize) -> Result<FeSpace> {
        if !(order == 1 || order == 2) {
            return Err(Error::BadParameters(format!("unsupported order {order}")));
        }
        let nv = mesh.n_vertices;
        let mut elem_dofs = vec![[usize::MAX; 6]; mesh.n_elements()];
        let mut dof_coords: Vec<Vec2> = mesh.nodes[..nv].to_vec();
        let mut ndofs = nv;

        if order == 1 {
            for (e, el) in mesh.elements.iter().enumerate() {
                elem_dofs[e][..3].copy_from_slice(&el.v);
            }
        } else {
            let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
            for (e, el) in mesh.elements.iter().enumerate() {
                elem_dofs[e][..3].copy_from_slice(&el.v);
                let ctrl = mesh.control_points(e);
                for k in 0..3 {
                    let a = el.v[k];
                    let b = el.v[(k + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    let id = *edge_ids.entry(key).or_insert_with(|| {
                        dof_coords.push(ctrl[3 + k]);
                        ndofs += 1;
                        ndofs - 1
                    });
                    elem_dofs[e][3 + k] = id;
                }
            }
        }

        // boundary dofs: marked vertices, plus edges adjacent to one element only
        let mut dirichlet_mask = vec![false; ndofs];
        for v in 0..nv {
            if mesh.boundary[v] {
                dirichlet_mask[v] = true;
            }
        }
        if order == 2 {
            for (e, el) in mesh.elements.iter().enumerate() {
                for k in 0..3 {
                    if mesh.neighbors[e][k].is_none() {
                        let a = el.v[k];
                        let b = el.v[(k + 1) % 3];
                        if mesh.boundary[a] && mesh.boundary[b] {
                            dirichlet_mask[elem_dofs[e][3 + k]] = true;
                        }
                    }
                }
            }
        }
        let dirichlet: Vec<usize> = (0..ndofs).filter(|&i| dirichlet_mask[i]).collect();

        Ok(FeSpace {
            mesh,
            order,
            ndofs,
            elem_dofs,
            dirichlet,
            dirichlet_mask,
            dof_coords,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<Mesh> {
        Arc::clone(&self.mesh)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn dofs_per_element(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.elem_dofs[e][..self.dofs_per_element()]
    }

    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet_mask[dof]
    }

    pub fn dof_coord(&self, dof: usize) -> Vec2 {
        self.dof_coords[dof]
    }

    /// Value and reference gradient of local shape function `j` at `y`.
    pub fn shape(&self, j: usize, y: Vec2) -> (f64, Vec2) {
        match self.order {
            1 => shape_p1(j, y),
            _ => shape_p2(j, y),
        }
    }

    /// All shape values and reference gradients at `y`.
    pub fn shapes_at(&self, y: Vec2) -> ([f64; 6], [Vec2; 6]) {
        let mut vals = [0.0; 6];
        let mut grads = [Vec2::ZERO; 6];
        for j in 0..self.dofs_per_element() {
            let (v, g) = self.shape(j, y);
            vals[j] = v;
            grads[j] = g;
        }
        (vals, grads)
    }

    /// Nodal interpolant of a function.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        (0..self.ndofs).map(|i| f(self.dof_coords[i])).collect()
    }

    /// Evaluate a finite element function at a reference point of an element.
    pub fn eval(&self, u: &[f64], e: usize, y: Vec2) -> f64 {
        let (vals, _) = self.shapes_at(y);
        self.element_dofs(e)
            .iter()
            .enumerate()
            .map(|(j, &dof)| u[dof] * vals[j])
            .sum()
    }
}

pub fn shape_p1(j: usize, y: Vec2) -> (f64, Vec2) {
    match j {
        0 => (1.0 - y.x - y.y, Vec2::new(-1.0, -1.0)),
        1 => (y.x, Vec2::new(1.0, 0.0)),
        2 => (y.y, Vec2::new(0.0, 1.0)),
        _ => panic!("P1 has 3 shape functions"),
    }
}

pub fn shape_p2(j: usize, y: Vec2) -> (f64, Vec2) {
    let l0 = 1.0 - y.x - y.y;
    let l1 = y.x;
    let l2 = y.y;
    match j {
        0 => (l0 * (2.0 * l0 - 1.0), Vec2::new(1.0 - 4.0 * l0, 1.0 - 4.0 * l0)),
        1 => (l1 * (2.0 * l1 - 1.0), Vec2::new(4.0 * l1 - 1.0, 0.0)),
        2 => (l2 * (2.0 * l2 - 1.0), Vec2::new(0.0, 4.0 * l2 - 1.0)),
        3 => (4.0 * l0 * l1, Vec2::new(4.0 * (l0 - l1), -4.0 * l1)),
        4 => (4.0 * l1 * l2, Vec2::new(4.0 * l2, 4.0 * l1)),
        5 => (4.0 * l2 * l0, Vec2::new(-4.0 * l2, 4.0 * (l0 - l2))),
        _ => panic!("P2 has 6 shape functions"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_disc_in_disc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kronecker_property() {
        let nodes_p1 = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        for (i, &n) in nodes_p1.iter().enumerate() {
            for j in 0..3 {
                let (v, _) = shape_p1(j, n);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-15);
            }
        }
        let nodes_p2 = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.0, 0.5),
        ];
        for (i, &n) in nodes_p2.iter().enumerate() {
            for j in 0..6 {
                let (v, _) = shape_p2(j, n);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-15, "P2 N{j} at node {i}");
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut a = rng.gen_range(0.0..1.0);
            let mut b = rng.gen_range(0.0..1.0);
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            let y = Vec2::new(a, b);
            let s1: f64 = (0..3).map(|j| shape_p1(j, y).0).sum();
            let s2: f64 = (0..6).map(|j| shape_p2(j, y).0).sum();
            assert!((s1 - 1.0).abs() < 1e-14);
            assert!((s2 - 1.0).abs() < 1e-14);
            let g2 = (0..6).fold(Vec2::ZERO, |acc, j| acc + shape_p2(j, y).1);
            assert!(g2.norm() < 1e-13);
        }
    }

    #[test]
    fn p2_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for _ in 0..50 {
            let a = rng.gen_range(0.1..0.4);
            let b = rng.gen_range(0.1..0.4);
            let y = Vec2::new(a, b);
            for j in 0..6 {
                let (_, g) = shape_p2(j, y);
                let gx = (shape_p2(j, y + Vec2::new(h, 0.0)).0 - shape_p2(j, y - Vec2::new(h, 0.0)).0) / (2.0 * h);
                let gy = (shape_p2(j, y + Vec2::new(0.0, h)).0 - shape_p2(j, y - Vec2::new(0.0, h)).0) / (2.0 * h);
                assert!((g.x - gx).abs() < 1e-8);
                assert!((g.y - gy).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dof_counts_and_dirichlet() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let mesh = Arc::new(mesh);
        let p1 = FeSpace::new(Arc::clone(&mesh), 1).unwrap();
        assert_eq!(p1.ndofs(), mesh.n_vertices);
        for &d in p1.dirichlet_dofs() {
            assert!((mesh.nodes[d].norm() - 2.0).abs() < 1e-12);
        }
        let p2 = FeSpace::new(Arc::clone(&mesh), 2).unwrap();
        assert!(p2.ndofs() > p1.ndofs());
        // every dirichlet dof coordinate sits on the outer circle
        for &d in p2.dirichlet_dofs() {
            assert!(
                (p2.dof_coord(d).norm() - 2.0).abs() < 1e-12,
                "dirichlet dof off the boundary: r = {}",
                p2.dof_coord(d).norm()
            );
        }
    }

    #[test]
    fn interpolation_reproduces_linears_p1() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let f = |p: Vec2| 2.0 * p.x - 0.5 * p.y + 1.0;
        let u = space.interpolate(f);
        for e in (0..space.mesh().n_elements()).step_by(11) {
            if space.mesh().elements[e].mid.is_some() {
                continue;
            }
            let y = Vec2::new(1.0 / 3.0, 1.0 / 3.0);
            let (x, _, _) = space.mesh().element_map(e, y);
            assert!((space.eval(&u, e, y) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolate_reference_solution_center_value() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let u = space.interpolate(|p| {
            let r = p.norm();
            r * r * r - 1.5 * r * r - 2.0
        });
        // center vertex is node 0
        assert!((u[0] - (-2.0)).abs() < 1e-15);
    }
}
