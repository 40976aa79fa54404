//! Conforming triangle meshes with region and tube tags.
//!
//! Nodes are stored in one array: the corner vertices first, then the
//! mid-edge nodes of curved elements. Every element lies entirely in one
//! region; elements inside a tube additionally carry the patch index and the
//! interface side. Elements touching the interface or a curved outer
//! boundary use a quadratic isoparametric map, all others are affine.

mod disc;
mod format;
mod locate;

pub use disc::gen_disc_in_disc;
pub use locate::{locate, locate_hinted, Located};

use crate::error::{Error, Result};
use crate::fespace::quadrature::SubdividedRule;
use crate::geometry::Side;
use crate::la::{Mat2, Vec2};

/// Tube membership of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaTag {
    /// Index into the patch list of the generating geometry.
    pub patch: usize,
    /// Which side of the interface the element lies on.
    pub side: Side,
}

#[derive(Clone, Debug)]
pub struct Element {
    /// Corner node indices, counterclockwise.
    pub v: [usize; 3],
    /// Mid-edge node indices for quadratic elements, ordered as the edges
    /// (v0,v1), (v1,v2), (v2,v0). `None` for affine elements.
    pub mid: Option<[usize; 3]>,
    pub region: Side,
    pub sigma: Option<SigmaTag>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Vec2>,
    /// Number of corner vertices; `nodes[..n_vertices]` are corners.
    pub n_vertices: usize,
    pub elements: Vec<Element>,
    /// Marker per node; true on the outer boundary.
    pub boundary: Vec<bool>,
    /// Nominal mesh size the generator was asked for.
    pub h: f64,
    /// Neighbor element across each local edge, if any.
    pub neighbors: Vec<[Option<usize>; 3]>,
}

impl Mesh {
    /// Assemble neighbor information and verify conformity. Called by the
    /// generators after the raw arrays are built.
    pub(crate) fn finalize(
        nodes: Vec<Vec2>,
        n_vertices: usize,
        elements: Vec<Element>,
        boundary: Vec<bool>,
        h: f64,
    ) -> Result<Mesh> {
        let mut mesh = Mesh {
            nodes,
            n_vertices,
            elements,
            boundary,
            h,
            neighbors: Vec::new(),
        };
        mesh.build_neighbors()?;
        mesh.check_orientation()?;
        Ok(mesh)
    }

    fn build_neighbors(&mut self) -> Result<()> {
        use std::collections::HashMap;
        let mut by_edge: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for k in 0..3 {
                let a = el.v[k];
                let b = el.v[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                by_edge.entry(key).or_default().push((e, k));
            }
        }
        self.neighbors = vec![[None; 3]; self.elements.len()];
        for (key, owners) in by_edge {
            match owners.len() {
                1 => {}
                2 => {
                    let (e0, k0) = owners[0];
                    let (e1, k1) = owners[1];
                    self.neighbors[e0][k0] = Some(e1);
                    self.neighbors[e1][k1] = Some(e0);
                }
                n => {
                    return Err(Error::BadParameters(format!(
                        "edge {key:?} shared by {n} elements; mesh is not conforming"
                    )))
                }
            }
        }
        Ok(())
    }

    fn check_orientation(&self) -> Result<()> {
        for (e, el) in self.elements.iter().enumerate() {
            let a = self.nodes[el.v[0]];
            let b = self.nodes[el.v[1]];
            let c = self.nodes[el.v[2]];
            if (b - a).cross(c - a) <= 0.0 {
                return Err(Error::BadParameters(format!(
                    "element {e} is not positively oriented"
                )));
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Straight-sided centroid of an element.
    pub fn centroid(&self, e: usize) -> Vec2 {
        let el = &self.elements[e];
        (self.nodes[el.v[0]] + self.nodes[el.v[1]] + self.nodes[el.v[2]]) / 3.0
    }

    /// The six geometric control points of an element, with midpoints
    /// synthesized for affine elements.
    pub fn control_points(&self, e: usize) -> [Vec2; 6] {
        let el = &self.elements[e];
        let p0 = self.nodes[el.v[0]];
        let p1 = self.nodes[el.v[1]];
        let p2 = self.nodes[el.v[2]];
        match el.mid {
            Some(m) => [
                p0,
                p1,
                p2,
                self.nodes[m[0]],
                self.nodes[m[1]],
                self.nodes[m[2]],
            ],
            None => [
                p0,
                p1,
                p2,
                (p0 + p1) * 0.5,
                (p1 + p2) * 0.5,
                (p2 + p0) * 0.5,
            ],
        }
    }

    /// Evaluate the element map at a reference point: physical position,
    /// Jacobian and its determinant. Affine elements have a constant
    /// Jacobian; quadratic elements use the standard 6-node evaluation.
    pub fn element_map(&self, e: usize, y: Vec2) -> (Vec2, Mat2, f64) {
        let el = &self.elements[e];
        match el.mid {
            None => {
                let p0 = self.nodes[el.v[0]];
                let p1 = self.nodes[el.v[1]];
                let p2 = self.nodes[el.v[2]];
                let j = Mat2::from_cols(p1 - p0, p2 - p0);
                let x = p0 + (p1 - p0) * y.x + (p2 - p0) * y.y;
                (x, j, j.det())
            }
            Some(_) => {
                let pts = self.control_points(e);
                let l0 = 1.0 - y.x - y.y;
                let (l1, l2) = (y.x, y.y);
                let vals = [
                    l0 * (2.0 * l0 - 1.0),
                    l1 * (2.0 * l1 - 1.0),
                    l2 * (2.0 * l2 - 1.0),
                    4.0 * l0 * l1,
                    4.0 * l1 * l2,
                    4.0 * l2 * l0,
                ];
                // gradients with respect to (x, y) in reference coordinates
                let g0 = Vec2::new(-1.0, -1.0) * (4.0 * l0 - 1.0);
                let g1 = Vec2::new(4.0 * l1 - 1.0, 0.0);
                let g2 = Vec2::new(0.0, 4.0 * l2 - 1.0);
                let g3 = Vec2::new(4.0 * (l0 - l1), -4.0 * l1);
                let g4 = Vec2::new(4.0 * l2, 4.0 * l1);
                let g5 = Vec2::new(-4.0 * l2, 4.0 * (l0 - l2));
                let grads = [g0, g1, g2, g3, g4, g5];
                let mut x = Vec2::ZERO;
                let mut c0 = Vec2::ZERO;
                let mut c1 = Vec2::ZERO;
                for i in 0..6 {
                    x += pts[i] * vals[i];
                    c0 += pts[i] * grads[i].x;
                    c1 += pts[i] * grads[i].y;
                }
                let j = Mat2::from_cols(c0, c1);
                (x, j, j.det())
            }
        }
    }

    /// Verify that the map determinant is positive at the given quadrature
    /// points on every element.
    pub fn check_maps(&self, rule: &SubdividedRule) -> Result<()> {
        for e in 0..self.elements.len() {
            for (y, _) in rule.iter() {
                let (_, _, det) = self.element_map(e, y);
                if det <= 0.0 {
                    return Err(Error::BadParameters(format!(
                        "element {e} has nonpositive map determinant {det} at ({}, {})",
                        y.x, y.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total area by quadrature over the (possibly curved) element maps.
    pub fn area(&self, rule: &SubdividedRule) -> f64 {
        let mut total = 0.0;
        for e in 0..self.elements.len() {
            for (y, w) in rule.iter() {
                let (_, _, det) = self.element_map(e, y);
                total += w * det.abs();
            }
        }
        total
    }

    /// Write the mesh in the crate's ASCII format.
    pub fn write_ascii(&self, w: &mut impl std::io::Write) -> Result<()> {
        format::write_ascii(self, w)
    }

    /// Read a mesh written by [`Mesh::write_ascii`].
    pub fn read_ascii(r: &mut impl std::io::BufRead) -> Result<Mesh> {
        format::read_ascii(r)
    }
}
