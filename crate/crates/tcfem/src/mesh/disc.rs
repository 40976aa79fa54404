//! Structured polar mesh for the disc-in-disc geometry.
//!
//! Node rings are placed exactly on the interface circle, on both tube
//! boundaries and on the outer boundary, so every element lies entirely in
//! one region and one tube half. Elements touching the interface or the
//! outer boundary carry quadratic maps with mid-edge nodes on the circle.

use super::{Element, Mesh, SigmaTag};
use crate::error::{Error, Result};
use crate::geometry::{InterfacePatch, Side, TubularNeighborhood};
use crate::la::Vec2;

/// Generate the polar mesh. Returns the mesh together with the single tube
/// (patch index 0 in the element tags).
pub fn gen_disc_in_disc(
    r_in: f64,
    r_out: f64,
    h: f64,
    delta: f64,
) -> Result<(Mesh, Vec<TubularNeighborhood>)> {
    if !(0.0 < delta && delta < r_in && r_in < r_out) {
        return Err(Error::BadParameters(format!(
            "need 0 < delta < r_in < r_out, got delta={delta}, r_in={r_in}, r_out={r_out}"
        )));
    }
    if h <= 0.0 {
        return Err(Error::BadParameters(format!("mesh size {h} must be positive")));
    }

    // radial partition with mandatory rings at r_in - delta, r_in, r_in + delta
    let mut radii = vec![0.0];
    let mut push_span = |radii: &mut Vec<f64>, from: f64, to: f64| {
        let n = ((to - from) / h).ceil().max(1.0) as usize;
        for i in 1..=n {
            radii.push(from + (to - from) * i as f64 / n as f64);
        }
    };
    push_span(&mut radii, 0.0, r_in - delta);
    push_span(&mut radii, r_in - delta, r_in);
    push_span(&mut radii, r_in, r_in + delta);
    push_span(&mut radii, r_in + delta, r_out);
    // snap the mandatory rings exactly
    for r in radii.iter_mut() {
        for target in [r_in - delta, r_in, r_in + delta, r_out] {
            if (*r - target).abs() < 1e-12 {
                *r = target;
            }
        }
    }

    // one azimuthal resolution for all rings keeps the mesh conforming
    let m = ((2.0 * std::f64::consts::PI * r_out / h).ceil() as usize).max(8);

    let mut nodes: Vec<Vec2> = Vec::new();
    let mut ring_start = vec![0usize; radii.len()];
    nodes.push(Vec2::ZERO); // center
    for (k, &r) in radii.iter().enumerate().skip(1) {
        ring_start[k] = nodes.len();
        for j in 0..m {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            nodes.push(Vec2::new(r * theta.cos(), r * theta.sin()));
        }
    }
    let n_vertices = nodes.len();

    let classify = |rc: f64| -> (Side, Option<SigmaTag>) {
        let region = if rc < r_in { Side::Minus } else { Side::Plus };
        let sigma = if rc > r_in - delta && rc < r_in {
            Some(SigmaTag { patch: 0, side: Side::Minus })
        } else if rc > r_in && rc < r_in + delta {
            Some(SigmaTag { patch: 0, side: Side::Plus })
        } else {
            None
        };
        (region, sigma)
    };

    // mid-edge node on the circle of radius r between angular slots j, j+1
    let mut mid_cache: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    let mut elements: Vec<Element> = Vec::new();

    // innermost fan
    {
        let r1 = radii[1];
        let rc = r1 * 2.0 / 3.0;
        let (region, sigma) = classify(rc);
        for j in 0..m {
            let a = ring_start[1] + j;
            let b = ring_start[1] + (j + 1) % m;
            elements.push(Element { v: [0, a, b], mid: None, region, sigma });
        }
    }

    for k in 1..radii.len() - 1 {
        let (ra, rb) = (radii[k], radii[k + 1]);
        let rc = 0.5 * (ra + rb);
        let (region, sigma) = classify(rc);
        // circumferential edges on the interface or the outer boundary are curved
        let inner_curved = (ra - r_in).abs() < 1e-12;
        let outer_curved = (rb - r_in).abs() < 1e-12 || (rb - r_out).abs() < 1e-12;
        for j in 0..m {
            let jn = (j + 1) % m;
            let a0 = ring_start[k] + j;
            let a1 = ring_start[k] + jn;
            let b0 = ring_start[k + 1] + j;
            let b1 = ring_start[k + 1] + jn;
            // split the quad along the diagonal a0-b1:
            // (a0, b1, a1) has its edge (a1, a0) on ring k,
            // (a0, b0, b1) has its edge (b0, b1) on ring k+1
            if inner_curved {
                let mid_id = *mid_cache.entry((k, j)).or_insert_with(|| {
                    let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    nodes.push(Vec2::new(ra * theta.cos(), ra * theta.sin()));
                    nodes.len() - 1
                });
                let m01 = (nodes[a0] + nodes[b1]) * 0.5;
                let m12 = (nodes[b1] + nodes[a1]) * 0.5;
                nodes.push(m01);
                let m01_id = nodes.len() - 1;
                nodes.push(m12);
                let m12_id = nodes.len() - 1;
                elements.push(Element {
                    v: [a0, b1, a1],
                    mid: Some([m01_id, m12_id, mid_id]),
                    region,
                    sigma,
                });
            } else {
                elements.push(Element { v: [a0, b1, a1], mid: None, region, sigma });
            }
            if outer_curved {
                let mid_id = *mid_cache.entry((k + 1, j)).or_insert_with(|| {
                    let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    nodes.push(Vec2::new(rb * theta.cos(), rb * theta.sin()));
                    nodes.len() - 1
                });
                let m01 = (nodes[a0] + nodes[b0]) * 0.5;
                let m20 = (nodes[b1] + nodes[a0]) * 0.5;
                nodes.push(m01);
                let m01_id = nodes.len() - 1;
                nodes.push(m20);
                let m20_id = nodes.len() - 1;
                elements.push(Element {
                    v: [a0, b0, b1],
                    mid: Some([m01_id, mid_id, m20_id]),
                    region,
                    sigma,
                });
            } else {
                elements.push(Element { v: [a0, b0, b1], mid: None, region, sigma });
            }
        }
    }

    let mut boundary = vec![false; nodes.len()];
    let outer_ring = ring_start[radii.len() - 1];
    for j in 0..m {
        boundary[outer_ring + j] = true;
    }
    // mid nodes on the outer circle are boundary nodes as well
    let last = radii.len() - 1;
    for j in 0..m {
        if let Some(&id) = mid_cache.get(&(last, j)) {
            boundary[id] = true;
        }
    }

    let mesh = Mesh::finalize(nodes, n_vertices, elements, boundary, h)?;
    let patch = InterfacePatch::circle(Vec2::ZERO, r_in, false)?;
    let tube = TubularNeighborhood::new(patch, delta)?;
    Ok((mesh, vec![tube]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::quadrature::SubdividedRule;

    #[test]
    fn interface_ring_vertices_on_circle() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.1, 0.2).unwrap();
        let mut on_interface = 0;
        for v in 0..mesh.n_vertices {
            let r = mesh.nodes[v].norm();
            if (r - 1.0).abs() < 0.02 {
                assert!((r - 1.0).abs() < 1e-12, "vertex near interface not snapped: r={r}");
                on_interface += 1;
            }
        }
        assert!(on_interface > 0);
    }

    #[test]
    fn element_classification() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.1, 0.2).unwrap();
        for e in 0..mesh.n_elements() {
            let rc = mesh.centroid(e).norm();
            let el = &mesh.elements[e];
            if rc < 0.5 {
                assert_eq!(el.region, Side::Minus);
                assert!(el.sigma.is_none());
            }
            if let Some(tag) = el.sigma {
                assert_eq!(tag.patch, 0);
                match tag.side {
                    Side::Minus => assert!(rc > 0.8 - 1e-12 && rc < 1.0),
                    Side::Plus => assert!(rc > 1.0 && rc < 1.2 + 1e-12),
                }
                assert_eq!(tag.side, el.region);
            }
        }
    }

    #[test]
    fn curved_elements_and_area() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.05, 0.2).unwrap();
        let rule = SubdividedRule::new(1, 5);
        mesh.check_maps(&rule).unwrap();
        let area = mesh.area(&rule);
        let exact = std::f64::consts::PI * 4.0;
        assert!(
            ((area - exact) / exact).abs() < 1e-4,
            "area {area} vs {exact}"
        );
    }

    #[test]
    fn interface_mid_nodes_on_circle() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.1, 0.2).unwrap();
        let mut found = 0;
        for el in &mesh.elements {
            if let Some(mid) = el.mid {
                for (k, &mnode) in mid.iter().enumerate() {
                    let a = mesh.nodes[el.v[k]];
                    let b = mesh.nodes[el.v[(k + 1) % 3]];
                    if (a.norm() - 1.0).abs() < 1e-12 && (b.norm() - 1.0).abs() < 1e-12 {
                        assert!((mesh.nodes[mnode].norm() - 1.0).abs() < 1e-12);
                        found += 1;
                    }
                }
            }
        }
        assert!(found > 0, "no curved interface edges found");
    }

    #[test]
    fn refinement_grows_interface_elements() {
        let count = |h: f64| {
            let (mesh, _) = gen_disc_in_disc(1.0, 2.0, h, 0.2).unwrap();
            mesh.elements.iter().filter(|e| e.sigma.is_some()).count()
        };
        assert!(count(0.05) >= 2 * count(0.1));
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(gen_disc_in_disc(1.0, 2.0, 0.1, 1.1).is_err());
        assert!(gen_disc_in_disc(2.0, 1.0, 0.1, 0.2).is_err());
        assert!(gen_disc_in_disc(1.0, 2.0, -0.1, 0.2).is_err());
    }
}
