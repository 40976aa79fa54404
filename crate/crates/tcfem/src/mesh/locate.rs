//! Point location: neighbor walk on the straight mesh skeleton, Newton
//! refinement on curved elements, and a deterministic brute-force fallback.

use super::Mesh;
use crate::error::{Error, Result};
use crate::la::{Mat2, Vec2};

/// Reference coordinates are accepted as inside up to this violation.
const STRICT_TOL: f64 = 1e-12;

/// Quadratic boundary edges deviate from the true geometry by O(h^3), so a
/// reflected point can fall in the sliver between an element's curved edge
/// and the exact interface. Points within this reference-coordinate distance
/// of the best element are clamped onto it; anything worse is an error.
const CLAMP_TOL: f64 = 1e-2;

#[derive(Clone, Copy, Debug)]
pub struct Located {
    pub element: usize,
    /// Reference coordinates in the element, clamped to the closed triangle.
    pub reference: Vec2,
    /// How far outside the reference triangle the raw coordinates were.
    pub violation: f64,
}

/// Barycentric-based violation: zero inside, positive outside.
fn violation_of(y: Vec2) -> f64 {
    let l0 = 1.0 - y.x - y.y;
    (-y.x).max(-y.y).max(-l0).max(0.0)
}

fn clamp_reference(y: Vec2) -> Vec2 {
    let mut x = y.x.max(0.0);
    let mut yy = y.y.max(0.0);
    let s = x + yy;
    if s > 1.0 {
        x /= s;
        yy /= s;
    }
    Vec2::new(x, yy)
}

/// Straight-skeleton barycentric coordinates (lambda1, lambda2) of `x`.
fn straight_reference(mesh: &Mesh, e: usize, x: Vec2) -> Vec2 {
    let el = &mesh.elements[e];
    let p0 = mesh.nodes[el.v[0]];
    let p1 = mesh.nodes[el.v[1]];
    let p2 = mesh.nodes[el.v[2]];
    let j = Mat2::from_cols(p1 - p0, p2 - p0);
    j.inverse().mul_vec(x - p0)
}

/// Reference coordinates of `x` in element `e`, via Newton iteration for
/// curved maps. Returns the raw (possibly slightly outside) coordinates.
fn invert_map(mesh: &Mesh, e: usize, x: Vec2) -> Vec2 {
    let bary = straight_reference(mesh, e, x);
    if mesh.elements[e].mid.is_none() {
        return bary;
    }
    let mut y = clamp_reference(bary);
    for _ in 0..30 {
        let (xx, j, _) = mesh.element_map(e, y);
        let r = x - xx;
        if r.norm() < 1e-14 * (1.0 + x.norm()) {
            break;
        }
        y += j.inverse().mul_vec(r);
    }
    y
}

fn residual_ok(mesh: &Mesh, e: usize, y: Vec2, x: Vec2) -> bool {
    let (xx, _, _) = mesh.element_map(e, clamp_reference(y));
    xx.dist(x) < 1e-8 * (1.0 + x.norm()) + 2.0 * CLAMP_TOL * mesh.h
}

/// Locate `x` starting from a hint element. Ties on shared edges resolve to
/// the lowest element index among the containing neighbors.
pub fn locate_hinted(
    mesh: &Mesh,
    x: Vec2,
    hint: usize,
    candidates: Option<&[usize]>,
) -> Result<Located> {
    let mut e = hint.min(mesh.n_elements().saturating_sub(1));
    let mut prev = usize::MAX;
    let max_steps = 2 * mesh.n_elements() + 16;
    let mut best: Option<Located> = None;

    let mut consider = |best: &mut Option<Located>, loc: Located| {
        if best.as_ref().map_or(true, |b| loc.violation < b.violation) {
            *best = Some(loc);
        }
    };

    for _ in 0..max_steps {
        let bary = straight_reference(mesh, e, x);
        let l = [1.0 - bary.x - bary.y, bary.x, bary.y];
        // most negative barycentric coordinate decides the crossing edge
        let (k_min, l_min) = l
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, v)| (k, *v))
            .unwrap();
        if l_min >= -STRICT_TOL {
            // inside on the straight skeleton; refine if curved
            let y = invert_map(mesh, e, x);
            let v = violation_of(y);
            if v <= STRICT_TOL && residual_ok(mesh, e, y, x) {
                return Ok(finish(mesh, e, y, x));
            }
            consider(&mut best, Located { element: e, reference: clamp_reference(y), violation: v });
            break;
        }
        // remember near misses for the clamped fallback
        if l_min > -CLAMP_TOL {
            let y = invert_map(mesh, e, x);
            let v = violation_of(y);
            if v <= STRICT_TOL && residual_ok(mesh, e, y, x) {
                return Ok(finish(mesh, e, y, x));
            }
            consider(&mut best, Located { element: e, reference: clamp_reference(y), violation: v });
        }
        // edge opposite to vertex k is the local edge starting at vertex (k+1)%3
        let edge = (k_min + 1) % 3;
        match mesh.neighbors[e][edge] {
            Some(n) if n != prev => {
                prev = e;
                e = n;
            }
            _ => break,
        }
    }

    // deterministic scan, lowest index first
    let scan: Box<dyn Iterator<Item = usize>> = match candidates {
        Some(c) => Box::new(c.iter().copied()),
        None => Box::new(0..mesh.n_elements()),
    };
    for e in scan {
        let bary = straight_reference(mesh, e, x);
        if violation_of(bary) > 0.3 {
            continue;
        }
        let y = invert_map(mesh, e, x);
        let v = violation_of(y);
        if !residual_ok(mesh, e, y, x) {
            continue;
        }
        if v <= STRICT_TOL {
            return Ok(finish(mesh, e, y, x));
        }
        consider(&mut best, Located { element: e, reference: clamp_reference(y), violation: v });
    }

    match best {
        Some(loc) if loc.violation <= CLAMP_TOL => Ok(loc),
        _ => Err(Error::NotFound {
            x: x.x,
            y: x.y,
            violation: best.map_or(f64::INFINITY, |b| b.violation),
        }),
    }
}

/// Resolve edge/vertex ties to the lowest containing element index.
fn finish(mesh: &Mesh, e: usize, y: Vec2, x: Vec2) -> Located {
    let yc = clamp_reference(y);
    let l = [1.0 - yc.x - yc.y, yc.x, yc.y];
    let on_edge = l.iter().any(|&v| v <= STRICT_TOL);
    if !on_edge {
        return Located { element: e, reference: yc, violation: violation_of(y) };
    }
    let mut best = Located { element: e, reference: yc, violation: violation_of(y) };
    for k in 0..3 {
        if l[k] <= STRICT_TOL {
            if let Some(n) = mesh.neighbors[e][(k + 1) % 3] {
                if n < best.element {
                    let yn = invert_map(mesh, n, x);
                    if violation_of(yn) <= STRICT_TOL && residual_ok(mesh, n, yn, x) {
                        best = Located { element: n, reference: clamp_reference(yn), violation: violation_of(yn) };
                    }
                }
            }
        }
    }
    best
}

/// Locate without a hint (starts the walk at element 0).
pub fn locate(mesh: &Mesh, x: Vec2, hint: Option<usize>) -> Result<Located> {
    locate_hinted(mesh, x, hint.unwrap_or(0), None)
}

#[cfg(test)]
mod tests {
    use super::super::gen_disc_in_disc;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn centroid_locates_to_itself() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        for e in (0..mesh.n_elements()).step_by(7) {
            if mesh.elements[e].mid.is_some() {
                continue;
            }
            let c = mesh.centroid(e);
            let loc = locate_hinted(&mesh, c, e, None).unwrap();
            assert_eq!(loc.element, e);
            assert!(loc.reference.dist(Vec2::new(1.0 / 3.0, 1.0 / 3.0)) < 1e-12);
        }
    }

    #[test]
    fn vertex_locates_to_incident_element() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let v = mesh.elements[5].v[1];
        let loc = locate(&mesh, mesh.nodes[v], None).unwrap();
        assert!(mesh.elements[loc.element].v.contains(&v));
        let l = [
            1.0 - loc.reference.x - loc.reference.y,
            loc.reference.x,
            loc.reference.y,
        ];
        assert!(l.iter().any(|&c| (c - 1.0).abs() < 1e-10));
    }

    #[test]
    fn random_points_roundtrip() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.2, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let e = rng.gen_range(0..mesh.n_elements());
            let mut a = rng.gen_range(0.0..1.0);
            let mut b = rng.gen_range(0.0..1.0);
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            let y = Vec2::new(a, b);
            let (x, _, _) = mesh.element_map(e, y);
            let hint = rng.gen_range(0..mesh.n_elements());
            let loc = locate_hinted(&mesh, x, hint, None).unwrap();
            let (x2, _, _) = mesh.element_map(loc.element, loc.reference);
            assert!(
                x2.dist(x) < 1e-10,
                "roundtrip failed: {:?} vs {:?} (elements {} -> {})",
                x,
                x2,
                e,
                loc.element
            );
        }
    }

    #[test]
    fn outside_point_is_not_found() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let err = locate(&mesh, Vec2::new(2.5, 0.0), None);
        assert!(matches!(err, Err(Error::NotFound { .. })));
    }
}
