//! Assembly of the standard and reflected bilinear forms.
//!
//! The transformed system has the shape `B = B1 - 2*B2`. `B1` is an ordinary
//! stiffness matrix weighted with the absolute coefficient. `B2` couples
//! trial functions on the source half of the tube with test functions whose
//! support lives on the other side of the interface: each quadrature point of
//! a source element is reflected, the element containing the image is
//! located, and the contribution is scattered into (test, trial) pairs whose
//! supports never meet. The integrand jumps where the reflected support
//! boundary crosses a source element, so these terms are integrated with the
//! composite subdivided rule.

use crate::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::fespace::quadrature::SubdividedRule;
use crate::fespace::FeSpace;
use crate::geometry::{Side, TubularNeighborhood};
use crate::la::Vec2;
use crate::mesh::{locate_hinted, Mesh};
use crate::sparse::RealOperator;
use std::collections::BTreeMap;

/// Piecewise-constant coefficient by region.
#[derive(Clone, Copy, Debug)]
pub struct Coefficient {
    pub minus: f64,
    pub plus: f64,
}

impl Coefficient {
    pub fn new(minus: f64, plus: f64) -> Self {
        Coefficient { minus, plus }
    }

    pub fn one() -> Self {
        Coefficient { minus: 1.0, plus: 1.0 }
    }

    #[inline]
    pub fn value(&self, region: Side) -> f64 {
        match region {
            Side::Minus => self.minus,
            Side::Plus => self.plus,
        }
    }

    pub fn abs(&self) -> Self {
        Coefficient { minus: self.minus.abs(), plus: self.plus.abs() }
    }

    pub fn sign(&self) -> Self {
        Coefficient { minus: self.minus.signum(), plus: self.plus.signum() }
    }

    /// Contrast of the positive side against the negative one.
    pub fn contrast_plus(&self) -> f64 {
        self.plus / self.minus.abs()
    }

    pub fn contrast_minus(&self) -> f64 {
        self.minus.abs() / self.plus
    }
}

/// Which elements participate in an integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    All,
    Region(Side),
    /// Only elements tagged as lying in a tube, on the given interface side.
    TubeSide(Side),
}

impl Domain {
    fn accepts(&self, el: &crate::mesh::Element) -> bool {
        match self {
            Domain::All => true,
            Domain::Region(s) => el.region == *s,
            Domain::TubeSide(s) => el.sigma.map_or(false, |tag| tag.side == *s),
        }
    }
}

/// Which variant of the transformation is assembled. `Plus` modifies the
/// test functions on the negative region (using the reflection that pulls
/// values from the positive side) and requires the plus contrast to exceed
/// one; `Minus` is the mirror case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TSide {
    Plus,
    Minus,
}

impl TSide {
    /// The tube half over which the reflected stiffness integral runs (the
    /// side where the test functions are modified).
    pub fn source_side(self) -> Side {
        match self {
            TSide::Plus => Side::Minus,
            TSide::Minus => Side::Plus,
        }
    }

    /// The tube half over which the pulled-back load integral runs.
    pub fn load_side(self) -> Side {
        self.source_side().opposite()
    }

    /// Sign of the reflected load in the combined right-hand side. The base
    /// term of the transformation is `-u` on the modified side for `Plus`,
    /// which flips the load contribution relative to the `Minus` case.
    pub fn load_sign(self) -> f64 {
        match self {
            TSide::Plus => 1.0,
            TSide::Minus => -1.0,
        }
    }

    /// The contrast that must exceed the squared reflection norm.
    pub fn contrast(self, sigma: &Coefficient) -> f64 {
        match self {
            TSide::Plus => sigma.contrast_plus(),
            TSide::Minus => sigma.contrast_minus(),
        }
    }
}

/// Pick the transformation side from the coefficient: the side whose
/// contrast exceeds one.
pub fn choose_t_side(sigma: &Coefficient) -> Result<TSide> {
    let kp = sigma.contrast_plus();
    let km = sigma.contrast_minus();
    if kp > 1.0 {
        Ok(TSide::Plus)
    } else if km > 1.0 {
        Ok(TSide::Minus)
    } else {
        Err(Error::ContrastTooSmall { contrast: kp.max(km) })
    }
}

/// Standard stiffness matrix with a region-wise coefficient.
pub fn assemble_stiffness(
    space: &FeSpace,
    coeff: &Coefficient,
    domain: Domain,
    rule: &SubdividedRule,
) -> RealOperator {
    assemble_standard(space, coeff, domain, rule, true)
}

/// Standard mass matrix with a region-wise coefficient.
pub fn assemble_mass(
    space: &FeSpace,
    coeff: &Coefficient,
    domain: Domain,
    rule: &SubdividedRule,
) -> RealOperator {
    assemble_standard(space, coeff, domain, rule, false)
}

fn assemble_standard(
    space: &FeSpace,
    coeff: &Coefficient,
    domain: Domain,
    rule: &SubdividedRule,
    stiffness: bool,
) -> RealOperator {
    let mesh = space.mesh();
    let n = space.dofs_per_element();
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        if !domain.accepts(el) {
            continue;
        }
        let cval = coeff.value(el.region);
        let mut local = [[0.0f64; 6]; 6];
        for (y, w) in rule.iter() {
            let (_, j, det) = mesh.element_map(e, y);
            let (vals, grads) = space.shapes_at(y);
            let c = w * det.abs() * cval;
            if stiffness {
                let jinv = j.inverse();
                let mut phys = [Vec2::ZERO; 6];
                for a in 0..n {
                    phys[a] = jinv.tr_mul_vec(grads[a]);
                }
                for a in 0..n {
                    for b in a..n {
                        local[a][b] += c * phys[a].dot(phys[b]);
                    }
                }
            } else {
                for a in 0..n {
                    for b in a..n {
                        local[a][b] += c * vals[a] * vals[b];
                    }
                }
            }
        }
        let dofs = space.element_dofs(e);
        for a in 0..n {
            for b in a..n {
                let v = local[a][b];
                trips.push((dofs[a], dofs[b], v));
                if a != b {
                    trips.push((dofs[b], dofs[a], v));
                }
            }
        }
    }
    RealOperator::from_triplets(space.ndofs(), space.ndofs(), &mut trips)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReflectionKind {
    Stiffness,
    Mass,
}

/// Bookkeeping for the scatter, used by tests to verify completeness.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReflectionStats {
    /// Quadrature points on source elements.
    pub points_total: usize,
    /// Points skipped because the cut-off and its gradient both vanish.
    pub points_skipped: usize,
    /// Points that contributed to the matrix.
    pub points_scattered: usize,
}

/// Elements of each tube half, grouped by patch; used as deterministic
/// candidate lists for locating reflected points.
pub fn tube_elements(mesh: &Mesh, n_patches: usize) -> Vec<[Vec<usize>; 2]> {
    let mut out: Vec<[Vec<usize>; 2]> = (0..n_patches).map(|_| [Vec::new(), Vec::new()]).collect();
    for (e, el) in mesh.elements.iter().enumerate() {
        if let Some(tag) = el.sigma {
            let slot = match tag.side {
                Side::Minus => 0,
                Side::Plus => 1,
            };
            out[tag.patch][slot].push(e);
        }
    }
    out
}

/// The reflected bilinear form over the source half of every tube.
///
/// For stiffness, each quadrature point `x` of a source element contributes
/// `w |det J| c(x) * grad_u(x) . ( chi(x) * Dphi(x)^T grad_v(phi(x)) + v(phi(x)) * grad_chi(x) )`,
/// scattered into (test dof of the element containing `phi(x)`, trial dof of
/// the source element). For mass the contribution is
/// `w |det J| c(x) * u(x) chi(x) v(phi(x))`.
pub fn assemble_reflection(
    space: &FeSpace,
    coeff: &Coefficient,
    tubes: &[TubularNeighborhood],
    profile: &CutoffProfile,
    kind: ReflectionKind,
    rule: &SubdividedRule,
    t_side: TSide,
) -> Result<(RealOperator, ReflectionStats)> {
    let mesh = space.mesh();
    let n = space.dofs_per_element();
    let source_side = t_side.source_side();
    let target_side = source_side.opposite();
    let candidates = tube_elements(mesh, tubes.len());
    let mut stats = ReflectionStats::default();
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();

    for (e, el) in mesh.elements.iter().enumerate() {
        let tag = match el.sigma {
            Some(tag) if tag.side == source_side => tag,
            _ => continue,
        };
        let tube = tubes.get(tag.patch).ok_or_else(|| {
            Error::BadParameters(format!("element {e} references missing patch {}", tag.patch))
        })?;
        let patch = tube.patch();
        let cval = coeff.value(el.region);
        let target_list = &candidates[tag.patch][match target_side {
            Side::Minus => 0,
            Side::Plus => 1,
        }];
        if target_list.is_empty() {
            return Err(Error::BadParameters(format!(
                "tube {} has no elements on the target side",
                tag.patch
            )));
        }
        let mut hint = target_list[0];
        // contributions keyed by test dof, values per trial dof
        let mut buffer: BTreeMap<usize, [f64; 6]> = BTreeMap::new();
        for (y, w) in rule.iter() {
            stats.points_total += 1;
            let (x, j_m, det_m) = mesh.element_map(e, y);
            let t = patch.signed_distance(x);
            let chi = profile.value(t);
            let dchi = profile.derivative(t);
            if chi == 0.0 && dchi == 0.0 {
                stats.points_skipped += 1;
                continue;
            }
            let (foot, t) = patch.project(x).map_err(|_| Error::LocateFailure {
                x: x.x,
                y: x.y,
                element: e,
            })?;
            let z = patch.offset(foot, -t);
            let grad_chi = patch.normal_toward_minus(foot) * dchi;
            let loc = locate_hinted(mesh, z, hint, Some(target_list)).map_err(|_| {
                Error::LocateFailure { x: z.x, y: z.y, element: e }
            })?;
            hint = loc.element;
            let c = w * det_m.abs() * cval;
            let dofs_v = space.element_dofs(loc.element);
            let (vals_v, grads_v) = space.shapes_at(loc.reference);
            let (vals_u, grads_u) = space.shapes_at(y);
            match kind {
                ReflectionKind::Stiffness => {
                    let jinv_m = j_m.inverse();
                    let (_, j_n, _) = mesh.element_map(loc.element, loc.reference);
                    let jinv_n = j_n.inverse();
                    let dphi = tube.reflect_jacobian(x).map_err(|_| Error::LocateFailure {
                        x: x.x,
                        y: x.y,
                        element: e,
                    })?;
                    let dphi_t = dphi.transpose();
                    for (b, &dof_v) in dofs_v.iter().enumerate() {
                        // gradient of the composed test function at x
                        let gv = jinv_n.tr_mul_vec(grads_v[b]);
                        let composed = dphi_t.mul_vec(gv) * chi + grad_chi * vals_v[b];
                        let row = buffer.entry(dof_v).or_insert([0.0; 6]);
                        for a in 0..n {
                            let gu = jinv_m.tr_mul_vec(grads_u[a]);
                            row[a] += c * gu.dot(composed);
                        }
                    }
                }
                ReflectionKind::Mass => {
                    for (b, &dof_v) in dofs_v.iter().enumerate() {
                        let row = buffer.entry(dof_v).or_insert([0.0; 6]);
                        for a in 0..n {
                            row[a] += c * vals_u[a] * chi * vals_v[b];
                        }
                    }
                }
            }
            stats.points_scattered += 1;
        }
        let dofs_u = space.element_dofs(e);
        for (dof_v, row) in buffer {
            for a in 0..n {
                if row[a] != 0.0 {
                    trips.push((dof_v, dofs_u[a], row[a]));
                }
            }
        }
    }
    Ok((
        RealOperator::from_triplets(space.ndofs(), space.ndofs(), &mut trips),
        stats,
    ))
}

/// Gram matrix of the reflection pullback in the gradient seminorm: entry
/// (i, j) is the integral over the source half of
/// `(Dphi^T grad v_i(phi(x))) . (Dphi^T grad v_j(phi(x)))`. Both arguments
/// live on the target side; this is the discrete operator whose largest
/// Rayleigh quotient against the target-side stiffness estimates the squared
/// reflection norm.
pub fn assemble_pullback_gram(
    space: &FeSpace,
    tubes: &[TubularNeighborhood],
    rule: &SubdividedRule,
    source_side: Side,
) -> Result<RealOperator> {
    let mesh = space.mesh();
    let n = space.dofs_per_element();
    let target_side = source_side.opposite();
    let candidates = tube_elements(mesh, tubes.len());
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();

    for (e, el) in mesh.elements.iter().enumerate() {
        let tag = match el.sigma {
            Some(tag) if tag.side == source_side => tag,
            _ => continue,
        };
        let tube = &tubes[tag.patch];
        let patch = tube.patch();
        let target_list = &candidates[tag.patch][match target_side {
            Side::Minus => 0,
            Side::Plus => 1,
        }];
        let mut hint = target_list[0];
        let mut buffer: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (y, w) in rule.iter() {
            let (x, _, det_m) = mesh.element_map(e, y);
            let (foot, t) = patch.project(x).map_err(|_| Error::LocateFailure {
                x: x.x,
                y: x.y,
                element: e,
            })?;
            let z = patch.offset(foot, -t);
            let loc = locate_hinted(mesh, z, hint, Some(target_list)).map_err(|_| {
                Error::LocateFailure { x: z.x, y: z.y, element: e }
            })?;
            hint = loc.element;
            let dphi_t = tube
                .reflect_jacobian(x)
                .map_err(|_| Error::LocateFailure { x: x.x, y: x.y, element: e })?
                .transpose();
            let (_, j_n, _) = mesh.element_map(loc.element, loc.reference);
            let jinv_n = j_n.inverse();
            let dofs_v = space.element_dofs(loc.element);
            let (_, grads_v) = space.shapes_at(loc.reference);
            let c = w * det_m.abs();
            let mut composed = [Vec2::ZERO; 6];
            for b in 0..n {
                composed[b] = dphi_t.mul_vec(jinv_n.tr_mul_vec(grads_v[b]));
            }
            for a in 0..n {
                for b in 0..n {
                    let v = c * composed[a].dot(composed[b]);
                    if v != 0.0 {
                        *buffer.entry((dofs_v[a], dofs_v[b])).or_insert(0.0) += v;
                    }
                }
            }
        }
        for ((r, c), v) in buffer {
            trips.push((r, c, v));
        }
    }
    Ok(RealOperator::from_triplets(space.ndofs(), space.ndofs(), &mut trips))
}

/// Standard load vector; the density sees the element region so sign-carrying
/// right-hand sides can be evaluated through the tags.
pub fn assemble_load(
    space: &FeSpace,
    f: impl Fn(Vec2, Side) -> f64,
    rule: &SubdividedRule,
) -> Vec<f64> {
    let mesh = space.mesh();
    let n = space.dofs_per_element();
    let mut out = vec![0.0; space.ndofs()];
    for (e, el) in mesh.elements.iter().enumerate() {
        let dofs = space.element_dofs(e);
        for (y, w) in rule.iter() {
            let (x, _, det) = mesh.element_map(e, y);
            let c = w * det.abs() * f(x, el.region);
            let (vals, _) = space.shapes_at(y);
            for a in 0..n {
                out[dofs[a]] += c * vals[a];
            }
        }
    }
    out
}

/// Pulled-back reflected load: integrates
/// `f(phi(y)) chi(phi(y)) |det Dphi(y)| v_i(y)` over the tube half opposite
/// the source side (where the pullback lands). No point location is needed.
pub fn assemble_reflected_load(
    space: &FeSpace,
    f: impl Fn(Vec2, Side) -> f64,
    tubes: &[TubularNeighborhood],
    profile: &CutoffProfile,
    rule: &SubdividedRule,
    t_side: TSide,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let n = space.dofs_per_element();
    let load_side = t_side.load_side();
    let image_region = t_side.source_side();
    let mut out = vec![0.0; space.ndofs()];
    for (e, el) in mesh.elements.iter().enumerate() {
        let tag = match el.sigma {
            Some(tag) if tag.side == load_side => tag,
            _ => continue,
        };
        let tube = tubes.get(tag.patch).ok_or_else(|| {
            Error::BadParameters(format!("element {e} references missing patch {}", tag.patch))
        })?;
        let patch = tube.patch();
        let dofs = space.element_dofs(e);
        for (y, w) in rule.iter() {
            let (x, _, det) = mesh.element_map(e, y);
            let t = patch.signed_distance(x);
            let chi = profile.value(t);
            if chi == 0.0 {
                continue;
            }
            let (foot, t) = patch.project(x).map_err(|_| Error::LocateFailure {
                x: x.x,
                y: x.y,
                element: e,
            })?;
            let z = patch.offset(foot, -t);
            let dphi = tube.reflect_jacobian(x).map_err(|_| Error::LocateFailure {
                x: x.x,
                y: x.y,
                element: e,
            })?;
            // chi is symmetric in the signed distance, so chi(phi(y)) = chi(y)
            let density = f(z, image_region) * chi * dphi.det().abs();
            let c = w * det.abs() * density;
            let (vals, _) = space.shapes_at(y);
            for a in 0..n {
                out[dofs[a]] += c * vals[a];
            }
        }
    }
    Ok(out)
}

/// Combine the assembled parts into the transformed system
/// `B = B1 - 2*B2` and its right-hand side, then apply homogeneous
/// Dirichlet elimination (unit diagonal) as the last step.
pub fn build_t_system(
    space: &FeSpace,
    b1: &RealOperator,
    b2: &RealOperator,
    f1: &[f64],
    f2: &[f64],
    t_side: TSide,
) -> Result<(RealOperator, Vec<f64>)> {
    let p = space.ndofs();
    if b1.nrows() != p || b1.ncols() != p || b2.nrows() != p || b2.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "operators {}x{} and {}x{} vs {p} dofs",
            b1.nrows(),
            b1.ncols(),
            b2.nrows(),
            b2.ncols()
        )));
    }
    if f1.len() != p || f2.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "load lengths {} and {} vs {p} dofs",
            f1.len(),
            f2.len()
        )));
    }
    let combined = b1.linear_combination(1.0, b2, -2.0);
    let mask: Vec<bool> = (0..p).map(|i| space.is_dirichlet(i)).collect();
    let a = combined.eliminate_dirichlet(&mask, 1.0);
    let s = 2.0 * t_side.load_sign();
    let mut rhs: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a + s * b).collect();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            rhs[i] = 0.0;
        }
    }
    Ok((a, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InterfacePatch;
    use crate::mesh::{gen_disc_in_disc, Element, Mesh, SigmaTag};
    use std::sync::Arc;

    /// Structured strip on [0,1] x [-1,1], mirror-symmetric across y = 0.
    /// The lower half is the plus region, the upper half minus.
    fn mirror_strip(nx: usize, ny_half: usize) -> (Arc<Mesh>, Vec<TubularNeighborhood>) {
        let mut nodes = Vec::new();
        let ys: Vec<f64> = (0..=2 * ny_half)
            .map(|i| -1.0 + i as f64 / ny_half as f64)
            .collect();
        for y in &ys {
            for i in 0..=nx {
                nodes.push(Vec2::new(i as f64 / nx as f64, *y));
            }
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::new();
        for j in 0..2 * ny_half {
            for i in 0..nx {
                let (region, side) = if j < ny_half {
                    (Side::Plus, Side::Plus)
                } else {
                    (Side::Minus, Side::Minus)
                };
                let sigma = Some(SigmaTag { patch: 0, side });
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                // mirror-symmetric split: diagonals meet at the interface
                if j < ny_half {
                    elements.push(Element { v: [a, b, d], mid: None, region, sigma });
                    elements.push(Element { v: [b, c, d], mid: None, region, sigma });
                } else {
                    elements.push(Element { v: [a, b, c], mid: None, region, sigma });
                    elements.push(Element { v: [a, c, d], mid: None, region, sigma });
                }
            }
        }
        let mut boundary = vec![false; nodes.len()];
        for (k, p) in nodes.iter().enumerate() {
            if p.x == 0.0 || p.x == 1.0 || p.y == -1.0 || p.y == 1.0 {
                boundary[k] = true;
            }
        }
        let n = nodes.len();
        let mesh = Mesh::finalize(nodes, n, elements, boundary, 1.0 / nx as f64).unwrap();
        let patch =
            InterfacePatch::segment(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), true).unwrap();
        let tube = TubularNeighborhood::new(patch, 2.0).unwrap();
        (Arc::new(mesh), vec![tube])
    }

    /// Node index of the mirror image of a node.
    fn mirror_map(mesh: &Mesh) -> Vec<usize> {
        let mut map = vec![usize::MAX; mesh.n_vertices];
        for v in 0..mesh.n_vertices {
            let p = mesh.nodes[v];
            let target = Vec2::new(p.x, -p.y);
            for w in 0..mesh.n_vertices {
                if mesh.nodes[w].dist(target) < 1e-12 {
                    map[v] = w;
                    break;
                }
            }
            assert_ne!(map[v], usize::MAX);
        }
        map
    }

    #[test]
    fn stiffness_energy_of_linear_function() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.1, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let k = assemble_stiffness(&space, &Coefficient::one(), Domain::All, &rule);
        let u = space.interpolate(|p| p.x);
        let ku = k.matvec(&u);
        let energy = crate::sparse::dot(&u, &ku);
        let area = std::f64::consts::PI * 4.0;
        assert!(
            ((energy - area) / area).abs() < 1e-4,
            "energy {energy} vs area {area}"
        );
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.2, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 2).unwrap();
        let rule = SubdividedRule::new(1, 5);
        let k = assemble_stiffness(&space, &Coefficient::new(-1.0, 3.0), Domain::All, &rule);
        assert_eq!(k.symmetry_defect(), 0.0);
    }

    #[test]
    fn region_split_sums_to_total() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.2, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let coeff = Coefficient::new(2.0, 0.5);
        let all = assemble_stiffness(&space, &coeff, Domain::All, &rule);
        let plus = assemble_stiffness(&space, &coeff, Domain::Region(Side::Plus), &rule);
        let minus = assemble_stiffness(&space, &coeff, Domain::Region(Side::Minus), &rule);
        let sum = plus.linear_combination(1.0, &minus, 1.0);
        assert!(all.max_abs_diff(&sum) < 1e-14);

        let all_m = assemble_mass(&space, &coeff, Domain::All, &rule);
        let plus_m = assemble_mass(&space, &coeff, Domain::Region(Side::Plus), &rule);
        let minus_m = assemble_mass(&space, &coeff, Domain::Region(Side::Minus), &rule);
        let sum_m = plus_m.linear_combination(1.0, &minus_m, 1.0);
        assert!(all_m.max_abs_diff(&sum_m) < 1e-14);
    }

    #[test]
    fn mass_total_is_area() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.05, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let m = assemble_mass(&space, &Coefficient::one(), Domain::All, &rule);
        let ones = vec![1.0; space.ndofs()];
        let total = crate::sparse::dot(&ones, &m.matvec(&ones));
        let area = std::f64::consts::PI * 4.0;
        assert!(((total - area) / area).abs() < 1e-8, "mass total {total}");
    }

    #[test]
    fn mirror_strip_reflection_matches_standard_stiffness() {
        let (mesh, tubes) = mirror_strip(4, 4);
        let space = FeSpace::new(Arc::clone(&mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        // chi identically one on the strip
        let profile = CutoffProfile::new(1.5, 2.0).unwrap();
        let (b2, stats) = assemble_reflection(
            &space,
            &Coefficient::one(),
            &tubes,
            &profile,
            ReflectionKind::Stiffness,
            &rule,
            TSide::Plus,
        )
        .unwrap();
        assert_eq!(stats.points_skipped, 0);
        assert_eq!(stats.points_total, stats.points_scattered);
        // source side of TSide::Plus is the minus (upper) half
        let k_upper = assemble_stiffness(
            &space,
            &Coefficient::one(),
            Domain::TubeSide(Side::Minus),
            &rule,
        );
        let mirror = mirror_map(&mesh);
        let p = space.ndofs();
        for i in 0..p {
            for j in 0..p {
                let lhs = b2.get(mirror[i], j);
                let rhs = k_upper.get(i, j);
                assert!(
                    (lhs - rhs).abs() < 1e-10,
                    "B2[{}, {}] = {} vs K_upper[{}, {}] = {}",
                    mirror[i],
                    j,
                    lhs,
                    i,
                    j,
                    rhs
                );
            }
        }
    }

    #[test]
    fn reflection_scales_linearly_in_coefficient() {
        let (mesh, tubes) = gen_disc_in_disc(1.0, 2.0, 0.25, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(2, 3);
        let profile = CutoffProfile::for_delta(0.2).unwrap();
        let (b2a, _) = assemble_reflection(
            &space,
            &Coefficient::one(),
            &tubes,
            &profile,
            ReflectionKind::Stiffness,
            &rule,
            TSide::Plus,
        )
        .unwrap();
        let (b2b, _) = assemble_reflection(
            &space,
            &Coefficient::new(2.0, 2.0),
            &tubes,
            &profile,
            ReflectionKind::Stiffness,
            &rule,
            TSide::Plus,
        )
        .unwrap();
        let doubled = b2a.linear_combination(2.0, &b2a, 0.0);
        assert_eq!(b2b.max_abs_diff(&doubled), 0.0);
    }

    #[test]
    fn reflection_zero_without_overlap() {
        // dofs far from the tube never appear in the reflected operator
        let (mesh, tubes) = gen_disc_in_disc(1.0, 2.0, 0.25, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let profile = CutoffProfile::for_delta(0.2).unwrap();
        let (b2, _) = assemble_reflection(
            &space,
            &Coefficient::one(),
            &tubes,
            &profile,
            ReflectionKind::Stiffness,
            &rule,
            TSide::Plus,
        )
        .unwrap();
        for (r, c, v) in b2.iter() {
            if v != 0.0 {
                // rows live on the plus tube half, columns on the minus half
                let rr = space.dof_coord(r).norm();
                let cc = space.dof_coord(c).norm();
                assert!(rr >= 1.0 - 1e-9 && rr <= 1.2 + 1e-9, "row dof at radius {rr}");
                assert!(cc >= 0.8 - 1e-9 && cc <= 1.0 + 1e-9, "col dof at radius {cc}");
            }
        }
    }

    #[test]
    fn reflected_load_band_area_flat() {
        let (mesh, tubes) = mirror_strip(4, 4);
        let space = FeSpace::new(Arc::clone(&mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let profile = CutoffProfile::new(1.5, 2.0).unwrap();
        let f2 = assemble_reflected_load(
            &space,
            |_, _| 1.0,
            &tubes,
            &profile,
            &rule,
            TSide::Plus,
        )
        .unwrap();
        let total: f64 = f2.iter().sum();
        // load side is the lower half-strip of area 1; |det Dphi| = 1
        assert!((total - 1.0).abs() < 1e-10, "total {total}");
    }

    #[test]
    fn reflected_load_change_of_variables_disc() {
        let (mesh, tubes) = gen_disc_in_disc(1.0, 2.0, 0.05, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(3, 5);
        let profile = CutoffProfile::for_delta(0.2).unwrap();
        // direct quadrature of chi over each tube half
        let chi_integral = |side: Side| -> f64 {
            let mesh = space.mesh();
            let mut total = 0.0;
            for (e, el) in mesh.elements.iter().enumerate() {
                if el.sigma.map_or(true, |t| t.side != side) {
                    continue;
                }
                for (y, w) in rule.iter() {
                    let (x, _, det) = mesh.element_map(e, y);
                    total += w * det.abs() * profile.value(tubes[0].patch().signed_distance(x));
                }
            }
            total
        };
        // plus-side orientation: the pullback lands on the plus half and the
        // total equals the chi integral over the minus half, and vice versa
        let f2_plus =
            assemble_reflected_load(&space, |_, _| 1.0, &tubes, &profile, &rule, TSide::Plus)
                .unwrap();
        let total_plus: f64 = f2_plus.iter().sum();
        let expect_plus = chi_integral(Side::Minus);
        assert!(
            ((total_plus - expect_plus) / expect_plus).abs() < 1e-8,
            "{total_plus} vs {expect_plus}"
        );
        let f2_minus =
            assemble_reflected_load(&space, |_, _| 1.0, &tubes, &profile, &rule, TSide::Minus)
                .unwrap();
        let total_minus: f64 = f2_minus.iter().sum();
        let expect_minus = chi_integral(Side::Plus);
        assert!(
            ((total_minus - expect_minus) / expect_minus).abs() < 1e-8,
            "{total_minus} vs {expect_minus}"
        );
    }

    #[test]
    fn zero_load_stays_zero() {
        let (mesh, tubes) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let profile = CutoffProfile::for_delta(0.2).unwrap();
        let f1 = assemble_load(&space, |_, _| 0.0, &rule);
        let f2 = assemble_reflected_load(&space, |_, _| 0.0, &tubes, &profile, &rule, TSide::Plus)
            .unwrap();
        assert!(f1.iter().all(|&v| v == 0.0));
        assert!(f2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn t_system_degenerates_without_reflection() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let rule = SubdividedRule::new(1, 3);
        let sigma = Coefficient::new(-1.0, 3.0);
        let b1 = assemble_stiffness(&space, &sigma.abs(), Domain::All, &rule);
        let b2 = RealOperator::zeros(space.ndofs(), space.ndofs());
        let f1 = assemble_load(&space, |_, _| 1.0, &rule);
        let f2 = vec![0.0; space.ndofs()];
        let (a, rhs) = build_t_system(&space, &b1, &b2, &f1, &f2, TSide::Plus).unwrap();
        let mask: Vec<bool> = (0..space.ndofs()).map(|i| space.is_dirichlet(i)).collect();
        let expect = b1.eliminate_dirichlet(&mask, 1.0);
        assert!(a.max_abs_diff(&expect) == 0.0);
        assert!(a.nnz() <= b1.nnz() + b2.nnz() + space.dirichlet_dofs().len());
        for (i, &m) in mask.iter().enumerate() {
            if m {
                assert_eq!(rhs[i], 0.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (mesh, _) = gen_disc_in_disc(1.0, 2.0, 0.3, 0.2).unwrap();
        let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
        let b1 = RealOperator::zeros(3, 3);
        let b2 = RealOperator::zeros(3, 3);
        let err = build_t_system(&space, &b1, &b2, &[0.0; 3], &[0.0; 3], TSide::Plus);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn t_side_selection() {
        assert_eq!(choose_t_side(&Coefficient::new(-1.0, 3.0)).unwrap(), TSide::Plus);
        assert_eq!(choose_t_side(&Coefficient::new(-3.0, 1.0)).unwrap(), TSide::Minus);
        assert!(choose_t_side(&Coefficient::new(-1.0, 1.0)).is_err());
    }
}
