//! Interface patches, the tubular-neighborhood map and its reflection.
//!
//! An interface patch describes one elementary piece of the material
//! interface together with its orientation relative to the sign regions.
//! Throughout the crate the unit normal `n` on the interface points towards
//! the negative-coefficient region, and the signed normal distance `t` of a
//! point is positive on that side. The reflection of the tubular
//! neighborhood maps `foot + t*n` to `foot - t*n`; it fixes the interface
//! pointwise and is an involution.
//!
//! The 3D variants exist only to evaluate the closed-form curvature and
//! reflection-norm bounds; they do not support point reflection.

use crate::error::{Error, Result};
use crate::la::{Mat2, Vec2};

/// Which side of the interface a quantity refers to.
///
/// `Minus` is the negative-coefficient region, `Plus` the positive one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    #[inline]
    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

/// Tolerance for accepting foot points at the patch parameter boundary.
/// Junction points between adjacent patches belong to both; assembly always
/// disambiguates through the element patch tag.
const PARAM_TOL: f64 = 1e-10;

/// One elementary interface piece with orientation data.
#[derive(Clone, Debug)]
pub enum InterfacePatch {
    /// Straight segment from `a` to `b`. `left_is_minus` records whether the
    /// negative region lies to the left of the direction `b - a`.
    Segment2D { a: Vec2, b: Vec2, left_is_minus: bool },
    /// Circular arc with angles in `[theta0, theta1]` (radians, measured from
    /// the center). `outward_is_minus` records whether the negative region
    /// lies on the outward side (away from the center).
    Arc2D {
        center: Vec2,
        radius: f64,
        theta0: f64,
        theta1: f64,
        outward_is_minus: bool,
    },
    /// Plane through `point` with unit `normal` (bound evaluation only).
    Plane3D { point: [f64; 3], normal: [f64; 3] },
    /// Sphere around `center` (bound evaluation only). `center_in_minus`
    /// records whether the center side is the negative region.
    Sphere3D {
        center: [f64; 3],
        radius: f64,
        center_in_minus: bool,
    },
    /// Cylinder around the axis through `axis_point` with direction
    /// `axis_dir` (bound evaluation only).
    Cylinder3D {
        axis_point: [f64; 3],
        axis_dir: [f64; 3],
        radius: f64,
        axis_in_minus: bool,
    },
}

impl InterfacePatch {
    pub fn segment(a: Vec2, b: Vec2, left_is_minus: bool) -> Result<Self> {
        if a.dist(b) == 0.0 {
            return Err(Error::BadParameters("segment endpoints coincide".into()));
        }
        Ok(InterfacePatch::Segment2D { a, b, left_is_minus })
    }

    pub fn arc(center: Vec2, radius: f64, theta0: f64, theta1: f64, outward_is_minus: bool) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::BadParameters(format!("arc radius {radius} must be positive")));
        }
        if theta0 >= theta1 {
            return Err(Error::BadParameters(format!(
                "arc angle range [{theta0}, {theta1}] must be increasing"
            )));
        }
        Ok(InterfacePatch::Arc2D { center, radius, theta0, theta1, outward_is_minus })
    }

    /// Full circle, a convenience for disc-shaped interfaces.
    pub fn circle(center: Vec2, radius: f64, outward_is_minus: bool) -> Result<Self> {
        Self::arc(center, radius, -std::f64::consts::PI, std::f64::consts::PI, outward_is_minus)
    }

    pub fn plane(point: [f64; 3], normal: [f64; 3]) -> Result<Self> {
        let n = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        if n == 0.0 {
            return Err(Error::BadParameters("plane normal must be nonzero".into()));
        }
        Ok(InterfacePatch::Plane3D {
            point,
            normal: [normal[0] / n, normal[1] / n, normal[2] / n],
        })
    }

    pub fn sphere(center: [f64; 3], radius: f64, center_in_minus: bool) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::BadParameters(format!("sphere radius {radius} must be positive")));
        }
        Ok(InterfacePatch::Sphere3D { center, radius, center_in_minus })
    }

    pub fn cylinder(axis_point: [f64; 3], axis_dir: [f64; 3], radius: f64, axis_in_minus: bool) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::BadParameters(format!("cylinder radius {radius} must be positive")));
        }
        let n = (axis_dir[0] * axis_dir[0] + axis_dir[1] * axis_dir[1] + axis_dir[2] * axis_dir[2]).sqrt();
        if n == 0.0 {
            return Err(Error::BadParameters("cylinder axis direction must be nonzero".into()));
        }
        Ok(InterfacePatch::Cylinder3D {
            axis_point,
            axis_dir: [axis_dir[0] / n, axis_dir[1] / n, axis_dir[2] / n],
            radius,
            axis_in_minus,
        })
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, InterfacePatch::Segment2D { .. } | InterfacePatch::Arc2D { .. })
    }

    /// Radius of curved variants.
    pub fn radius(&self) -> Option<f64> {
        match self {
            InterfacePatch::Arc2D { radius, .. }
            | InterfacePatch::Sphere3D { radius, .. }
            | InterfacePatch::Cylinder3D { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    /// Unit normal pointing towards the negative region, at a foot point on
    /// the patch. Only defined for 2D variants.
    pub fn normal_toward_minus(&self, foot: Vec2) -> Vec2 {
        match self {
            InterfacePatch::Segment2D { a, b, left_is_minus } => {
                let left = (*b - *a).normalized().perp();
                if *left_is_minus {
                    left
                } else {
                    -left
                }
            }
            InterfacePatch::Arc2D { center, outward_is_minus, .. } => {
                let outward = (foot - *center).normalized();
                if *outward_is_minus {
                    outward
                } else {
                    -outward
                }
            }
            _ => panic!("normal_toward_minus is only defined for 2D patches"),
        }
    }

    /// Principal curvatures with respect to the normal pointing towards the
    /// negative region: positive when the curvature center lies on the side
    /// the normal points to. Returns `(kappa, None)` for 2D variants and
    /// `(kappa1, Some(kappa2))` for 3D variants.
    pub fn curvature(&self) -> (f64, Option<f64>) {
        match self {
            InterfacePatch::Segment2D { .. } => (0.0, None),
            InterfacePatch::Arc2D { radius, outward_is_minus, .. } => {
                // n towards minus; the center is on the inward side
                let k = if *outward_is_minus { -1.0 / radius } else { 1.0 / radius };
                (k, None)
            }
            InterfacePatch::Plane3D { .. } => (0.0, Some(0.0)),
            InterfacePatch::Sphere3D { radius, center_in_minus, .. } => {
                let k = if *center_in_minus { 1.0 / radius } else { -1.0 / radius };
                (k, Some(k))
            }
            InterfacePatch::Cylinder3D { radius, axis_in_minus, .. } => {
                let k = if *axis_in_minus { 1.0 / radius } else { -1.0 / radius };
                (k, Some(0.0))
            }
        }
    }

    /// Orthogonal projection onto the patch with signed distance, positive on
    /// the negative-region side. Fails if the foot point falls outside the
    /// patch parameter range (with a small junction tolerance). The distance
    /// itself is not bounded here; see [`TubularNeighborhood`] for the
    /// delta-gated variant.
    pub fn project(&self, x: Vec2) -> Result<(Vec2, f64)> {
        match self {
            InterfacePatch::Segment2D { a, b, .. } => {
                let ab = *b - *a;
                let len = ab.norm();
                let dir = ab / len;
                let s = (x - *a).dot(dir);
                if s < -PARAM_TOL * len.max(1.0) || s > len + PARAM_TOL * len.max(1.0) {
                    return Err(Error::OutOfTube {
                        x: x.x,
                        y: x.y,
                        reason: format!("foot parameter {s} outside segment [0, {len}]"),
                    });
                }
                let foot = *a + dir * s.clamp(0.0, len);
                let n = self.normal_toward_minus(foot);
                let t = (x - foot).dot(n);
                Ok((foot, t))
            }
            InterfacePatch::Arc2D { center, radius, theta0, theta1, .. } => {
                let d = x - *center;
                let rho = d.norm();
                if rho == 0.0 {
                    return Err(Error::OutOfTube {
                        x: x.x,
                        y: x.y,
                        reason: "point coincides with the arc center".into(),
                    });
                }
                let mut theta = d.angle();
                // shift by multiples of 2*pi into the parameter window
                let two_pi = 2.0 * std::f64::consts::PI;
                while theta < *theta0 - PARAM_TOL {
                    theta += two_pi;
                }
                while theta > *theta1 + PARAM_TOL {
                    theta -= two_pi;
                }
                if theta < *theta0 - PARAM_TOL {
                    return Err(Error::OutOfTube {
                        x: x.x,
                        y: x.y,
                        reason: format!("foot angle {theta} outside arc [{theta0}, {theta1}]"),
                    });
                }
                let theta = theta.clamp(*theta0, *theta1);
                let foot = *center + Vec2::new(theta.cos(), theta.sin()) * *radius;
                let n = self.normal_toward_minus(foot);
                let t = (x - foot).dot(n);
                Ok((foot, t))
            }
            _ => panic!("project is only defined for 2D patches"),
        }
    }

    /// The tubular-neighborhood chart: `foot + t * n(foot)`.
    pub fn offset(&self, foot: Vec2, t: f64) -> Vec2 {
        foot + self.normal_toward_minus(foot) * t
    }

    /// Signed distance without the parameter-range check; used by assembly
    /// to evaluate the cut-off on elements whose quadrature points may fall
    /// marginally outside the tube.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        match self {
            InterfacePatch::Segment2D { a, b, .. } => {
                let ab = *b - *a;
                let dir = ab / ab.norm();
                let foot = *a + dir * (x - *a).dot(dir);
                (x - foot).dot(self.normal_toward_minus(foot))
            }
            InterfacePatch::Arc2D { center, radius, outward_is_minus, .. } => {
                let rho = (x - *center).norm();
                if *outward_is_minus {
                    rho - radius
                } else {
                    radius - rho
                }
            }
            _ => panic!("signed_distance is only defined for 2D patches"),
        }
    }
}

/// The band of half-width `delta` around a patch, on which the reflection is
/// defined.
#[derive(Clone, Debug)]
pub struct TubularNeighborhood {
    patch: InterfacePatch,
    delta: f64,
}

impl TubularNeighborhood {
    pub fn new(patch: InterfacePatch, delta: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidDelta {
                delta,
                reason: "delta must be positive".into(),
            });
        }
        if let Some(r) = patch.radius() {
            if delta >= r {
                return Err(Error::InvalidDelta {
                    delta,
                    reason: format!("delta must be smaller than the patch radius {r}"),
                });
            }
        }
        Ok(TubularNeighborhood { patch, delta })
    }

    pub fn patch(&self) -> &InterfacePatch {
        &self.patch
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Inverse chart: foot point on the interface and signed distance, with
    /// `|t| < delta` enforced.
    pub fn foot_and_distance(&self, x: Vec2) -> Result<(Vec2, f64)> {
        let (foot, t) = self.patch.project(x)?;
        if t.abs() >= self.delta {
            return Err(Error::OutOfTube {
                x: x.x,
                y: x.y,
                reason: format!("|t| = {} >= delta = {}", t.abs(), self.delta),
            });
        }
        Ok((foot, t))
    }

    /// Whether `x` lies in the (open) tube.
    pub fn contains(&self, x: Vec2) -> bool {
        match self.patch.project(x) {
            Ok((_, t)) => t.abs() < self.delta,
            Err(_) => false,
        }
    }

    /// The reflection across the interface: fixes the interface pointwise and
    /// swaps the two half-tubes.
    pub fn reflect_point(&self, x: Vec2) -> Result<Vec2> {
        let (foot, t) = self.foot_and_distance(x)?;
        Ok(self.patch.offset(foot, -t))
    }

    /// Exact Jacobian of [`Self::reflect_point`].
    pub fn reflect_jacobian(&self, x: Vec2) -> Result<Mat2> {
        let (_, t) = self.foot_and_distance(x)?;
        let _ = t;
        match &self.patch {
            InterfacePatch::Segment2D { a, b, .. } => {
                let dir = (*b - *a).normalized();
                let n = dir.perp();
                // mirror matrix I - 2 n n^T (independent of the normal sign)
                Ok(Mat2::new(
                    1.0 - 2.0 * n.x * n.x,
                    -2.0 * n.x * n.y,
                    -2.0 * n.x * n.y,
                    1.0 - 2.0 * n.y * n.y,
                ))
            }
            InterfacePatch::Arc2D { center, radius, .. } => {
                let d = x - *center;
                let rho = d.norm();
                let u = d / rho;
                // radial eigenvalue -1, tangential eigenvalue (2r - rho) / rho
                let s = 2.0 * radius / rho;
                Ok(Mat2::new(
                    (s - 1.0) - s * u.x * u.x,
                    -s * u.x * u.y,
                    -s * u.x * u.y,
                    (s - 1.0) - s * u.y * u.y,
                ))
            }
            _ => panic!("reflect_jacobian is only defined for 2D patches"),
        }
    }
}

/// Upper bound for the operator norm of the reflection pullback acting on
/// gradients, for functions living on the given side. The bound only depends
/// on the principal curvatures and delta.
pub fn norm_bound(patch: &InterfacePatch, delta: f64, side: Side) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::InvalidDelta {
            delta,
            reason: "delta must be positive".into(),
        });
    }
    if let Some(r) = patch.radius() {
        if delta >= r {
            return Err(Error::InvalidDelta {
                delta,
                reason: format!("delta must be smaller than the patch radius {r}"),
            });
        }
    }
    let (k1, k2) = patch.curvature();
    let term = |kappa: f64| -> Result<f64> {
        let (num, den) = match side {
            // functions on the minus side are pulled back over [0, delta)
            Side::Minus => (1.0 - delta * kappa, 1.0 + delta * kappa),
            Side::Plus => (1.0 + delta * kappa, 1.0 - delta * kappa),
        };
        if den <= 0.0 {
            return Err(Error::InvalidDelta {
                delta,
                reason: format!("bound denominator 1 {} delta*kappa vanishes (kappa = {kappa})",
                    if matches!(side, Side::Minus) { "+" } else { "-" }),
            });
        }
        Ok((num / den).abs())
    };
    let mut bound = f64::max(1.0, term(k1)?);
    if let Some(k2) = k2 {
        bound = bound.max(term(k2)?);
    }
    Ok(bound)
}

/// Largest admissible tube half-width for a given curvature bound and
/// contrast, scaled by a safety factor in (0, 1]. For a flat interface any
/// delta works and `flat_cap` is returned (times the safety factor).
///
/// The returned delta satisfies `norm_bound^2 < contrast` strictly whenever
/// `safety < 1`; at `safety = 1` equality holds for the curved case.
pub fn max_delta_for_contrast(kappa_max: f64, contrast: f64, safety: f64, flat_cap: f64) -> Result<f64> {
    if contrast <= 1.0 {
        return Err(Error::ContrastTooSmall { contrast });
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::BadParameters(format!("safety {safety} must be in (0, 1]")));
    }
    if kappa_max < 0.0 {
        return Err(Error::BadParameters(format!("kappa_max {kappa_max} must be nonnegative")));
    }
    if kappa_max == 0.0 {
        return Ok(safety * flat_cap);
    }
    let s = contrast.sqrt();
    Ok(safety * (s - 1.0) / ((s + 1.0) * kappa_max))
}
