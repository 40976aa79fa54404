//! C¹ cut-off profile supported in the tube, equal to one near the interface.

use crate::error::{Error, Result};
use crate::geometry::InterfacePatch;
use crate::la::Vec2;

/// Radial cut-off profile in the signed-distance variable: one on
/// `|t| <= delta_inner`, zero on `|t| >= delta_outer`, cubic Hermite
/// smoothstep in between. The smoothstep is the minimal-degree C¹ transition;
/// only the gradient of the cut-off enters the assembled forms.
#[derive(Clone, Copy, Debug)]
pub struct CutoffProfile {
    delta_inner: f64,
    delta_outer: f64,
}

impl CutoffProfile {
    pub fn new(delta_inner: f64, delta_outer: f64) -> Result<Self> {
        if !(0.0 < delta_inner && delta_inner < delta_outer) {
            return Err(Error::BadParameters(format!(
                "cut-off requires 0 < delta_inner < delta_outer, got ({delta_inner}, {delta_outer})"
            )));
        }
        Ok(CutoffProfile { delta_inner, delta_outer })
    }

    /// Default profile for a tube of half-width `delta`: plateau up to `delta/2`.
    pub fn for_delta(delta: f64) -> Result<Self> {
        Self::new(0.5 * delta, delta)
    }

    pub fn delta_inner(&self) -> f64 {
        self.delta_inner
    }

    pub fn delta_outer(&self) -> f64 {
        self.delta_outer
    }

    /// Profile value at signed distance `t`; defined for all `t`.
    pub fn value(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.delta_inner {
            1.0
        } else if a >= self.delta_outer {
            0.0
        } else {
            let lambda = (a - self.delta_inner) / (self.delta_outer - self.delta_inner);
            1.0 - lambda * lambda * (3.0 - 2.0 * lambda)
        }
    }

    /// Derivative with respect to `t` (zero on the plateau and outside).
    pub fn derivative(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.delta_inner || a >= self.delta_outer {
            0.0
        } else {
            let w = self.delta_outer - self.delta_inner;
            let lambda = (a - self.delta_inner) / w;
            let ds = -6.0 * lambda * (1.0 - lambda) / w;
            ds * t.signum()
        }
    }

    /// Spatial gradient of the cut-off at `x`, namely `rho'(t(x)) n(foot(x))`
    /// with the normal towards the negative region. Zero wherever the profile
    /// is locally constant.
    pub fn gradient(&self, patch: &InterfacePatch, x: Vec2) -> Vec2 {
        let t = patch.signed_distance(x);
        let d = self.derivative(t);
        if d == 0.0 {
            return Vec2::ZERO;
        }
        let (foot, _) = patch
            .project(x)
            .expect("gradient requested outside the patch parameter range");
        patch.normal_toward_minus(foot) * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::Vec2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plateau_and_support() {
        let p = CutoffProfile::new(0.1, 0.2).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.05), 1.0);
        assert_eq!(p.value(-0.1), 1.0);
        assert_eq!(p.value(0.2), 0.0);
        assert_eq!(p.value(-0.35), 0.0);
        // midpoint of the transition
        assert!((p.value(0.15) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn c1_at_transition_ends() {
        let p = CutoffProfile::new(0.1, 0.2).unwrap();
        for t in [0.1, 0.2, -0.1, -0.2] {
            assert_eq!(p.derivative(t), 0.0);
        }
        // one-sided difference quotients vanish to first order
        let eps = 1e-7;
        assert!((p.value(0.1 + eps) - 1.0).abs() < 1e-12);
        assert!(p.value(0.2 - eps).abs() < 1e-12);
    }

    #[test]
    fn values_in_unit_interval() {
        let p = CutoffProfile::new(0.07, 0.31).unwrap();
        let mut t = -0.5;
        while t <= 0.5 {
            let v = p.value(t);
            assert!((0.0..=1.0).contains(&v));
            t += 1e-3;
        }
    }

    #[test]
    fn gradient_on_flat_patch() {
        let patch = InterfacePatch::segment(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), true).unwrap();
        let p = CutoffProfile::new(0.1, 0.2).unwrap();
        // plateau
        assert_eq!(p.gradient(&patch, Vec2::new(0.5, 0.05)), Vec2::ZERO);
        // transition: lambda = 0.5, s' = -1.5, /w = -15
        let g = p.gradient(&patch, Vec2::new(0.5, 0.15));
        assert!(g.x.abs() < 1e-15);
        assert!((g.y - (-15.0)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let patch = InterfacePatch::circle(Vec2::ZERO, 1.0, false).unwrap();
        let p = CutoffProfile::new(0.1, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chi = |x: Vec2| p.value(patch.signed_distance(x));
        for _ in 0..500 {
            let theta = rng.gen_range(-3.1..3.1);
            let rho = rng.gen_range(0.81..1.19);
            let x = Vec2::new(theta.cos(), theta.sin()) * rho;
            let g = p.gradient(&patch, x);
            let h = 1e-6;
            let gx = (chi(x + Vec2::new(h, 0.0)) - chi(x - Vec2::new(h, 0.0))) / (2.0 * h);
            let gy = (chi(x + Vec2::new(0.0, h)) - chi(x - Vec2::new(0.0, h))) / (2.0 * h);
            let scale = g.norm().max(1.0);
            assert!((g.x - gx).abs() / scale < 1e-6, "{} vs {}", g.x, gx);
            assert!((g.y - gy).abs() / scale < 1e-6);
        }
    }
}
