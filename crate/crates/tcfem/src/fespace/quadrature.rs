//! Gauss rules on the reference triangle and their composite refinement.
//!
//! The composite rule splits the reference triangle into `n^2` congruent
//! subtriangles and applies the base Gauss rule on each. This keeps the
//! polynomial exactness degree while shrinking the cells, which is what the
//! reflected bilinear form needs: its integrand jumps across curves that are
//! unrelated to the mesh, so raising the polynomial order alone does not
//! help.

use crate::la::Vec2;

/// Quadrature rule on the reference triangle (0,0)-(1,0)-(0,1), weights
/// summing to 1/2. All supported rules have strictly positive weights.
#[derive(Clone, Debug)]
pub struct SubdividedRule {
    subdivisions: usize,
    degree: usize,
    points: Vec<Vec2>,
    weights: Vec<f64>,
}

impl SubdividedRule {
    /// Composite rule with `n^2` subtriangles and a base rule exact to
    /// polynomial degree `q` (the smallest positive-weight rule with at least
    /// that exactness is selected).
    pub fn new(n: usize, q: usize) -> Self {
        assert!(n >= 1, "subdivision count must be at least 1");
        assert!(q >= 1, "exactness degree must be at least 1");
        let (base_pts, base_wts) = base_rule(q);
        let nf = n as f64;
        let mut points = Vec::with_capacity(base_pts.len() * n * n);
        let mut weights = Vec::with_capacity(base_pts.len() * n * n);
        let scale = 1.0 / (nf * nf);
        let mut emit = |v0: Vec2, v1: Vec2, v2: Vec2| {
            for (p, w) in base_pts.iter().zip(&base_wts) {
                points.push(v0 + (v1 - v0) * p.x + (v2 - v0) * p.y);
                weights.push(w * scale);
            }
        };
        for i in 0..n {
            for j in 0..(n - i) {
                let x0 = j as f64 / nf;
                let y0 = i as f64 / nf;
                let dx = 1.0 / nf;
                emit(
                    Vec2::new(x0, y0),
                    Vec2::new(x0 + dx, y0),
                    Vec2::new(x0, y0 + dx),
                );
                if j + i < n - 1 {
                    emit(
                        Vec2::new(x0 + dx, y0),
                        Vec2::new(x0 + dx, y0 + dx),
                        Vec2::new(x0, y0 + dx),
                    );
                }
            }
        }
        SubdividedRule { subdivisions: n, degree: q, points, weights }
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Base Gauss points and weights on the reference triangle, weights summing
/// to 1/2. Negative-weight rules are skipped in favor of the next larger
/// positive one.
fn base_rule(q: usize) -> (Vec<Vec2>, Vec<f64>) {
    // permutation orbits in barycentric coordinates
    let orbit1 = |pts: &mut Vec<Vec2>, wts: &mut Vec<f64>, w: f64| {
        pts.push(Vec2::new(1.0 / 3.0, 1.0 / 3.0));
        wts.push(w * 0.5);
    };
    let orbit3 = |pts: &mut Vec<Vec2>, wts: &mut Vec<f64>, a: f64, w: f64| {
        let b = 1.0 - 2.0 * a;
        for (x, y) in [(a, a), (b, a), (a, b)] {
            pts.push(Vec2::new(x, y));
            wts.push(w * 0.5);
        }
    };
    let orbit6 = |pts: &mut Vec<Vec2>, wts: &mut Vec<f64>, a: f64, b: f64, w: f64| {
        let c = 1.0 - a - b;
        for (x, y) in [(a, b), (b, a), (a, c), (c, a), (b, c), (c, b)] {
            pts.push(Vec2::new(x, y));
            wts.push(w * 0.5);
        }
    };

    let mut pts = Vec::new();
    let mut wts = Vec::new();
    match q {
        1 => orbit1(&mut pts, &mut wts, 1.0),
        2 => orbit3(&mut pts, &mut wts, 1.0 / 6.0, 1.0 / 3.0),
        3 | 4 => {
            // 6-point rule of degree 4
            orbit3(&mut pts, &mut wts, 0.445948490915965, 0.223381589678011);
            orbit3(&mut pts, &mut wts, 0.091576213509771, 0.109951743655322);
        }
        5 => {
            // 7-point rule of degree 5
            orbit1(&mut pts, &mut wts, 0.225);
            orbit3(&mut pts, &mut wts, 0.470142064105115, 0.132394152788506);
            orbit3(&mut pts, &mut wts, 0.101286507323456, 0.125939180544827);
        }
        _ => {
            // 12-point rule of degree 6, used for everything above as well
            orbit3(&mut pts, &mut wts, 0.063089014491502, 0.050844906370207);
            orbit3(&mut pts, &mut wts, 0.249286745170910, 0.116786275726379);
            orbit6(
                &mut pts,
                &mut wts,
                0.310352451033785,
                0.053145049844816,
                0.082851075618374,
            );
        }
    }
    (pts, wts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &SubdividedRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.iter().map(|(p, w)| w * f(p.x, p.y)).sum()
    }

    #[test]
    fn weights_positive_and_sum_to_half() {
        for q in 1..=8 {
            for n in [1, 2, 3, 6] {
                let rule = SubdividedRule::new(n, q);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                let sum: f64 = rule.weights.iter().sum();
                assert!((sum - 0.5).abs() < 1e-14, "q={q} n={n} sum={sum}");
            }
        }
    }

    #[test]
    fn subdivision_multiplies_point_count() {
        let base = SubdividedRule::new(1, 5);
        let sub = SubdividedRule::new(3, 5);
        assert_eq!(sub.len(), 9 * base.len());
    }

    #[test]
    fn n1_reproduces_base_rule() {
        let rule = SubdividedRule::new(1, 2);
        assert_eq!(rule.len(), 3);
        let a = 1.0 / 6.0;
        assert!(rule.points.iter().any(|p| (p.x - a).abs() < 1e-15 && (p.y - a).abs() < 1e-15));
    }

    #[test]
    fn exactness_x2y() {
        // int over reference triangle of x^2 y = 1/60
        for n in [1, 2, 3] {
            for q in [3, 4, 5, 6] {
                let rule = SubdividedRule::new(n, q);
                let v = integrate(&rule, |x, y| x * x * y);
                assert!((v - 1.0 / 60.0).abs() < 1e-15, "n={n} q={q} got {v}");
            }
        }
    }

    #[test]
    fn exactness_by_degree() {
        // monomial x^a y^b integrates to a! b! / (a+b+2)!
        let exact = |a: u32, b: u32| {
            let fact = |k: u32| (1..=k).map(|v| v as f64).product::<f64>().max(1.0);
            fact(a) * fact(b) / fact(a + b + 2)
        };
        for q in 1..=6usize {
            let rule = SubdividedRule::new(1, q);
            for a in 0..=q as u32 {
                for b in 0..=(q as u32 - a) {
                    let v = integrate(&rule, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert!(
                        (v - exact(a, b)).abs() < 1e-14,
                        "q={q} x^{a} y^{b}: {v} vs {}",
                        exact(a, b)
                    );
                }
            }
        }
    }
}
