//! Composite Gauss–Legendre rules with geometric panel grading.
//!
//! The surface and ball integrals of the frequency functionals carry the
//! degenerate weight |y|^{1-2s}, which on a circle becomes |sin θ|^{1-2s} —
//! merely integrable near θ ∈ {0, π, 2π} when s > 1/2. Plain panels lose all
//! accuracy there; panels graded geometrically (ratio 1/2) toward the
//! singular set restore fast convergence off the singularity, with the
//! leftover error controlled by the innermost panel's total mass.

use crate::special::gauss_legendre;

/// A one-dimensional quadrature rule: paired nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// Applies the rule to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Composite rule on [a, b] with `levels + 1` panels graded geometrically
/// (ratio 1/2) toward `a` when `toward_a`, else toward `b`; `pts` GL points
/// per panel. Panel boundaries: a + (b-a)·2^{-(levels-k)}, k = 0..levels.
pub fn graded_rule(a: f64, b: f64, toward_a: bool, levels: usize, pts: usize) -> Rule1D {
    assert!(b > a, "empty interval");
    let (gx, gw) = gauss_legendre(pts);
    let n = (levels + 1) * pts;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut lo = 0.0_f64; // in normalized [0,1] coordinates toward the grading end
    for k in 0..=levels {
        let hi = if k == levels {
            1.0
        } else {
            2f64.powi(-((levels - k) as i32))
        };
        // Map normalized [lo, hi] to the actual interval.
        let (pa, pb) = if toward_a {
            (a + (b - a) * lo, a + (b - a) * hi)
        } else {
            (b - (b - a) * hi, b - (b - a) * lo)
        };
        let (mid, half) = (0.5 * (pa + pb), 0.5 * (pb - pa));
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
        lo = hi;
    }
    if !toward_a {
        // Keep nodes ascending for cache-friendly interpolation.
        nodes.reverse();
        weights.reverse();
    }
    Rule1D { nodes, weights }
}

/// Angular rule on the full circle [0, 2π], graded toward the zero set of
/// sin θ (θ ∈ {0, π, 2π}); radius-independent. Built from one quarter-arc
/// [0, π/2] graded toward 0, replicated by the symmetries θ ↦ π−θ, π+θ, 2π−θ.
#[derive(Debug, Clone)]
pub struct CircleRule {
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub weights: Vec<f64>,
    pub levels: usize,
}

impl CircleRule {
    pub fn new(levels: usize, pts: usize) -> Self {
        let quarter = graded_rule(0.0, std::f64::consts::FRAC_PI_2, true, levels, pts);
        let m = quarter.nodes.len();
        let mut theta = Vec::with_capacity(4 * m);
        let mut weights = Vec::with_capacity(4 * m);
        for (t, w) in quarter.nodes.iter().zip(&quarter.weights) {
            theta.push(*t);
            weights.push(*w);
        }
        for (t, w) in quarter.nodes.iter().zip(&quarter.weights) {
            theta.push(std::f64::consts::PI - t);
            weights.push(*w);
        }
        for (t, w) in quarter.nodes.iter().zip(&quarter.weights) {
            theta.push(std::f64::consts::PI + t);
            weights.push(*w);
        }
        for (t, w) in quarter.nodes.iter().zip(&quarter.weights) {
            theta.push(2.0 * std::f64::consts::PI - t);
            weights.push(*w);
        }
        let cos = theta.iter().map(|t| t.cos()).collect();
        let sin = theta.iter().map(|t| t.sin()).collect();
        CircleRule {
            theta,
            cos,
            sin,
            weights,
            levels,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn graded_rule_integrates_smooth_functions() {
        let rule = graded_rule(0.0, 1.0, true, 10, 8);
        assert_relative_eq!(rule.integrate(|x| x * x), 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(
            rule.integrate(|x| (2.0 * x).exp()),
            0.5 * (2f64.exp() - 1.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn grading_handles_endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2: integrable singularity at the graded end.
        let rule = graded_rule(0.0, 1.0, true, 40, 10);
        assert_relative_eq!(rule.integrate(|x| x.powf(-0.5)), 2.0, max_relative = 1e-6);
        // Same singularity at the other end.
        let rule = graded_rule(0.0, 1.0, false, 40, 10);
        assert_relative_eq!(
            rule.integrate(|x| (1.0 - x).powf(-0.5)),
            2.0,
            max_relative = 1e-6
        );
    }

    #[test]
    fn circle_rule_total_measure() {
        let rule = CircleRule::new(12, 10);
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 2.0 * std::f64::consts::PI, max_relative = 1e-13);
    }

    /// Frozen references for ∫₀^{2π} |sin θ|^{1-2s} dθ = 2√π Γ(1-s)/Γ(3/2-s).
    const ANGULAR_WEIGHT_REFS: [(f64, f64); 3] = [
        (0.25, 4.7925609389423688298),
        (0.5, std::f64::consts::TAU), // the weight is |sin θ|⁰ = 1
        (0.75, 10.488230217168479242),
    ];

    #[test]
    fn circle_rule_integrates_degenerate_weight() {
        for (s, want) in ANGULAR_WEIGHT_REFS {
            let rule = CircleRule::new(40, 10);
            let got: f64 = rule
                .weights
                .iter()
                .zip(&rule.sin)
                .map(|(w, sn)| w * sn.abs().powf(1.0 - 2.0 * s))
                .sum();
            assert_relative_eq!(got, want, max_relative = 3e-6);
        }
    }

    #[test]
    fn circle_rule_second_moment_relation() {
        // ∫ |sin|^{1-2s} cos² = (∫ |sin|^{1-2s}) / (3-2s): the identity that
        // makes the frequency of the degree-one field exactly 1.
        for (s, i0) in ANGULAR_WEIGHT_REFS {
            let rule = CircleRule::new(40, 10);
            let got: f64 = rule
                .weights
                .iter()
                .zip(rule.sin.iter().zip(&rule.cos))
                .map(|(w, (sn, cs))| w * sn.abs().powf(1.0 - 2.0 * s) * cs * cs)
                .sum();
            assert_relative_eq!(got, i0 / (3.0 - 2.0 * s), max_relative = 3e-6);
        }
    }
}
