//! The coefficient of the weighted strip equation, Ā(x, y) = diag(a(x), 1),
//! together with the direction-dependent normalizer μ and the drift β that
//! the frequency functionals are built from:
//!
//!   μ(z) = ⟨Ā(z) z, z⟩ / |z|²,         β(z) = Ā(z) z / μ(z).
//!
//! μ measures the coefficient in the radial direction; dividing the surface
//! height integrand by it is what makes the frequency of the degree-one
//! field exactly 1 for variable a. β is the direction along which the
//! Rellich–Nečas identities transport the field; its defining properties
//! (β·ν = |z| on circles, |β| ≤ |z|/λ, β = z when a ≡ 1) are checked here.

use crate::coeff::Coefficient;

/// Strip coefficient diag(a(x·scale), 1). `scale` supports blow-up
/// rescalings, which sample the coefficient at contracted positions
/// (A_τ(z) = A(τz)).
#[derive(Debug, Clone)]
pub struct ExtendedCoefficient {
    pub coeff: Coefficient,
    pub scale: f64,
}

impl ExtendedCoefficient {
    pub fn new(coeff: Coefficient) -> Self {
        ExtendedCoefficient { coeff, scale: 1.0 }
    }

    /// The same coefficient viewed by a blow-up at factor `tau`.
    pub fn rescaled(&self, tau: f64) -> Self {
        ExtendedCoefficient {
            coeff: self.coeff.clone(),
            scale: self.scale * tau,
        }
    }

    /// Horizontal entry a at strip position (x, y).
    pub fn a_at(&self, x: f64) -> f64 {
        self.coeff.eval(&[self.scale * x])
    }

    /// Ā(z) v.
    pub fn apply(&self, x: f64, v: (f64, f64)) -> (f64, f64) {
        (self.a_at(x) * v.0, v.1)
    }

    /// μ(z) = ⟨Āz, z⟩/|z|² (radial normalizer). Defined as 1 at z = 0.
    pub fn mu(&self, x: f64, y: f64) -> f64 {
        let n2 = x * x + y * y;
        if n2 == 0.0 {
            return 1.0;
        }
        (self.a_at(x) * x * x + y * y) / n2
    }

    /// β(z) = Āz/μ(z).
    pub fn beta(&self, x: f64, y: f64) -> (f64, f64) {
        let m = self.mu(x, y);
        (self.a_at(x) * x / m, y / m)
    }

    /// ⟨Ā∇U, ∇U⟩ — the energy integrand.
    pub fn energy_density(&self, x: f64, grad: (f64, f64)) -> f64 {
        self.a_at(x) * grad.0 * grad.0 + grad.1 * grad.1
    }

    /// ⟨Āν, ∇U⟩ with ν = z/|z| — the conormal derivative on circles.
    pub fn conormal(&self, x: f64, y: f64, r: f64, grad: (f64, f64)) -> f64 {
        (self.a_at(x) * x * grad.0 + y * grad.1) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_coefficient_degenerates_to_euclidean_objects() {
        let ac = ExtendedCoefficient::new(Coefficient::Id);
        for (x, y) in [(0.3, 0.4), (-0.9, 0.1), (0.0, 2.0)] {
            assert_eq!(ac.mu(x, y), 1.0);
            let (bx, by) = ac.beta(x, y);
            assert_eq!((bx, by), (x, y));
        }
    }

    #[test]
    fn mu_bounds_and_radial_projection() {
        let ac = ExtendedCoefficient::new(Coefficient::OnePlusQuarterSq);
        for k in 0..48 {
            let th = 0.13 * k as f64;
            let r = 0.05 + 0.02 * k as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let a = ac.a_at(x);
            let (lo, hi) = (a.min(1.0), a.max(1.0));
            let mu = ac.mu(x, y);
            assert!(mu >= lo - 1e-14 && mu <= hi + 1e-14, "μ out of range");
            // β·ν = |z| exactly (definition) — the transport normalization.
            let (bx, by) = ac.beta(x, y);
            let dot = (bx * x + by * y) / r;
            assert!((dot - r).abs() < 1e-13 * r.max(1.0));
            // |β| ≤ |z| / λ with λ the two-sided ellipticity bound.
            let lam = lo / hi.max(1.0);
            assert!((bx * bx + by * by).sqrt() <= r / lam + 1e-12);
        }
    }

    #[test]
    fn perturbation_size_controls_the_drift() {
        for eps in [0.01, 0.1] {
            let ac = ExtendedCoefficient::new(Coefficient::IdPlusEpsSin { eps });
            for k in 0..32 {
                let th = 0.2 * k as f64;
                let (x, y) = (0.5 * th.cos(), 0.5 * th.sin());
                let (bx, by) = ac.beta(x, y);
                let dev = ((bx - x).powi(2) + (by - y).powi(2)).sqrt();
                assert!(dev <= 3.0 * eps * 0.5 + 1e-12, "drift {dev} at ε={eps}");
            }
        }
    }

    #[test]
    fn rescaling_samples_contracted_positions() {
        let ac = ExtendedCoefficient::new(Coefficient::OnePlusQuarterSq);
        let half = ac.rescaled(0.5);
        assert!((half.a_at(0.8) - ac.a_at(0.4)).abs() < 1e-15);
        let quarter = half.rescaled(0.5);
        assert!((quarter.a_at(0.8) - ac.a_at(0.2)).abs() < 1e-15);
    }
}
