//! Scalar elliptic coefficient fields a(x) (the operator uses A(x) = a(x)·Id)
//! with a small named catalog, tabulated input, and ellipticity validation.

use crate::error::{CoreError, Result};
use crate::grid::SpatialGrid;
use std::io::BufRead;

/// Coefficient field of the divergence-form operator −div(a ∇·).
#[derive(Debug, Clone)]
pub enum Coefficient {
    /// a ≡ 1 (the reference Laplacian).
    Id,
    /// a(x) = 1 + |x|²/4 — smooth, non-constant, equal to 1 at the origin.
    OnePlusQuarterSq,
    /// a(x) = 1 + ε·sin(3x₁) — oscillatory perturbation of size ε with
    /// Lipschitz constant 3ε, equal to 1 at the origin.
    IdPlusEpsSin { eps: f64 },
    /// Piecewise-linear table over x₁ (one-dimensional grids only).
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

impl Coefficient {
    /// Resolves a catalog name. `eps` is consumed only by the perturbative
    /// entry.
    pub fn from_name(name: &str, eps: Option<f64>) -> Result<Self> {
        match name {
            "id" => Ok(Coefficient::Id),
            "one_plus_quarter_x_sq" => Ok(Coefficient::OnePlusQuarterSq),
            "id_plus_eps_sin" => {
                let eps = eps.ok_or_else(|| {
                    CoreError::InvalidConfig("id_plus_eps_sin requires eps".into())
                })?;
                if !(0.0..1.0).contains(&eps) {
                    return Err(CoreError::InvalidConfig(format!(
                        "eps must lie in [0, 1) for ellipticity, got {eps}"
                    )));
                }
                Ok(Coefficient::IdPlusEpsSin { eps })
            }
            other => Err(CoreError::InvalidConfig(format!(
                "unknown coefficient '{other}'"
            ))),
        }
    }

    /// Reads a two-column CSV table (`x,value`, ascending x, optional header).
    pub fn from_table(r: &mut impl BufRead) -> Result<Self> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (a, b) = t
                .split_once(',')
                .ok_or_else(|| CoreError::Parse("coefficient table row needs x,value".into()))?;
            let (Ok(x), Ok(v)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) else {
                if xs.is_empty() {
                    continue; // header row
                }
                return Err(CoreError::Parse(format!("bad table row '{t}'")));
            };
            xs.push(x);
            values.push(v);
        }
        if xs.len() < 2 {
            return Err(CoreError::Parse("coefficient table needs ≥ 2 rows".into()));
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(CoreError::Parse(
                "coefficient table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Coefficient::Tabulated { xs, values })
    }

    /// Evaluates the scalar multiplier at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Id => 1.0,
            Coefficient::OnePlusQuarterSq => {
                1.0 + 0.25 * x.iter().map(|c| c * c).sum::<f64>()
            }
            Coefficient::IdPlusEpsSin { eps } => 1.0 + eps * (3.0 * x[0]).sin(),
            Coefficient::Tabulated { xs, values } => {
                let t = x[0];
                if t <= xs[0] {
                    return values[0];
                }
                if t >= *xs.last().unwrap() {
                    return *values.last().unwrap();
                }
                let k = xs.partition_point(|v| *v <= t) - 1;
                let w = (t - xs[k]) / (xs[k + 1] - xs[k]);
                values[k] * (1.0 - w) + values[k + 1] * w
            }
        }
    }

    /// Lipschitz bound for the multiplier over the unit-scale domains used
    /// here.
    pub fn lipschitz(&self, grid: &SpatialGrid) -> f64 {
        match self {
            Coefficient::Id => 0.0,
            Coefficient::OnePlusQuarterSq => {
                // |∇a| = |x|/2, maximized at the domain corner.
                let r2: f64 = grid
                    .bounds
                    .iter()
                    .map(|(a, b)| a.abs().max(b.abs()).powi(2))
                    .sum();
                0.5 * r2.sqrt()
            }
            Coefficient::IdPlusEpsSin { eps } => 3.0 * eps,
            Coefficient::Tabulated { xs, values } => xs
                .windows(2)
                .zip(values.windows(2))
                .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    /// True when a(0) = 1 to floating-point accuracy. The frequency
    /// machinery's normalization assumes this.
    pub fn normalized_at_origin(&self, dim: usize) -> bool {
        (self.eval(&vec![0.0; dim]) - 1.0).abs() < 1e-12
    }

    /// Samples the multiplier on the grid's flux midpoints and returns the
    /// ellipticity constant λ with λ|ξ|² ≤ a|ξ|² ≤ λ⁻¹|ξ|², or an error if
    /// positivity fails anywhere.
    pub fn ellipticity(&self, grid: &SpatialGrid) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut check = |p: &[f64]| -> Result<()> {
            let v = self.eval(p);
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::NonElliptic {
                    location: p.to_vec(),
                    value: v,
                });
            }
            lo = lo.min(v);
            hi = hi.max(v);
            Ok(())
        };
        for (axis, h) in grid.spacing.iter().enumerate() {
            // Midpoints between consecutive nodes along `axis`, including the
            // half-cells touching the boundary.
            for i in 0..grid.len() {
                let mut p = grid.node(i);
                p[axis] += 0.5 * h;
                check(&p)?;
                p[axis] -= h;
                check(&p)?;
            }
        }
        Ok(lo.min(1.0 / hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let g = SpatialGrid::line(-1.0, 1.0, 199).unwrap();
        let a = Coefficient::from_name("one_plus_quarter_x_sq", None).unwrap();
        assert!((a.eval(&[0.5]) - 1.0625).abs() < 1e-15);
        assert!(a.normalized_at_origin(1));
        // Flux midpoints reach |x| = 0.995, so the sampled sup is a(0.995)
        // = 1.2475 and λ = 1/1.2475, slightly above the continuum 1/1.25.
        let lam = a.ellipticity(&g).unwrap();
        assert!(lam > 1.0 / 1.25 - 1e-12 && lam < 0.81, "λ = {lam}");

        let b = Coefficient::from_name("id_plus_eps_sin", Some(0.1)).unwrap();
        assert!(b.normalized_at_origin(1));
        assert!((b.lipschitz(&g) - 0.3).abs() < 1e-15);
        assert!((b.eval(&[0.2]) - (1.0 + 0.1 * 0.6f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_evaluation() {
        let a = Coefficient::OnePlusQuarterSq;
        assert!((a.eval(&[0.6, 0.8]) - 1.25).abs() < 1e-15);
        assert!(a.normalized_at_origin(2));
    }

    #[test]
    fn rejects_unknown_and_non_elliptic() {
        assert!(Coefficient::from_name("bogus", None).is_err());
        assert!(Coefficient::from_name("id_plus_eps_sin", Some(1.5)).is_err());

        let g = SpatialGrid::line(-1.0, 1.0, 19).unwrap();
        let t = Coefficient::Tabulated {
            xs: vec![-1.0, 0.0, 1.0],
            values: vec![1.0, -0.5, 1.0],
        };
        match t.ellipticity(&g) {
            Err(CoreError::NonElliptic { value, .. }) => assert!(value <= 0.0),
            other => panic!("expected ellipticity failure, got {other:?}"),
        }
    }

    #[test]
    fn table_roundtrip_and_interpolation() {
        let csv = "x,value\n-1.0,2.0\n0.0,1.0\n1.0,2.0\n";
        let t = Coefficient::from_table(&mut std::io::BufReader::new(csv.as_bytes())).unwrap();
        assert!((t.eval(&[-0.5]) - 1.5).abs() < 1e-15);
        assert!((t.eval(&[2.0]) - 2.0).abs() < 1e-15); // clamped
        assert!((t.lipschitz(&SpatialGrid::line(-1.0, 1.0, 9).unwrap()) - 1.0).abs() < 1e-15);
        assert!(t.normalized_at_origin(1));
        // Non-monotone abscissae rejected.
        let bad = "0.0,1.0\n0.0,2.0\n";
        assert!(Coefficient::from_table(&mut std::io::BufReader::new(bad.as_bytes())).is_err());
    }
}
