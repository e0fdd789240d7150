//! Conservative second-order discretization of L = −div(a(x) ∇·) with
//! homogeneous Dirichlet conditions, and its full eigendecomposition.

use crate::coeff::Coefficient;
use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, SpatialGrid};
use nalgebra::{DMatrix, DVector};

/// Flux-form stencil of −div(a ∇·) on the interior nodes of a tensor grid.
///
/// Each flux coefficient is the coefficient sampled at the midpoint between
/// two adjacent nodes (or between a node and the boundary), divided by the
/// squared spacing of that axis; the scheme is symmetric and reduces to the
/// standard (−1, 2, −1)/h² stencil when a ≡ 1.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: SpatialGrid,
    pub coefficient: Coefficient,
    /// Per axis: flux coefficients between consecutive nodes along that axis
    /// (including the two boundary half-edges), divided by h². Axis `d` holds
    /// one entry per (edge along d) × (nodes across the other axes), indexed
    /// row-major like the grid with the axis-d index enumerating edges.
    flux: Vec<Vec<f64>>,
}

impl DiscreteOperator {
    /// Samples the coefficient at flux midpoints and builds the stencil.
    /// Fails if the coefficient is not uniformly elliptic on those points.
    pub fn assemble(grid: &SpatialGrid, coefficient: &Coefficient) -> Result<Self> {
        coefficient.ellipticity(grid)?;
        let mut flux = Vec::with_capacity(grid.dim);
        match grid.dim {
            1 => {
                let m = grid.counts[0];
                let h = grid.spacing[0];
                let xs = &grid.coords[0];
                let mut fx = Vec::with_capacity(m + 1);
                for i in 0..=m {
                    // Midpoint of edge between node i−1 and node i (virtual
                    // boundary nodes at the ends).
                    let left = if i == 0 { grid.bounds[0].0 } else { xs[i - 1] };
                    let mid = left + 0.5 * h;
                    fx.push(coefficient.eval(&[mid]) / (h * h));
                }
                flux.push(fx);
            }
            2 => {
                let (m0, m1) = (grid.counts[0], grid.counts[1]);
                let (h0, h1) = (grid.spacing[0], grid.spacing[1]);
                let (xs, ys) = (&grid.coords[0], &grid.coords[1]);
                let mut fx = Vec::with_capacity((m0 + 1) * m1);
                for i in 0..=m0 {
                    let left = if i == 0 { grid.bounds[0].0 } else { xs[i - 1] };
                    let mid = left + 0.5 * h0;
                    for y in ys {
                        fx.push(coefficient.eval(&[mid, *y]) / (h0 * h0));
                    }
                }
                let mut fy = Vec::with_capacity(m0 * (m1 + 1));
                for x in xs {
                    for j in 0..=m1 {
                        let lo = if j == 0 { grid.bounds[1].0 } else { ys[j - 1] };
                        let mid = lo + 0.5 * h1;
                        fy.push(coefficient.eval(&[*x, mid]) / (h1 * h1));
                    }
                }
                flux.push(fx);
                flux.push(fy);
            }
            d => {
                return Err(CoreError::InvalidGrid(format!(
                    "operator assembly supports dim 1 or 2, got {d}"
                )))
            }
        }
        Ok(DiscreteOperator {
            grid: grid.clone(),
            coefficient: coefficient.clone(),
            flux,
        })
    }

    /// Applies the operator to a grid function.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if !u.grid.same_layout(&self.grid) {
            return Err(CoreError::GridMismatch("operator apply".into()));
        }
        let v = &u.values;
        let mut out = vec![0.0; v.len()];
        match self.grid.dim {
            1 => {
                let m = self.grid.counts[0];
                let fx = &self.flux[0];
                for i in 0..m {
                    let ul = if i == 0 { 0.0 } else { v[i - 1] };
                    let ur = if i + 1 == m { 0.0 } else { v[i + 1] };
                    out[i] = fx[i] * (v[i] - ul) + fx[i + 1] * (v[i] - ur);
                }
            }
            _ => {
                let (m0, m1) = (self.grid.counts[0], self.grid.counts[1]);
                let (fx, fy) = (&self.flux[0], &self.flux[1]);
                for i in 0..m0 {
                    for j in 0..m1 {
                        let k = i * m1 + j;
                        let ul = if i == 0 { 0.0 } else { v[k - m1] };
                        let ur = if i + 1 == m0 { 0.0 } else { v[k + m1] };
                        let ud = if j == 0 { 0.0 } else { v[k - 1] };
                        let uu = if j + 1 == m1 { 0.0 } else { v[k + 1] };
                        out[k] = fx[i * m1 + j] * (v[k] - ul)
                            + fx[(i + 1) * m1 + j] * (v[k] - ur)
                            + fy[i * (m1 + 1) + j] * (v[k] - ud)
                            + fy[i * (m1 + 1) + j + 1] * (v[k] - uu);
                    }
                }
            }
        }
        GridFunction::new(u.grid.clone(), out)
    }

    /// Dense symmetric matrix of the stencil (rows/columns in flat node
    /// order).
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let mut m = DMatrix::zeros(n, n);
        match self.grid.dim {
            1 => {
                let fx = &self.flux[0];
                for i in 0..n {
                    m[(i, i)] = fx[i] + fx[i + 1];
                    if i + 1 < n {
                        m[(i, i + 1)] = -fx[i + 1];
                        m[(i + 1, i)] = -fx[i + 1];
                    }
                }
            }
            _ => {
                let (m0, m1) = (self.grid.counts[0], self.grid.counts[1]);
                let (fx, fy) = (&self.flux[0], &self.flux[1]);
                for i in 0..m0 {
                    for j in 0..m1 {
                        let k = i * m1 + j;
                        m[(k, k)] = fx[i * m1 + j]
                            + fx[(i + 1) * m1 + j]
                            + fy[i * (m1 + 1) + j]
                            + fy[i * (m1 + 1) + j + 1];
                        if i + 1 < m0 {
                            m[(k, k + m1)] = -fx[(i + 1) * m1 + j];
                            m[(k + m1, k)] = -fx[(i + 1) * m1 + j];
                        }
                        if j + 1 < m1 {
                            m[(k, k + 1)] = -fy[i * (m1 + 1) + j + 1];
                            m[(k + 1, k)] = -fy[i * (m1 + 1) + j + 1];
                        }
                    }
                }
            }
        }
        m
    }

    /// Flux coefficient between nodes i−1 and i along axis 0 (1D grids),
    /// already divided by h². Used by the strip assembly, which shares the
    /// same horizontal stencil.
    pub fn flux_x(&self) -> &[f64] {
        &self.flux[0]
    }

    /// Full eigendecomposition, eigenvalues ascending, eigenvectors
    /// orthonormal in the grid's weighted inner product, each signed so its
    /// first appreciable component is positive.
    pub fn eigendecompose(&self) -> Result<SpectralDecomposition> {
        let n = self.grid.len();
        let dense = self.dense();
        let eig = dense.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vol = self.grid.cell_volume();
        let scale = 1.0 / vol.sqrt();
        let mut lambdas = Vec::with_capacity(n);
        let mut modes = DMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            let lam = eig.eigenvalues[src];
            if !(lam > 0.0) {
                return Err(CoreError::EigenFailure(format!(
                    "nonpositive eigenvalue {lam} (index {col})"
                )));
            }
            lambdas.push(lam);
            let v = eig.eigenvectors.column(src);
            let vmax = v.amax();
            let flip = match v.iter().find(|c| c.abs() > 1e-12 * vmax) {
                Some(c) if *c < 0.0 => -1.0,
                _ => 1.0,
            };
            for r in 0..n {
                modes[(r, col)] = flip * scale * v[r];
            }
        }
        Ok(SpectralDecomposition {
            grid: self.grid.clone(),
            lambdas,
            modes,
        })
    }
}

/// Eigenpairs (λ_j, e_j) of a [`DiscreteOperator`], with the e_j orthonormal
/// under the grid inner product and λ ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub grid: SpatialGrid,
    pub lambdas: Vec<f64>,
    /// Columns are the modes e_j.
    pub modes: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// j-th mode as a grid function.
    pub fn mode(&self, j: usize) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.modes.column(j).iter().copied().collect(),
        }
    }

    /// Expansion coefficients c_j = ⟨u, e_j⟩ in the grid inner product.
    pub fn coefficients(&self, u: &GridFunction) -> Result<DVector<f64>> {
        if !u.grid.same_layout(&self.grid) {
            return Err(CoreError::GridMismatch("spectral coefficients".into()));
        }
        let uv = DVector::from_column_slice(&u.values);
        Ok(self.grid.cell_volume() * (self.modes.transpose() * uv))
    }

    /// Rebuilds Σ c_j e_j as a grid function.
    pub fn synthesize(&self, c: &DVector<f64>) -> GridFunction {
        let v = &self.modes * c;
        GridFunction {
            grid: self.grid.clone(),
            values: v.iter().copied().collect(),
        }
    }

    /// max_{ij} |⟨e_i, e_j⟩ − δ_ij| — orthonormality defect in the grid inner
    /// product.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.grid.cell_volume() * (self.modes.transpose() * &self.modes);
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// max_j ‖L e_j − λ_j e_j‖ / λ_j over the grid norm — relative eigen
    /// residual.
    pub fn eigen_residual(&self, op: &DiscreteOperator) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..self.len() {
            let e = self.mode(j);
            let le = op.apply(&e)?;
            let mut diff = le;
            for (d, ev) in diff.values.iter_mut().zip(&e.values) {
                *d -= self.lambdas[j] * ev;
            }
            worst = worst.max(diff.norm() / self.lambdas[j]);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budgets::{EIGEN_ORTHONORMALITY, EIGEN_RESIDUAL};
    use rand::{Rng, SeedableRng};

    /// Closed-form eigenvalues of the 1D reference stencil on (0, π):
    /// (4/h²)·sin²(j·h/2).
    fn reference_eigs(m: usize) -> Vec<f64> {
        let h = std::f64::consts::PI / (m as f64 + 1.0);
        (1..=m)
            .map(|j| (4.0 / (h * h)) * (0.5 * j as f64 * h).sin().powi(2))
            .collect()
    }

    #[test]
    fn identity_coefficient_reduces_to_reference_stencil() {
        let g = SpatialGrid::line(0.0, std::f64::consts::PI, 40).unwrap();
        let op = DiscreteOperator::assemble(&g, &Coefficient::Id).unwrap();
        let h2 = g.spacing[0] * g.spacing[0];
        let d = op.dense();
        assert!((d[(5, 5)] - 2.0 / h2).abs() < 1e-9);
        assert!((d[(5, 6)] + 1.0 / h2).abs() < 1e-9);

        let dec = op.eigendecompose().unwrap();
        for (got, want) in dec.lambdas.iter().zip(reference_eigs(40)) {
            assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
        }
        // Modes match sin(j x) up to the weighted normalization.
        let e1 = dec.mode(0);
        let norm = (2.0 / std::f64::consts::PI).sqrt(); // L²(0,π) normalization of sin
        for (i, v) in e1.values.iter().enumerate() {
            let x = g.coords[0][i];
            assert!((v - norm * x.sin()).abs() < 1e-3, "mode mismatch at {x}");
        }
    }

    #[test]
    fn two_dimensional_reference_spectrum() {
        let m = 9;
        let g = SpatialGrid::rectangle([
            (0.0, std::f64::consts::PI, m),
            (0.0, std::f64::consts::PI, m),
        ])
        .unwrap();
        let op = DiscreteOperator::assemble(&g, &Coefficient::Id).unwrap();
        let dec = op.eigendecompose().unwrap();
        let one = reference_eigs(m);
        let mut want: Vec<f64> = one
            .iter()
            .flat_map(|a| one.iter().map(move |b| a + b))
            .collect();
        want.sort_by(f64::total_cmp);
        for (got, want) in dec.lambdas.iter().zip(want) {
            assert!((got - want).abs() / want < 1e-11);
        }
    }

    #[test]
    fn symmetry_and_energy_identity() {
        let g = SpatialGrid::line(-1.0, 1.0, 57).unwrap();
        let a = Coefficient::OnePlusQuarterSq;
        let op = DiscreteOperator::assemble(&g, &a).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let u = GridFunction::sample(g.clone(), |_| rng.gen_range(-1.0..1.0));
            let v = GridFunction::sample(g.clone(), |_| rng.gen_range(-1.0..1.0));
            let lu_v = op.apply(&u).unwrap().inner(&v).unwrap();
            let u_lv = u.inner(&op.apply(&v).unwrap()).unwrap();
            assert!((lu_v - u_lv).abs() < 1e-10 * lu_v.abs().max(1.0));

            // Summation by parts: ⟨Lu, u⟩ equals the discrete Dirichlet
            // energy Σ_edges a_mid (Δu)² / h² · h, ghosts at the boundary.
            let h = g.spacing[0];
            let m = g.counts[0];
            let fx = op.flux_x();
            let mut energy = 0.0;
            for i in 0..=m {
                let ul = if i == 0 { 0.0 } else { u.values[i - 1] };
                let ur = if i == m { 0.0 } else { u.values[i] };
                energy += fx[i] * (ur - ul) * (ur - ul) * h;
            }
            let lu_u = op.apply(&u).unwrap().inner(&u).unwrap();
            assert!((lu_u - energy).abs() < 1e-10 * energy.max(1.0));
            assert!(lu_u > 0.0);
        }
    }

    #[test]
    fn assembly_is_linear_in_the_coefficient() {
        let g = SpatialGrid::line(-1.0, 1.0, 33).unwrap();
        let op_sum = DiscreteOperator::assemble(&g, &Coefficient::OnePlusQuarterSq).unwrap();
        // a(x) = 1 + |x|²/4 = id + (table of |x|²/4); assemble the parts.
        let op_id = DiscreteOperator::assemble(&g, &Coefficient::Id).unwrap();
        let quarter = Coefficient::Tabulated {
            // piecewise-linear over a fine table so midpoint samples agree
            xs: (0..=4000).map(|i| -1.0 + i as f64 * 0.0005).collect(),
            values: (0..=4000)
                .map(|i| {
                    let x: f64 = -1.0 + i as f64 * 0.0005;
                    1.0 + 0.25 * x * x
                })
                .collect(),
        };
        let op_tab = DiscreteOperator::assemble(&g, &quarter).unwrap();
        let u = GridFunction::sample(g.clone(), |p| (2.0 * p[0]).cos());
        let lhs = op_sum.apply(&u).unwrap();
        let rhs = op_tab.apply(&u).unwrap();
        // The tabulated copy of the same coefficient gives a nearby stencil:
        // midpoints of the assembly grid are not table knots, so agreement is
        // to the table's interpolation error, not exact.
        for (a, b) in lhs.values.iter().zip(&rhs.values) {
            assert!((a - b).abs() < 1e-4 * b.abs().max(1.0));
        }
        // True linearity: stencil(id) + stencil(a − id) = stencil(a) holds
        // exactly because flux sampling is pointwise.
        let eps = 0.07;
        let pert = Coefficient::IdPlusEpsSin { eps };
        let op_pert = DiscreteOperator::assemble(&g, &pert).unwrap();
        let lp = op_pert.apply(&u).unwrap();
        let li = op_id.apply(&u).unwrap();
        // (L_pert − L_id) u should scale linearly with eps.
        let pert2 = Coefficient::IdPlusEpsSin { eps: 2.0 * eps };
        let lp2 = DiscreteOperator::assemble(&g, &pert2)
            .unwrap()
            .apply(&u)
            .unwrap();
        for ((p1, p2), i0) in lp.values.iter().zip(&lp2.values).zip(&li.values) {
            let d1 = p1 - i0;
            let d2 = p2 - i0;
            assert!((d2 - 2.0 * d1).abs() < 1e-9 * d2.abs().max(1.0));
        }
    }

    #[test]
    fn eigen_invariants_on_the_working_grid() {
        let g = SpatialGrid::line(-1.0, 1.0, 199).unwrap();
        let op = DiscreteOperator::assemble(&g, &Coefficient::OnePlusQuarterSq).unwrap();
        let dec = op.eigendecompose().unwrap();
        assert!(dec.orthonormality_defect() < EIGEN_ORTHONORMALITY);
        assert!(dec.eigen_residual(&op).unwrap() < EIGEN_RESIDUAL);
        assert!(dec.lambdas.windows(2).all(|w| w[0] < w[1]));
        // Sign convention: first appreciable component positive.
        for j in 0..5 {
            let e = dec.mode(j);
            let m = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let first = e.values.iter().find(|v| v.abs() > 1e-12 * m).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn lowest_eigenvalue_matches_fine_reference_quadratically() {
        // Fine-grid reference for a(x) = 1 + x²/4 on (−1, 1), computed once
        // offline with 3199 nodes.
        let reference = 2.78702909944747;
        let lam = |m: usize| {
            let g = SpatialGrid::line(-1.0, 1.0, m).unwrap();
            DiscreteOperator::assemble(&g, &Coefficient::OnePlusQuarterSq)
                .unwrap()
                .eigendecompose()
                .unwrap()
                .lambdas[0]
        };
        let e199 = (lam(199) - reference).abs();
        let e99 = (lam(99) - reference).abs();
        assert!(e199 < 1e-3, "λ₁ error {e199}");
        let ratio = e99 / e199;
        assert!(
            (3.5..4.5).contains(&ratio),
            "second-order convergence ratio {ratio}"
        );
    }

    #[test]
    fn rejects_mismatched_grids() {
        let g = SpatialGrid::line(-1.0, 1.0, 21).unwrap();
        let g2 = SpatialGrid::line(-1.0, 1.0, 22).unwrap();
        let op = DiscreteOperator::assemble(&g, &Coefficient::Id).unwrap();
        let u = GridFunction::zeros(g2);
        assert!(op.apply(&u).is_err());
    }
}
