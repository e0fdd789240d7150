//! The degenerate extension problem on the half-strip (x, y) ∈ Ω × (0, Y):
//!
//!   div(y^{1−2s} Ā ∇U) = 0,  U(x, 0) = u(x),  U = 0 on the lateral and top
//!   boundaries, with Ā = diag(a(x), 1).
//!
//! Two independent routes produce the same field:
//!
//! * [`extend_semigroup`] — eigenmode synthesis u = Σ c_j e_j ⇒
//!   U = Σ c_j φ_s(√λ_j · y) e_j, with φ_s the 1D profile from
//!   [`crate::special::extension_profile`];
//! * [`extend_pde`] — a finite-volume solve of the weighted equation on a
//!   graded tensor grid, never touching the eigendecomposition.
//!
//! The weighted Neumann derivative lim_{y→0} y^{1−2s} ∂_y U recovers the
//! fractional power: it equals `trace_constant(s) · L^s u`.

use crate::banded::SymBanded;
use crate::budgets;
use crate::coeff::Coefficient;
use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, SpatialGrid};
use crate::operator::{DiscreteOperator, SpectralDecomposition};
use crate::special::{extension_profile, gamma};
use crate::spectral::FractionalOrder;
use crate::ygrid::YGrid;
use std::io::Write;

/// Which construction produced an [`ExtensionField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRoute {
    /// Eigenmode profile synthesis.
    Semigroup,
    /// Finite-volume solve of the weighted equation.
    WeightedPde,
}

/// Extension field U on the tensor grid (x interior nodes) × (y levels
/// 0..=J), stored row-major with y fastest. Row j = 0 carries the boundary
/// datum, row j = J the top Dirichlet zero.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub xgrid: SpatialGrid,
    pub ygrid: YGrid,
    pub s: FractionalOrder,
    pub route: ExtensionRoute,
    /// values[i · (J+1) + j] = U(x_i, y_j).
    pub values: Vec<f64>,
    /// Set when the truncation height is too small for the datum's spectral
    /// content (the slowest surviving mode still has appreciable mass at Y).
    pub truncation_warning: Option<String>,
}

impl ExtensionField {
    pub fn levels(&self) -> usize {
        self.ygrid.ys.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.levels() + j]
    }

    /// The y = 0 row as a grid function.
    pub fn trace_row(&self) -> GridFunction {
        let nl = self.levels();
        GridFunction {
            grid: self.xgrid.clone(),
            values: (0..self.xgrid.len()).map(|i| self.values[i * nl]).collect(),
        }
    }

    /// Weighted measure of the y-box around each level (midpoint boxes
    /// clipped to [0, Y]): ∫_box y^{1−2s} dy.
    pub fn y_boxes(&self) -> Vec<f64> {
        y_boxes(&self.ygrid, self.s)
    }

    /// Writes the field as CSV (`x,y,value` rows, 17 significant digits).
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "x,y,value")?;
        let nl = self.levels();
        for i in 0..self.xgrid.len() {
            let x = self.xgrid.coords[0][i];
            for (j, y) in self.ygrid.ys.iter().enumerate() {
                writeln!(w, "{x:.17e},{y:.17e},{:.17e}", self.values[i * nl + j])?;
            }
        }
        Ok(())
    }
}

pub(crate) fn y_boxes(yg: &YGrid, s: FractionalOrder) -> Vec<f64> {
    let p = 2.0 - 2.0 * s.value();
    let ys = &yg.ys;
    let jmax = ys.len() - 1;
    let edge = |j: usize| -> f64 {
        if j == 0 {
            0.0
        } else if j > jmax {
            ys[jmax]
        } else {
            0.5 * (ys[j - 1] + ys[j])
        }
    };
    (0..=jmax)
        .map(|j| {
            let lo = edge(j);
            let hi = edge(j + 1);
            (hi.powf(p) - lo.powf(p)) / p
        })
        .collect()
}

/// Vertical transmissibilities of the graded grid: entry j couples levels j
/// and j+1 with weight 2s/(y_{j+1}^{2s} − y_j^{2s}), exact on c₀ + c₁ y^{2s}.
pub(crate) fn vertical_transmissibilities(yg: &YGrid, s: FractionalOrder) -> Vec<f64> {
    let two_s = 2.0 * s.value();
    (0..yg.ys.len() - 1)
        .map(|j| two_s / (yg.ys[j + 1].powf(two_s) - yg.ys[j].powf(two_s)))
        .collect()
}

/// Prefactor of L^s u in the weighted Neumann trace:
/// lim_{y→0} y^{1−2s} ∂_y U = 2s · Γ(−s)/(4^s Γ(s)) · L^s u. Negative for all
/// s ∈ (0, 1); equals −1 at s = 1/2.
pub fn trace_constant(s: f64) -> f64 {
    2.0 * s * gamma(-s) / (4f64.powf(s) * gamma(s))
}

fn check_one_dimensional(grid: &SpatialGrid) -> Result<()> {
    if grid.dim != 1 {
        return Err(CoreError::InvalidGrid(
            "strip extension is implemented over one-dimensional traces".into(),
        ));
    }
    Ok(())
}

fn tail_warning(s: FractionalOrder, lambda_est: f64, height: f64) -> Result<Option<String>> {
    let tail = extension_profile(s.value(), lambda_est.sqrt() * height)?;
    Ok(if tail > budgets::EXTENSION_TAIL_WARN {
        Some(format!(
            "truncation height {height:.3} leaves profile mass {tail:.3} for the \
             dominant spectral content (estimated eigenvalue {lambda_est:.3}); \
             increase the height for percent-level route comparisons"
        ))
    } else {
        None
    })
}

/// Profile-synthesis route: U(x, y) = Σ_j ⟨u, e_j⟩ φ_s(√λ_j y) e_j(x).
pub fn extend_semigroup(
    dec: &SpectralDecomposition,
    s: FractionalOrder,
    u: &GridFunction,
    yg: &YGrid,
) -> Result<ExtensionField> {
    check_one_dimensional(&dec.grid)?;
    let c = dec.coefficients(u)?;
    let m = dec.len();
    let nl = yg.ys.len();
    let mut values = vec![0.0; m * nl];
    // Terms with √λ·y beyond this contribute less than e⁻⁴⁶ ≈ 1e−20 of the
    // mode's coefficient — far below every budget in play.
    const NEGLIGIBLE_RHO: f64 = 46.0;
    for k in 0..m {
        if c[k] == 0.0 {
            continue;
        }
        let sqrt_lam = dec.lambdas[k].sqrt();
        // Profile weights per level for this mode.
        let mut w = Vec::with_capacity(nl);
        for y in &yg.ys {
            let rho = sqrt_lam * y;
            w.push(if rho > NEGLIGIBLE_RHO {
                0.0
            } else {
                extension_profile(s.value(), rho)?
            });
        }
        for i in 0..m {
            let base = c[k] * dec.modes[(i, k)];
            if base == 0.0 {
                continue;
            }
            let row = &mut values[i * nl..(i + 1) * nl];
            for (vj, wj) in row.iter_mut().zip(&w) {
                *vj += base * wj;
            }
        }
    }
    // Rayleigh estimate of the dominant spectral content for the truncation
    // check (low modes decay slowest).
    let num: f64 = c.iter().zip(&dec.lambdas).map(|(cj, l)| cj * cj * l).sum();
    let den: f64 = c.iter().map(|cj| cj * cj).sum();
    let warning = if den > 0.0 {
        // The slowest mode present dominates the tail; use the smallest
        // eigenvalue carrying at least 1e-6 of the mass.
        let thresh = 1e-6 * den;
        let lam_slow = c
            .iter()
            .zip(&dec.lambdas)
            .find(|(cj, _)| *cj * *cj >= thresh)
            .map(|(_, l)| *l)
            .unwrap_or(num / den);
        tail_warning(s, lam_slow, yg.height)?
    } else {
        None
    };
    Ok(ExtensionField {
        xgrid: dec.grid.clone(),
        ygrid: yg.clone(),
        s,
        route: ExtensionRoute::Semigroup,
        values,
        truncation_warning: warning,
    })
}

/// Finite-volume route: solves div(y^{1−2s} Ā ∇U) = 0 on the graded tensor
/// grid with U(·, 0) = u, zero on the top and lateral boundaries.
///
/// The vertical transmissibility between levels j and j+1 is
/// 2s·h/(y_{j+1}^{2s} − y_j^{2s}) — the harmonic mean of the weight along the
/// edge — which makes the scheme exact on fields of the form
/// c₀(x) + c₁(x) y^{2s}, precisely the local behaviour at the trace plane.
/// Horizontal transmissibilities reuse the trace operator's flux midpoints
/// times the weighted measure of the y-box.
pub fn extend_pde(
    op: &DiscreteOperator,
    s: FractionalOrder,
    u: &GridFunction,
    yg: &YGrid,
) -> Result<ExtensionField> {
    check_one_dimensional(&op.grid)?;
    if !u.grid.same_layout(&op.grid) {
        return Err(CoreError::GridMismatch("extension datum".into()));
    }
    let m = op.grid.len();
    let h = op.grid.spacing[0];
    let jmax = yg.ys.len() - 1; // top Dirichlet level
    let inner = jmax - 1; // unknowns per column, j = 1..=jmax-1
    let n = m * inner;
    let boxes = y_boxes(yg, s);
    let tv = vertical_transmissibilities(yg, s);
    let fx = op.flux_x(); // a_{i−1/2} / h², length m+1

    let idx = |i: usize, j: usize| i * inner + (j - 1);
    let mut mat = SymBanded::zeros(n, inner);
    let mut rhs = vec![0.0; n];
    for i in 0..m {
        for j in 1..jmax {
            let row = idx(i, j);
            let mut diag = 0.0;
            // Horizontal couplings: a_{i±1/2}·W_j/h = flux_x·h·W_j. The
            // symmetric entry is stored once, from the lower-indexed side.
            let wj = boxes[j];
            let tl = fx[i] * h * wj;
            let tr = fx[i + 1] * h * wj;
            diag += tl + tr;
            if i + 1 < m {
                mat.add(row, idx(i + 1, j), -tr);
            }
            // Vertical couplings: h · tv.
            let td = h * tv[j - 1];
            let tu = h * tv[j];
            diag += td + tu;
            if j == 1 {
                rhs[row] += td * u.values[i];
            }
            if j + 1 < jmax {
                mat.add(row, idx(i, j + 1), -tu);
            }
            mat.add(row, row, diag);
        }
    }

    let chol = mat.clone().cholesky()?;
    let x = chol.solve(&rhs);
    // Relative residual through the banded multiply.
    let ax = mat.mul(&x);
    let mut rnorm = 0.0;
    let mut bnorm = 0.0;
    for (axi, bi) in ax.iter().zip(&rhs) {
        rnorm += (axi - bi) * (axi - bi);
        bnorm += bi * bi;
    }
    let residual = rnorm.sqrt() / bnorm.sqrt().max(1e-300);
    if residual > budgets::PDE_SOLVE_RESIDUAL {
        return Err(CoreError::SolveFailure(format!(
            "finite-volume solve residual {residual:.3e} exceeds {:.1e}",
            budgets::PDE_SOLVE_RESIDUAL
        )));
    }

    let nl = jmax + 1;
    let mut values = vec![0.0; m * nl];
    for i in 0..m {
        values[i * nl] = u.values[i];
        for j in 1..jmax {
            values[i * nl + j] = x[idx(i, j)];
        }
        // top row stays 0
    }

    // Truncation warning via the Rayleigh quotient of the datum.
    let lu = op.apply(u)?;
    let den = u.inner(u)?;
    let warning = if den > 0.0 {
        tail_warning(s, lu.inner(u)? / den, yg.height)?
    } else {
        None
    };

    Ok(ExtensionField {
        xgrid: op.grid.clone(),
        ygrid: yg.clone(),
        s,
        route: ExtensionRoute::WeightedPde,
        values,
        truncation_warning: warning,
    })
}

/// Weighted Neumann derivative at the trace plane,
/// t(x) = lim_{y→0} y^{1−2s} ∂_y U(x, y), extracted per column by a
/// least-squares fit of U − u against the two-term local model
/// c₁ y^{2s} + c₂ y² over the first few levels (the y² term absorbs the
/// regular part that otherwise pollutes the singular coefficient), giving
/// t = 2s·c₁.
pub fn neumann_trace(field: &ExtensionField) -> Result<GridFunction> {
    let nl = field.levels();
    let levels_used = 6.min(nl - 2);
    if levels_used < 2 {
        return Err(CoreError::InvalidGrid(
            "trace fit needs at least three vertical levels".into(),
        ));
    }
    let two_s = 2.0 * field.s.value();
    let ys = &field.ygrid.ys[1..=levels_used];
    let v1: Vec<f64> = ys.iter().map(|y| y.powf(two_s)).collect();
    let v2: Vec<f64> = ys.iter().map(|y| y * y).collect();
    let g11: f64 = v1.iter().map(|v| v * v).sum();
    let g12: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
    let g22: f64 = v2.iter().map(|v| v * v).sum();
    let det = g11 * g22 - g12 * g12;
    if det.abs() < 1e-30 * g11 * g22 {
        return Err(CoreError::SolveFailure(
            "trace fit basis is degenerate (s too close to 1?)".into(),
        ));
    }
    let m = field.xgrid.len();
    let mut tr = Vec::with_capacity(m);
    for i in 0..m {
        let u0 = field.values[i * nl];
        let d: Vec<f64> = (1..=levels_used)
            .map(|j| field.values[i * nl + j] - u0)
            .collect();
        let b1: f64 = v1.iter().zip(&d).map(|(a, b)| a * b).sum();
        let b2: f64 = v2.iter().zip(&d).map(|(a, b)| a * b).sum();
        let c1 = (g22 * b1 - g12 * b2) / det;
        tr.push(two_s * c1);
    }
    GridFunction::new(field.xgrid.clone(), tr)
}

/// Relative weighted-L² discrepancy between two extension fields over the
/// open strip (rows 0 and J excluded — they are shared Dirichlet data):
/// ‖U₁ − U₂‖_w / ‖U₂‖_w with ‖·‖²_w = Σ h·W_j |·|².
pub fn weighted_l2_diff(a: &ExtensionField, b: &ExtensionField) -> Result<f64> {
    if !a.xgrid.same_layout(&b.xgrid) || a.ygrid != b.ygrid {
        return Err(CoreError::GridMismatch("route comparison".into()));
    }
    if a.s != b.s {
        return Err(CoreError::GridMismatch(
            "route comparison needs matching exponents".into(),
        ));
    }
    let boxes = a.y_boxes();
    let nl = a.levels();
    let h = a.xgrid.spacing[0];
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.xgrid.len() {
        for j in 1..nl - 1 {
            let w = h * boxes[j];
            let d = a.values[i * nl + j] - b.values[i * nl + j];
            num += w * d * d;
            den += w * b.values[i * nl + j] * b.values[i * nl + j];
        }
    }
    Ok((num / den.max(1e-300)).sqrt())
}

/// Weighted Dirichlet energy ∫∫ y^{1−2s} (a(x)(∂_x U)² + (∂_y U)²) over the
/// strip, by the same box/transmissibility quadrature the solver uses.
pub fn weighted_energy(field: &ExtensionField, coeff: &Coefficient) -> f64 {
    let nl = field.levels();
    let jmax = nl - 1;
    let m = field.xgrid.len();
    let h = field.xgrid.spacing[0];
    let xs = &field.xgrid.coords[0];
    let boxes = field.y_boxes();
    let tv = vertical_transmissibilities(&field.ygrid, field.s);
    let mut e = 0.0;
    // Horizontal differences (lateral Dirichlet zeros at both ends).
    for i in 0..=m {
        let xmid = if i == 0 {
            field.xgrid.bounds[0].0 + 0.5 * h
        } else {
            xs[i - 1] + 0.5 * h
        };
        let a = coeff.eval(&[xmid]);
        for j in 1..jmax {
            let ul = if i == 0 { 0.0 } else { field.value(i - 1, j) };
            let ur = if i == m { 0.0 } else { field.value(i, j) };
            let d = ur - ul;
            e += a * boxes[j] * d * d / h;
        }
    }
    // Vertical differences.
    for i in 0..m {
        for j in 0..jmax {
            let d = field.value(i, j + 1) - field.value(i, j);
            e += h * tv[j] * d * d;
        }
    }
    e
}
