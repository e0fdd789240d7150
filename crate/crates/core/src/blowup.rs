//! Zoom rescaling of extended fields and the vanishing-order estimator.
//!
//! For 0 < τ < 1 the zoomed field is
//!
//!   U_τ(z) = U(τz) / √(H(τ) / τ^{n+1−2s}),
//!
//! normalized so that its own height at reference radius 1 equals 1 exactly
//! in the continuum: H_{U_τ}(1) = H(τ)/H(τ) = 1. The frequency transports
//! under the zoom, N_{U_τ}(r) = N(τr), provided the zoomed energy is taken
//! with the matching zoomed coefficient a(τ·). [`rescale`] measures both
//! identities at finite resolution.
//!
//! The vanishing order of a trace function u at a node x₀ is estimated from
//! the root-mean-square averages
//!
//!   q(r) = ( (2r)⁻¹ ∫_{x₀−r}^{x₀+r} u² )^{1/2}
//!
//! over a dyadic radius ladder: if u vanishes to degree d, q(r) ≍ r^d, so the
//! log-log slope of q against r recovers d. Averages use per-cell two-point
//! Gauss quadrature on the piecewise-linear interpolant (exact for it), with
//! the end cells clipped at ±r.

use crate::budgets;
use crate::error::{CoreError, Result};
use crate::excoeff::ExtendedCoefficient;
use crate::field::{EvalField, RescaledField};
use crate::frequency::FrequencyEngine;
use crate::grid::GridFunction;
use crate::spectral::FractionalOrder;

/// Reference radii at which frequency transport is sampled.
pub const TRANSPORT_RADII: [f64; 3] = [0.25, 0.5, 1.0];

/// Minimum number of grid cells across the zoomed unit ball.
pub const MIN_CELLS_ACROSS: f64 = 8.0;

/// Measured zoom identities for one value of τ.
#[derive(Debug, Clone)]
pub struct BlowupRecord {
    pub tau: f64,
    /// Normalization factor √(H(τ)/τ^{n+1−2s}).
    pub scale: f64,
    /// Height of the zoomed field at reference radius 1; 1 up to quadrature
    /// and interpolation error.
    pub h_unit: f64,
    /// Energy of the zoomed field at reference radius 1; equals N(τ) by the
    /// transport identity at r = 1 (where H_{U_τ} = 1).
    pub d_unit: f64,
    /// Transport samples (r, N_zoomed(r), N_base(τ·r)).
    pub transport: Vec<(f64, f64, f64)>,
}

impl BlowupRecord {
    /// Worst transport mismatch max_r |N_zoomed(r) − N_base(τr)|.
    pub fn transport_defect(&self) -> f64 {
        self.transport
            .iter()
            .map(|(_, nz, nb)| (nz - nb).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the zoomed field U_τ, measures its unit-radius height and energy,
/// and samples the frequency-transport identity.
///
/// The zoomed energy uses the coefficient zoomed the same way (a evaluated
/// at τ·x), so both sides of the transport identity integrate the same
/// physical quantities.
pub fn rescale(
    field: &dyn EvalField,
    excoeff: &ExtendedCoefficient,
    s: FractionalOrder,
    dim: usize,
    tau: f64,
) -> Result<BlowupRecord> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CoreError::BadRadius {
            r: tau,
            reason: "zoom factor must lie strictly in (0, 1)".into(),
        });
    }
    if let Some(h) = field.resolution() {
        let cells_across = 2.0 * tau / h;
        if cells_across < MIN_CELLS_ACROSS {
            return Err(CoreError::BadRadius {
                r: tau,
                reason: format!(
                    "zoomed unit ball spans only {cells_across:.1} grid cells \
                     (need at least {MIN_CELLS_ACROSS})"
                ),
            });
        }
    }

    let base = FrequencyEngine::new(field, excoeff, s, dim);
    let h_tau = base.surface(tau)?.h;
    if h_tau <= 0.0 {
        return Err(CoreError::TrivialField);
    }
    let kappa_h = dim as f64 + 1.0 - 2.0 * s.value();
    let scale = (h_tau / tau.powf(kappa_h)).sqrt();

    let zoom_coeff = excoeff.rescaled(tau);
    let zoom_field = RescaledField {
        inner: field,
        tau,
        scale,
    };
    let zoom = FrequencyEngine::new(&zoom_field, &zoom_coeff, s, dim);

    let h_unit = zoom.surface(1.0)?.h;
    let d_unit = zoom.ball(1.0)?.d;
    let mut transport = Vec::with_capacity(TRANSPORT_RADII.len());
    for &r in &TRANSPORT_RADII {
        let n_zoom = zoom.frequency(r)?;
        let n_base = base.frequency(tau * r)?;
        transport.push((r, n_zoom, n_base));
    }

    Ok(BlowupRecord {
        tau,
        scale,
        h_unit,
        d_unit,
        transport,
    })
}

/// Outcome class of a vanishing-order estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderVerdict {
    /// Slopes estimated from the dyadic ladder.
    Ok,
    /// u(x₀) ≠ 0, so the order is 0; no ladder was evaluated.
    OrderZero,
    /// u vanishes identically (to rounding) near x₀; no finite order is
    /// observable.
    LocallyTrivial,
}

impl OrderVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderVerdict::Ok => "ok",
            OrderVerdict::OrderZero => "order_zero",
            OrderVerdict::LocallyTrivial => "locally_trivial",
        }
    }
}

/// Vanishing-order estimate at a base node.
#[derive(Debug, Clone)]
pub struct OrderEstimate {
    /// Coordinate of the base node.
    pub x0: f64,
    /// Dyadic radii, descending.
    pub radii: Vec<f64>,
    /// Root-mean-square averages q(r), aligned with `radii`.
    pub q_values: Vec<f64>,
    /// Estimated vanishing order: mean log-log slope over the two
    /// smallest-radius reliable dyadic pairs (the order is a limit at r → 0,
    /// so the innermost pairs carry the signal).
    pub d: f64,
    /// Log-log slope of each consecutive radius pair, aligned with
    /// `radii.windows(2)`.
    pub pairwise_slopes: Vec<f64>,
    /// Least-squares slope over all reliable radii (trend diagnostic).
    pub full_fit: f64,
    pub verdict: OrderVerdict,
}

/// The dyadic ladder {r₀, r₀/2, r₀/4, r₀/8}.
pub fn dyadic_radii(r0: f64) -> Vec<f64> {
    vec![r0, r0 / 2.0, r0 / 4.0, r0 / 8.0]
}

/// ∫_a^b (piecewise-linear interpolant of vals on xs)² dx by per-cell
/// two-point Gauss quadrature (exact: the integrand is piecewise quadratic).
fn pl_square_integral(xs: &[f64], vals: &[f64], a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let gauss = 1.0 / 3f64.sqrt();
    let mut total = 0.0;
    for k in 0..xs.len() - 1 {
        let lo = xs[k].max(a);
        let hi = xs[k + 1].min(b);
        if hi <= lo {
            continue;
        }
        let h = xs[k + 1] - xs[k];
        let slope = (vals[k + 1] - vals[k]) / h;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for t in [mid - half * gauss, mid + half * gauss] {
            let v = vals[k] + slope * (t - xs[k]);
            total += half * v * v;
        }
    }
    total
}

/// Estimates the vanishing order of a one-dimensional trace function at the
/// node with flat index `x0` from the log-log decay of q(r) over `radii`
/// (descending).
pub fn vanishing_order(u: &GridFunction, x0: usize, radii: &[f64]) -> Result<OrderEstimate> {
    let grid = &u.grid;
    if grid.dim != 1 {
        return Err(CoreError::InvalidGrid(format!(
            "vanishing order is defined on one-dimensional traces, got dim {}",
            grid.dim
        )));
    }
    if x0 >= grid.len() {
        return Err(CoreError::InvalidGrid(format!(
            "base node {x0} out of range (grid has {} nodes)",
            grid.len()
        )));
    }
    if radii.is_empty() || !radii.windows(2).all(|w| w[1] < w[0]) || radii[radii.len() - 1] <= 0.0
    {
        return Err(CoreError::BadRadius {
            r: *radii.first().unwrap_or(&f64::NAN),
            reason: "radius ladder must be positive and strictly descending".into(),
        });
    }
    let xs = &grid.coords[0];
    let c0 = xs[x0];
    let r_max = radii[0];
    let (lo, hi) = grid.bounds[0];
    if c0 - r_max < lo || c0 + r_max > hi {
        return Err(CoreError::BadRadius {
            r: r_max,
            reason: format!("interval of radius {r_max} around x₀ = {c0} leaves the domain"),
        });
    }
    let h = grid.spacing[0];
    let r_min = radii[radii.len() - 1];
    if r_min < 2.0 * h {
        return Err(CoreError::BadRadius {
            r: r_min,
            reason: format!("radius {r_min} spans fewer than two grid cells (h = {h})"),
        });
    }

    let sup = u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(OrderEstimate {
            x0: c0,
            radii: radii.to_vec(),
            q_values: vec![0.0; radii.len()],
            d: f64::INFINITY,
            pairwise_slopes: Vec::new(),
            full_fit: f64::INFINITY,
            verdict: OrderVerdict::LocallyTrivial,
        });
    }
    if u.values[x0].abs() > budgets::ORDER_CENTER_TOL * sup {
        return Ok(OrderEstimate {
            x0: c0,
            radii: radii.to_vec(),
            q_values: Vec::new(),
            d: 0.0,
            pairwise_slopes: Vec::new(),
            full_fit: 0.0,
            verdict: OrderVerdict::OrderZero,
        });
    }

    let q_values: Vec<f64> = radii
        .iter()
        .map(|&r| (pl_square_integral(xs, &u.values, c0 - r, c0 + r) / (2.0 * r)).sqrt())
        .collect();

    // A q value at rounding scale carries no slope information.
    let floor = 1e-13 * sup;
    let reliable: Vec<bool> = q_values.iter().map(|&q| q > floor).collect();

    let mut pairwise_slopes = Vec::with_capacity(radii.len() - 1);
    let mut reliable_slopes = Vec::new();
    for i in 0..radii.len() - 1 {
        let slope = (q_values[i] / q_values[i + 1]).ln() / (radii[i] / radii[i + 1]).ln();
        pairwise_slopes.push(slope);
        if reliable[i] && reliable[i + 1] {
            reliable_slopes.push(slope);
        }
    }
    if reliable_slopes.is_empty() {
        return Ok(OrderEstimate {
            x0: c0,
            radii: radii.to_vec(),
            q_values,
            d: f64::INFINITY,
            pairwise_slopes,
            full_fit: f64::INFINITY,
            verdict: OrderVerdict::LocallyTrivial,
        });
    }
    // Innermost (smallest-radius) reliable pairs estimate the limit slope.
    let tail = &reliable_slopes[reliable_slopes.len().saturating_sub(2)..];
    let d = tail.iter().sum::<f64>() / tail.len() as f64;

    // Least-squares fit of ln q against ln r over reliable radii.
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&q_values)
        .zip(&reliable)
        .filter(|(_, &ok)| ok)
        .map(|((&r, &q), _)| (r.ln(), q.ln()))
        .collect();
    let full_fit = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        d
    };

    Ok(OrderEstimate {
        x0: c0,
        radii: radii.to_vec(),
        q_values,
        d,
        pairwise_slopes,
        full_fit,
        verdict: OrderVerdict::Ok,
    })
}
