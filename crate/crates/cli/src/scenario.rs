//! Scenario pipelines.
//!
//! Each scenario kind builds a field over the (x, y) strip, runs the checks
//! that are mathematically meaningful for that construction, and collects
//! artifacts (CSV tables and JSON reports).  Pipelines never abort the
//! process: any error is captured in the report's `error` field so a batch
//! run can keep going.
//!
//! Gate vs. advisory policy per kind:
//! * `analytic:*` fields satisfy the weighted equation exactly, so every
//!   identity is gated at exactness-level budgets.
//! * `eigenmode` fields carry a nonzero weighted Neumann flux on the whole
//!   trace plane, which enters the radial derivative identities as an O(1)
//!   interface term — those residuals are reported, not gated.
//! * `s_harmonic` fields have (numerically) zero flux inside the replacement
//!   ball, so the derivative identities are gated at a budget frozen from
//!   reference-resolution runs.
//! * `direct_weighted_pde` solves the weighted equation on the full strip;
//!   identities hold across the plane and are gated likewise.

use anyhow::{bail, Context as _, Result};
use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

use specfrac::blowup::{dyadic_radii, rescale, vanishing_order, OrderVerdict};
use specfrac::budgets;
use specfrac::coeff::Coefficient;
use specfrac::excoeff::ExtendedCoefficient;
use specfrac::extension::{
    extend_pde, extend_semigroup, neumann_trace, trace_constant, weighted_l2_diff, ExtensionField,
};
use specfrac::field::{AnalyticField, EvalField, GridField};
use specfrac::frequency::{
    doubling_report, gamma_limit, height_bound_report, monotonicity_report, FrequencyEngine,
    FrequencyProfile,
};
use specfrac::grid::{GridFunction, SpatialGrid};
use specfrac::operator::{DiscreteOperator, SpectralDecomposition};
use specfrac::spectral::{fractional_apply, heat_semigroup, solve_s_harmonic, FractionalOrder};
use specfrac::strip::{reflection_residual, solve_full_strip};
use specfrac::ygrid::YGrid;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::io;
use crate::report::VerificationReport;

/// Derivative-identity residual budgets, frozen with headroom above the
/// worst measured reference-resolution runs (replacement solutions ≈ 5e-3
/// across the shipped orders, seeds, and coefficient perturbations; the
/// full-strip solve ≈ 1.4e-4).  The analytic field is exact up to finite
/// differencing of the profile; solved fields add bilinear-table
/// interpolation error.
const RHO_BUDGET_ANALYTIC: f64 = 1e-3;
const RHO_BUDGET_SHARMONIC: f64 = 2e-2;
const RHO_BUDGET_DIRECT: f64 = 1e-2;
/// Advisory level for eigenmode residuals (dominated by the interface term).
const RHO_ADVISORY_EIGENMODE: f64 = 100.0;

/// Advisory budget for the trace identity and route agreement of
/// replacement solutions, whose traces kink at the mask edge.
const SHARMONIC_TRACE_ADVISORY: f64 = 1.5e-1;

/// One scenario's complete output: the report plus artifact files
/// (relative name, contents).
pub struct ScenarioOutput {
    pub report: VerificationReport,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

/// Runs a validated config to completion; errors are folded into the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> ScenarioOutput {
    let mut report = VerificationReport::new(&cfg.name, cfg.kind.as_str(), cfg.s, cfg.seed);
    let mut artifacts = Vec::new();
    let outcome = run_pipeline(cfg, &mut report, &mut artifacts);
    if let Err(e) = outcome {
        report.error = Some(format!("{e:#}"));
    }
    ScenarioOutput { report, artifacts }
}

fn run_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    match cfg.kind {
        ScenarioKind::Eigenmode => eigenmode_pipeline(cfg, report, artifacts),
        ScenarioKind::SHarmonic => s_harmonic_pipeline(cfg, report, artifacts),
        ScenarioKind::DirectWeightedPde => direct_pipeline(cfg, report, artifacts),
        ScenarioKind::AnalyticLinear => analytic_linear_pipeline(cfg, report, artifacts),
        ScenarioKind::AnalyticConstant => analytic_constant_pipeline(cfg, report, artifacts),
    }
}

// ---------------------------------------------------------------------------
// Shared building blocks
// ---------------------------------------------------------------------------

fn build_coefficient(cfg: &ScenarioConfig) -> Result<Coefficient> {
    if let Some(path) = &cfg.coefficient.csv {
        let file = std::fs::File::open(path)
            .with_context(|| format!("cannot open coefficient table {}", path.display()))?;
        let mut reader = std::io::BufReader::new(file);
        return Ok(Coefficient::from_table(&mut reader)?);
    }
    Ok(Coefficient::from_name(
        &cfg.coefficient.name,
        cfg.coefficient.eps,
    )?)
}

fn is_perturbed(coeff: &Coefficient) -> bool {
    !matches!(coeff, Coefficient::Id)
}

/// Relative L² distance between two grid functions on the same layout.
fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    let num: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.values.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Smooth random exterior data: a fixed low-frequency basis with
/// seed-determined coefficients, so every run with the same seed sees the
/// same bytes.
fn exterior_data(grid: &SpatialGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridFunction::sample(grid.clone(), |x| {
        let t = x[0];
        let mut v = 1.0 + 0.5 * c[0] * t;
        for (k, ck) in c.iter().enumerate().skip(1) {
            let k = k as f64;
            v += ck * (k * std::f64::consts::PI * (t + 1.0) / 2.0).sin() / k;
        }
        v
    })
}

/// Validates a radius schedule against the field's resolution and the strip
/// extent, so the localized integrals neither under-resolve nor leave the
/// data region.
pub fn check_schedule(schedule: &[f64], resolution: Option<f64>, extent: f64) -> Result<()> {
    let r_min = schedule.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = schedule.iter().copied().fold(0.0f64, f64::max);
    if let Some(h) = resolution {
        let min_ok = budgets::MIN_RADIUS_CELLS * h;
        if r_min < min_ok {
            bail!(
                "smallest radius {r_min} spans fewer than {} grid cells (h = {h}); \
                 raise radii.min to at least {min_ok}",
                budgets::MIN_RADIUS_CELLS
            );
        }
    }
    if r_max > budgets::MAX_RADIUS_FRACTION * extent {
        bail!(
            "largest radius {r_max} exceeds {} of the strip extent {extent}; \
             lower radii.max",
            budgets::MAX_RADIUS_FRACTION
        );
    }
    Ok(())
}

struct RhoPolicy {
    budget: f64,
    hard: bool,
    note: &'static str,
}

/// Profile + structural checks shared by every kind: evaluates the schedule,
/// writes profile.csv, gates the surface Cauchy–Schwarz structure, reports
/// quadrature convergence, and applies the derivative-identity policy.
fn profile_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    engine: &FrequencyEngine,
    schedule: &[f64],
    rho: RhoPolicy,
) -> Result<FrequencyProfile> {
    let profile = engine.profile(schedule)?;
    artifacts.push(("profile.csv".into(), io::profile_csv(&profile).into_bytes()));

    let mut cs_excess = 0.0f64;
    for row in &profile.rows {
        let hb = row.h * row.b;
        if hb > 0.0 {
            cs_excess = cs_excess.max((row.s_mixed * row.s_mixed - hb) / hb);
        }
    }
    report.gate(
        "surface_cauchy_schwarz",
        "S(r)² ≤ H(r)·B(r) for surface integrals on a shared rule",
        cs_excess,
        budgets::CAUCHY_SCHWARZ_GATE,
    );

    let quad = profile
        .rows
        .iter()
        .map(|r| r.quad_err_h.max(r.quad_err_d))
        .fold(0.0f64, f64::max);
    report.soft(
        "quadrature_convergence",
        "adaptive surface/ball rules reached their refinement tolerance",
        quad,
        10.0 * budgets::FREQUENCY_QUAD_TOL,
    );

    let worst_rho = profile
        .rows
        .iter()
        .map(|r| r.rho_h.max(r.rho_d))
        .fold(0.0f64, f64::max);
    if rho.hard {
        report.gate_with_note(
            "derivative_identity_residuals",
            "radial first-variation identities for H and D",
            worst_rho,
            rho.budget,
            rho.note,
        );
    } else {
        report.soft_with_note(
            "derivative_identity_residuals",
            "radial first-variation identities for H and D",
            worst_rho,
            rho.budget,
            rho.note,
        );
    }
    Ok(profile)
}

/// Almost-monotonicity of N: returns the measured C_min after gating it.
/// `hard = false` reports without failing: used for data whose weighted
/// Neumann flux is nonzero inside the analysis balls, where the monotonicity
/// hypotheses do not hold and C_min is a diagnostic, not a theorem check.
fn monotonicity_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    profile: &FrequencyProfile,
    perturbed: bool,
    lipschitz: f64,
    gate: f64,
    hard: bool,
) -> Result<f64> {
    let rep = monotonicity_report(profile)?;
    artifacts.push((
        "monotonicity.json".into(),
        io::monotonicity_json(&rep).into_bytes(),
    ));
    if !hard {
        report.soft_with_note(
            "frequency_almost_monotonicity",
            "N(r) is nondecreasing for flux-free fields",
            rep.c_min,
            gate,
            "the datum's weighted Neumann flux is nonzero inside every ball, so \
             the monotonicity hypotheses are not met; reported only",
        );
    } else if perturbed {
        report.gate_with_note(
            "frequency_almost_monotonicity",
            "e^{Cr}·N(r) is nondecreasing with C controlled by the coefficient's Lipschitz size",
            rep.c_min,
            budgets::MONOTONICITY_LIP_FACTOR * lipschitz,
            &format!("coefficient Lipschitz bound {lipschitz:.3e}"),
        );
    } else {
        report.gate(
            "frequency_almost_monotonicity",
            "N(r) is nondecreasing for the unperturbed coefficient",
            rep.c_min,
            gate,
        );
    }
    Ok(rep.c_min)
}

/// Doubling ladder: gates (or reports) the spread of mass ratios across
/// levels and reports the height-ratio spread.
fn doubling_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    engine: &FrequencyEngine,
    base: f64,
    count: usize,
    gate_spread: Option<f64>,
) -> Result<specfrac::frequency::DoublingReport> {
    let rep = doubling_report(engine, base, count)?;
    artifacts.push(("doubling.json".into(), io::doubling_json(&rep).into_bytes()));
    match gate_spread {
        Some(g) => {
            report.gate(
                "doubling_stability",
                "weighted-mass doubling ratios stay in a fixed band across dyadic levels",
                rep.mass_spread,
                g,
            );
        }
        None => {
            report.soft_with_note(
                "doubling_stability",
                "weighted-mass doubling ratios stay in a fixed band across dyadic levels",
                rep.mass_spread,
                budgets::DOUBLING_STABILITY_GATE,
                "reported without a hard gate at this kind",
            );
        }
    }
    report.soft(
        "doubling_height_spread",
        "height doubling ratios across dyadic levels (diagnostic)",
        rep.height_spread,
        2.0 * budgets::DOUBLING_STABILITY_GATE,
    );
    Ok(rep)
}

/// Small-radius frequency limit; returns γ.
fn gamma_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    engine: &FrequencyEngine,
    r0: f64,
) -> Result<f64> {
    let est = gamma_limit(engine, r0)?;
    artifacts.push(("gamma.json".into(), io::gamma_json(&est).into_bytes()));
    report.flag(
        "small_radius_limit",
        "N(r) admits a finite nonnegative limit γ as r → 0",
        est.gamma.is_finite() && est.gamma >= 0.0,
        est.gamma,
        0.0,
    );
    Ok(est.gamma)
}

/// One-sided height growth bound against exponent n+1−2s+2γ with slack δ.
/// `hard = false` reports without failing, for data outside the hypotheses
/// of the growth bound (nonzero plane flux inside the analysis balls).
fn height_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    profile: &FrequencyProfile,
    gamma: f64,
    hard: bool,
) -> Result<()> {
    let delta = budgets::HEIGHT_SLOPE_DELTA;
    let rep = height_bound_report(profile, gamma, delta)?;
    artifacts.push((
        "height_bound.json".into(),
        io::height_json(&rep, gamma, delta).into_bytes(),
    ));
    // The exponent n+1−2s+2γ is an r → 0 statement; at finite radii the
    // almost-monotone frequency sits above its limit, so the admissible
    // upper slope inside the window uses the window's largest N instead.
    let n_max = profile.rows.iter().map(|r| r.n).fold(gamma, f64::max);
    let upper = rep.upper_excess - 2.0 * (n_max - gamma).max(0.0);
    let anchor =
        "log-log slope of H stays below n+1−2s+2·(window max N) plus slack (one-sided growth bound)";
    let note = format!(
        "r→0 exponent {:.4}, window max N {:.4}, two-sided lower deficit {:.3e} (diagnostic)",
        rep.exponent, n_max, rep.lower_deficit
    );
    if hard {
        report.gate_with_note("height_growth_bound", anchor, upper, 0.0, &note);
    } else {
        report.soft_with_note("height_growth_bound", anchor, upper, 0.0, &note);
    }
    Ok(())
}

/// Zoom rescaling checks for each τ: unit height, frequency transport.
fn blowup_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    field: &dyn EvalField,
    excoeff: &ExtendedCoefficient,
    s: FractionalOrder,
    dim: usize,
    taus: &[f64],
) -> Result<()> {
    let mut records = Vec::new();
    for &tau in taus {
        let rec = rescale(field, excoeff, s, dim, tau)
            .with_context(|| format!("zoom with τ = {tau} failed"))?;
        report.gate(
            &format!("zoom_normalization_tau_{tau}"),
            "rescaled field has unit height at radius 1",
            (rec.h_unit - 1.0).abs(),
            budgets::BLOWUP_HEIGHT_GATE,
        );
        report.gate(
            &format!("zoom_frequency_transport_tau_{tau}"),
            "frequency of the zoomed field at r equals the base frequency at τ·r",
            rec.transport_defect(),
            budgets::BLOWUP_TRANSPORT_GATE,
        );
        records.push(rec);
    }
    artifacts.push(("blowup.json".into(), io::blowup_json(&records).into_bytes()));
    Ok(())
}

enum OrderExpectation {
    /// |d − target| must stay within `gate`.
    Target { d: f64, gate: f64 },
    /// d must not exceed γ plus slack.
    GammaBound { gamma: f64, slack: f64 },
    /// Only the regime classification is checked.
    VerdictOnly(OrderVerdict),
}

/// Vanishing-order estimate at the origin node of `u`, with a dyadic ladder
/// truncated to resolvable radii (at least two grid cells each).
fn order_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    u: &GridFunction,
    label: &str,
    r0: f64,
    expect: OrderExpectation,
) -> Result<()> {
    let h = u.grid.spacing[0];
    let ladder = order_ladder(r0, h);
    let x0 = u
        .grid
        .origin_flat()
        .context("vanishing order needs an origin node")?;
    // The verdict-only variants never evaluate the ladder, so a short one is
    // acceptable there; slope estimates need at least three radii.
    if ladder.len() < 3 && matches!(expect, OrderExpectation::Target { .. } | OrderExpectation::GammaBound { .. })
    {
        bail!(
            "order ladder from r0 = {r0} keeps fewer than three resolvable radii at h = {h}; \
             raise radii.order_r0"
        );
    }
    if ladder.is_empty() {
        bail!("order ladder from r0 = {r0} has no resolvable radii at h = {h}");
    }
    let est = vanishing_order(u, x0, &ladder)?;
    artifacts.push((
        format!("order{label}.json"),
        io::order_json(&est).into_bytes(),
    ));
    match expect {
        OrderExpectation::Target { d, gate } => {
            report.flag(
                &format!("order_verdict{label}"),
                "order classifier identifies a finite vanishing order",
                est.verdict == OrderVerdict::Ok,
                est.d,
                d,
            );
            report.gate(
                &format!("vanishing_order{label}"),
                "dyadic log-slope of the local L² mean recovers the vanishing order",
                (est.d - d).abs(),
                gate,
            );
        }
        OrderExpectation::GammaBound { gamma, slack } => {
            report.flag(
                &format!("order_verdict{label}"),
                "order classifier identifies a finite vanishing order",
                est.verdict == OrderVerdict::Ok,
                est.d,
                gamma,
            );
            report.gate_with_note(
                &format!("vanishing_order_gamma_bound{label}"),
                "estimated vanishing order stays within the frequency limit γ plus slack",
                est.d,
                gamma + slack,
                &format!("γ = {gamma:.4}, slack = {slack}"),
            );
        }
        OrderExpectation::VerdictOnly(v) => {
            report.flag(
                &format!("order_verdict{label}"),
                "order classifier identifies the regime",
                est.verdict == v,
                est.d,
                0.0,
            );
        }
    }
    Ok(())
}

/// Extension stage shared by the trace kinds: both routes, their structural
/// checks, the trace identity, and the trace CSV artifact.
struct ExtensionStage {
    ext_sg: ExtensionField,
    ext_fv: ExtensionField,
}

#[allow(clippy::too_many_arguments)]
fn extension_stage(
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
    dec: &SpectralDecomposition,
    op: &DiscreteOperator,
    s: FractionalOrder,
    u: &GridFunction,
    lsu: &GridFunction,
    yg: &YGrid,
    trace_gate: (f64, bool), // (budget, hard)
    route_gate: (f64, bool),
) -> Result<ExtensionStage> {
    let ext_sg = extend_semigroup(dec, s, u, yg)?;
    let ext_fv = extend_pde(op, s, u, yg)?;

    for (name, ext) in [("truncation_semigroup", &ext_sg), ("truncation_fv", &ext_fv)] {
        if let Some(w) = &ext.truncation_warning {
            report.soft_with_note(
                name,
                "truncation height captures the datum's slowest decay",
                1.0,
                0.0,
                w,
            );
        }
    }

    // The synthesis route reconstructs its own trace row from the spectral
    // coefficients; it must reproduce the datum. (The finite-volume route
    // stores the datum directly, so the comparison is trivial there.)
    report.gate(
        "trace_row_consistency",
        "extension restricted to y = 0 reproduces the boundary datum",
        rel_l2(&ext_sg.trace_row(), u),
        budgets::TRACE_ROW_CONSISTENCY,
    );

    let c_s = trace_constant(s.value());
    let target = GridFunction {
        grid: lsu.grid.clone(),
        values: lsu.values.iter().map(|v| c_s * v).collect(),
    };
    let tr_sg = neumann_trace(&ext_sg)?;
    let tr_fv = neumann_trace(&ext_fv)?;
    let (trace_budget, trace_hard) = trace_gate;
    for (name, tr) in [("trace_identity_semigroup", &tr_sg), ("trace_identity_fv", &tr_fv)] {
        let measured = rel_l2(tr, &target);
        let anchor = "weighted normal derivative at the plane equals 2sΓ(−s)/(4^sΓ(s))·L^s u";
        if trace_hard {
            report.gate(name, anchor, measured, trace_budget);
        } else {
            report.soft_with_note(
                name,
                anchor,
                measured,
                trace_budget,
                "trace kinks at the mask edge dominate; advisory at this kind",
            );
        }
    }

    let xs = &u.grid.coords[0];
    artifacts.push((
        "trace.csv".into(),
        io::trace_csv(
            xs,
            &u.values,
            &lsu.values,
            &tr_sg.values,
            &tr_fv.values,
            &target.values,
        )
        .into_bytes(),
    ));

    let route_diff = weighted_l2_diff(&ext_fv, &ext_sg)?;
    let (route_budget, route_hard) = route_gate;
    let anchor = "profile synthesis and finite-volume solve agree in the weighted norm";
    if route_hard {
        report.gate("route_equivalence", anchor, route_diff, route_budget);
    } else {
        report.soft("route_equivalence", anchor, route_diff, route_budget);
    }

    Ok(ExtensionStage { ext_sg, ext_fv })
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

fn eigenmode_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let s = FractionalOrder::new(cfg.s)?;
    let coeff = build_coefficient(cfg)?;
    let perturbed = is_perturbed(&coeff);
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let op = DiscreteOperator::assemble(&grid, &coeff)?;
    let dec = op.eigendecompose()?;

    report.gate(
        "eigen_orthonormality",
        "eigenvector columns are orthonormal in the grid inner product",
        dec.orthonormality_defect(),
        budgets::EIGEN_ORTHONORMALITY,
    );
    report.gate(
        "eigen_residual",
        "every eigenpair satisfies its defining relation",
        dec.eigen_residual(&op)?,
        budgets::EIGEN_RESIDUAL,
    );

    let mode_ix = cfg.scenario.mode - 1;
    if mode_ix >= dec.len() {
        bail!(
            "mode {} requested but the operator has {} eigenpairs",
            cfg.scenario.mode,
            dec.len()
        );
    }
    let u = dec.mode(mode_ix);
    let lam = dec.lambdas[mode_ix];
    let lsu = fractional_apply(&dec, s, &u)?;

    // Spectral calculus exactness on this mode: the power relation, the
    // semigroup composition law, and additivity of fractional exponents.
    // Power-relation defects are sized against the operator's spectral scale
    // λ_max^s·‖e‖: a roundoff-sized component of a high mode inside e_j is
    // amplified by exactly λ_max^s in the forward residual, so this is the
    // scale at which double precision can promise agreement.
    let lam_max = *dec
        .lambdas
        .last()
        .context("operator spectrum is empty")?;
    let op_scale = lam_max.powf(s.value());
    let norm_u: f64 = u.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let spectral_defect = |a: &GridFunction, b: &GridFunction| -> f64 {
        let num: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        num / (op_scale * norm_u).max(1e-300)
    };
    let lam_s = lam.powf(s.value());
    let spectral_target = GridFunction {
        grid: u.grid.clone(),
        values: u.values.iter().map(|v| lam_s * v).collect(),
    };
    report.gate(
        "fractional_eigenrelation",
        "L^s e_j = λ_j^s e_j on eigenvectors, at the spectral scale of L^s",
        spectral_defect(&lsu, &spectral_target),
        budgets::SPECTRAL_EXACTNESS,
    );
    let (t1, t2) = (0.35 / lam, 0.65 / lam);
    let composed = heat_semigroup(&dec, t1, &heat_semigroup(&dec, t2, &u)?)?;
    let direct = heat_semigroup(&dec, t1 + t2, &u)?;
    report.gate(
        "semigroup_composition",
        "e^{−t₁L} e^{−t₂L} = e^{−(t₁+t₂)L}",
        rel_l2(&composed, &direct),
        budgets::SPECTRAL_EXACTNESS,
    );
    let half = FractionalOrder::new(0.5 * s.value())?;
    let twice_half = fractional_apply(&dec, half, &fractional_apply(&dec, half, &u)?)?;
    report.gate(
        "fractional_additivity",
        "L^{s/2} L^{s/2} = L^s, at the spectral scale of L^s",
        spectral_defect(&twice_half, &lsu),
        budgets::SPECTRAL_EXACTNESS,
    );

    let height = cfg
        .grid
        .y_height
        .unwrap_or(cfg.grid.y_height_factor * YGrid::default_height(dec.lambdas[0]));
    let yg = YGrid::new(height, cfg.grid.y_levels, cfg.grid.kappa)?;
    let ext = extension_stage(
        report,
        artifacts,
        &dec,
        &op,
        s,
        &u,
        &lsu,
        &yg,
        (
            cfg.budgets
                .trace_identity
                .unwrap_or(budgets::TRACE_IDENTITY_GATE),
            true,
        ),
        (
            cfg.budgets.route_equivalence.unwrap_or(if perturbed {
                budgets::ROUTE_EQUIVALENCE_GATE_PERTURBED
            } else {
                budgets::ROUTE_EQUIVALENCE_GATE
            }),
            true,
        ),
    )?;

    let field = GridField::reflect_even(&ext.ext_sg);
    let excoeff = ExtendedCoefficient::new(coeff.clone());
    let engine = FrequencyEngine::new(&field, &excoeff, s, cfg.dim);

    let schedule = cfg.radii.profile_schedule();
    check_schedule(&schedule, field.resolution(), 1.0)?;
    let profile = profile_stage(
        report,
        artifacts,
        &engine,
        &schedule,
        RhoPolicy {
            budget: cfg
                .budgets
                .derivative_residual
                .unwrap_or(RHO_ADVISORY_EIGENMODE),
            hard: false,
            note: "the mode's weighted Neumann flux is nonzero across the whole plane, \
                   adding an O(1) interface term to the radial identities; reported only",
        },
    )?;

    // The mode's weighted Neumann flux is nonzero across the whole plane, so
    // the frequency theorems' hypotheses are not met by this datum: the
    // monotonicity, doubling, and growth-bound statistics are diagnostics
    // here, reported but never failed.
    monotonicity_stage(
        report,
        artifacts,
        &profile,
        perturbed,
        coeff.lipschitz(&grid),
        cfg.budgets.monotonicity.unwrap_or(budgets::MONOTONICITY_GATE),
        false,
    )?;
    doubling_stage(
        report,
        artifacts,
        &engine,
        cfg.radii.doubling_base,
        cfg.radii.doubling_count,
        None,
    )?;
    let gamma = gamma_stage(report, artifacts, &engine, cfg.radii.gamma_r0)?;
    height_stage(report, artifacts, &profile, gamma, false)?;
    blowup_stage(
        report,
        artifacts,
        &field,
        &excoeff,
        s,
        cfg.dim,
        &cfg.radii.blowup_taus,
    )?;

    // The mode does not vanish at the origin; the classifier must say so.
    order_stage(
        report,
        artifacts,
        &u,
        "",
        cfg.radii.order_r0.unwrap_or(0.32),
        OrderExpectation::VerdictOnly(OrderVerdict::OrderZero),
    )?;
    Ok(())
}

fn s_harmonic_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let s = FractionalOrder::new(cfg.s)?;
    let coeff = build_coefficient(cfg)?;
    let perturbed = is_perturbed(&coeff);
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let op = DiscreteOperator::assemble(&grid, &coeff)?;
    let dec = op.eigendecompose()?;

    report.gate(
        "eigen_orthonormality",
        "eigenvector columns are orthonormal in the grid inner product",
        dec.orthonormality_defect(),
        budgets::EIGEN_ORTHONORMALITY,
    );
    report.gate(
        "eigen_residual",
        "every eigenpair satisfies its defining relation",
        dec.eigen_residual(&op)?,
        budgets::EIGEN_RESIDUAL,
    );

    let g = exterior_data(&grid, cfg.seed);
    let mask = grid.ball_mask(cfg.scenario.mask_radius)?;
    let sol = solve_s_harmonic(&dec, s, &mask, &g)?;
    report.gate(
        "replacement_residual",
        "L^s u vanishes at every masked node relative to the data scale",
        sol.residual,
        budgets::SHARMONIC_RESIDUAL,
    );
    report.flag(
        "replacement_max_principle",
        "solution stays within the range of its exterior data",
        sol.max_principle_ok,
        if sol.max_principle_ok { 0.0 } else { 1.0 },
        0.0,
    );
    let u = sol.u;
    let lsu = fractional_apply(&dec, s, &u)?;

    // How much of L^s u leaks inside the mask (it should live outside).
    let inside: f64 = lsu
        .values
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt();
    let total: f64 = lsu.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let leak = inside / total.max(1e-300);
    let reference_resolution = cfg.grid.nodes >= 199 && cfg.grid.y_levels >= 200;
    if reference_resolution {
        report.gate(
            "trace_support",
            "L^s u is supported outside the replacement ball",
            leak,
            budgets::SHARMONIC_TRACE_LEAK,
        );
    } else {
        report.soft(
            "trace_support",
            "L^s u is supported outside the replacement ball",
            leak,
            budgets::SHARMONIC_TRACE_LEAK,
        );
    }

    let height = cfg
        .grid
        .y_height
        .unwrap_or(cfg.grid.y_height_factor * YGrid::default_height(dec.lambdas[0]));
    let yg = YGrid::new(height, cfg.grid.y_levels, cfg.grid.kappa)?;
    let ext = extension_stage(
        report,
        artifacts,
        &dec,
        &op,
        s,
        &u,
        &lsu,
        &yg,
        (
            cfg.budgets
                .trace_identity
                .unwrap_or(SHARMONIC_TRACE_ADVISORY),
            false,
        ),
        (
            cfg.budgets
                .route_equivalence
                .unwrap_or(SHARMONIC_TRACE_ADVISORY),
            false,
        ),
    )?;

    // Structural balance of the even reflection of the finite-volume field.
    let refl = reflection_residual(&ext.ext_fv, &op)?;
    report.gate(
        "reflection_off_plane",
        "even reflection balances the weighted fluxes away from the plane",
        refl.off_plane_rel,
        budgets::PDE_SOLVE_RESIDUAL,
    );
    report.soft(
        "reflection_plane_vs_trace",
        "plane-row imbalance of the reflection matches its continuum value −2h·trace",
        refl.plane_vs_trace_rel,
        SHARMONIC_TRACE_ADVISORY,
    );

    let field = GridField::reflect_even(&ext.ext_sg);
    let excoeff = ExtendedCoefficient::new(coeff.clone());
    let engine = FrequencyEngine::new(&field, &excoeff, s, cfg.dim);

    let schedule = cfg.radii.profile_schedule();
    check_schedule(&schedule, field.resolution(), 1.0)?;
    let r_max = schedule.iter().copied().fold(0.0f64, f64::max);
    if r_max > cfg.scenario.mask_radius {
        bail!(
            "largest profile radius {r_max} leaves the replacement ball \
             (mask_radius = {}); the localized identities assume zero flux \
             inside the ball",
            cfg.scenario.mask_radius
        );
    }
    let profile = profile_stage(
        report,
        artifacts,
        &engine,
        &schedule,
        RhoPolicy {
            budget: cfg
                .budgets
                .derivative_residual
                .unwrap_or(RHO_BUDGET_SHARMONIC),
            hard: true,
            note: "flux-free inside the replacement ball; budget frozen from \
                   reference-resolution runs",
        },
    )?;

    monotonicity_stage(
        report,
        artifacts,
        &profile,
        perturbed,
        coeff.lipschitz(&grid),
        cfg.budgets.monotonicity.unwrap_or(budgets::MONOTONICITY_GATE),
        true,
    )?;
    doubling_stage(
        report,
        artifacts,
        &engine,
        cfg.radii.doubling_base,
        cfg.radii.doubling_count,
        Some(
            cfg.budgets
                .doubling_spread
                .unwrap_or(budgets::DOUBLING_STABILITY_GATE),
        ),
    )?;
    let gamma = gamma_stage(report, artifacts, &engine, cfg.radii.gamma_r0)?;
    height_stage(report, artifacts, &profile, gamma, true)?;
    blowup_stage(
        report,
        artifacts,
        &field,
        &excoeff,
        s,
        cfg.dim,
        &cfg.radii.blowup_taus,
    )?;

    // u(0) = 0 by normalization; the measured order must respect γ.
    order_stage(
        report,
        artifacts,
        &u,
        "",
        cfg.radii
            .order_r0
            .unwrap_or(cfg.scenario.mask_radius / 4.0),
        OrderExpectation::GammaBound {
            gamma,
            slack: budgets::ORDER_GAMMA_SLACK,
        },
    )?;
    Ok(())
}

fn direct_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let s = FractionalOrder::new(cfg.s)?;
    let coeff = build_coefficient(cfg)?;
    let perturbed = is_perturbed(&coeff);
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let op = DiscreteOperator::assemble(&grid, &coeff)?;

    // No spectral content fixes a decay length here; the strip height is an
    // explicit geometric choice (default: unit half-height).
    let height = cfg.grid.y_height.unwrap_or(1.0);
    let yg = YGrid::new(height, cfg.grid.y_levels, cfg.grid.kappa)?;

    // Smooth Dirichlet data with x-, y-, and mixed content; no symmetry.
    let boundary = |x: f64, y: f64| x + 0.2 * x * y + 0.1 * y * y - 0.05 * x * x;
    let sol = solve_full_strip(&op, s, &yg, boundary)?;
    report.gate(
        "strip_solve_residual",
        "full-strip finite-volume solve reaches its linear tolerance",
        sol.residual,
        budgets::PDE_SOLVE_RESIDUAL,
    );

    let field = sol.field;
    let excoeff = ExtendedCoefficient::new(coeff.clone());
    let engine = FrequencyEngine::new(&field, &excoeff, s, cfg.dim);

    let schedule = cfg.radii.profile_schedule();
    check_schedule(&schedule, field.resolution(), height.min(1.0))?;
    let profile = profile_stage(
        report,
        artifacts,
        &engine,
        &schedule,
        RhoPolicy {
            budget: cfg
                .budgets
                .derivative_residual
                .unwrap_or(RHO_BUDGET_DIRECT),
            hard: true,
            note: "weighted-harmonic across the plane by construction; budget \
                   frozen from reference-resolution runs",
        },
    )?;

    monotonicity_stage(
        report,
        artifacts,
        &profile,
        perturbed,
        coeff.lipschitz(&grid),
        cfg.budgets.monotonicity.unwrap_or(budgets::MONOTONICITY_GATE),
        true,
    )?;
    doubling_stage(
        report,
        artifacts,
        &engine,
        cfg.radii.doubling_base,
        cfg.radii.doubling_count,
        None,
    )?;
    let gamma = gamma_stage(report, artifacts, &engine, cfg.radii.gamma_r0)?;
    height_stage(report, artifacts, &profile, gamma, true)?;
    blowup_stage(
        report,
        artifacts,
        &field,
        &excoeff,
        s,
        cfg.dim,
        &cfg.radii.blowup_taus,
    )?;
    Ok(())
}

fn analytic_linear_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let s = FractionalOrder::new(cfg.s)?;
    let field = AnalyticField::LinearX;
    let excoeff = ExtendedCoefficient::new(Coefficient::Id);
    let engine = FrequencyEngine::new(&field, &excoeff, s, cfg.dim);
    let at_half = (cfg.s - 0.5).abs() < 1e-12;

    let schedule = cfg.radii.profile_schedule();
    let profile = profile_stage(
        report,
        artifacts,
        &engine,
        &schedule,
        RhoPolicy {
            budget: cfg
                .budgets
                .derivative_residual
                .unwrap_or(RHO_BUDGET_ANALYTIC),
            hard: true,
            note: "closed-form field; residual is pure finite differencing of the profile",
        },
    )?;

    // Degree-1 homogeneous field: N ≡ 1 at every radius.
    let n_defect = profile
        .rows
        .iter()
        .map(|r| (r.n - 1.0).abs())
        .fold(0.0f64, f64::max);
    report.gate(
        "exact_frequency_constant",
        "N(r) ≡ 1 for the degree-1 homogeneous field",
        n_defect,
        budgets::EXACT_FREQUENCY_GATE,
    );

    if at_half {
        // Unweighted case: H(r) = π r³ and D(r) = π r² exactly.
        let h_defect = profile
            .rows
            .iter()
            .map(|row| {
                let exact = std::f64::consts::PI * row.r.powi(3);
                (row.h - exact).abs() / exact
            })
            .fold(0.0f64, f64::max);
        report.gate(
            "exact_height_value",
            "H(r) = πr³ at s = 1/2",
            h_defect,
            budgets::EXACT_VALUE_GATE,
        );
        let d_defect = profile
            .rows
            .iter()
            .map(|row| {
                let exact = std::f64::consts::PI * row.r * row.r;
                (row.d - exact).abs() / exact
            })
            .fold(0.0f64, f64::max);
        report.gate(
            "exact_energy_value",
            "D(r) = πr² at s = 1/2",
            d_defect,
            budgets::EXACT_VALUE_GATE,
        );
    }

    monotonicity_stage(
        report,
        artifacts,
        &profile,
        false,
        0.0,
        cfg.budgets.monotonicity.unwrap_or(budgets::MONOTONICITY_GATE),
        true,
    )?;
    let doubling = doubling_stage(
        report,
        artifacts,
        &engine,
        cfg.radii.doubling_base,
        cfg.radii.doubling_count,
        Some(
            cfg.budgets
                .doubling_spread
                .unwrap_or(budgets::DOUBLING_STABILITY_GATE),
        ),
    )?;
    if at_half {
        // H ∝ r³, so every height doubling ratio is exactly 8 at s = 1/2.
        let defect = doubling
            .height_ratios
            .iter()
            .map(|q| (q - 8.0).abs())
            .fold(0.0f64, f64::max);
        report.gate(
            "exact_doubling_ratio",
            "height doubling ratio is 8 at s = 1/2",
            defect,
            budgets::EXACT_DOUBLING_GATE,
        );
    }

    let gamma = gamma_stage(report, artifacts, &engine, cfg.radii.gamma_r0)?;
    report.gate(
        "exact_small_radius_limit",
        "γ equals the homogeneity degree 1",
        (gamma - 1.0).abs(),
        budgets::EXACT_FREQUENCY_GATE,
    );
    height_stage(report, artifacts, &profile, gamma, true)?;

    let mut records = Vec::new();
    for &tau in &cfg.radii.blowup_taus {
        let rec = rescale(&field, &excoeff, s, cfg.dim, tau)?;
        report.gate(
            &format!("zoom_normalization_tau_{tau}"),
            "rescaled field has unit height at radius 1",
            (rec.h_unit - 1.0).abs(),
            budgets::BLOWUP_HEIGHT_GATE,
        );
        report.gate(
            &format!("zoom_frequency_transport_tau_{tau}"),
            "frequency of the zoomed field at r equals the base frequency at τ·r",
            rec.transport_defect(),
            budgets::BLOWUP_TRANSPORT_GATE,
        );
        if at_half {
            // H(τ) = πτ³ gives the closed-form normalization √(H/τ²) = τ√π.
            let exact = tau * std::f64::consts::PI.sqrt();
            report.gate(
                &format!("zoom_scale_value_tau_{tau}"),
                "zoom normalization equals τ√π at s = 1/2",
                (rec.scale - exact).abs() / exact,
                budgets::EXACT_VALUE_GATE,
            );
        }
        records.push(rec);
    }
    artifacts.push(("blowup.json".into(), io::blowup_json(&records).into_bytes()));

    // Vanishing order on the trace u(x) = x, plus the quadratic companion —
    // two known orders bracketing the estimator.
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let r0 = cfg.radii.order_r0.unwrap_or(0.32);
    let order_gate = cfg.budgets.order_gate.unwrap_or(budgets::ORDER_GATE);
    let linear = GridFunction::sample(grid.clone(), |x| x[0]);
    order_stage(
        report,
        artifacts,
        &linear,
        "_linear",
        r0,
        OrderExpectation::Target {
            d: 1.0,
            gate: order_gate,
        },
    )?;
    let quadratic = GridFunction::sample(grid, |x| x[0] * x[0]);
    order_stage(
        report,
        artifacts,
        &quadratic,
        "_quadratic",
        r0,
        OrderExpectation::Target {
            d: 2.0,
            gate: order_gate,
        },
    )?;
    Ok(())
}

fn analytic_constant_pipeline(
    cfg: &ScenarioConfig,
    report: &mut VerificationReport,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let s = FractionalOrder::new(cfg.s)?;
    let c = cfg.scenario.constant;
    if c == 0.0 {
        bail!("scenario.constant = 0 makes every statistic vanish identically");
    }
    let field = AnalyticField::Constant(c);
    let excoeff = ExtendedCoefficient::new(Coefficient::Id);
    let engine = FrequencyEngine::new(&field, &excoeff, s, cfg.dim);

    let schedule = cfg.radii.profile_schedule();
    let profile = profile_stage(
        report,
        artifacts,
        &engine,
        &schedule,
        RhoPolicy {
            budget: cfg
                .budgets
                .derivative_residual
                .unwrap_or(RHO_BUDGET_ANALYTIC),
            hard: true,
            note: "degenerate field: every derivative-identity term vanishes",
        },
    )?;

    let n_max = profile
        .rows
        .iter()
        .map(|r| r.n.abs())
        .fold(0.0f64, f64::max);
    report.gate(
        "exact_zero_frequency",
        "a constant field has zero frequency at every radius",
        n_max,
        budgets::EXACT_FREQUENCY_GATE,
    );
    let d_max = profile
        .rows
        .iter()
        .map(|r| r.d.abs())
        .fold(0.0f64, f64::max);
    report.gate(
        "exact_zero_energy",
        "a constant field has zero localized energy",
        d_max,
        budgets::EXACT_FREQUENCY_GATE,
    );

    // Weighted mass of a ball scales as r^{n+2−2s}: dyadic ratio 2^{n+2−2s}.
    let doubling = doubling_stage(
        report,
        artifacts,
        &engine,
        cfg.radii.doubling_base,
        cfg.radii.doubling_count,
        Some(
            cfg.budgets
                .doubling_spread
                .unwrap_or(budgets::DOUBLING_STABILITY_GATE),
        ),
    )?;
    let exact_ratio = 2f64.powf(cfg.dim as f64 + 2.0 - 2.0 * cfg.s);
    let ratio_defect = doubling
        .mass_ratios
        .iter()
        .map(|q| (q / exact_ratio - 1.0).abs())
        .fold(0.0f64, f64::max);
    report.gate(
        "exact_mass_ratio",
        "weighted-mass doubling ratio equals 2^{n+2−2s} for a constant field",
        ratio_defect,
        budgets::EXACT_VALUE_GATE,
    );

    // N ≡ 0 admits the limit γ = 0 (no monotonicity statistics exist for a
    // zero-energy field, so that stage is skipped).
    let gamma = gamma_stage(report, artifacts, &engine, cfg.radii.gamma_r0)?;
    report.gate(
        "exact_small_radius_limit",
        "γ = 0 for a constant field",
        gamma.abs(),
        budgets::EXACT_FREQUENCY_GATE,
    );
    height_stage(report, artifacts, &profile, gamma, true)?;

    blowup_stage(
        report,
        artifacts,
        &field,
        &excoeff,
        s,
        cfg.dim,
        &cfg.radii.blowup_taus,
    )?;

    // The sampled trace is the constant itself: order zero at the origin.
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let trace = GridFunction::sample(grid, |_| c);
    order_stage(
        report,
        artifacts,
        &trace,
        "",
        cfg.radii.order_r0.unwrap_or(0.32),
        OrderExpectation::VerdictOnly(OrderVerdict::OrderZero),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Stage setups for the single-stage subcommands
// ---------------------------------------------------------------------------

/// Everything the trace kinds share: the boundary datum with its fractional
/// image and both extension routes.  Pure construction; all gating lives in
/// the pipelines.
pub struct TraceSetup {
    pub grid: SpatialGrid,
    pub u: GridFunction,
    pub lsu: GridFunction,
    pub ext_sg: ExtensionField,
    pub ext_fv: ExtensionField,
}

/// Builds the trace-side objects for `eigenmode` and `s_harmonic` configs.
pub fn trace_setup(cfg: &ScenarioConfig) -> Result<TraceSetup> {
    let s = FractionalOrder::new(cfg.s)?;
    let coeff = build_coefficient(cfg)?;
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    let op = DiscreteOperator::assemble(&grid, &coeff)?;
    let dec = op.eigendecompose()?;
    let u = match cfg.kind {
        ScenarioKind::Eigenmode => {
            let ix = cfg.scenario.mode - 1;
            if ix >= dec.len() {
                bail!(
                    "mode {} requested but the operator has {} eigenpairs",
                    cfg.scenario.mode,
                    dec.len()
                );
            }
            dec.mode(ix)
        }
        ScenarioKind::SHarmonic => {
            let g = exterior_data(&grid, cfg.seed);
            let mask = grid.ball_mask(cfg.scenario.mask_radius)?;
            solve_s_harmonic(&dec, s, &mask, &g)?.u
        }
        other => bail!(
            "the {} kind has no boundary trace or extension stage",
            other.as_str()
        ),
    };
    let lsu = fractional_apply(&dec, s, &u)?;
    let height = cfg
        .grid
        .y_height
        .unwrap_or(cfg.grid.y_height_factor * YGrid::default_height(dec.lambdas[0]));
    let yg = YGrid::new(height, cfg.grid.y_levels, cfg.grid.kappa)?;
    let ext_sg = extend_semigroup(&dec, s, &u, &yg)?;
    let ext_fv = extend_pde(&op, s, &u, &yg)?;
    Ok(TraceSetup {
        grid,
        u,
        lsu,
        ext_sg,
        ext_fv,
    })
}

/// A field ready for the frequency machinery, whatever the kind, together
/// with the coefficient it lives over and the usable strip extent.
pub struct FieldSetup {
    pub field: Box<dyn EvalField>,
    pub excoeff: ExtendedCoefficient,
    /// Geometric extent limiting ball radii (min of x half-width and height).
    pub extent: f64,
}

/// Builds the strip field for any config.
pub fn field_setup(cfg: &ScenarioConfig) -> Result<FieldSetup> {
    let s = FractionalOrder::new(cfg.s)?;
    match cfg.kind {
        ScenarioKind::AnalyticLinear => Ok(FieldSetup {
            field: Box::new(AnalyticField::LinearX),
            excoeff: ExtendedCoefficient::new(Coefficient::Id),
            extent: 1.0,
        }),
        ScenarioKind::AnalyticConstant => Ok(FieldSetup {
            field: Box::new(AnalyticField::Constant(cfg.scenario.constant)),
            excoeff: ExtendedCoefficient::new(Coefficient::Id),
            extent: 1.0,
        }),
        ScenarioKind::DirectWeightedPde => {
            let coeff = build_coefficient(cfg)?;
            let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
            let op = DiscreteOperator::assemble(&grid, &coeff)?;
            let height = cfg.grid.y_height.unwrap_or(1.0);
            let yg = YGrid::new(height, cfg.grid.y_levels, cfg.grid.kappa)?;
            let boundary = |x: f64, y: f64| x + 0.2 * x * y + 0.1 * y * y - 0.05 * x * x;
            let sol = solve_full_strip(&op, s, &yg, boundary)?;
            Ok(FieldSetup {
                field: Box::new(sol.field),
                excoeff: ExtendedCoefficient::new(coeff),
                extent: height.min(1.0),
            })
        }
        ScenarioKind::Eigenmode | ScenarioKind::SHarmonic => {
            let coeff = build_coefficient(cfg)?;
            let ts = trace_setup(cfg)?;
            Ok(FieldSetup {
                field: Box::new(GridField::reflect_even(&ts.ext_sg)),
                excoeff: ExtendedCoefficient::new(coeff),
                extent: 1.0,
            })
        }
    }
}

/// The 1-d trace whose vanishing order the `order` subcommand estimates.
pub fn order_trace(cfg: &ScenarioConfig) -> Result<GridFunction> {
    let grid = SpatialGrid::line(-1.0, 1.0, cfg.grid.nodes)?;
    match cfg.kind {
        ScenarioKind::AnalyticLinear => Ok(GridFunction::sample(grid, |x| x[0])),
        ScenarioKind::AnalyticConstant => {
            let c = cfg.scenario.constant;
            Ok(GridFunction::sample(grid, |_| c))
        }
        ScenarioKind::Eigenmode | ScenarioKind::SHarmonic => Ok(trace_setup(cfg)?.u),
        ScenarioKind::DirectWeightedPde => bail!(
            "the direct_weighted_pde kind has no boundary trace; \
             the vanishing order is a trace-side statistic"
        ),
    }
}

/// Default outer radius of the order ladder for a kind.
pub fn default_order_r0(cfg: &ScenarioConfig) -> f64 {
    cfg.radii.order_r0.unwrap_or(match cfg.kind {
        ScenarioKind::SHarmonic => cfg.scenario.mask_radius / 4.0,
        _ => 0.32,
    })
}

/// The resolvable dyadic ladder used by the order stages.
pub fn order_ladder(r0: f64, h: f64) -> Vec<f64> {
    dyadic_radii(r0).into_iter().filter(|r| *r >= 2.0 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn exterior_data_is_seed_deterministic() {
        let grid = SpatialGrid::line(-1.0, 1.0, 99).unwrap();
        let a = exterior_data(&grid, 42);
        let b = exterior_data(&grid, 42);
        assert_eq!(a.values, b.values);
        let c = exterior_data(&grid, 43);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn schedule_guards_reject_underresolved_radii() {
        assert!(check_schedule(&[0.01, 0.5], Some(0.01), 1.0).is_err());
        assert!(check_schedule(&[0.1, 0.9], Some(0.01), 1.0).is_err());
        assert!(check_schedule(&[0.1, 0.5], Some(0.01), 1.0).is_ok());
        assert!(check_schedule(&[0.001, 0.5], None, 1.0).is_ok());
    }

    #[test]
    fn analytic_constant_scenario_passes_end_to_end() {
        let mut cfg = ScenarioConfig::template(crate::config::ScenarioKind::AnalyticConstant, 0.5);
        cfg.radii.count = 4;
        let out = run_scenario(&cfg);
        assert!(
            out.report.passed(),
            "report: {}",
            out.report.to_json()
        );
        assert!(out
            .artifacts
            .iter()
            .any(|(name, _)| name == "profile.csv"));
    }

    #[test]
    fn pipeline_errors_are_captured_not_propagated() {
        let mut cfg = ScenarioConfig::template(crate::config::ScenarioKind::Eigenmode, 0.5);
        cfg.scenario.mode = 100_000; // more modes than the operator has
        let out = run_scenario(&cfg);
        assert!(!out.report.passed());
        assert!(out.report.error.as_deref().unwrap_or("").contains("mode"));
    }
}
