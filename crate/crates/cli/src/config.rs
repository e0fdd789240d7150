//! Scenario configuration: TOML schema, validation, and command-line overrides.
//!
//! A scenario is a named, fully reproducible verification run: it fixes the
//! fractional order, the coefficient, the grids, the radius schedules, and a
//! seed, and selects one of five pipeline kinds.  Every tunable lives here so
//! that a config file plus the binary is enough to reproduce any artifact
//! byte for byte.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use serde::{Deserialize, Serialize};

/// Which pipeline a scenario runs.
///
/// The two `analytic:*` kinds evaluate closed-form fields directly (no PDE
/// solve) and are used to pin the frequency machinery against exact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Extend a Dirichlet eigenvector of the discrete operator.
    #[serde(rename = "eigenmode")]
    Eigenmode,
    /// Solve the nonlocal replacement problem for seeded exterior data,
    /// then extend the solution.
    #[serde(rename = "s_harmonic")]
    SHarmonic,
    /// Solve the weighted equation directly on the full two-sided strip
    /// with smooth Dirichlet data; no trace objects are involved.
    #[serde(rename = "direct_weighted_pde")]
    DirectWeightedPde,
    /// The closed-form field U(x, y) = x (identity coefficient only).
    #[serde(rename = "analytic:U=x")]
    AnalyticLinear,
    /// A constant field (identity coefficient only).
    #[serde(rename = "analytic:U=const")]
    AnalyticConstant,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Eigenmode => "eigenmode",
            ScenarioKind::SHarmonic => "s_harmonic",
            ScenarioKind::DirectWeightedPde => "direct_weighted_pde",
            ScenarioKind::AnalyticLinear => "analytic:U=x",
            ScenarioKind::AnalyticConstant => "analytic:U=const",
        }
    }

    /// Kinds whose field comes from a closed form rather than a solve.
    pub fn is_analytic(self) -> bool {
        matches!(
            self,
            ScenarioKind::AnalyticLinear | ScenarioKind::AnalyticConstant
        )
    }
}

/// Base-grid and extension-grid resolution parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Interior node count of the 1-d base grid on (-1, 1).  Odd counts put
    /// a node exactly at the origin, which the localized statistics assume.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Number of extension levels in the y direction.
    #[serde(default = "default_y_levels")]
    pub y_levels: usize,
    /// Grading exponent of the extension grid (nodes cluster at y = 0).
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Explicit truncation height; overrides `y_height_factor` when set.
    #[serde(default)]
    pub y_height: Option<f64>,
    /// Truncation height as a multiple of the first-eigenvalue decay length.
    #[serde(default = "default_y_height_factor")]
    pub y_height_factor: f64,
}

fn default_nodes() -> usize {
    199
}
fn default_y_levels() -> usize {
    200
}
fn default_kappa() -> f64 {
    2.0
}
fn default_y_height_factor() -> f64 {
    1.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nodes: default_nodes(),
            y_levels: default_y_levels(),
            kappa: default_kappa(),
            y_height: None,
            y_height_factor: default_y_height_factor(),
        }
    }
}

/// Diffusion coefficient selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    /// Named coefficient family: "id", "one_plus_quarter_x_sq", or
    /// "id_plus_eps_sin" (the last takes `eps`).
    #[serde(default = "default_coeff_name")]
    pub name: String,
    /// Perturbation size for the families that take one.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Load a tabulated coefficient from CSV instead of a named family.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

fn default_coeff_name() -> String {
    "id".to_string()
}

impl Default for CoeffConfig {
    fn default() -> Self {
        CoeffConfig {
            name: default_coeff_name(),
            eps: None,
            csv: None,
        }
    }
}

/// Radius schedules for the frequency profile and the derived reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiConfig {
    /// Smallest profile radius.
    #[serde(default = "default_r_min")]
    pub min: f64,
    /// Largest profile radius.
    #[serde(default = "default_r_max")]
    pub max: f64,
    /// Number of log-spaced profile radii.
    #[serde(default = "default_r_count")]
    pub count: usize,
    /// Base radius of the doubling ladder (levels are base, 2*base, 4*base, ...).
    #[serde(default = "default_doubling_base")]
    pub doubling_base: f64,
    /// Number of ladder levels.
    #[serde(default = "default_doubling_count")]
    pub doubling_count: usize,
    /// Outer radius for the small-radius frequency limit (samples r0, r0/2, r0/4).
    #[serde(default = "default_gamma_r0")]
    pub gamma_r0: f64,
    /// Outer radius of the dyadic vanishing-order ladder.  Defaults to a
    /// kind-dependent value when unset.
    #[serde(default)]
    pub order_r0: Option<f64>,
    /// Zoom factors for the rescaling checks.
    #[serde(default = "default_blowup_taus")]
    pub blowup_taus: Vec<f64>,
}

fn default_r_min() -> f64 {
    0.1
}
fn default_r_max() -> f64 {
    0.8
}
fn default_r_count() -> usize {
    12
}
fn default_doubling_base() -> f64 {
    0.08
}
fn default_doubling_count() -> usize {
    3
}
fn default_gamma_r0() -> f64 {
    0.32
}
fn default_blowup_taus() -> Vec<f64> {
    vec![0.25, 0.4]
}

impl Default for RadiiConfig {
    fn default() -> Self {
        RadiiConfig {
            min: default_r_min(),
            max: default_r_max(),
            count: default_r_count(),
            doubling_base: default_doubling_base(),
            doubling_count: default_doubling_count(),
            gamma_r0: default_gamma_r0(),
            order_r0: None,
            blowup_taus: default_blowup_taus(),
        }
    }
}

impl RadiiConfig {
    /// The log-spaced profile schedule.
    pub fn profile_schedule(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let ratio = self.max / self.min;
        (0..self.count)
            .map(|k| self.min * ratio.powf(k as f64 / (self.count - 1) as f64))
            .collect()
    }
}

/// Kind-specific knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindConfig {
    /// 1-based eigenmode index (eigenmode kind).
    #[serde(default = "default_mode")]
    pub mode: usize,
    /// Radius of the centered ball where the replacement solution is
    /// constrained (s_harmonic kind).
    #[serde(default = "default_mask_radius")]
    pub mask_radius: f64,
    /// Field value for analytic:U=const.
    #[serde(default = "default_constant")]
    pub constant: f64,
}

fn default_mode() -> usize {
    1
}
fn default_mask_radius() -> f64 {
    0.45
}
fn default_constant() -> f64 {
    1.0
}

impl Default for KindConfig {
    fn default() -> Self {
        KindConfig {
            mode: default_mode(),
            mask_radius: default_mask_radius(),
            constant: default_constant(),
        }
    }
}

/// Optional overrides for the tolerance budgets the report gates against.
/// Unset fields fall back to the library defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetOverrides {
    #[serde(default)]
    pub trace_identity: Option<f64>,
    #[serde(default)]
    pub route_equivalence: Option<f64>,
    #[serde(default)]
    pub monotonicity: Option<f64>,
    #[serde(default)]
    pub derivative_residual: Option<f64>,
    #[serde(default)]
    pub doubling_spread: Option<f64>,
    #[serde(default)]
    pub order_gate: Option<f64>,
}

/// Where artifacts land, relative to the output root.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Subdirectory name; defaults to the scenario name.
    #[serde(default)]
    pub dir: Option<String>,
}

/// A complete scenario description, deserialized from TOML.
///
/// Unknown keys anywhere in the file are hard errors so that a typo in a
/// budget override can never silently revert to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scenario name; also the default artifact subdirectory.
    pub name: String,
    pub kind: ScenarioKind,
    /// Fractional order; must lie strictly inside (0, 1).
    pub s: f64,
    /// Base-space dimension (the current pipelines are 1-d).
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// RNG seed; recorded in every report so runs are reproducible.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub coefficient: CoeffConfig,
    #[serde(default)]
    pub radii: RadiiConfig,
    #[serde(default)]
    pub scenario: KindConfig,
    #[serde(default)]
    pub budgets: BudgetOverrides,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_dim() -> usize {
    1
}

impl ScenarioConfig {
    /// A minimal in-memory template used when no config file is given.
    pub fn template(kind: ScenarioKind, s: f64) -> Self {
        let mut radii = RadiiConfig::default();
        if matches!(kind, ScenarioKind::SHarmonic) {
            // Localized identities hold only inside the replacement ball, so
            // the profile window must stay within the default mask radius.
            radii.max = 0.36;
        }
        ScenarioConfig {
            name: format!("adhoc-{}", kind.as_str().replace([':', '='], "-")),
            kind,
            s,
            dim: default_dim(),
            seed: 0,
            grid: GridConfig::default(),
            coefficient: CoeffConfig::default(),
            radii,
            scenario: KindConfig::default(),
            budgets: BudgetOverrides::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).context("invalid scenario config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml_str(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    /// Structural validation beyond what serde can express.
    ///
    /// The fractional order is checked here *before* any pipeline starts, so
    /// an out-of-range value (s = 1 included) is rejected with a clear
    /// message and no artifact file is ever created.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        {
            bail!(
                "scenario name {:?} must be non-empty and use only [A-Za-z0-9._-] \
                 (it names the artifact directory)",
                self.name
            );
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            bail!(
                "fractional order s = {} is outside the open interval (0, 1); \
                 the boundary values are not supported (s = 1 is the classical \
                 local problem, s = 0 the identity) and no artifacts were written",
                self.s
            );
        }
        if self.dim != 1 {
            bail!(
                "dim = {} is not supported by the scenario pipelines (only dim = 1)",
                self.dim
            );
        }
        if self.grid.nodes < 9 {
            bail!("grid.nodes = {} is too coarse (need at least 9)", self.grid.nodes);
         }
        if self.grid.nodes % 2 == 0 {
            bail!(
                "grid.nodes = {} must be odd so that x = 0 is a grid node",
                self.grid.nodes
            );
        }
        if self.grid.y_levels < 8 {
            bail!(
                "grid.y_levels = {} is too coarse (need at least 8)",
                self.grid.y_levels
            );
        }
        if !(self.grid.kappa >= 1.0 && self.grid.kappa <= 4.0) {
            bail!(
                "grid.kappa = {} must lie in [1, 4] (1 = uniform, larger = more \
                 clustering at the plane)",
                self.grid.kappa
            );
        }
        if let Some(y) = self.grid.y_height {
            if !(y > 0.0) {
                bail!("grid.y_height = {} must be positive", y);
            }
        }
        if !(self.grid.y_height_factor > 0.0) {
            bail!(
                "grid.y_height_factor = {} must be positive",
                self.grid.y_height_factor
            );
        }
        if !(self.radii.min > 0.0 && self.radii.max > self.radii.min) {
            bail!(
                "radii must satisfy 0 < min < max (got min = {}, max = {})",
                self.radii.min,
                self.radii.max
            );
        }
        if self.radii.count < 2 {
            bail!("radii.count = {} must be at least 2", self.radii.count);
        }
        if !(self.radii.doubling_base > 0.0) {
            bail!("radii.doubling_base must be positive");
        }
        if self.radii.doubling_count < 2 {
            bail!("radii.doubling_count must be at least 2");
        }
        if !(self.radii.gamma_r0 > 0.0) {
            bail!("radii.gamma_r0 must be positive");
        }
        if let Some(r0) = self.radii.order_r0 {
            if !(r0 > 0.0 && r0 < 1.0) {
                bail!("radii.order_r0 = {} must lie in (0, 1)", r0);
            }
        }
        for &tau in &self.radii.blowup_taus {
            if !(tau > 0.0 && tau < 1.0) {
                bail!("radii.blowup_taus entries must lie in (0, 1); got {}", tau);
            }
        }
        if self.scenario.mode == 0 {
            bail!("scenario.mode is 1-based; 0 is not a valid mode index");
        }
        if !(self.scenario.mask_radius > 0.0 && self.scenario.mask_radius < 1.0) {
            bail!(
                "scenario.mask_radius = {} must lie in (0, 1)",
                self.scenario.mask_radius
            );
        }
        if self.kind.is_analytic() && !(self.coefficient.name == "id" && self.coefficient.csv.is_none())
        {
            bail!(
                "analytic kinds evaluate closed forms that hold for the identity \
                 coefficient only; set coefficient.name = \"id\""
            );
        }
        if self.coefficient.csv.is_some() && self.coefficient.name != default_coeff_name() {
            bail!("coefficient.csv and coefficient.name are mutually exclusive");
        }
        Ok(())
    }

    /// The artifact subdirectory for this scenario.
    pub fn output_dir_name(&self) -> String {
        self.output.dir.clone().unwrap_or_else(|| self.name.clone())
    }
}

/// Field-by-field overrides collected from command-line flags; applied on
/// top of a loaded config (or a kind template when no config is given).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub kind: Option<ScenarioKind>,
    pub s: Option<f64>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub y_levels: Option<usize>,
    pub kappa: Option<f64>,
    pub y_height: Option<f64>,
    pub y_height_factor: Option<f64>,
    pub coeff_name: Option<String>,
    pub coeff_eps: Option<f64>,
    pub mode: Option<usize>,
    pub mask_radius: Option<f64>,
    pub order_r0: Option<f64>,
}

impl Overrides {
    /// Apply onto `cfg`, then re-validate.
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(v) = &self.name {
            cfg.name = v.clone();
        }
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.s {
            cfg.s = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.nodes {
            cfg.grid.nodes = v;
        }
        if let Some(v) = self.y_levels {
            cfg.grid.y_levels = v;
        }
        if let Some(v) = self.kappa {
            cfg.grid.kappa = v;
        }
        if let Some(v) = self.y_height {
            cfg.grid.y_height = Some(v);
        }
        if let Some(v) = self.y_height_factor {
            cfg.grid.y_height_factor = v;
        }
        if let Some(v) = &self.coeff_name {
            cfg.coefficient.name = v.clone();
        }
        if let Some(v) = self.coeff_eps {
            cfg.coefficient.eps = Some(v);
        }
        if let Some(v) = self.mode {
            cfg.scenario.mode = v;
        }
        if let Some(v) = self.mask_radius {
            cfg.scenario.mask_radius = v;
        }
        if let Some(v) = self.order_r0 {
            cfg.radii.order_r0 = Some(v);
        }
        cfg.validate()
    }
}

/// Parse a kind string as used on the command line (same spellings as TOML).
pub fn parse_kind(text: &str) -> Result<ScenarioKind> {
    match text {
        "eigenmode" => Ok(ScenarioKind::Eigenmode),
        "s_harmonic" => Ok(ScenarioKind::SHarmonic),
        "direct_weighted_pde" => Ok(ScenarioKind::DirectWeightedPde),
        "analytic:U=x" => Ok(ScenarioKind::AnalyticLinear),
        "analytic:U=const" => Ok(ScenarioKind::AnalyticConstant),
        other => bail!(
            "unknown scenario kind {:?}; expected one of eigenmode, s_harmonic, \
             direct_weighted_pde, analytic:U=x, analytic:U=const",
            other
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_round_trips() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            name = "demo"
            kind = "eigenmode"
            s = 0.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kind, ScenarioKind::Eigenmode);
        assert_eq!(cfg.grid.nodes, 199);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.output_dir_name(), "demo");
    }

    #[test]
    fn boundary_order_is_rejected_with_explicit_message() {
        let err = ScenarioConfig::from_toml_str(
            r#"
            name = "bad"
            kind = "eigenmode"
            s = 1.0
            "#,
        )
        .unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("outside the open interval (0, 1)"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let err = ScenarioConfig::from_toml_str(
            r#"
            name = "bad"
            kind = "eigenmode"
            s = 0.5
            [budgets]
            trace_identty = 0.5
            "#,
        )
        .unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("trace_identty"), "{msg}");
    }

    #[test]
    fn analytic_kind_requires_identity_coefficient() {
        let err = ScenarioConfig::from_toml_str(
            r#"
            name = "bad"
            kind = "analytic:U=x"
            s = 0.5
            [coefficient]
            name = "smooth"
            eps = 0.1
            "#,
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("identity coefficient"));
    }

    #[test]
    fn profile_schedule_is_log_spaced() {
        let cfg = ScenarioConfig::template(ScenarioKind::AnalyticLinear, 0.5);
        let sched = cfg.radii.profile_schedule();
        assert_eq!(sched.len(), cfg.radii.count);
        assert!((sched[0] - cfg.radii.min).abs() < 1e-12);
        assert!((sched[sched.len() - 1] - cfg.radii.max).abs() < 1e-12);
        let q0 = sched[1] / sched[0];
        let q1 = sched[2] / sched[1];
        assert!((q0 - q1).abs() < 1e-12);
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let mut cfg = ScenarioConfig::template(ScenarioKind::Eigenmode, 0.5);
        let ov = Overrides {
            s: Some(0.75),
            nodes: Some(99),
            ..Overrides::default()
        };
        ov.apply(&mut cfg).unwrap();
        assert_eq!(cfg.s, 0.75);
        assert_eq!(cfg.grid.nodes, 99);

        let bad = Overrides {
            s: Some(1.0),
            ..Overrides::default()
        };
        assert!(bad.apply(&mut cfg).is_err());
    }

    #[test]
    fn even_node_counts_are_rejected() {
        let mut cfg = ScenarioConfig::template(ScenarioKind::Eigenmode, 0.5);
        cfg.grid.nodes = 200;
        assert!(cfg.validate().is_err());
    }
}
