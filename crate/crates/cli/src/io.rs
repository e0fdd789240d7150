//! Artifact I/O: output-root resolution, atomic file writes, and the CSV/JSON
//! serializers for every artifact the scenarios emit.
//!
//! All writes are atomic (temp file + rename in the destination directory),
//! all float formatting is fixed-width scientific with 17 significant
//! digits, and nothing here embeds a timestamp — identical runs must yield
//! byte-identical artifacts.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde_json::json;
use specfrac::blowup::{BlowupRecord, OrderEstimate};
use specfrac::frequency::{
    DoublingReport, FrequencyProfile, GammaEstimate, HeightBoundReport, MonotonicityReport,
};

/// Environment variable consulted for the output root when no flag is given.
pub const OUT_ENV: &str = "SPECFRAC_OUT";

/// Resolve the artifact root: `--out` flag, then `SPECFRAC_OUT`, then
/// `./artifacts`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var(OUT_ENV) {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("artifacts")
}

/// Write `contents` to `path` atomically: the bytes land under a temporary
/// name in the same directory and are renamed into place, so a crash can
/// leave stale temp files but never a half-written artifact.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create directory {}", dir.display()))?;
    let file_name = path
        .file_name()
        .context("artifact path has no file name")?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, contents)
        .with_context(|| format!("cannot write temp file {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move artifact into place at {}", path.display()))?;
    Ok(())
}

/// Fixed-width scientific float formatting shared by all CSV artifacts.
fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// CSV view of a frequency profile: one row per radius.
pub fn profile_csv(profile: &FrequencyProfile) -> String {
    let mut out = String::from("r,H,D,N,Nbar,rhoH,rhoD,quadErrH,quadErrD\n");
    for row in &profile.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(row.r),
            fmt(row.h),
            fmt(row.d),
            fmt(row.n),
            fmt(row.n_bar),
            fmt(row.rho_h),
            fmt(row.rho_d),
            fmt(row.quad_err_h),
            fmt(row.quad_err_d),
        ));
    }
    out
}

/// CSV view of a boundary trace comparison: the trace target 2sΓ(−s)/(4^s Γ(s))·L^s u
/// against the measured weighted normal derivative of each extension route.
pub fn trace_csv(
    xs: &[f64],
    u: &[f64],
    lsu: &[f64],
    trace_sg: &[f64],
    trace_fv: &[f64],
    target: &[f64],
) -> String {
    let mut out = String::from("x,u,lsu,trace_semigroup,trace_fv,target\n");
    for i in 0..xs.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(xs[i]),
            fmt(u[i]),
            fmt(lsu[i]),
            fmt(trace_sg[i]),
            fmt(trace_fv[i]),
            fmt(target[i]),
        ));
    }
    out
}

fn pretty(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("json serialization cannot fail");
    text.push('\n');
    text
}

/// JSON view of a vanishing-order estimate.
pub fn order_json(est: &OrderEstimate) -> String {
    pretty(json!({
        "x0": est.x0,
        "radii": est.radii,
        "q_values": est.q_values,
        "d": est.d,
        "pairwise_slopes": est.pairwise_slopes,
        "full_fit": est.full_fit,
        "verdict": est.verdict.as_str(),
    }))
}

/// JSON view of a doubling ladder.
pub fn doubling_json(rep: &DoublingReport) -> String {
    pretty(json!({
        "radii": rep.radii,
        "mass_ratios": rep.mass_ratios,
        "height_ratios": rep.height_ratios,
        "mass_spread": rep.mass_spread,
        "height_spread": rep.height_spread,
    }))
}

/// JSON view of the small-radius frequency limit.
pub fn gamma_json(est: &GammaEstimate) -> String {
    pretty(json!({
        "gamma": est.gamma,
        "radii": est.radii,
        "n_values": est.n_values,
        "accelerated": est.accelerated,
    }))
}

/// JSON view of an almost-monotonicity report.
pub fn monotonicity_json(rep: &MonotonicityReport) -> String {
    pretty(json!({
        "c_min": rep.c_min,
        "pair_rates": rep.pair_rates,
        "radii": rep.radii,
    }))
}

/// JSON view of a set of zoom records.
pub fn blowup_json(records: &[BlowupRecord]) -> String {
    let items: Vec<serde_json::Value> = records
        .iter()
        .map(|rec| {
            json!({
                "tau": rec.tau,
                "scale": rec.scale,
                "h_unit": rec.h_unit,
                "d_unit": rec.d_unit,
                "transport": rec
                    .transport
                    .iter()
                    .map(|(r, nz, nb)| json!({"r": r, "n_zoomed": nz, "n_base": nb}))
                    .collect::<Vec<_>>(),
                "transport_defect": rec.transport_defect(),
            })
        })
        .collect();
    pretty(json!({ "records": items }))
}

/// JSON view of the height growth-bound check.
pub fn height_json(rep: &HeightBoundReport, gamma: f64, delta: f64) -> String {
    pretty(json!({
        "gamma": gamma,
        "delta": delta,
        "exponent": rep.exponent,
        "slopes": rep.slopes,
        "upper_excess": rep.upper_excess,
        "lower_deficit": rep.lower_deficit,
    }))
}
