//! Command-line harness for the specfrac library.
//!
//! Subcommands either run a full verification scenario (`run`, `verify`) or
//! a single stage of the pipeline (`extend`, `frequency`, `doubling`,
//! `order`, `blowup`).  Every invocation is driven by a scenario config —
//! loaded from TOML and/or assembled from flags — and writes deterministic
//! artifacts under the output root (`--out`, `$SPECFRAC_OUT`, or
//! `./artifacts`).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use specfrac::blowup::{rescale, vanishing_order};
use specfrac::frequency::{doubling_report, FrequencyEngine};
use specfrac::spectral::FractionalOrder;

use specfrac_cli::config::{parse_kind, Overrides, ScenarioConfig};
use specfrac_cli::io;
use specfrac_cli::report::{self, BatchSummary};
use specfrac_cli::scenario::{self, run_scenario};

#[derive(Parser)]
#[command(
    name = "specfrac",
    version,
    about = "Spectral fractional elliptic toolkit: extension solves, frequency profiles, \
             zoom and vanishing-order reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every scenario-driven subcommand.  `--config` loads a
/// TOML scenario; the remaining flags override individual fields (or fill a
/// template when no config is given).
#[derive(Args, Debug)]
struct CommonOpts {
    /// Scenario config file (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output root (falls back to $SPECFRAC_OUT, then ./artifacts).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenario name (artifact subdirectory).
    #[arg(long)]
    name: Option<String>,
    /// Scenario kind: eigenmode, s_harmonic, direct_weighted_pde,
    /// analytic:U=x, analytic:U=const.  Required when no config is given.
    #[arg(long)]
    kind: Option<String>,
    /// Fractional order in (0, 1).  Required when no config is given.
    #[arg(long)]
    s: Option<f64>,
    /// RNG seed (recorded in the report).
    #[arg(long)]
    seed: Option<u64>,
    /// Base-grid interior node count (odd).
    #[arg(long)]
    nodes: Option<usize>,
    /// Extension levels in y.
    #[arg(long)]
    y_levels: Option<usize>,
    /// Extension grid grading exponent.
    #[arg(long)]
    kappa: Option<f64>,
    /// Explicit strip truncation height.
    #[arg(long)]
    y_height: Option<f64>,
    /// Truncation height as a multiple of the spectral decay length.
    #[arg(long)]
    y_height_factor: Option<f64>,
    /// Coefficient family name.
    #[arg(long)]
    coeff: Option<String>,
    /// Coefficient perturbation size.
    #[arg(long)]
    eps: Option<f64>,
    /// 1-based eigenmode index.
    #[arg(long)]
    mode: Option<usize>,
    /// Replacement-ball radius.
    #[arg(long)]
    mask_radius: Option<f64>,
    /// Outer radius of the vanishing-order ladder.
    #[arg(long)]
    order_r0: Option<f64>,
}

impl CommonOpts {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            name: self.name.clone(),
            kind: self.kind.as_deref().map(parse_kind).transpose()?,
            s: self.s,
            seed: self.seed,
            nodes: self.nodes,
            y_levels: self.y_levels,
            kappa: self.kappa,
            y_height: self.y_height,
            y_height_factor: self.y_height_factor,
            coeff_name: self.coeff.clone(),
            coeff_eps: self.eps,
            mode: self.mode,
            mask_radius: self.mask_radius,
            order_r0: self.order_r0,
        })
    }

    /// Loads the config and applies flag overrides, or assembles a template
    /// from `--kind`/`--s` when no config file is given.
    fn resolve(&self) -> Result<ScenarioConfig> {
        let ov = self.overrides()?;
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_path(path)?,
            None => {
                let (Some(kind), Some(s)) = (ov.kind, ov.s) else {
                    bail!(
                        "no --config given: provide at least --kind and --s to \
                         assemble a scenario from flags"
                    );
                };
                ScenarioConfig::template(kind, s)
            }
        };
        ov.apply(&mut cfg)?;
        Ok(cfg)
    }

    fn scenario_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        io::output_root(self.out.as_deref()).join(cfg.output_dir_name())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one full scenario: every applicable check plus all artifacts.
    Run(CommonOpts),
    /// Run every scenario config in a directory and write a summary.
    Verify {
        /// Directory of scenario TOML files.
        #[arg(long, default_value = "configs", value_name = "DIR")]
        dir: PathBuf,
        /// Output root (falls back to $SPECFRAC_OUT, then ./artifacts).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Extension stage only: both routes, trace comparison, field CSVs.
    Extend(CommonOpts),
    /// Frequency profile over the radius schedule.
    Frequency(CommonOpts),
    /// Dyadic doubling ladder.
    Doubling(CommonOpts),
    /// Vanishing-order estimate at the origin.
    Order(CommonOpts),
    /// Zoom rescaling identities.
    Blowup(CommonOpts),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(opts) => cmd_run(&opts),
        Command::Verify { dir, out } => cmd_verify(&dir, out.as_deref()),
        Command::Extend(opts) => cmd_extend(&opts),
        Command::Frequency(opts) => cmd_frequency(&opts),
        Command::Doubling(opts) => cmd_doubling(&opts),
        Command::Order(opts) => cmd_order(&opts),
        Command::Blowup(opts) => cmd_blowup(&opts),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

/// Writes a scenario's artifacts (report included) under its directory.
fn write_scenario_artifacts(dir: &Path, out: &scenario::ScenarioOutput) -> Result<()> {
    for (name, bytes) in &out.artifacts {
        io::write_atomic(&dir.join(name), bytes)?;
    }
    io::write_atomic(&dir.join("report.json"), out.report.to_json().as_bytes())?;
    Ok(())
}

fn print_report(report: &report::VerificationReport) {
    for check in &report.checks {
        let tag = match check.status {
            report::CheckStatus::Pass => "pass",
            report::CheckStatus::SoftWarn => "WARN",
            report::CheckStatus::Fail => "FAIL",
        };
        let note = check
            .note
            .as_deref()
            .map(|n| format!(" [{n}]"))
            .unwrap_or_default();
        println!(
            "  [{tag}] {}: measured {:.3e} (budget {:.3e}) — {}{note}",
            check.name, check.measured, check.budget, check.anchor
        );
    }
    if let Some(e) = &report.error {
        println!("  pipeline error: {e}");
    }
    println!("{}", report.summary_line());
}

fn cmd_run(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let out = run_scenario(&cfg);
    let dir = opts.scenario_dir(&cfg);
    write_scenario_artifacts(&dir, &out)?;
    print_report(&out.report);
    println!("artifacts: {}", dir.display());
    Ok(if out.report.passed() { 0 } else { 1 })
}

fn cmd_verify(dir: &Path, out_flag: Option<&Path>) -> Result<i32> {
    if !dir.is_dir() {
        bail!("scenario directory {} does not exist", dir.display());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        println!(
            "no scenarios: {} contains no .toml configs; nothing to verify",
            dir.display()
        );
        return Ok(0);
    }

    let root = io::output_root(out_flag);
    let mut reports = Vec::new();
    let mut parse_failures = 0usize;
    for path in &paths {
        match ScenarioConfig::from_path(path) {
            Ok(cfg) => {
                let out = run_scenario(&cfg);
                write_scenario_artifacts(&root.join(cfg.output_dir_name()), &out)?;
                println!("{}", out.report.summary_line());
                reports.push(out.report);
            }
            Err(e) => {
                // A broken config fails the batch but not the binary: the
                // remaining scenarios still run.
                parse_failures += 1;
                println!(
                    "[FAIL] {} (config error: {e:#})",
                    path.file_stem().unwrap_or_default().to_string_lossy()
                );
            }
        }
    }

    let summary = BatchSummary::from_reports(&reports);
    io::write_atomic(&root.join("summary.json"), summary.to_json().as_bytes())?;
    println!(
        "verified {} scenario(s): {} passed, {} failed, {} config error(s)",
        summary.total + parse_failures,
        summary.passed,
        summary.total - summary.passed,
        parse_failures
    );
    println!("artifacts: {}", root.display());
    Ok(if summary.all_passed() && parse_failures == 0 {
        0
    } else {
        1
    })
}

fn cmd_extend(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let ts = scenario::trace_setup(&cfg)?;
    let dir = opts.scenario_dir(&cfg);

    let mut sg_csv = Vec::new();
    ts.ext_sg.write_csv(&mut sg_csv)?;
    io::write_atomic(&dir.join("extension_semigroup.csv"), &sg_csv)?;
    let mut fv_csv = Vec::new();
    ts.ext_fv.write_csv(&mut fv_csv)?;
    io::write_atomic(&dir.join("extension_fv.csv"), &fv_csv)?;

    let c_s = specfrac::extension::trace_constant(cfg.s);
    let target: Vec<f64> = ts.lsu.values.iter().map(|v| c_s * v).collect();
    let tr_sg = specfrac::extension::neumann_trace(&ts.ext_sg)?;
    let tr_fv = specfrac::extension::neumann_trace(&ts.ext_fv)?;
    io::write_atomic(
        &dir.join("trace.csv"),
        io::trace_csv(
            &ts.grid.coords[0],
            &ts.u.values,
            &ts.lsu.values,
            &tr_sg.values,
            &tr_fv.values,
            &target,
        )
        .as_bytes(),
    )?;

    let rel = |a: &[f64], b: &[f64]| -> f64 {
        let num: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den.max(1e-300)
    };
    println!("trace prefactor 2sΓ(−s)/(4^sΓ(s)) = {c_s:.12}");
    println!(
        "trace identity, synthesis route:     rel L² defect {:.3e}",
        rel(&tr_sg.values, &target)
    );
    println!(
        "trace identity, finite-volume route: rel L² defect {:.3e}",
        rel(&tr_fv.values, &target)
    );
    println!(
        "route agreement (weighted L², strip): {:.3e}",
        specfrac::extension::weighted_l2_diff(&ts.ext_fv, &ts.ext_sg)?
    );
    println!("artifacts: {}", dir.display());
    Ok(0)
}

fn cmd_frequency(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let fs = scenario::field_setup(&cfg)?;
    let s = FractionalOrder::new(cfg.s)?;
    let engine = FrequencyEngine::new(fs.field.as_ref(), &fs.excoeff, s, cfg.dim);
    let schedule = cfg.radii.profile_schedule();
    scenario::check_schedule(&schedule, fs.field.resolution(), fs.extent)?;
    let profile = engine.profile(&schedule)?;
    let dir = opts.scenario_dir(&cfg);
    io::write_atomic(&dir.join("profile.csv"), io::profile_csv(&profile).as_bytes())?;
    println!("{:>10} {:>14} {:>14} {:>10} {:>10} {:>10}", "r", "H", "D", "N", "rhoH", "rhoD");
    for row in &profile.rows {
        println!(
            "{:>10.5} {:>14.6e} {:>14.6e} {:>10.6} {:>10.2e} {:>10.2e}",
            row.r, row.h, row.d, row.n, row.rho_h, row.rho_d
        );
    }
    println!("artifacts: {}", dir.display());
    Ok(0)
}

fn cmd_doubling(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let fs = scenario::field_setup(&cfg)?;
    let s = FractionalOrder::new(cfg.s)?;
    let engine = FrequencyEngine::new(fs.field.as_ref(), &fs.excoeff, s, cfg.dim);
    let rep = doubling_report(&engine, cfg.radii.doubling_base, cfg.radii.doubling_count)?;
    let dir = opts.scenario_dir(&cfg);
    io::write_atomic(&dir.join("doubling.json"), io::doubling_json(&rep).as_bytes())?;
    println!("radii: {:?}", rep.radii);
    println!("mass ratios:   {:?}  (spread {:.3e})", rep.mass_ratios, rep.mass_spread);
    println!("height ratios: {:?}  (spread {:.3e})", rep.height_ratios, rep.height_spread);
    println!("artifacts: {}", dir.display());
    Ok(0)
}

fn cmd_order(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let u = scenario::order_trace(&cfg)?;
    let r0 = scenario::default_order_r0(&cfg);
    let ladder = scenario::order_ladder(r0, u.grid.spacing[0]);
    if ladder.is_empty() {
        bail!("order ladder from r0 = {r0} has no resolvable radii on this grid");
    }
    let x0 = u
        .grid
        .origin_flat()
        .context("vanishing order needs an origin node")?;
    let est = vanishing_order(&u, x0, &ladder)?;
    let dir = opts.scenario_dir(&cfg);
    io::write_atomic(&dir.join("order.json"), io::order_json(&est).as_bytes())?;
    println!("verdict: {}", est.verdict.as_str());
    println!("radii:    {:?}", est.radii);
    println!("q values: {:?}", est.q_values);
    println!("pairwise slopes: {:?}", est.pairwise_slopes);
    println!("estimated order d = {:.6} (full-ladder fit {:.6})", est.d, est.full_fit);
    println!("artifacts: {}", dir.display());
    Ok(0)
}

fn cmd_blowup(opts: &CommonOpts) -> Result<i32> {
    let cfg = opts.resolve()?;
    let fs = scenario::field_setup(&cfg)?;
    let s = FractionalOrder::new(cfg.s)?;
    let mut records = Vec::new();
    for &tau in &cfg.radii.blowup_taus {
        let rec = rescale(fs.field.as_ref(), &fs.excoeff, s, cfg.dim, tau)?;
        println!(
            "τ = {tau}: scale {:.6e}, H_unit − 1 = {:+.3e}, transport defect {:.3e}",
            rec.scale,
            rec.h_unit - 1.0,
            rec.transport_defect()
        );
        records.push(rec);
    }
    let dir = opts.scenario_dir(&cfg);
    io::write_atomic(&dir.join("blowup.json"), io::blowup_json(&records).as_bytes())?;
    println!("artifacts: {}", dir.display());
    Ok(0)
}
