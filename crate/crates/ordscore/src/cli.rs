//! Command dispatch for the `ordscore` binary.
//!
//! Exit codes are a stable contract: 0 on success, 1 for runtime failures
//! (unreadable data, fit errors, failed golden checks), 2 for usage errors
//! (bad flags, malformed spec files).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use ordscore_core::design::{ModelFrame, ScoreParams};
use ordscore_core::glm::{boxcox_profile, fit, FitSummary};
use ordscore_core::optim::OptimizerConfig;
use ordscore_core::score::{
    quantile_scores, rescale_scores, FamilyKind, RescaleMode, ScoreFamilyParams,
};
use ordscore_core::scorefit::{optimize_scores, ScoreFitResult};
use serde_json::json;

use crate::datasets;
use crate::render::{fit_json, fit_table, scores_json, scores_table};
use crate::spec::ModelSpec;

/// Marker for errors that should exit with the usage code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "ordscore",
    version,
    about = "Data-driven numeric scores for ordered factors in regression models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the quantile scores of a family on the K-level grid
    Scores(ScoresArgs),
    /// Fit the model described by a spec file to a CSV dataset
    Fit(FitArgs),
    /// Fit free score-family parameters by deviance minimization
    Optimize(OptimizeArgs),
    /// Re-run a published analysis end to end and verify its numbers
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ScoresArgs {
    /// Score family: su, gh or sas
    #[arg(long)]
    family: String,
    /// Skewness-type parameter (gamma, g or epsilon)
    #[arg(long, allow_hyphen_values = true)]
    p1: f64,
    /// Tail-type parameter (delta or h)
    #[arg(long, allow_hyphen_values = true)]
    p2: f64,
    /// Number of factor levels
    #[arg(long)]
    k: usize,
    /// Working-score rescaling: none, scaled or anchor
    #[arg(long, default_value = "none")]
    rescale: String,
    /// Also print a full-precision JSON mirror
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Data file (CSV with a header row)
    #[arg(long)]
    csv: PathBuf,
    /// Model spec file (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Also print a full-precision JSON mirror
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Data file (CSV with a header row)
    #[arg(long)]
    csv: PathBuf,
    /// Model spec file (JSON) with at least one free score term
    #[arg(long)]
    spec: PathBuf,
    /// Also print a full-precision JSON mirror
    #[arg(long)]
    json: bool,
    /// Cap on simplex iterations per restart
    #[arg(long)]
    max_iter: Option<usize>,
    /// Convergence tolerance on the objective spread
    #[arg(long)]
    tol: Option<f64>,
    /// Reserved for future stochastic search strategies; the current
    /// optimizer is deterministic and ignores it
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Which analysis: esoph or diamonds
    which: String,
    /// Full diamonds CSV (or set ORDSCORE_DIAMONDS_CSV)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also print a full-precision JSON mirror
    #[arg(long)]
    json: bool,
}

/// Parse arguments, run, and map errors onto the exit-code contract.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Scores(a) => cmd_scores(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Reproduce(a) => cmd_reproduce(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                2
            } else {
                1
            }
        }
    }
}

fn parse_family(tag: &str) -> Result<FamilyKind> {
    FamilyKind::from_tag(tag).map_err(|e| usage_error(format!("{e}")))
}

fn parse_rescale(mode: &str) -> Result<RescaleMode> {
    match mode {
        "none" => Ok(RescaleMode::None),
        "scaled" => Ok(RescaleMode::TimesKPlus1),
        "anchor" => Ok(RescaleMode::AnchorFirstTwo),
        other => Err(usage_error(format!(
            "unknown rescale mode '{other}' (expected none, scaled or anchor)"
        ))),
    }
}

fn cmd_scores(args: &ScoresArgs) -> Result<()> {
    let family = parse_family(&args.family)?;
    let rescale = parse_rescale(&args.rescale)?;
    let params = ScoreFamilyParams::new(family, args.p1, args.p2)
        .map_err(|e| usage_error(format!("{e}")))?;
    if args.k < 2 {
        return Err(usage_error(format!("--k must be at least 2, got {}", args.k)));
    }
    let grid = quantile_scores(args.k, &params).map_err(|e| anyhow!("{e}"))?;
    let working = rescale_scores(&grid, rescale).map_err(|e| anyhow!("{e}"))?;
    let title = format!(
        "{} scores, p1 = {}, p2 = {}, K = {}",
        family.tag(),
        args.p1,
        args.p2,
        args.k
    );
    print!("{}", scores_table(&title, &grid, &working));
    if args.json {
        println!("{}", serde_json::to_string_pretty(&scores_json(&grid, &working))?);
    }
    Ok(())
}

fn load_frame(csv: &Path, spec_path: &Path) -> Result<(ModelSpec, ModelFrame)> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("cannot read spec file {}", spec_path.display()))?;
    let spec = ModelSpec::parse(&text).map_err(|e| usage_error(format!("{e:#}")))?;
    let columns = crate::csvio::load_csv_path(csv, &spec.schema())?;
    let frame = spec.to_frame(columns)?;
    Ok((spec, frame))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (_, frame) = load_frame(&args.csv, &args.spec)?;
    let summary = fit(&frame, &std::collections::BTreeMap::new()).map_err(|e| anyhow!("{e}"))?;
    print!("{}", fit_table("Fitted model", &summary));
    if args.json {
        println!("{}", serde_json::to_string_pretty(&fit_json(&summary))?);
    }
    Ok(())
}

fn optimizer_config(max_iter: Option<usize>, tol: Option<f64>) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::default();
    if let Some(m) = max_iter {
        cfg.max_iterations = m;
    }
    if let Some(t) = tol {
        cfg.objective_tol = t;
        cfg.simplex_tol = t;
    }
    cfg
}

/// Print one optimization result: parameters, grids, diagnostics, table.
fn print_score_fit(result: &ScoreFitResult) -> Result<()> {
    for (name, params) in &result.params {
        println!(
            "{name}: family {}, p1 = {:.4}, p2 = {:.4}",
            params.kind.tag(),
            params.p1,
            params.p2
        );
        let grid = &result.grids[name];
        let anchored = rescale_scores(grid, RescaleMode::AnchorFirstTwo)
            .unwrap_or_else(|_| grid.scores().to_vec());
        print!("{}", scores_table(&format!("{name} score grid"), grid, &anchored));
    }
    println!(
        "objective evaluations: {}, converged: {}",
        result.evaluations, result.converged
    );
    print!("{}", fit_table("Model at the fitted scores", &result.fit));
    Ok(())
}

fn score_fit_json(result: &ScoreFitResult) -> serde_json::Value {
    json!({
        "params": result.params.iter().map(|(name, p)| json!({
            "factor": name,
            "family": p.kind.tag(),
            "p1": p.p1,
            "p2": p.p2,
        })).collect::<Vec<_>>(),
        "grids": result.grids.iter().map(|(name, grid)| {
            let anchored = rescale_scores(grid, RescaleMode::AnchorFirstTwo)
                .unwrap_or_else(|_| grid.scores().to_vec());
            (name.clone(), scores_json(grid, &anchored))
        }).collect::<serde_json::Map<_, _>>(),
        "objective": result.objective,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "fit": fit_json(&result.fit),
    })
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let (_, frame) = load_frame(&args.csv, &args.spec)?;
    if frame.free_score_terms().is_empty() {
        return Err(usage_error(
            "the spec has no free score terms; use `fit` for fixed-parameter models",
        ));
    }
    let cfg = optimizer_config(args.max_iter, args.tol);
    let result = optimize_scores(&frame, &cfg).map_err(|e| anyhow!("{e}"))?;
    print_score_fit(&result)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&score_fit_json(&result))?);
    }
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<()> {
    match args.which.as_str() {
        "esoph" => reproduce_esoph(args.json),
        "diamonds" => reproduce_diamonds(args.csv.as_deref(), args.json),
        other => Err(usage_error(format!(
            "unknown analysis '{other}' (expected esoph or diamonds)"
        ))),
    }
}

/// Record a deviation when `value` misses `target` by more than `tol`.
fn check(deviations: &mut Vec<String>, what: &str, value: f64, target: f64, tol: f64) {
    if !((value - target).abs() <= tol) {
        deviations.push(format!("{what}: got {value:.4}, expected {target} within {tol}"));
    }
}

fn check_coefficients(
    deviations: &mut Vec<String>,
    label: &str,
    summary: &FitSummary,
    expected: &[(&str, f64, f64)],
    tol: f64,
) {
    for &(name, est, se) in expected {
        match summary.coef_index(name) {
            Some(j) => {
                check(deviations, &format!("{label} {name} estimate"), summary.estimates[j], est, tol);
                check(deviations, &format!("{label} {name} SE"), summary.std_errors[j], se, tol);
            }
            None => deviations.push(format!("{label}: coefficient {name} is missing")),
        }
    }
}

fn finish_checks(deviations: Vec<String>) -> Result<()> {
    if deviations.is_empty() {
        println!("all golden checks passed");
        Ok(())
    } else {
        for d in &deviations {
            eprintln!("golden check failed: {d}");
        }
        Err(anyhow!("{} golden check(s) failed", deviations.len()))
    }
}

const TABLE1: [(&str, f64, f64); 7] = [
    ("(Intercept)", -1.154, 0.170),
    ("agegp.L", 3.706, 0.433),
    ("agegp.Q", -1.481, 0.398),
    ("tobgp.L", 0.966, 0.215),
    ("alcgp.L", 2.505, 0.258),
    ("alcgp.Q", 0.082, 0.220),
    ("alcgp.C", 0.398, 0.181),
];

const ANCHORED_ESOPH: [f64; 4] = [1.0, 2.0, 2.42, 3.54];

fn reproduce_esoph(json: bool) -> Result<()> {
    let mut deviations = Vec::new();
    let mut out = serde_json::Map::new();

    let poly = fit(&datasets::esoph_poly_frame()?, &std::collections::BTreeMap::new())
        .map_err(|e| anyhow!("{e}"))?;
    print!(
        "{}",
        fit_table("Logistic model, polynomial contrasts for all factors", &poly)
    );
    println!();
    check_coefficients(&mut deviations, "polynomial model", &poly, &TABLE1, 0.002);
    check(&mut deviations, "polynomial model deviance", poly.deviance, 88.215, 0.005);
    out.insert("poly".into(), fit_json(&poly));

    for family in [FamilyKind::JohnsonSu, FamilyKind::GAndH] {
        let frame = datasets::esoph_score_frame(family, ScoreParams::Free)?;
        let result =
            optimize_scores(&frame, &OptimizerConfig::default()).map_err(|e| anyhow!("{e}"))?;
        println!(
            "alcgp scored by the {} family, deviance-minimizing parameters",
            family.tag()
        );
        print_score_fit(&result)?;
        println!();

        let label = format!("{} score model", family.tag());
        check(
            &mut deviations,
            &format!("{label} deviance"),
            result.objective,
            88.215,
            0.005,
        );
        let grid = &result.grids["alcgp"];
        let anchored = rescale_scores(grid, RescaleMode::AnchorFirstTwo)
            .map_err(|e| anyhow!("{e}"))?;
        for (i, (&a, &t)) in anchored.iter().zip(&ANCHORED_ESOPH).enumerate() {
            check(
                &mut deviations,
                &format!("{label} anchored score {}", i + 1),
                a,
                t,
                0.05,
            );
        }
        out.insert(format!("score_{}", family.tag()), score_fit_json(&result));
    }

    if json {
        println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out))?);
    }
    finish_checks(deviations)
}

fn reproduce_diamonds(csv: Option<&Path>, json: bool) -> Result<()> {
    let path = datasets::diamonds_csv_path(csv)?;
    let diamonds = datasets::prepare_diamonds(&path)?;
    let mut deviations = Vec::new();
    let mut out = serde_json::Map::new();

    let poly = fit(&diamonds.poly_frame()?, &std::collections::BTreeMap::new())
        .map_err(|e| anyhow!("{e}"))?;
    print!(
        "{}",
        fit_table("Linear model for sqrt(price), polynomial contrasts", &poly)
    );
    println!();
    let sd = poly.residual_sd.unwrap_or(f64::NAN);
    check(&mut deviations, "polynomial model residual SD", sd, 6.74, 0.02);
    if poly.residual_df != 527 {
        deviations.push(format!(
            "polynomial model df: got {}, expected 527",
            poly.residual_df
        ));
    }
    if let Some(j) = poly.coef_index("carat") {
        check(&mut deviations, "carat estimate", poly.estimates[j], 65.317, 0.05);
    } else {
        deviations.push("carat coefficient missing".into());
    }
    out.insert("poly".into(), fit_json(&poly));

    let targets = [(FamilyKind::GAndH, 6.90), (FamilyKind::SinhArcsinh, 6.85)];
    for (family, target_sd) in targets {
        let frame = diamonds.score_frame(family)?;
        let result =
            optimize_scores(&frame, &OptimizerConfig::default()).map_err(|e| anyhow!("{e}"))?;
        println!(
            "clarity and color scored by the {} family, RSS-minimizing parameters",
            family.tag()
        );
        print_score_fit(&result)?;
        println!();

        let label = format!("{} score model", family.tag());
        let sd = result.fit.residual_sd.unwrap_or(f64::NAN);
        check(&mut deviations, &format!("{label} residual SD"), sd, target_sd, 0.03);
        if result.fit.residual_df != 532 {
            deviations.push(format!(
                "{label} df: got {}, expected 532",
                result.fit.residual_df
            ));
        }
        if family == FamilyKind::SinhArcsinh {
            if let Some(j) = result.fit.coef_index("clarity.score") {
                check(
                    &mut deviations,
                    "sas clarity.score |t|",
                    result.fit.statistics[j].abs(),
                    18.72,
                    0.3,
                );
            } else {
                deviations.push("sas clarity.score coefficient missing".into());
            }
        }
        out.insert(format!("score_{}", family.tag()), score_fit_json(&result));
    }

    let lambdas: Vec<f64> = (0..=150).map(|i| -0.5 + i as f64 * 0.01).collect();
    let profile =
        boxcox_profile(&diamonds.boxcox_frame()?, &lambdas).map_err(|e| anyhow!("{e}"))?;
    println!(
        "Box-Cox power for price: lambda_hat = {:.3}, approximate 95% interval ({:.2}, {:.2})",
        profile.lambda_hat, profile.interval.0, profile.interval.1
    );
    check(&mut deviations, "Box-Cox lambda_hat", profile.lambda_hat, 0.436, 0.01);
    out.insert(
        "boxcox".into(),
        json!({
            "lambda_hat": profile.lambda_hat,
            "interval": [profile.interval.0, profile.interval.1],
        }),
    );

    if json {
        println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out))?);
    }
    finish_checks(deviations)
}
