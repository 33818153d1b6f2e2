use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lar_core::conditional::frozen_geometry;
use lar_core::inference::{false_negative_test, gst_pvalue, gtst_pvalue, path_refusal, split_variance, Outcome};
use lar_core::lar::{lar_path, LarPath};
use lar_core::model::build_correlation_state;
use lar_core::multiple::{bh_reject, spacing_pvalue_sequence};
use lar_core::{Formulation, QmcBudget, SelectionRule};
use lar_harness::{ingest, run, ExperimentConfig, HarnessError};
use serde_json::{json, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_INGESTION: u8 = 2;
const EXIT_REFUSED: u8 = 3;
const EXIT_EMPTY: u8 = 4;

#[derive(Parser)]
#[command(name = "lar", version, about = "LAR paths and exact spacing tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the LAR path and the Irrepresentable Check.
    Path(PathArgs),
    /// Spacing test on knots (a, b, c).
    Test(TestArgs),
    /// False-negative test after model selection.
    Falseneg(FalsenegArgs),
    /// Consecutive spacing p-values with Benjamini–Hochberg.
    Fdr(FdrArgs),
    /// Run a Monte-Carlo experiment described by a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Header-free CSV, n rows by p columns.
    #[arg(long)]
    design: PathBuf,
    /// Header-free CSV, n rows by 1 column.
    #[arg(long)]
    response: PathBuf,
    /// Scale design columns to unit norm.
    #[arg(long)]
    normalize: bool,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QmcArgs {
    /// Lattice points per shift.
    #[arg(long, default_value_t = QmcBudget::default().n_points)]
    points: u64,
    /// Random shifts.
    #[arg(long, default_value_t = QmcBudget::default().n_shifts)]
    shifts: usize,
    /// Seed of the shift stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl QmcArgs {
    fn budget(&self) -> QmcBudget {
        QmcBudget {
            n_points: self.points,
            n_shifts: self.shifts,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Standard,
    Projected,
    Recursive,
    All,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of steps K; the path has K + 1 knots.
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "projected")]
    formulation: FormulationArg,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long)]
    c: usize,
    /// Known noise level.
    #[arg(long, conflicts_with = "split", required_unless_present = "split")]
    sigma: Option<f64>,
    /// Estimate the noise level from the variance split.
    #[arg(long)]
    split: bool,
    #[command(flatten)]
    qmc: QmcArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Sequential,
    Fixed,
}

#[derive(Args)]
struct FalsenegArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long = "K")]
    k: usize,
    #[arg(long, value_enum, default_value = "sequential")]
    rule: RuleArg,
    #[arg(long, default_value_t = 0.1)]
    alpha_prime: f64,
    #[arg(long, default_value_t = 1)]
    gamma_fp: usize,
    /// Model size for `--rule fixed`.
    #[arg(long, required_if_eq("rule", "fixed"))]
    m: Option<usize>,
    /// Known noise level; the variance split is used when absent.
    #[arg(long)]
    sigma: Option<f64>,
    #[command(flatten)]
    qmc: QmcArgs,
}

#[derive(Args)]
struct FdrArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    sigma: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving summary.json and records.csv; defaults to the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Path(args) => cmd_path(args),
        Command::Test(args) => cmd_test(args),
        Command::Falseneg(args) => cmd_falseneg(args),
        Command::Fdr(args) => cmd_fdr(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let ingestion = err.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_ingestion);
            ExitCode::from(if ingestion { EXIT_INGESTION } else { EXIT_FAILURE })
        }
    }
}

fn emit(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Path with 1-based predictor indices.
fn path_json(path: &LarPath<f64>) -> Value {
    json!({
        "formulation": path.formulation,
        "knots": path.knots,
        "indices": path.signed.iter().map(|i| i.plain + 1).collect::<Vec<_>>(),
        "signs": path.signs(),
        "theta_max": path.theta_max_per_step,
        "k_max": path.irrepresentable_upto,
        "status": path.status,
        "tie": path.tie,
        "complete": path.is_complete(),
    })
}

fn cmd_path(args: PathArgs) -> anyhow::Result<u8> {
    let design = ingest::read_design(&args.data.design, args.data.normalize)?;
    let response = ingest::read_response(&args.data.response)?;
    let state = build_correlation_state(&design, &response, None).map_err(HarnessError::from)?;
    let single = |f| lar_path(&state, args.steps, f);
    let value = match args.formulation {
        FormulationArg::Standard => path_json(&single(Formulation::Standard)),
        FormulationArg::Projected => path_json(&single(Formulation::Projected)),
        FormulationArg::Recursive => path_json(&single(Formulation::Recursive)),
        FormulationArg::All => {
            let paths = [Formulation::Standard, Formulation::Projected, Formulation::Recursive].map(single);
            let agree = paths.iter().all(|p| {
                p.signed == paths[0].signed
                    && p.knots.iter().zip(&paths[0].knots).all(|(x, y)| (x - y).abs() <= 1e-8 * y.abs().max(1.0))
            });
            json!({ "agree": agree, "paths": paths.iter().map(path_json).collect::<Vec<_>>() })
        }
    };
    emit(args.data.out.as_deref(), &value)?;
    Ok(0)
}

fn refused(out: Option<&Path>, value: Value) -> anyhow::Result<u8> {
    emit(out, &value)?;
    Ok(EXIT_REFUSED)
}

fn cmd_test(args: TestArgs) -> anyhow::Result<u8> {
    let design = ingest::read_design(&args.data.design, args.data.normalize)?;
    let response = ingest::read_response(&args.data.response)?;
    let state = build_correlation_state(&design, &response, None).map_err(HarnessError::from)?;
    let path = lar_path(&state, args.k, Formulation::Projected);
    let out = args.data.out.as_deref();
    if let Some(refusal) = path_refusal(&path) {
        return refused(out, json!({ "outcome": "refused", "refusal": refusal, "path": path_json(&path) }));
    }
    let geo = frozen_geometry(&state, &path).map_err(HarnessError::from)?;
    let triple = (args.a, args.b, args.c);
    let budget = args.qmc.budget();
    let (outcome, split) = match args.sigma {
        Some(sigma) => (gst_pvalue(&path, &geo, sigma, triple, &budget), None),
        None => {
            let split = split_variance(&design, &response, &path.plain_indices(), args.k).map_err(HarnessError::from)?;
            (gtst_pvalue(&path, &geo, &split, triple, &budget), Some(split))
        }
    };
    match outcome.map_err(HarnessError::from)? {
        Outcome::Report(rep) => {
            let mut value = serde_json::to_value(&rep)?;
            value["outcome"] = json!("report");
            value["split"] = json!(split);
            value["path"] = path_json(&path);
            emit(out, &value)?;
            Ok(0)
        }
        Outcome::Refused(refusal) => refused(out, json!({ "outcome": "refused", "refusal": refusal })),
    }
}

fn cmd_falseneg(args: FalsenegArgs) -> anyhow::Result<u8> {
    let design = ingest::read_design(&args.data.design, args.data.normalize)?;
    let response = ingest::read_response(&args.data.response)?;
    let rule = match args.rule {
        RuleArg::Sequential => SelectionRule::Sequential {
            alpha_prime: args.alpha_prime,
            gamma_fp: args.gamma_fp,
        },
        RuleArg::Fixed => match args.m {
            Some(m) => SelectionRule::Fixed(m),
            None => bail!("--rule fixed needs --m"),
        },
    };
    let out = args.data.out.as_deref();
    let outcome = false_negative_test(&design, &response, args.k, rule, args.sigma, &args.qmc.budget())
        .map_err(HarnessError::from)?;
    match outcome {
        Outcome::Report(res) => {
            let value = json!({
                "outcome": "report",
                "m_hat": res.decision.m_hat,
                "selected": res.path.signed[..res.decision.m_hat].iter().map(|i| i.plain + 1).collect::<Vec<_>>(),
                "decision": res.decision,
                "report": res.report,
                "split": res.split,
                "path": path_json(&res.path),
            });
            emit(out, &value)?;
            Ok(0)
        }
        Outcome::Refused(refusal) => refused(out, json!({ "outcome": "refused", "refusal": refusal })),
    }
}

fn cmd_fdr(args: FdrArgs) -> anyhow::Result<u8> {
    let design = ingest::read_design(&args.data.design, args.data.normalize)?;
    let response = ingest::read_response(&args.data.response)?;
    let state = build_correlation_state(&design, &response, None).map_err(HarnessError::from)?;
    let path = lar_path(&state, args.k, Formulation::Projected);
    let out = args.data.out.as_deref();
    if let Some(refusal) = path_refusal(&path) {
        return refused(out, json!({ "outcome": "refused", "refusal": refusal, "path": path_json(&path) }));
    }
    let geo = frozen_geometry(&state, &path).map_err(HarnessError::from)?;
    let seq = spacing_pvalue_sequence(&path, &geo, args.sigma).map_err(HarnessError::from)?;
    let rejection = bh_reject(&seq.values, args.alpha);
    let value = json!({
        "outcome": "report",
        "pvalues": seq.values,
        "provenance": seq.provenance,
        "rejected_steps": rejection.rejected,
        "rejected_indices": rejection.rejected.iter().map(|&k| path.signed[k - 1].plain + 1).collect::<Vec<_>>(),
        "k_hat": rejection.k_hat,
        "alpha": args.alpha,
        "path": path_json(&path),
    });
    emit(out, &value)?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<u8> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let Some(out) = args.out.or_else(|| cfg.output.clone()) else {
        bail!("no output directory: pass --out or set `output` in the config");
    };
    let report = run(&cfg)?;
    report.write(&out).with_context(|| format!("writing results to {}", out.display()))?;
    eprintln!(
        "{}: {} replicates, {} refused, {} errors -> {}",
        report.experiment,
        report.replicates,
        report.refused,
        report.errors,
        out.display()
    );
    if report.replicates == 0 {
        return Ok(EXIT_EMPTY);
    }
    if report.refusal_dominated() {
        return Ok(EXIT_REFUSED);
    }
    Ok(0)
}
