//! Replicate loops. Each experiment first produces a [`RecordTable`]; the summary is
//! always computed from those records, so re-reading `records.csv` reproduces it.

mod falseneg;
mod fdr;
mod kmax;
mod law;

use lar_core::{DesignMatrix, Refusal, ResponseVector};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::design::{draw_design, draw_response, replicate_rng};
use crate::error::Result;
use crate::report::{ExperimentReport, RecordTable, Summary};

pub const STATUS_OK: &str = "ok";
pub const STATUS_ERROR: &str = "error";

/// Runs the configured experiment. Replicates execute on the rayon pool and are
/// stored in replicate order, so the output does not depend on the thread count.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let records = match &cfg.experiment {
        Experiment::NullLaw { triples } => law::records(cfg, triples),
        Experiment::Power { triples, chains, .. } => law::records(cfg, &law::power_triples(triples, chains)),
        Experiment::Fdr { alpha, .. } => fdr::records(cfg, *alpha),
        Experiment::Kmax => kmax::records(cfg),
        Experiment::Falseneg { rule, modes } => falseneg::records(cfg, *rule, modes),
    };
    report_from_records(cfg, records)
}

pub fn report_from_records(cfg: &ExperimentConfig, records: RecordTable) -> Result<ExperimentReport> {
    let summary = summarize(cfg, &records)?;
    let refused = records.count_where("status", |s| s.starts_with("refused"))?;
    let errors = records.count_where("status", |s| s == STATUS_ERROR)?;
    let replicates = records.rows.len();
    Ok(ExperimentReport {
        experiment: cfg.experiment.tag().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        replicates,
        refused,
        errors,
        refusal_rate: if replicates == 0 { 0.0 } else { refused as f64 / replicates as f64 },
        summary,
        config: cfg.clone(),
        records,
    })
}

pub fn summarize(cfg: &ExperimentConfig, records: &RecordTable) -> Result<Summary> {
    Ok(match &cfg.experiment {
        Experiment::NullLaw { triples } => Summary::Law(law::law_summary(records, triples)?),
        Experiment::Power { triples, chains, slack } => {
            Summary::Power(law::power_summary(records, &law::power_triples(triples, chains), chains, *slack)?)
        }
        Experiment::Fdr { alpha, bin_by_sequence } => Summary::Fdr(fdr::summary(records, *alpha, *bin_by_sequence)?),
        Experiment::Kmax => Summary::Kmax(kmax::summary(records, cfg.k)?),
        Experiment::Falseneg { modes, .. } => Summary::Falseneg(falseneg::summary(records, modes)?),
    })
}

struct Draw {
    design: DesignMatrix,
    response: ResponseVector,
    beta: Vec<f64>,
}

fn draw(cfg: &ExperimentConfig, replicate: usize) -> Result<Draw> {
    let mut rng = replicate_rng(cfg.seed, replicate);
    let mut design = draw_design(cfg.design, cfg.n, cfg.p, &mut rng)?;
    if cfg.normalize {
        design.normalize_columns()?;
    }
    let beta = cfg.signal.coefficients(cfg.p, cfg.sigma);
    let response = draw_response(&design, &beta, cfg.sigma, &mut rng)?;
    Ok(Draw { design, response, beta })
}

/// Row prefix shared by every experiment: replicate, status, note.
fn base_header(rest: impl IntoIterator<Item = String>) -> Vec<String> {
    ["replicate", "status", "note"].into_iter().map(String::from).chain(rest).collect()
}

fn refusal_status(r: &Refusal) -> &'static str {
    match r {
        Refusal::Irrepresentable { .. } => "refused-irrepresentable",
        Refusal::Truncated { .. } => "refused-truncated",
    }
}

/// One row per replicate; a failing replicate becomes an `error` row instead of
/// aborting the run.
fn collect_rows<F>(cfg: &ExperimentConfig, header: Vec<String>, row: F) -> RecordTable
where
    F: Fn(usize) -> Result<Vec<String>> + Sync,
{
    let width = header.len();
    let rows = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| match row(r) {
            Ok(cells) => cells,
            Err(e) => {
                let mut cells = vec![String::new(); width];
                cells[0] = r.to_string();
                cells[1] = STATUS_ERROR.into();
                cells[2] = e.to_string();
                cells
            }
        })
        .collect();
    RecordTable { header, rows }
}
