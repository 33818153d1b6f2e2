use lar_core::inference::{false_negative_test_staged, NoiseScale, Outcome, SelectionRule, Stages};

use super::{base_header, collect_rows, draw, refusal_status, STATUS_OK};
use crate::config::{ExperimentConfig, NoiseMode};
use crate::error::Result;
use crate::report::{cell, FalsenegSummary, ModeSummary, RecordTable};
use crate::stats::{ks_uniform, mean, median};

const LIMIT_NU: f64 = 1e6;

fn stages(mode: NoiseMode, sigma: f64) -> Stages<f64> {
    match mode {
        NoiseMode::Known => Stages::Known(sigma),
        NoiseMode::Split => Stages::Split,
        NoiseMode::Limit => {
            let scale = NoiseScale::Studentized { sigma_hat: sigma, nu: LIMIT_NU };
            Stages::Explicit { select: scale, test: scale }
        }
    }
}

fn col(mode: NoiseMode, field: &str) -> String {
    format!("{}_{field}", mode.name())
}

pub(super) fn records(cfg: &ExperimentConfig, rule: SelectionRule<f64>, modes: &[NoiseMode]) -> RecordTable {
    let fields = ["m_hat", "p", "method", "null_holds"];
    let header = base_header(modes.iter().flat_map(|&m| fields.map(|f| col(m, f))));
    collect_rows(cfg, header, |r| {
        let d = draw(cfg, r)?;
        let support: Vec<usize> = d.beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect();
        let mut row = vec![r.to_string(), STATUS_OK.into(), String::new()];
        for &mode in modes {
            match false_negative_test_staged(&d.design, &d.response, cfg.k, rule, stages(mode, cfg.sigma), &cfg.qmc)? {
                Outcome::Report(res) => {
                    let m = res.decision.m_hat;
                    let selected = &res.path.plain_indices()[..m];
                    let holds = support.iter().all(|j| selected.contains(j));
                    let method = serde_json::to_value(res.report.method)?.as_str().unwrap_or_default().to_string();
                    row.extend([m.to_string(), cell(res.report.p_value), method, u8::from(holds).to_string()]);
                }
                Outcome::Refused(refusal) => {
                    row[1] = refusal_status(&refusal).into();
                    row[2] = refusal.to_string();
                    row.extend(std::iter::repeat_n(String::new(), fields.len()));
                }
            }
        }
        Ok(row)
    })
}

pub(super) fn summary(records: &RecordTable, modes: &[NoiseMode]) -> Result<FalsenegSummary> {
    let mut out = Vec::with_capacity(modes.len());
    for &mode in modes {
        let (pc, hc) = (records.column(&col(mode, "p"))?, records.column(&col(mode, "null_holds"))?);
        let p = records.floats(&col(mode, "p"))?;
        let conditional: Vec<f64> = records
            .rows
            .iter()
            .filter(|row| !row[pc].is_empty() && row[hc] == "1")
            .map(|row| row[pc].parse().unwrap_or(f64::NAN))
            .collect();
        out.push(ModeSummary {
            mode: mode.name().to_string(),
            reported: p.len(),
            ks: ks_uniform(&p),
            conditional_null: conditional.len(),
            ks_conditional_null: ks_uniform(&conditional),
            median: median(&p),
            mean_m_hat: mean(&records.floats(&col(mode, "m_hat"))?),
        });
    }
    let known_limit_gap = if modes.contains(&NoiseMode::Known) && modes.contains(&NoiseMode::Limit) {
        let (kc, lc) = (records.column("known_p")?, records.column("limit_p")?);
        let gap = records
            .rows
            .iter()
            .filter(|row| !row[kc].is_empty() && !row[lc].is_empty())
            .map(|row| {
                let k: f64 = row[kc].parse().unwrap_or(f64::NAN);
                let l: f64 = row[lc].parse().unwrap_or(f64::NAN);
                (k - l).abs()
            })
            .fold(0.0, f64::max);
        Some(gap)
    } else {
        None
    };
    Ok(FalsenegSummary { modes: out, known_limit_gap })
}
