use lar_core::conditional::frozen_geometry;
use lar_core::inference::{gst_pvalue, path_refusal, Outcome};
use lar_core::lar::lar_path_projected;
use lar_core::model::build_correlation_state;

use super::{base_header, collect_rows, draw, refusal_status, STATUS_OK};
use crate::config::{ExperimentConfig, Triple};
use crate::error::Result;
use crate::report::{cell, triple_name, ChainCheck, LawSummary, PowerSummary, RecordTable, TripleLaw};
use crate::stats::{dominance_gap, ecdf, ks_uniform, mean};

/// Listed triples first, then chain members not already listed.
pub(super) fn power_triples(triples: &[Triple], chains: &[Vec<Triple>]) -> Vec<Triple> {
    let mut all = triples.to_vec();
    for t in chains.iter().flatten() {
        if !all.contains(t) {
            all.push(*t);
        }
    }
    all
}

pub(super) fn records(cfg: &ExperimentConfig, triples: &[Triple]) -> RecordTable {
    let header = base_header(std::iter::once("k_max".to_string()).chain(triples.iter().map(triple_name)));
    collect_rows(cfg, header, |r| {
        let d = draw(cfg, r)?;
        let state = build_correlation_state(&d.design, &d.response, None)?;
        let path = lar_path_projected(&state, cfg.k);
        let mut row = vec![r.to_string(), STATUS_OK.into(), String::new(), path.irrepresentable_upto.to_string()];
        if let Some(refusal) = path_refusal(&path) {
            row[1] = refusal_status(&refusal).into();
            row[2] = refusal.to_string();
            row.extend(triples.iter().map(|_| String::new()));
            return Ok(row);
        }
        let geo = frozen_geometry(&state, &path)?;
        for t in triples {
            match gst_pvalue(&path, &geo, cfg.sigma, (t[0], t[1], t[2]), &cfg.qmc)? {
                Outcome::Report(rep) => row.push(cell(rep.p_value)),
                Outcome::Refused(_) => row.push(String::new()),
            }
        }
        Ok(row)
    })
}

fn triple_law(records: &RecordTable, t: &Triple) -> Result<TripleLaw> {
    let values = records.floats(&triple_name(t))?;
    Ok(TripleLaw {
        triple: *t,
        count: values.len(),
        ks: ks_uniform(&values),
        mean: mean(&values),
        ecdf: ecdf(&values),
    })
}

pub(super) fn law_summary(records: &RecordTable, triples: &[Triple]) -> Result<LawSummary> {
    Ok(LawSummary {
        triples: triples.iter().map(|t| triple_law(records, t)).collect::<Result<_>>()?,
    })
}

pub(super) fn power_summary(
    records: &RecordTable,
    triples: &[Triple],
    chains: &[Vec<Triple>],
    slack: f64,
) -> Result<PowerSummary> {
    let laws: Vec<TripleLaw> = triples.iter().map(|t| triple_law(records, t)).collect::<Result<_>>()?;
    let dominance = laws
        .iter()
        .map(|lo| laws.iter().map(|up| dominance_gap(&lo.ecdf, &up.ecdf)).collect())
        .collect();
    let index = |t: &Triple| triples.iter().position(|u| u == t).expect("chain triples are listed");
    let chains = chains
        .iter()
        .map(|chain| {
            let worst_gap = chain
                .windows(2)
                .map(|w| dominance_gap(&laws[index(&w[0])].ecdf, &laws[index(&w[1])].ecdf))
                .fold(f64::NEG_INFINITY, f64::max);
            ChainCheck {
                chain: chain.clone(),
                worst_gap,
                holds: worst_gap <= slack,
            }
        })
        .collect();
    Ok(PowerSummary {
        triples: laws,
        dominance,
        chains,
        slack,
    })
}
