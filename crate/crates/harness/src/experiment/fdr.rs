use std::collections::BTreeMap;

use lar_core::conditional::frozen_geometry;
use lar_core::inference::path_refusal;
use lar_core::lar::lar_path_projected;
use lar_core::model::build_correlation_state;
use lar_core::multiple::{bh_reject, fdp, null_set_orthogonal, null_set_projected, spacing_pvalue_sequence};

use super::{base_header, collect_rows, draw, refusal_status, STATUS_OK};
use crate::config::ExperimentConfig;
use crate::design::DesignModel;
use crate::error::Result;
use crate::report::{cell, FdrSummary, RecordTable, SequenceBin};
use crate::stats::{mean, std_error};

pub(super) fn records(cfg: &ExperimentConfig, alpha: f64) -> RecordTable {
    let header = base_header(["rejected", "false_rejections", "fdp", "sequence"].map(String::from));
    collect_rows(cfg, header, |r| {
        let d = draw(cfg, r)?;
        let state = build_correlation_state(&d.design, &d.response, Some(&d.beta))?;
        let path = lar_path_projected(&state, cfg.k);
        let sequence = path.plain_indices().iter().take(cfg.k).map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(";");
        if let Some(refusal) = path_refusal(&path) {
            let blank = String::new();
            return Ok(vec![r.to_string(), refusal_status(&refusal).into(), refusal.to_string(), blank.clone(), blank.clone(), blank, sequence]);
        }
        let geo = frozen_geometry(&state, &path)?;
        let seq = spacing_pvalue_sequence(&path, &geo, cfg.sigma)?;
        let rejected = bh_reject(&seq.values, alpha);
        let null = match cfg.design {
            DesignModel::Identity => null_set_orthogonal(&path, &d.beta, cfg.k),
            _ => null_set_projected(&geo, cfg.k),
        };
        let fp = rejected.rejected.iter().filter(|k| null.contains(k)).count();
        Ok(vec![
            r.to_string(),
            STATUS_OK.into(),
            String::new(),
            rejected.rejected.len().to_string(),
            fp.to_string(),
            cell(fdp(&rejected, &null)),
            sequence,
        ])
    })
}

pub(super) fn summary(records: &RecordTable, alpha: f64, bin_by_sequence: bool) -> Result<FdrSummary> {
    let fdps = records.floats("fdp")?;
    let rejections = records.floats("rejected")?;
    let bins = if bin_by_sequence {
        let (fc, sc) = (records.column("fdp")?, records.column("sequence")?);
        let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for row in records.rows.iter().filter(|row| !row[fc].is_empty()) {
            groups.entry(&row[sc]).or_default().push(row[fc].parse().unwrap_or(f64::NAN));
        }
        Some(
            groups
                .into_iter()
                .map(|(sequence, v)| SequenceBin {
                    sequence: sequence.to_string(),
                    count: v.len(),
                    mean_fdp: mean(&v),
                    std_error: std_error(&v),
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(FdrSummary {
        alpha,
        count: fdps.len(),
        fdr: mean(&fdps),
        std_error: std_error(&fdps),
        any_rejection_rate: rejections.iter().filter(|&&x| x > 0.0).count() as f64 / rejections.len() as f64,
        mean_rejections: mean(&rejections),
        bins,
    })
}
