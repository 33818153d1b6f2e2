use std::collections::BTreeMap;

use lar_core::lar::lar_path_projected;
use lar_core::model::build_correlation_state;

use super::{base_header, collect_rows, draw, STATUS_OK};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{KmaxSummary, RecordTable};
use crate::stats::{mean, quantile};

pub(super) fn records(cfg: &ExperimentConfig) -> RecordTable {
    let header = base_header(["k_max", "knots", "path_status"].map(String::from));
    collect_rows(cfg, header, |r| {
        let d = draw(cfg, r)?;
        let state = build_correlation_state(&d.design, &d.response, None)?;
        let path = lar_path_projected(&state, cfg.k);
        let status = serde_json::to_value(path.status)?.as_str().unwrap_or_default().to_string();
        Ok(vec![
            r.to_string(),
            STATUS_OK.into(),
            String::new(),
            path.irrepresentable_upto.to_string(),
            path.len().to_string(),
            status,
        ])
    })
}

pub(super) fn summary(records: &RecordTable, cap: usize) -> Result<KmaxSummary> {
    let mut values = records.floats("k_max")?;
    values.sort_by(f64::total_cmp);
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &values {
        *histogram.entry(v as usize).or_default() += 1;
    }
    Ok(KmaxSummary {
        cap,
        count: values.len(),
        mean: mean(&values),
        min: values.first().map_or(0, |&v| v as usize),
        max: values.last().map_or(0, |&v| v as usize),
        lower: quantile(&values, 0.025) as usize,
        upper: quantile(&values, 0.975) as usize,
        histogram: histogram.into_iter().map(|(v, c)| [v, c]).collect(),
    })
}
