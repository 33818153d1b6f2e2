//! Report types and their on-disk form: `summary.json` plus `records.csv`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Triple};
use crate::error::{HarnessError, Result};

/// Per-replicate records as text cells. Floats are written with Rust's shortest
/// round-trip formatting, so parsing a cell gives back the exact value the summary used.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RecordTable {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Config(format!("records have no column `{name}`")))
    }

    /// Cells of `name` parsed as floats, skipping empty cells.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .filter(|r| !r[c].is_empty())
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|e| HarnessError::Config(format!("column `{name}`: {e}")))
            })
            .collect()
    }

    pub fn count_where(&self, name: &str, pred: impl Fn(&str) -> bool) -> Result<usize> {
        let c = self.column(name)?;
        Ok(self.rows.iter().filter(|r| pred(&r[c])).count())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }
}

pub fn cell(x: f64) -> String {
    format!("{x}")
}

pub fn triple_name(t: &Triple) -> String {
    format!("p_{}_{}_{}", t[0], t[1], t[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    pub replicates: usize,
    pub refused: usize,
    pub errors: usize,
    pub refusal_rate: f64,
    pub summary: Summary,
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub records: RecordTable,
}

impl ExperimentReport {
    /// More than half of the replicates were refused.
    pub fn refusal_dominated(&self) -> bool {
        self.replicates > 0 && 2 * self.refused > self.replicates
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        self.records.write_csv(&dir.join("records.csv"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Summary {
    Law(LawSummary),
    Power(PowerSummary),
    Fdr(FdrSummary),
    Kmax(KmaxSummary),
    Falseneg(FalsenegSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleLaw {
    pub triple: Triple,
    pub count: usize,
    pub ks: f64,
    pub mean: f64,
    /// Empirical CDF at `0.01, 0.02, ..., 0.99`.
    pub ecdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub triples: Vec<TripleLaw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub chain: Vec<Triple>,
    /// Worst CDF gap over consecutive links.
    pub worst_gap: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSummary {
    pub triples: Vec<TripleLaw>,
    /// `dominance[i][j]` is the largest `CDF_j − CDF_i` on the grid; the claim
    /// `p_i ≼ p_j` holds with slack `s` when it is at most `s`.
    pub dominance: Vec<Vec<f64>>,
    pub chains: Vec<ChainCheck>,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceBin {
    /// 1-based plain indices in entry order.
    pub sequence: String,
    pub count: usize,
    pub mean_fdp: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrSummary {
    pub alpha: f64,
    pub count: usize,
    pub fdr: f64,
    pub std_error: Option<f64>,
    pub any_rejection_rate: f64,
    pub mean_rejections: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<Vec<SequenceBin>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmaxSummary {
    pub cap: usize,
    pub count: usize,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    /// Central 95% interval of the inverse empirical CDF.
    pub lower: usize,
    pub upper: usize,
    /// `[value, count]` pairs in increasing value.
    pub histogram: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: String,
    pub reported: usize,
    pub ks: f64,
    /// Replicates where the selected model contains the true support.
    pub conditional_null: usize,
    pub ks_conditional_null: f64,
    pub median: f64,
    pub mean_m_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsenegSummary {
    pub modes: Vec<ModeSummary>,
    /// Largest per-replicate `|p_known − p_limit|` when both modes ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_limit_gap: Option<f64>,
}
