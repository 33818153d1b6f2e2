//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use lar_core::{QmcBudget, SelectionRule};
use serde::{Deserialize, Serialize};

use crate::design::DesignModel;
use crate::error::{HarnessError, Result};

/// A spacing-test triple `(a, b, c)`; `a = 0` stands for the knot at infinity.
pub type Triple = [usize; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub n: usize,
    pub p: usize,
    /// Number of LAR steps beyond the first knot; paths carry `K + 1` knots.
    #[serde(rename = "K")]
    pub k: usize,
    pub design: DesignModel,
    #[serde(default)]
    pub signal: SignalSpec,
    #[serde(default = "one")]
    pub sigma: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub qmc: QmcBudget,
    /// Scale every design column to unit norm before the path is computed.
    #[serde(default)]
    pub normalize: bool,
    /// Result directory used by `lar simulate` when `--out` is absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

/// `sparsity` leading coefficients set to `amplitudes[i] * sigma`; the last amplitude is
/// reused when the list is shorter than `sparsity`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default)]
    pub sparsity: usize,
    #[serde(default)]
    pub amplitudes: Vec<f64>,
}

impl SignalSpec {
    pub fn is_null(&self) -> bool {
        self.sparsity == 0 || self.amplitudes.iter().all(|&a| a == 0.0)
    }

    pub fn coefficients(&self, p: usize, sigma: f64) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for (j, b) in beta.iter_mut().enumerate().take(self.sparsity) {
            let amp = self.amplitudes.get(j).or(self.amplitudes.last()).copied().unwrap_or(0.0);
            *b = amp * sigma;
        }
        beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    NullLaw {
        triples: Vec<Triple>,
    },
    Power {
        #[serde(default)]
        triples: Vec<Triple>,
        /// Each chain `[t1, t2, ...]` asserts `p(t1) ≼ p(t2) ≼ ...` stochastically.
        #[serde(default)]
        chains: Vec<Vec<Triple>>,
        #[serde(default = "default_slack")]
        slack: f64,
    },
    Fdr {
        alpha: f64,
        /// Group replicates by their selected plain-index sequence.
        #[serde(default)]
        bin_by_sequence: bool,
    },
    Kmax,
    Falseneg {
        rule: SelectionRule<f64>,
        modes: Vec<NoiseMode>,
    },
}

fn default_slack() -> f64 {
    0.02
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::NullLaw { .. } => "null-law",
            Self::Power { .. } => "power",
            Self::Fdr { .. } => "fdr",
            Self::Kmax => "kmax",
            Self::Falseneg { .. } => "falseneg",
        }
    }
}

/// How the false-negative experiment scales the knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// True `σ` at both stages.
    Known,
    /// `σ̂_select` and `σ̂_test` from the variance split.
    Split,
    /// Studentized formulas with `σ̂ = σ` and `ν = 10⁶`; approaches `Known`.
    Limit,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Known => "known",
            Self::Split => "split",
            Self::Limit => "limit",
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Ingest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n == 0 || self.p == 0 || self.k == 0 {
            return bad("n, p and K must be positive".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.signal.sparsity > self.p {
            return bad(format!("sparsity {} exceeds p = {}", self.signal.sparsity, self.p));
        }
        if self.qmc.n_shifts < 2 || self.qmc.n_points == 0 {
            return bad("qmc budget needs at least 2 shifts and 1 point".into());
        }
        let check_triple = |t: &Triple| {
            let [a, b, c] = *t;
            if a < b && b < c && c <= self.k + 1 {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("triple {t:?} needs a < b < c <= K + 1 = {}", self.k + 1)))
            }
        };
        match &self.experiment {
            Experiment::NullLaw { triples } => {
                if !self.signal.is_null() {
                    return bad("null-law runs take an empty signal".into());
                }
                if triples.is_empty() {
                    return bad("null-law needs at least one triple".into());
                }
                triples.iter().try_for_each(check_triple)?;
            }
            Experiment::Power { triples, chains, slack } => {
                if triples.is_empty() && chains.is_empty() {
                    return bad("power needs triples or chains".into());
                }
                if slack.is_nan() || *slack < 0.0 {
                    return bad("slack must be nonnegative".into());
                }
                triples.iter().chain(chains.iter().flatten()).try_for_each(check_triple)?;
            }
            Experiment::Fdr { alpha, .. } => {
                if !(0.0..1.0).contains(alpha) {
                    return bad(format!("alpha must lie in [0, 1), got {alpha}"));
                }
            }
            Experiment::Kmax => {}
            Experiment::Falseneg { rule, modes } => {
                if modes.is_empty() {
                    return bad("falseneg needs at least one mode".into());
                }
                if let SelectionRule::Fixed(m) = rule {
                    if *m + 1 > self.k {
                        return bad(format!("fixed model size {m} must be at most K - 1"));
                    }
                }
                if modes.contains(&NoiseMode::Split) && self.n <= self.k + 3 {
                    return bad(format!("split mode needs n > K + 3, got n = {}", self.n));
                }
            }
        }
        if matches!(self.design, DesignModel::Identity) && self.p > self.n {
            return bad("identity design needs p <= n".into());
        }
        Ok(())
    }
}
