//! Consecutive spacing p-values along the path, Benjamini–Hochberg, and FDP accounting.

use serde::{Deserialize, Serialize};

use crate::conditional::FrozenGeometry;
use crate::error::{LarError, Result};
use crate::inference::Method;
use crate::lar::LarPath;
use crate::quadrature::consecutive_gaussian_pvalue;
use crate::real::Real;

/// `p̂_k = α̂_{k−1,k,k+1}` for `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueSequence<T> {
    pub values: Vec<T>,
    pub provenance: Vec<Method>,
}

impl<T> PValueSequence<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Consecutive closed-form p-values for every `k` with a following knot.
pub fn spacing_pvalue_sequence<T: Real>(
    path: &LarPath<T>,
    geometry: &FrozenGeometry<T>,
    sigma: T,
) -> Result<PValueSequence<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(LarError::RejectedInput("sigma must be positive and finite".into()));
    }
    if path.len() < 2 {
        return Err(LarError::RejectedInput("need at least two knots".into()));
    }
    let k = path.len() - 1;
    if geometry.rho.len() < k {
        return Err(LarError::DimensionMismatch(format!(
            "geometry has {} steps, need {k}",
            geometry.rho.len()
        )));
    }
    let lam = &path.knots;
    let values: Vec<T> = (1..=k)
        .map(|i| {
            let prev = if i == 1 { T::infinity() } else { lam[i - 2] };
            consecutive_gaussian_pvalue(geometry.rho[i - 1], sigma, prev, lam[i - 1], lam[i])
        })
        .collect();
    Ok(PValueSequence {
        provenance: vec![Method::ClosedForm; values.len()],
        values,
    })
}

/// Rejected hypotheses (1-based step indices, increasing) of a BH run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSet<T> {
    pub rejected: Vec<usize>,
    /// `k̂`, zero when nothing is rejected.
    pub k_hat: usize,
    pub alpha: T,
}

/// Benjamini–Hochberg at level `alpha`: `k̂ = max{k : p̂_(k) <= α k / K}` and
/// `R̂ = {k : p̂_k <= α k̂ / K}`.
pub fn bh_reject<T: Real>(pvalues: &[T], alpha: T) -> RejectionSet<T> {
    let k = pvalues.len();
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let kk = T::from_count(k);
    let k_hat = if alpha > T::zero() {
        sorted
            .iter()
            .enumerate()
            .rev()
            .find(|&(r, &p)| p <= alpha * T::from_count(r + 1) / kk)
            .map_or(0, |(r, _)| r + 1)
    } else {
        0
    };
    let rejected = if k_hat == 0 {
        Vec::new()
    } else {
        let threshold = alpha * T::from_count(k_hat) / kk;
        (1..=k).filter(|&i| pvalues[i - 1] <= threshold).collect()
    };
    RejectionSet { rejected, k_hat, alpha }
}

/// `FP / (FP + TP)`, zero for an empty rejection set.
pub fn fdp<T: Real>(rejected: &RejectionSet<T>, null_set: &[usize]) -> T {
    if rejected.rejected.is_empty() {
        return T::zero();
    }
    let fp = rejected.rejected.iter().filter(|k| null_set.contains(k)).count();
    T::from_count(fp) / T::from_count(rejected.rejected.len())
}

/// Null steps for an orthogonal design: `k` such that the predictor entering at `k`
/// has a zero coefficient.
pub fn null_set_orthogonal<T: Real>(path: &LarPath<T>, beta: &[T], k: usize) -> Vec<usize> {
    path.signed
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, i)| beta.get(i.plain).is_none_or(|&b| b == T::zero()))
        .map(|(s, _)| s + 1)
        .collect()
}

/// Null steps for a general design: `k` with projected mean `|(Π⊥ μ̄⁰)_{î_k}| <= 1e-8`.
pub fn null_set_projected<T: Real>(geometry: &FrozenGeometry<T>, k: usize) -> Vec<usize> {
    let tol = T::c(1e-8);
    geometry
        .projected_mean
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, m)| m.abs() <= tol)
        .map(|(s, _)| s + 1)
        .collect()
}
