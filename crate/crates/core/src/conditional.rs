//! Frozen knots and the per-step Gaussian parameters of the conditional knot law.
//!
//! For an active prefix `i_1..i_{k-1}` the frozen value of `j` is
//! `(Z_j − Π(Z_j)) / (1 − θ_j)`. Along the selected sequence it has mean `m_k` and
//! standard deviation `σ ρ_k`, and these variables are mutually independent.

use serde::{Deserialize, Serialize};

use crate::error::{LarError, Result};
use crate::lar::LarPath;
use crate::model::{dot, pi_projection, theta, ActiveSequence, CorrelationState, SignedIndex};
use crate::real::{theta_margin, Real};

/// Conditional means, scale factors and entry thetas along a selected sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenGeometry<T> {
    /// `m_k`; exactly zero when no truth is attached (global null).
    pub m: Vec<T>,
    /// `ρ_k`, so that `sd(λ^f_k) = σ ρ_k`.
    pub rho: Vec<T>,
    /// `θ_{î_k}(î_1..î_{k-1})`, zero for `k = 1`.
    pub theta_k: Vec<T>,
    /// Projected means `m_k (1 − θ_k)` (the numerators of `m_k`).
    pub projected_mean: Vec<T>,
    pub null: bool,
}

/// `(Z_j − Π(Z_j)) / (1 − θ_j)` for an inactive `j`.
pub fn frozen_value<T: Real>(state: &CorrelationState<T>, active: &ActiveSequence<T>, j: SignedIndex) -> Result<T> {
    let th = theta(state, active, j)?;
    if th > T::one() - theta_margin::<T>() {
        return Err(LarError::UndefinedFrozen {
            index: j.raw(state.p()),
            theta: th.as_f64(),
        });
    }
    let pi = pi_projection(state, active, j)?;
    Ok((state.z(j) - pi) / (T::one() - th))
}

/// `ρ_k = sqrt(R_{i_k i_k} − r M⁻¹ rᵀ) / (1 − θ^{k-1})` and
/// `m_k = (μ⁰_{i_k} − r M⁻¹ μ⁰_A) / (1 − θ^{k-1})`, with `θ⁰ = 0`.
///
/// Uses the truth attached to the state; without one the null `m ≡ 0` is stored.
pub fn frozen_geometry<T: Real>(state: &CorrelationState<T>, path: &LarPath<T>) -> Result<FrozenGeometry<T>> {
    let null = state.mu0bar().is_none();
    let mut active = ActiveSequence::new(state.p());
    let len = path.len();
    let mut geo = FrozenGeometry {
        m: Vec::with_capacity(len),
        rho: Vec::with_capacity(len),
        theta_k: Vec::with_capacity(len),
        projected_mean: Vec::with_capacity(len),
        null,
    };
    for (k, &i) in path.signed.iter().enumerate() {
        let th = theta(state, &active, i)?;
        let gap = T::one() - th;
        if gap < theta_margin::<T>() {
            return Err(LarError::Singular {
                context: format!("1 - theta at step {}", k + 1),
                pivot: gap.as_f64(),
                cutoff: theta_margin::<T>().as_f64(),
            });
        }
        let numerator = if null {
            T::zero()
        } else {
            let mu_a: Vec<T> = active.indices().iter().map(|&a| state.mu0(a)).collect();
            state.mu0(i) - dot(&active.cross(state, i), &active.solve(&mu_a))
        };
        let pivot = active.push(state, i)?;
        geo.rho.push(pivot.sqrt() / gap);
        geo.m.push(numerator / gap);
        geo.projected_mean.push(numerator);
        geo.theta_k.push(th);
    }
    Ok(geo)
}

/// Checks that along the path every selected frozen value is the maximum over
/// admissible inactive indices and that the frozen values are nonincreasing,
/// both with `1e-9` absolute slack.
pub fn verify_selection_event<T: Real>(state: &CorrelationState<T>, path: &LarPath<T>) -> bool {
    let p = state.p();
    let slack = T::c(1e-9);
    let bound = T::one() - theta_margin::<T>();
    let mut active = ActiveSequence::new(p);
    let mut previous: Option<T> = None;
    for &i in &path.signed {
        if i.plain >= p || active.contains_plain(i.plain) {
            return false;
        }
        let (th, pi) = active.plain_theta_pi(state);
        let mut best = T::neg_infinity();
        let mut chosen = None;
        for j in (0..p).filter(|&j| !active.contains_plain(j)) {
            for positive in [true, false] {
                let s = if positive { T::one() } else { -T::one() };
                let t = s * th[j];
                if t > bound {
                    continue;
                }
                let f = (s * state.zbar()[j] - s * pi[j]) / (T::one() - t);
                best = best.max(f);
                if j == i.plain && positive == i.positive {
                    chosen = Some(f);
                }
            }
        }
        let Some(f) = chosen else {
            return false;
        };
        if f < best - slack {
            return false;
        }
        if previous.is_some_and(|prev| f > prev + slack) {
            return false;
        }
        previous = Some(f);
        if active.push(state, i).is_err() {
            return false;
        }
    }
    true
}
