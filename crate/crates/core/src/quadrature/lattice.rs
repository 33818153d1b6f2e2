//! Randomly shifted rank-1 lattice rules.
//!
//! Points are `x_i = {i z / n + U}` for `i = 0..n`, one independent uniform shift `U`
//! per replicate. The shift for replicate `m` is drawn from a ChaCha8 stream seeded with
//! `seed` and stream id `m`, so estimates do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LarError, Result};
use crate::real::Real;

/// Primes with tabulated Korobov generators.
pub const PRIMES: [u64; 3] = [1021, 4093, 16381];

/// Largest dimension with a dedicated generator; higher dimensions reuse the last entry.
pub const TABLE_DIM: usize = 24;

/// Korobov parameters `g` (generating vector `(1, g, g², ...) mod n`) per prime and
/// dimension, from an offline search of the weighted P2 criterion (`tools/korobov_search.py`).
const KOROBOV: [[u64; TABLE_DIM]; 3] = include!("korobov_table.in");

/// Default points per shift.
pub const DEFAULT_POINTS: u64 = 4093;
/// Default number of random shifts.
pub const DEFAULT_SHIFTS: usize = 16;

/// Points, shifts and seed used for every cubature a p-value needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QmcBudget {
    pub n_points: u64,
    pub n_shifts: usize,
    pub seed: u64,
}

impl Default for QmcBudget {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            n_shifts: DEFAULT_SHIFTS,
            seed: 0,
        }
    }
}

/// A rank-1 lattice with its randomization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeRule {
    pub dim: usize,
    pub n_points: u64,
    pub generating_vector: Vec<u64>,
    pub n_shifts: usize,
    pub seed: u64,
    /// Apply the tent map `x ↦ 1 − |2x − 1|` per coordinate before evaluation.
    /// It preserves the uniform law and lifts the convergence order for
    /// non-periodic integrands.
    pub periodize: bool,
}

impl LatticeRule {
    /// Validates an explicit generating vector.
    pub fn new(dim: usize, n_points: u64, generating_vector: Vec<u64>, n_shifts: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(LarError::RejectedInput("lattice dimension must be positive".into()));
        }
        if n_points < 2 || n_shifts < 2 {
            return Err(LarError::RejectedInput(format!(
                "need at least 2 points and 2 shifts, got {n_points} and {n_shifts}"
            )));
        }
        if generating_vector.len() != dim {
            return Err(LarError::DimensionMismatch(format!(
                "generating vector of length {} for dimension {dim}",
                generating_vector.len()
            )));
        }
        if let Some(&z) = generating_vector
            .iter()
            .find(|&&z| z == 0 || z >= n_points || gcd(z, n_points) != 1)
        {
            return Err(LarError::RejectedInput(format!(
                "generator entry {z} is not a unit modulo {n_points}"
            )));
        }
        Ok(Self {
            dim,
            n_points,
            generating_vector,
            n_shifts,
            seed,
            periodize: true,
        })
    }

    /// Korobov rule from the built-in table; `n_points` must be one of [`PRIMES`].
    pub fn korobov(dim: usize, n_points: u64, n_shifts: usize, seed: u64) -> Result<Self> {
        let row = PRIMES.iter().position(|&q| q == n_points).ok_or_else(|| {
            LarError::RejectedInput(format!("no tabulated generator for n = {n_points}; use one of {PRIMES:?}"))
        })?;
        if dim == 0 {
            return Err(LarError::RejectedInput("lattice dimension must be positive".into()));
        }
        let g = KOROBOV[row][dim.min(TABLE_DIM) - 1];
        let mut z = Vec::with_capacity(dim);
        let mut acc = 1u64;
        for _ in 0..dim {
            z.push(acc);
            acc = acc * g % n_points;
        }
        Self::new(dim, n_points, z, n_shifts, seed)
    }

    /// Korobov rule of the given dimension for a budget.
    pub fn from_budget(dim: usize, budget: &QmcBudget) -> Result<Self> {
        Self::korobov(dim, budget.n_points, budget.n_shifts, budget.seed)
    }

    /// The uniform shift of replicate `m`.
    pub fn shift<T: Real>(&self, m: usize) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(m as u64);
        (0..self.dim).map(|_| T::c(rng.random::<f64>())).collect()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Value and spread of a randomized lattice estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmcEstimate<T> {
    pub value: T,
    /// Sample standard deviation over shifts divided by `sqrt(n_shifts)`.
    pub std_error: T,
    pub n_points: u64,
    pub n_shifts: usize,
    pub seed: u64,
    /// `false` when the value is exact and no point was evaluated.
    pub sampled: bool,
}

impl<T: Real> QmcEstimate<T> {
    /// An exact value that needed no sampling.
    pub fn exact(value: T, budget: &QmcBudget) -> Self {
        Self {
            value,
            std_error: T::zero(),
            n_points: budget.n_points,
            n_shifts: budget.n_shifts,
            seed: budget.seed,
            sampled: false,
        }
    }

    fn from_shift_values(values: &[T], rule: &LatticeRule) -> Self {
        let (mean, se) = mean_se(values);
        Self {
            value: mean,
            std_error: se,
            n_points: rule.n_points,
            n_shifts: rule.n_shifts,
            seed: rule.seed,
            sampled: true,
        }
    }
}

pub(crate) fn mean_se<T: Real>(values: &[T]) -> (T, T) {
    let m = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / m;
    let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    let var = ss / (m - T::one());
    (mean, (var / m).sqrt())
}

/// Per-shift averages of a vector-valued integrand with `outputs` components.
/// Entry `[m][o]` is the mean of component `o` over the lattice shifted by `U_m`.
pub fn shift_means<T, F>(rule: &LatticeRule, outputs: usize, f: F) -> Result<Vec<Vec<T>>>
where
    T: Real,
    F: Fn(&[T], &mut [T]) + Sync,
{
    let n = rule.n_points;
    let inv_n = T::one() / T::c(n as f64);
    let two = T::c(2.0);
    (0..rule.n_shifts)
        .into_par_iter()
        .map(|m| {
            let shift: Vec<T> = rule.shift(m);
            let mut x = vec![T::zero(); rule.dim];
            let mut out = vec![T::zero(); outputs];
            let mut sums = vec![T::zero(); outputs];
            for i in 0..n {
                for ((xd, &z), &u) in x.iter_mut().zip(&rule.generating_vector).zip(&shift) {
                    let base = T::c(((i * z) % n) as f64) * inv_n + u;
                    let frac = if base >= T::one() { base - T::one() } else { base };
                    *xd = if rule.periodize {
                        T::one() - (two * frac - T::one()).abs()
                    } else {
                        frac
                    };
                }
                f(&x, &mut out);
                for (s, &v) in sums.iter_mut().zip(&out) {
                    if !v.is_finite() {
                        return Err(LarError::NonFiniteIntegrand {
                            value: v.as_f64(),
                            point: x.iter().map(|v| v.as_f64()).collect(),
                        });
                    }
                    *s = *s + v;
                }
            }
            let count = T::c(n as f64);
            Ok(sums.into_iter().map(|s| s / count).collect())
        })
        .collect()
}

/// Randomized lattice estimate of `∫_{[0,1]^d} f`.
pub fn lattice_integrate<T, F>(f: F, rule: &LatticeRule) -> Result<QmcEstimate<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let means = shift_means(rule, 1, |x: &[T], out: &mut [T]| out[0] = f(x))?;
    let values: Vec<T> = means.into_iter().map(|v| v[0]).collect();
    Ok(QmcEstimate::from_shift_values(&values, rule))
}

/// Estimate of `∫ N / ∫ D` from a two-component integrand `(N, D)` on common points.
/// The standard error is the delta-method spread of the per-shift residuals
/// `N_m − r D_m`. Fails when the mean denominator is within three standard errors of 0.
pub fn lattice_ratio<T, F>(f: F, rule: &LatticeRule) -> Result<QmcEstimate<T>>
where
    T: Real,
    F: Fn(&[T], &mut [T]) + Sync,
{
    let means = shift_means(rule, 2, f)?;
    let num: Vec<T> = means.iter().map(|v| v[0]).collect();
    let den: Vec<T> = means.iter().map(|v| v[1]).collect();
    let (n_mean, _) = mean_se(&num);
    let (d_mean, d_se) = mean_se(&den);
    if !(d_mean > T::c(3.0) * d_se) || d_mean <= T::zero() {
        return Err(LarError::UnreliableDenominator {
            value: d_mean.as_f64(),
            std_error: d_se.as_f64(),
        });
    }
    let ratio = n_mean / d_mean;
    let resid: Vec<T> = num.iter().zip(&den).map(|(&a, &b)| a - ratio * b).collect();
    let (_, r_se) = mean_se(&resid);
    Ok(QmcEstimate {
        value: ratio,
        std_error: r_se / d_mean,
        n_points: rule.n_points,
        n_shifts: rule.n_shifts,
        seed: rule.seed,
        sampled: true,
    })
}
