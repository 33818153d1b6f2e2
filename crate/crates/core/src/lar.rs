//! The LAR path in three equivalent formulations, and the Irrepresentable Check.

use serde::{Deserialize, Serialize};

use crate::model::{ActiveSequence, CorrelationState, SignedIndex};
use crate::real::{pivot_tol, theta_margin, tie_tol, Real};

/// Which recursion computes the knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Residual-correlation recursion with a direction vector per step.
    Standard,
    /// Max of frozen values `(Z_j − Π(Z_j)) / (1 − θ_j)` over admissible `j`.
    Projected,
    /// Schur-complement updates of `(R̄, z̄, T)`.
    Recursive,
}

/// Why a path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    /// All requested knots were computed.
    Complete,
    /// No inactive signed index had `θ < 1`.
    NoAdmissible,
    /// The next predictor is numerically dependent on the active ones.
    RankDeficient,
    /// A knot `<= 0` was reached; it is recorded and the path stops.
    NonPositiveKnot,
}

/// Knots `λ_1 >= λ_2 >= ...` and the signed indices entering at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LarPath<T> {
    pub knots: Vec<T>,
    pub signed: Vec<SignedIndex>,
    /// Entry `ℓ − 1` is `max_j |θ̄_j(î_1..î_ℓ)|` over inactive plain `j`.
    pub theta_max_per_step: Vec<T>,
    /// Largest `k <= steps` for which the Irrepresentable Check holds along the path.
    pub irrepresentable_upto: usize,
    pub status: PathStatus,
    /// Set when some argmax had a competitor within the tie window.
    pub tie: bool,
    /// Requested `K`; a complete path has `K + 1` knots.
    pub steps: usize,
    pub formulation: Formulation,
}

impl<T: Real> LarPath<T> {
    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.knots.len() == self.steps + 1
    }

    pub fn plain_indices(&self) -> Vec<usize> {
        self.signed.iter().map(|i| i.plain).collect()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.signed.iter().map(|i| if i.positive { 1 } else { -1 }).collect()
    }

    /// Number of leading steps `ℓ <= upto` whose θ diagnostic stays below `1`.
    pub fn irrepresentable_prefix(&self, upto: usize) -> usize {
        leading_ok(&self.theta_max_per_step, upto)
    }
}

fn leading_ok<T: Real>(theta_max: &[T], upto: usize) -> usize {
    let bound = T::one() - theta_margin::<T>();
    theta_max
        .iter()
        .take(upto)
        .take_while(|&&t| t <= bound)
        .count()
}

/// Running argmax over signed indices visited in increasing raw order.
struct Argmax<T> {
    best: Option<(SignedIndex, T)>,
    tie: bool,
}

impl<T: Real> Argmax<T> {
    fn new() -> Self {
        Self { best: None, tie: false }
    }

    fn offer(&mut self, i: SignedIndex, value: T) {
        if !value.is_finite() {
            return;
        }
        match self.best {
            None => self.best = Some((i, value)),
            Some((_, b)) => {
                let window = tie_tol::<T>() * T::one().max(b.abs());
                if value > b + window {
                    self.best = Some((i, value));
                    self.tie = false;
                } else if (value - b).abs() <= window {
                    self.tie = true;
                }
            }
        }
    }
}

/// Visits every inactive signed index in raw order with its `(θ, numerator)` pair
/// and offers `numerator / (1 − θ)` when admissible.
fn select<T: Real>(p: usize, active: &[bool], theta: &[T], num: &[T]) -> Argmax<T> {
    let bound = T::one() - theta_margin::<T>();
    let mut am = Argmax::new();
    for positive in [true, false] {
        for j in 0..p {
            if active[j] {
                continue;
            }
            let (t, z) = if positive { (theta[j], num[j]) } else { (-theta[j], -num[j]) };
            if t <= bound {
                am.offer(SignedIndex::new(j, positive), z / (T::one() - t));
            }
        }
    }
    am
}

fn inactive_max_abs<T: Real>(active: &[bool], theta: &[T]) -> T {
    theta
        .iter()
        .zip(active)
        .filter(|(_, &a)| !a)
        .fold(T::zero(), |m, (&t, _)| m.max(t.abs()))
}

struct Recorder<T> {
    path: LarPath<T>,
}

impl<T: Real> Recorder<T> {
    fn new(steps: usize, formulation: Formulation) -> Self {
        Self {
            path: LarPath {
                knots: Vec::new(),
                signed: Vec::new(),
                theta_max_per_step: Vec::new(),
                irrepresentable_upto: 0,
                status: PathStatus::Complete,
                tie: false,
                steps,
                formulation,
            },
        }
    }

    /// Records a selection; returns `false` when the path must stop.
    fn record(&mut self, am: Argmax<T>) -> Option<(SignedIndex, T)> {
        let Some((i, lambda)) = am.best else {
            self.path.status = PathStatus::NoAdmissible;
            return None;
        };
        self.path.tie |= am.tie;
        self.path.knots.push(lambda);
        self.path.signed.push(i);
        if lambda <= T::zero() {
            self.path.status = PathStatus::NonPositiveKnot;
            return None;
        }
        Some((i, lambda))
    }

    fn finish(mut self) -> LarPath<T> {
        let k = self.path.steps;
        self.path.irrepresentable_upto = leading_ok(&self.path.theta_max_per_step, k).min(self.path.len());
        self.path
    }
}

/// Standard formulation: residual correlations `N̄` move linearly along the
/// equiangular direction until an inactive predictor ties the active ones.
pub fn lar_path_standard<T: Real>(state: &CorrelationState<T>, steps: usize) -> LarPath<T> {
    let p = state.p();
    let mut rec = Recorder::new(steps, Formulation::Standard);
    let mut active = ActiveSequence::new(p);
    let mut member = vec![false; p];
    let mut resid = state.zbar().to_vec();
    let mut theta = vec![T::zero(); p];
    let mut lambda_prev = T::zero();
    for step in 0..=steps {
        let num: Vec<T> = if step == 0 {
            resid.clone()
        } else {
            resid.iter().zip(&theta).map(|(&n, &t)| n - lambda_prev * t).collect()
        };
        let Some((i, lambda)) = rec.record(select(p, &member, &theta, &num)) else {
            break;
        };
        if step > 0 {
            let drop = lambda_prev - lambda;
            resid.iter_mut().zip(&theta).for_each(|(n, &t)| *n = *n - drop * t);
        }
        if active.push(state, i).is_err() {
            if step < steps {
                rec.path.status = PathStatus::RankDeficient;
            }
            break;
        }
        member[i.plain] = true;
        theta = active.plain_theta_pi(state).0;
        rec.path.theta_max_per_step.push(inactive_max_abs(&member, &theta));
        lambda_prev = lambda;
    }
    rec.finish()
}

/// Projected formulation: each knot is the largest frozen value among admissible `j`.
pub fn lar_path_projected<T: Real>(state: &CorrelationState<T>, steps: usize) -> LarPath<T> {
    let p = state.p();
    let mut rec = Recorder::new(steps, Formulation::Projected);
    let mut active = ActiveSequence::new(p);
    let mut member = vec![false; p];
    let mut theta = vec![T::zero(); p];
    let mut pi = vec![T::zero(); p];
    for step in 0..=steps {
        let num: Vec<T> = state.zbar().iter().zip(&pi).map(|(&z, &q)| z - q).collect();
        let Some((i, _)) = rec.record(select(p, &member, &theta, &num)) else {
            break;
        };
        if active.push(state, i).is_err() {
            if step < steps {
                rec.path.status = PathStatus::RankDeficient;
            }
            break;
        }
        member[i.plain] = true;
        (theta, pi) = active.plain_theta_pi(state);
        rec.path.theta_max_per_step.push(inactive_max_abs(&member, &theta));
    }
    rec.finish()
}

/// Recursive formulation on `p x p` plain quantities. After entering `q` with sign `s`:
/// `R̄ ← R̄ − R̄_{·q} R̄_{q·} / R̄_{qq}`, `z̄ ← z̄ − R̄_{·q} z̄_q / R̄_{qq}`,
/// `t̄ ← t̄ + s R̄_{·q} (1 − s t̄_q) / R̄_{qq}`.
pub fn lar_path_recursive<T: Real>(state: &CorrelationState<T>, steps: usize) -> LarPath<T> {
    let (mut rec, _) = recursive_impl(state, steps);
    rec.path.formulation = Formulation::Recursive;
    rec.finish()
}

/// Recursive path together with the internal `t̄` vector after each entered index.
pub fn lar_path_recursive_with_t<T: Real>(
    state: &CorrelationState<T>,
    steps: usize,
) -> (LarPath<T>, Vec<Vec<T>>) {
    let (rec, ts) = recursive_impl(state, steps);
    (rec.finish(), ts)
}

fn recursive_impl<T: Real>(state: &CorrelationState<T>, steps: usize) -> (Recorder<T>, Vec<Vec<T>>) {
    let p = state.p();
    let mut rec = Recorder::new(steps, Formulation::Recursive);
    let mut r = state.dense_gram();
    let mut z = state.zbar().to_vec();
    let mut t = vec![T::zero(); p];
    let mut member = vec![false; p];
    let mut history = Vec::new();
    let cutoff = pivot_tol::<T>() * state.max_diag();
    for step in 0..=steps {
        let Some((i, _)) = rec.record(select(p, &member, &t, &z)) else {
            break;
        };
        let q = i.plain;
        let rqq = r[q * p + q];
        if !(rqq > cutoff) {
            if step < steps {
                rec.path.status = PathStatus::RankDeficient;
            }
            break;
        }
        let s = i.sign::<T>();
        let col: Vec<T> = (0..p).map(|j| r[j * p + q]).collect();
        let zq = z[q];
        let gain = (T::one() - s * t[q]) * s / rqq;
        for j in 0..p {
            z[j] = z[j] - col[j] * zq / rqq;
            t[j] = t[j] + col[j] * gain;
        }
        for j in 0..p {
            let f = col[j] / rqq;
            if f != T::zero() {
                for k in 0..p {
                    r[j * p + k] = r[j * p + k] - f * col[k];
                }
            }
        }
        member[q] = true;
        rec.path.theta_max_per_step.push(inactive_max_abs(&member, &t));
        history.push(t.clone());
    }
    (rec, history)
}

/// Runs the chosen formulation.
pub fn lar_path<T: Real>(state: &CorrelationState<T>, steps: usize, formulation: Formulation) -> LarPath<T> {
    match formulation {
        Formulation::Standard => lar_path_standard(state, steps),
        Formulation::Projected => lar_path_projected(state, steps),
        Formulation::Recursive => lar_path_recursive(state, steps),
    }
}

/// Largest `k <= upto` such that `θ_j(î_1..î_ℓ) < 1` for every `ℓ <= k` and every
/// inactive signed `j`, recomputed from the correlation state.
pub fn irrepresentable_check<T: Real>(state: &CorrelationState<T>, path: &LarPath<T>, upto: usize) -> usize {
    let p = state.p();
    let bound = T::one() - theta_margin::<T>();
    let mut active = ActiveSequence::new(p);
    let mut member = vec![false; p];
    for (k, &i) in path.signed.iter().take(upto).enumerate() {
        if active.push(state, i).is_err() {
            return k;
        }
        member[i.plain] = true;
        let theta = active.plain_theta_pi(state).0;
        if inactive_max_abs(&member, &theta) > bound {
            return k;
        }
    }
    upto.min(path.len())
}
