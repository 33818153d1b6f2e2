//! Variance splitting, spacing-test p-values, admissible model selection and the
//! false-negative test after selection.

use serde::{Deserialize, Serialize};

use crate::conditional::{frozen_geometry, FrozenGeometry};
use crate::error::{LarError, Result};
use crate::lar::{lar_path_projected, LarPath, PathStatus};
use crate::model::{build_correlation_state, dot, orthogonalize, DesignMatrix, ResponseVector, SignedIndex};
use crate::quadrature::{
    consecutive_gaussian_pvalue, consecutive_student_pvalue, gaussian_spacing_qmc, ortho_pvalue_survival, rho_equal,
    student_spacing_qmc, QmcBudget, QmcEstimate,
};
use crate::real::Real;
use crate::special::norm_sf;

/// Two independent residual-space estimates of σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSplit<T> {
    /// `‖E₁ᵀY‖ / √n₁`, for selection-stage tests.
    pub sigma_select: T,
    /// `‖E₂ᵀY‖ / √n₂`, for post-selection tests.
    pub sigma_test: T,
    pub n1: usize,
    pub n2: usize,
    /// Dimension of the span of the active columns (`K + 1`).
    pub active_dim: usize,
    /// Number of canonical vectors `e_1..e_ℓ` consumed to build `E₁` and `E₂`.
    pub canonical_used: usize,
    /// Largest entry of `E₁ᵀE₂`, `E₁ᵀQ`, `E₂ᵀQ` in absolute value (`Q` spans the actives).
    pub orthogonality_residual: T,
}

/// Splits the orthogonal complement of the `K + 1` active columns into `E₁` and `E₂`
/// with `n₁ = ⌈(n − K − 1) / 2⌉` and `n₂ = n − K − 1 − n₁`.
///
/// `E₁` is the projection of `e_1, ..., e_ℓ` onto the complement with `ℓ` minimal,
/// orthonormalized in order with dependent vectors dropped; `E₂` continues with
/// `e_{ℓ+1}, ...` orthogonalized against `E₁` as well.
pub fn split_variance<T: Real>(
    design: &DesignMatrix<T>,
    response: &ResponseVector<T>,
    active_plain: &[usize],
    k: usize,
) -> Result<VarianceSplit<T>> {
    let n = design.nrows();
    if response.len() != n {
        return Err(LarError::DimensionMismatch(format!(
            "response has {} rows, design has {n}",
            response.len()
        )));
    }
    if active_plain.len() != k + 1 {
        return Err(LarError::RejectedInput(format!(
            "need K + 1 = {} active indices, got {}",
            k + 1,
            active_plain.len()
        )));
    }
    if n <= k + 3 {
        return Err(LarError::RejectedInput(format!("variance split needs n > K + 3, got n = {n}, K = {k}")));
    }
    let mut seen = vec![false; design.ncols()];
    for &j in active_plain {
        if j >= design.ncols() || std::mem::replace(&mut seen[j], true) {
            return Err(LarError::RejectedInput(format!("active index {j} out of range or repeated")));
        }
    }
    let rest = n - k - 1;
    let n1 = rest.div_ceil(2);
    let n2 = rest - n1;

    let drop_tol = T::tol(1e-8, 64.0);
    let mut q: Vec<Vec<T>> = Vec::with_capacity(k + 1);
    for &j in active_plain {
        let col = design.column(j);
        let scale = dot(col, col).sqrt();
        let mut v = col.to_vec();
        orthogonalize(&mut v, &q);
        let norm = dot(&v, &v).sqrt();
        if !(norm > drop_tol * scale) {
            return Err(LarError::Split(format!("active column {j} is dependent on the previous ones")));
        }
        v.iter_mut().for_each(|x| *x = *x / norm);
        q.push(v);
    }

    let mut basis = q.clone();
    let mut ell = 0;
    while basis.len() < n && basis.len() < k + 1 + rest {
        if ell == n {
            return Err(LarError::Split("canonical vectors exhausted before the split was complete".into()));
        }
        let mut v = vec![T::zero(); n];
        v[ell] = T::one();
        ell += 1;
        orthogonalize(&mut v, &basis);
        let norm = dot(&v, &v).sqrt();
        if norm > drop_tol {
            v.iter_mut().for_each(|x| *x = *x / norm);
            basis.push(v);
        }
    }
    let e1 = &basis[k + 1..k + 1 + n1];
    let e2 = &basis[k + 1 + n1..];

    let mut residual = T::zero();
    for (i, u) in e1.iter().chain(e2).enumerate() {
        let others = q.iter().chain(if i < n1 { e2 } else { &[][..] });
        for w in others {
            residual = residual.max(dot(u, w).abs());
        }
    }
    if !(residual < T::tol(1e-10, 1024.0)) {
        return Err(LarError::Split(format!("subspaces not orthogonal (residual {residual})")));
    }
    let sigma_of = |e: &[Vec<T>]| {
        let ss: T = e.iter().map(|v| dot(v, &response.values).powi(2)).sum();
        (ss / T::from_count(e.len())).sqrt()
    };
    Ok(VarianceSplit {
        sigma_select: sigma_of(e1),
        sigma_test: sigma_of(e2),
        n1,
        n2,
        active_dim: k + 1,
        canonical_used: ell,
        orthogonality_residual: residual,
    })
}

/// Noise model of a spacing test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScale<T> {
    /// Known σ; Gaussian knot law.
    Known(T),
    /// Independent estimate `σ̂` with `ν` degrees of freedom; Student knot law.
    Studentized { sigma_hat: T, nu: T },
}

/// How a p-value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Qmc,
    BetaShortcut,
    StudentizedQmc,
}

/// A spacing-test p-value with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueReport<T> {
    pub triple: (usize, usize, usize),
    pub p_value: T,
    pub method: Method,
    pub qmc: Option<QmcEstimate<T>>,
    /// Degrees of freedom of the studentized law.
    pub nu: Option<T>,
}

/// Why a test was not carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Refusal {
    /// The Irrepresentable Check holds only for the first `upto` of `needed` steps.
    Irrepresentable { upto: usize, needed: usize },
    /// The path stopped with `knots` of the `needed` knots.
    Truncated { status: PathStatus, knots: usize, needed: usize },
}

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Refusal::Irrepresentable { upto, needed } => {
                write!(f, "irrepresentable check holds up to step {upto}, {needed} required")
            }
            Refusal::Truncated { status, knots, needed } => {
                write!(f, "path stopped ({status:?}) after {knots} of {needed} knots")
            }
        }
    }
}

/// A result, or an explicit refusal to produce one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome<R> {
    Report(R),
    Refused(Refusal),
}

impl<R> Outcome<R> {
    pub fn report(self) -> Option<R> {
        match self {
            Outcome::Report(r) => Some(r),
            Outcome::Refused(_) => None,
        }
    }

    pub fn is_refused(&self) -> bool {
        matches!(self, Outcome::Refused(_))
    }
}

/// Refusal for a path that is too short or fails the Irrepresentable Check before `K`.
pub fn path_refusal<T: Real>(path: &LarPath<T>) -> Option<Refusal> {
    let needed = path.steps + 1;
    if path.len() < needed {
        return Some(Refusal::Truncated {
            status: path.status,
            knots: path.len(),
            needed,
        });
    }
    if path.irrepresentable_upto < path.steps {
        return Some(Refusal::Irrepresentable {
            upto: path.irrepresentable_upto,
            needed: path.steps,
        });
    }
    None
}

/// `λ_k` with `λ_0 = +∞`.
fn knot<T: Real>(knots: &[T], k: usize) -> T {
    if k == 0 {
        T::infinity()
    } else {
        knots[k - 1]
    }
}

fn check_triple<T: Real>(path: &LarPath<T>, geometry: &FrozenGeometry<T>, (a, b, c): (usize, usize, usize)) -> Result<()> {
    if !(a < b && b < c) {
        return Err(LarError::RejectedInput(format!("need a < b < c, got ({a}, {b}, {c})")));
    }
    if c > path.len() || c > path.steps + 1 {
        return Err(LarError::RejectedInput(format!(
            "triple ({a}, {b}, {c}) exceeds the {} knots of the path",
            path.len()
        )));
    }
    if geometry.rho.len() + 1 < c {
        return Err(LarError::DimensionMismatch(format!(
            "geometry has {} steps, triple needs {}",
            geometry.rho.len(),
            c - 1
        )));
    }
    Ok(())
}

/// Spacing-test p-value of `(a, b, c)` under either noise model, with the cheapest
/// exact route: consecutive closed form, then (Gaussian, equal `ρ`) the Beta
/// shortcut, then randomized lattice cubature.
pub fn spacing_pvalue<T: Real>(
    path: &LarPath<T>,
    geometry: &FrozenGeometry<T>,
    scale: NoiseScale<T>,
    triple: (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<Outcome<PValueReport<T>>> {
    check_triple(path, geometry, triple)?;
    if let Some(r) = path_refusal(path) {
        return Ok(Outcome::Refused(r));
    }
    let (a, b, c) = triple;
    let rho = &geometry.rho;
    let consecutive = b == a + 1 && c == a + 2;
    let report = match scale {
        NoiseScale::Known(sigma) => {
            if !(sigma > T::zero()) || !sigma.is_finite() {
                return Err(LarError::RejectedInput("sigma must be positive and finite".into()));
            }
            let lam = (knot(&path.knots, a), knot(&path.knots, b), knot(&path.knots, c));
            if consecutive {
                let p = consecutive_gaussian_pvalue(rho[b - 1], sigma, lam.0, lam.1, lam.2);
                PValueReport { triple, p_value: p, method: Method::ClosedForm, qmc: None, nu: None }
            } else if rho_equal(rho, a, c) {
                let rb = rho[b - 1];
                let s = |x: T| norm_sf(x / (sigma * rb));
                let p = ortho_pvalue_survival(s(lam.0), s(lam.1), s(lam.2), a, b, c)?;
                PValueReport { triple, p_value: p, method: Method::BetaShortcut, qmc: None, nu: None }
            } else {
                let est = gaussian_spacing_qmc(rho, sigma, lam, triple, budget)?;
                PValueReport {
                    triple,
                    p_value: clamp01(est.value),
                    method: Method::Qmc,
                    qmc: Some(est),
                    nu: None,
                }
            }
        }
        NoiseScale::Studentized { sigma_hat, nu } => {
            if !(sigma_hat > T::zero()) || !sigma_hat.is_finite() {
                return Err(LarError::RejectedInput("estimated sigma must be positive and finite".into()));
            }
            if !(nu >= T::one()) {
                return Err(LarError::RejectedInput("degrees of freedom must be >= 1".into()));
            }
            let big = |k: usize| knot(&path.knots, k) / sigma_hat;
            let lam = (big(a), big(b), big(c));
            if consecutive {
                let p = consecutive_student_pvalue(rho[b - 1], nu, lam.0, lam.1, lam.2);
                PValueReport { triple, p_value: p, method: Method::ClosedForm, qmc: None, nu: Some(nu) }
            } else {
                let est = student_spacing_qmc(rho, nu, lam, triple, budget)?;
                PValueReport {
                    triple,
                    p_value: clamp01(est.value),
                    method: Method::StudentizedQmc,
                    qmc: Some(est),
                    nu: Some(nu),
                }
            }
        }
    };
    Ok(Outcome::Report(report))
}

fn clamp01<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Generalized Spacing Test `α̂_abc = 1 − F_abc(λ_b) / F_abc(λ_a)` with known σ.
pub fn gst_pvalue<T: Real>(
    path: &LarPath<T>,
    geometry: &FrozenGeometry<T>,
    sigma: T,
    triple: (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<Outcome<PValueReport<T>>> {
    spacing_pvalue(path, geometry, NoiseScale::Known(sigma), triple, budget)
}

/// Generalized t-Spacing Test `β̂_abc` with `Λ_k = λ_k / σ̂_test` and `ν = n₂`.
pub fn gtst_pvalue<T: Real>(
    path: &LarPath<T>,
    geometry: &FrozenGeometry<T>,
    split: &VarianceSplit<T>,
    triple: (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<Outcome<PValueReport<T>>> {
    let scale = NoiseScale::Studentized {
        sigma_hat: split.sigma_test,
        nu: T::from_count(split.n2),
    };
    spacing_pvalue(path, geometry, scale, triple, budget)
}

/// How the model size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule<T> {
    /// `m̂ = m` regardless of the data.
    Fixed(usize),
    /// Consecutive spacing tests `(a, a+1, a+2)` for `a = 0, 1, ...` at level `α′`;
    /// stops after `γ_FP` consecutive non-significant tests.
    Sequential { alpha_prime: T, gamma_fp: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleTag {
    Fixed,
    Sequential,
    GammaFp,
}

/// One selection-stage test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTest<T> {
    pub a: usize,
    pub p_value: T,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDecision<T> {
    pub m_hat: usize,
    pub rule: RuleTag,
    pub alpha_prime: Option<T>,
    pub gamma_fp: Option<usize>,
    pub audit: Vec<StepTest<T>>,
    /// Set when the sequential scan ran out of tests and `m̂` was capped at `K − 1`.
    pub capped: bool,
}

/// The inputs a selection rule may look at: the knots, the entered indices, the
/// per-step scales they imply and the selection-stage noise scale.
///
/// Built only from a known σ or from `σ̂_select` with `ν = n₁`, so that the
/// estimate reserved for the final test never influences the selected size.
#[derive(Debug, Clone)]
pub struct SelectionView<'a, T> {
    knots: &'a [T],
    indices: &'a [SignedIndex],
    rho: &'a [T],
    steps: usize,
    scale: NoiseScale<T>,
}

impl<'a, T: Real> SelectionView<'a, T> {
    pub fn known(path: &'a LarPath<T>, geometry: &'a FrozenGeometry<T>, sigma: T) -> Self {
        Self::with_scale(path, geometry, NoiseScale::Known(sigma))
    }

    pub fn studentized(path: &'a LarPath<T>, geometry: &'a FrozenGeometry<T>, split: &VarianceSplit<T>) -> Self {
        Self::with_scale(
            path,
            geometry,
            NoiseScale::Studentized {
                sigma_hat: split.sigma_select,
                nu: T::from_count(split.n1),
            },
        )
    }

    /// Arbitrary selection scale, for limit comparisons between noise models.
    pub fn with_scale(path: &'a LarPath<T>, geometry: &'a FrozenGeometry<T>, scale: NoiseScale<T>) -> Self {
        Self {
            knots: &path.knots,
            indices: &path.signed,
            rho: &geometry.rho,
            steps: path.steps,
            scale,
        }
    }

    pub fn indices(&self) -> &[SignedIndex] {
        self.indices
    }

    pub fn scale(&self) -> NoiseScale<T> {
        self.scale
    }

    /// p-value of the consecutive test on `(λ_a, λ_{a+1}, λ_{a+2})`.
    pub fn consecutive_pvalue(&self, a: usize) -> Result<T> {
        let (b, c) = (a + 1, a + 2);
        if c > self.knots.len() || c > self.rho.len() + 1 {
            return Err(LarError::RejectedInput(format!("no knot {c} on the path")));
        }
        let rb = self.rho[b - 1];
        let (la, lb, lc) = (knot(self.knots, a), knot(self.knots, b), knot(self.knots, c));
        Ok(match self.scale {
            NoiseScale::Known(sigma) => consecutive_gaussian_pvalue(rb, sigma, la, lb, lc),
            NoiseScale::Studentized { sigma_hat, nu } => {
                consecutive_student_pvalue(rb, nu, la / sigma_hat, lb / sigma_hat, lc / sigma_hat)
            }
        })
    }
}

/// Chooses `m̂` by the given rule. Sequential rules give `m̂ ∈ [1, K − 1]`.
pub fn select_model<T: Real>(view: &SelectionView<'_, T>, rule: SelectionRule<T>) -> Result<SelectionDecision<T>> {
    let k = view.steps;
    if view.knots.len() < k {
        return Err(LarError::RejectedInput(format!(
            "selection needs at least K = {k} knots, path has {}",
            view.knots.len()
        )));
    }
    match rule {
        SelectionRule::Fixed(m) => {
            if k == 0 || m > k - 1 {
                return Err(LarError::RejectedInput(format!("fixed size {m} outside [0, K - 1] for K = {k}")));
            }
            Ok(SelectionDecision {
                m_hat: m,
                rule: RuleTag::Fixed,
                alpha_prime: None,
                gamma_fp: None,
                audit: Vec::new(),
                capped: false,
            })
        }
        SelectionRule::Sequential { alpha_prime, gamma_fp } => {
            if !(alpha_prime > T::zero() && alpha_prime < T::one()) {
                return Err(LarError::RejectedInput(format!("alpha' = {alpha_prime} outside (0, 1)")));
            }
            if gamma_fp == 0 {
                return Err(LarError::RejectedInput("gamma_FP must be at least 1".into()));
            }
            if k < 2 {
                return Err(LarError::RejectedInput(format!("sequential selection needs K >= 2, got {k}")));
            }
            let tag = if gamma_fp == 1 { RuleTag::Sequential } else { RuleTag::GammaFp };
            let mut audit = Vec::new();
            let mut run = 0;
            let mut a = 0;
            let (m_hat, capped) = loop {
                if a + 2 > k - 1 {
                    break (k - 1, true);
                }
                let p = view.consecutive_pvalue(a)?;
                let significant = p <= alpha_prime;
                audit.push(StepTest { a, p_value: p, significant });
                run = if significant { 0 } else { run + 1 };
                if run == gamma_fp {
                    break (a + 2, false);
                }
                a += 1;
            };
            Ok(SelectionDecision {
                m_hat,
                rule: tag,
                alpha_prime: Some(alpha_prime),
                gamma_fp: Some(gamma_fp),
                audit,
                capped,
            })
        }
    }
}

/// Everything the false-negative test produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalseNegativeResult<T> {
    pub decision: SelectionDecision<T>,
    pub report: PValueReport<T>,
    pub path: LarPath<T>,
    pub split: Option<VarianceSplit<T>>,
}

/// Noise models of the two stages of the false-negative test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stages<T> {
    /// Known σ in both stages.
    Known(T),
    /// `σ̂_select` (`ν = n₁`) for selection and `σ̂_test` (`ν = n₂`) for the final test.
    Split,
    /// Explicit scales for both stages, for limit comparisons.
    Explicit { select: NoiseScale<T>, test: NoiseScale<T> },
}

/// Tests whether the model of size `m̂` missed signal: computes `K + 1` knots,
/// refuses unless the path is complete and passes the Irrepresentable Check up to `K`,
/// selects `m̂` and returns the p-value of `(m̂, m̂ + 1, K + 1)`.
///
/// With `sigma = Some(σ)` the test is Gaussian; otherwise σ is estimated by
/// splitting the residual space.
pub fn false_negative_test<T: Real>(
    design: &DesignMatrix<T>,
    response: &ResponseVector<T>,
    k: usize,
    rule: SelectionRule<T>,
    sigma: Option<T>,
    budget: &QmcBudget,
) -> Result<Outcome<FalseNegativeResult<T>>> {
    let stages = match sigma {
        Some(s) => Stages::Known(s),
        None => Stages::Split,
    };
    false_negative_test_staged(design, response, k, rule, stages, budget)
}

/// [`false_negative_test`] with the noise model of each stage spelled out.
pub fn false_negative_test_staged<T: Real>(
    design: &DesignMatrix<T>,
    response: &ResponseVector<T>,
    k: usize,
    rule: SelectionRule<T>,
    stages: Stages<T>,
    budget: &QmcBudget,
) -> Result<Outcome<FalseNegativeResult<T>>> {
    if k == 0 {
        return Err(LarError::RejectedInput("K must be at least 1".into()));
    }
    let state = build_correlation_state(design, response, None)?;
    let path = lar_path_projected(&state, k);
    if let Some(r) = path_refusal(&path) {
        return Ok(Outcome::Refused(r));
    }
    let geometry = frozen_geometry(&state, &path)?;
    let (select, test, split) = match stages {
        Stages::Known(s) => (NoiseScale::Known(s), NoiseScale::Known(s), None),
        Stages::Split => {
            let split = split_variance(design, response, &path.plain_indices(), k)?;
            let select = NoiseScale::Studentized {
                sigma_hat: split.sigma_select,
                nu: T::from_count(split.n1),
            };
            let test = NoiseScale::Studentized {
                sigma_hat: split.sigma_test,
                nu: T::from_count(split.n2),
            };
            (select, test, Some(split))
        }
        Stages::Explicit { select, test } => (select, test, None),
    };
    let decision = select_model(&SelectionView::with_scale(&path, &geometry, select), rule)?;
    let m = decision.m_hat;
    let outcome = spacing_pvalue(&path, &geometry, test, (m, m + 1, k + 1), budget)?;
    Ok(match outcome {
        Outcome::Refused(r) => Outcome::Refused(r),
        Outcome::Report(report) => Outcome::Report(FalseNegativeResult { decision, report, path, split }),
    })
}
