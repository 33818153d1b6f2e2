//! Integrals over ordered knot regions.
//!
//! Gaussian case: each knot `ℓ_k` is replaced by its survival coordinate
//! `g_k = 1 − Φ(ℓ_k / (σ ρ_k))`, under which the knot density becomes uniform and the
//! ordering `ℓ_{k-1} >= ℓ_k >= ℓ_b` becomes `g_k ∈ [S_k(ℓ_{k-1}), S_k(ℓ_b)]`. The nested
//! region is mapped to the unit cube by sequential affine substitution, outermost
//! variable first, and the Jacobian is the running product of interval lengths.
//! Survival coordinates keep full precision for large knots, where `Φ` rounds to 1.
//!
//! Studentized case: the kernel is integrated in knot coordinates. Each coordinate is
//! sampled through the closed-form Student t₂ law scaled by `ρ_k`, whose tails are
//! heavier than any t_ν kernel with `ν >= 2`, keeping the importance weights bounded.
//!
//! All knots are passed in units of σ (or σ̂); `λ_0 = +∞`.

use crate::error::{LarError, Result};
use crate::quadrature::lattice::{lattice_integrate, lattice_ratio, LatticeRule, QmcBudget, QmcEstimate};
use crate::real::Real;
use crate::special::{beta_inc_pair, norm_isf, norm_ppf, norm_sf, student_sf};

fn check_triple<T>(rho: &[T], a: usize, b: usize, c: usize) -> Result<()> {
    if !(a < b && b < c) {
        return Err(LarError::RejectedInput(format!("need a < b < c, got ({a}, {b}, {c})")));
    }
    if rho.len() + 1 < c {
        return Err(LarError::DimensionMismatch(format!(
            "rho has {} entries, triple ({a}, {b}, {c}) needs {}",
            rho.len(),
            c - 1
        )));
    }
    Ok(())
}

fn check_rho<T: Real>(rho: &[T], from: usize, to: usize) -> Result<()> {
    for k in from + 1..to {
        if !(rho[k - 1] > T::zero()) || !rho[k - 1].is_finite() {
            return Err(LarError::RejectedInput(format!("rho_{k} must be positive and finite")));
        }
    }
    Ok(())
}

/// `S_k(x) = 1 − Φ(x / ρ_k)`, with `S(+∞) = 0`.
#[inline]
fn sf<T: Real>(x: T, rho: T) -> T {
    norm_sf(x / rho)
}

#[inline]
fn isf<T: Real>(g: T, rho: T) -> T {
    rho * norm_isf(g)
}

/// Volume of `{top >= ℓ_{from+1} >= ... >= ℓ_{to-1} >= bottom}` in survival coordinates,
/// driven by `u` (one entry per inner variable). Zero when the region is empty.
fn gauss_inner<T: Real>(rho: &[T], from: usize, to: usize, top: T, bottom: T, u: &[T]) -> T {
    let mut prev = top;
    let mut w = T::one();
    for (k, &uk) in (from + 1..to).zip(u) {
        let rk = rho[k - 1];
        let lo = sf(prev, rk);
        let hi = sf(bottom, rk);
        let len = hi - lo;
        if !(len > T::zero()) {
            return T::zero();
        }
        w = w * len;
        prev = isf(lo + uk * len, rk);
    }
    w
}

/// Integrand of `F_abc` with the outer survival coordinate of `ℓ_b` in `[lo, hi]`.
#[allow(clippy::too_many_arguments)]
fn gauss_outer<T: Real>(rho: &[T], a: usize, b: usize, c: usize, xa: T, xc: T, lo: T, hi: T, u: &[T]) -> T {
    let len = hi - lo;
    if !(len > T::zero()) {
        return T::zero();
    }
    let xb = isf(lo + u[0] * len, rho[b - 1]);
    let split = b - a;
    let left = gauss_inner(rho, a, b, xa, xb, &u[1..split]);
    if left == T::zero() {
        return T::zero();
    }
    len * left * gauss_inner(rho, b, c, xb, xc, &u[split..])
}

/// `𝓘_ab(s, t)` in CDF coordinates: `s = Φ_a(ℓ_a)` (1 for `a = 0`), `t = Φ_b(ℓ_b)`.
/// Equal to 1 exactly when `b = a + 1`.
pub fn nested_i<T: Real>(rho: &[T], sigma: T, a: usize, b: usize, s: T, t: T, budget: &QmcBudget) -> Result<QmcEstimate<T>> {
    if a >= b {
        return Err(LarError::RejectedInput(format!("need a < b, got ({a}, {b})")));
    }
    if !(sigma > T::zero()) {
        return Err(LarError::RejectedInput("sigma must be positive".into()));
    }
    if rho.len() < b.max(1) {
        return Err(LarError::DimensionMismatch(format!("rho has {} entries, need {b}", rho.len())));
    }
    check_rho(rho, a, b)?;
    if b == a + 1 {
        return Ok(QmcEstimate::exact(T::one(), budget));
    }
    let top = if a == 0 { T::infinity() } else { rho[a - 1] * norm_ppf(s) };
    let bottom = rho[b - 1] * norm_ppf(t);
    if sf(bottom, rho[a]) <= sf(top, rho[a]) {
        return Ok(QmcEstimate::exact(T::zero(), budget));
    }
    let rule = LatticeRule::from_budget(b - a - 1, budget)?;
    lattice_integrate(|u: &[T]| gauss_inner(rho, a, b, top, bottom, u), &rule)
}

/// `F_abc(t) = ∫_{Φ_b(λ_c)}^{Φ_b(t)} 𝓘_ab(F_a, f_b) 𝓘_bc(f_b, F_c) df_b` for
/// `λ_c <= t <= λ_a`, and 0 outside that range.
pub fn f_abc<T: Real>(
    rho: &[T],
    sigma: T,
    lambda_a: T,
    lambda_c: T,
    t: T,
    (a, b, c): (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<QmcEstimate<T>> {
    check_triple(rho, a, b, c)?;
    check_rho(rho, a, c)?;
    if !(sigma > T::zero()) {
        return Err(LarError::RejectedInput("sigma must be positive".into()));
    }
    let (xa, xc, xt) = (lambda_a / sigma, lambda_c / sigma, t / sigma);
    if !(xc < xa) || xt <= xc || xt > xa {
        return Ok(QmcEstimate::exact(T::zero(), budget));
    }
    let rb = rho[b - 1];
    let (lo, hi) = (sf(xt, rb), sf(xc, rb));
    let rule = LatticeRule::from_budget(c - a - 1, budget)?;
    lattice_integrate(|u: &[T]| gauss_outer(rho, a, b, c, xa, xc, lo, hi, u), &rule)
}

/// `1 − F_abc(λ_b) / F_abc(λ_a)` by QMC, computed as the ratio of the integrals over
/// `ℓ_b ∈ [λ_b, λ_a]` and `ℓ_b ∈ [λ_c, λ_a]` on shared points.
pub fn gaussian_spacing_qmc<T: Real>(
    rho: &[T],
    sigma: T,
    (lambda_a, lambda_b, lambda_c): (T, T, T),
    (a, b, c): (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<QmcEstimate<T>> {
    check_triple(rho, a, b, c)?;
    check_rho(rho, a, c)?;
    if !(sigma > T::zero()) {
        return Err(LarError::RejectedInput("sigma must be positive".into()));
    }
    let (xa, xb, xc) = (lambda_a / sigma, lambda_b / sigma, lambda_c / sigma);
    let rb = rho[b - 1];
    let top = sf(xa, rb);
    let (mid, bottom) = (sf(xb.min(xa).max(xc), rb), sf(xc, rb));
    let rule = LatticeRule::from_budget(c - a - 1, budget)?;
    lattice_ratio(
        |u: &[T], out: &mut [T]| {
            out[0] = gauss_outer(rho, a, b, c, xa, xc, top, mid, u);
            out[1] = gauss_outer(rho, a, b, c, xa, xc, top, bottom, u);
        },
        &rule,
    )
}

/// Consecutive triple `(a, a+1, a+2)` in closed form:
/// `(S(λ_b) − S(λ_a)) / (S(λ_c) − S(λ_a))` with `S = 1 − Φ(· / (σ ρ_b))`.
/// Returns 1 when the spacing is degenerate.
pub fn consecutive_gaussian_pvalue<T: Real>(rho_b: T, sigma: T, lambda_a: T, lambda_b: T, lambda_c: T) -> T {
    let s = |x: T| sf(x / sigma, rho_b);
    spacing_ratio(s(lambda_a), s(lambda_b), s(lambda_c))
}

/// Studentized consecutive triple with Student t_ν survival `S(Λ / ρ_b)`.
pub fn consecutive_student_pvalue<T: Real>(rho_b: T, nu: T, big_a: T, big_b: T, big_c: T) -> T {
    let s = |x: T| student_sf(x / rho_b, nu);
    spacing_ratio(s(big_a), s(big_b), s(big_c))
}

fn spacing_ratio<T: Real>(sa: T, sb: T, sc: T) -> T {
    let den = sc - sa;
    if !(den > T::zero()) {
        return T::one();
    }
    ((sb - sa) / den).max(T::zero()).min(T::one())
}

/// True when `ρ_{a+1}, ..., ρ_{c-1}` agree to `1e-10` relative, the case in which
/// the survival coordinates of the inner knots are i.i.d. uniform order statistics.
pub fn rho_equal<T: Real>(rho: &[T], a: usize, c: usize) -> bool {
    let slice = &rho[a..c - 1];
    let Some(&r0) = slice.first() else {
        return true;
    };
    let tol = T::tol(1e-10, 16.0);
    slice.iter().all(|&r| (r - r0).abs() <= tol * r0.abs())
}

/// Orthogonal-design p-value from CDF coordinates `F_a >= F_b >= F_c` (`F_0 = 1`).
///
/// The survival coordinate of `λ_b` is the `(b−a)`-th smallest of `c−a−1` uniforms on
/// `[1 − F_a, 1 − F_c]`, so the p-value is `I_y(b−a, c−b)` with
/// `y = (F_a − F_b) / (F_a − F_c)`.
pub fn ortho_pvalue_shortcut<T: Real>(fa: T, fb: T, fc: T, a: usize, b: usize, c: usize) -> Result<T> {
    if !(a < b && b < c) {
        return Err(LarError::RejectedInput(format!("need a < b < c, got ({a}, {b}, {c})")));
    }
    if !(fa >= fb && fb >= fc && fa > fc) {
        return Err(LarError::RejectedInput(format!(
            "transformed knots must satisfy F_a >= F_b >= F_c with F_a > F_c, got ({fa}, {fb}, {fc})"
        )));
    }
    let den = fa - fc;
    Ok(beta_pvalue((fa - fb) / den, (fb - fc) / den, a, b, c))
}

/// Survival-coordinate form of [`ortho_pvalue_shortcut`]: `S_a <= S_b <= S_c`.
pub fn ortho_pvalue_survival<T: Real>(sa: T, sb: T, sc: T, a: usize, b: usize, c: usize) -> Result<T> {
    if !(a < b && b < c) {
        return Err(LarError::RejectedInput(format!("need a < b < c, got ({a}, {b}, {c})")));
    }
    if !(sa <= sb && sb <= sc) {
        return Err(LarError::RejectedInput("survival coordinates out of order".into()));
    }
    let den = sc - sa;
    if !(den > T::zero()) {
        return Ok(T::one());
    }
    Ok(beta_pvalue((sb - sa) / den, (sc - sb) / den, a, b, c))
}

fn beta_pvalue<T: Real>(y: T, one_minus_y: T, a: usize, b: usize, c: usize) -> T {
    let p = beta_inc_pair(T::from_count(b - a), T::from_count(c - b), y, one_minus_y);
    p.max(T::zero()).min(T::one())
}

/// Survival function of Student's t with 2 degrees of freedom, in closed form.
#[inline]
fn t2_sf<T: Real>(y: T) -> T {
    if y.is_infinite() {
        return if y > T::zero() { T::zero() } else { T::one() };
    }
    let ay = y.abs();
    let r = (T::c(2.0) + ay * ay).sqrt();
    let upper = T::one() / (r * (r + ay));
    if y >= T::zero() {
        upper
    } else {
        T::one() - upper
    }
}

#[inline]
fn t2_isf<T: Real>(s: T) -> T {
    (T::one() - T::c(2.0) * s) / (T::c(2.0) * s * (T::one() - s)).sqrt()
}

#[inline]
fn t2_pdf<T: Real>(y: T) -> T {
    let r = T::c(2.0) + y * y;
    T::one() / (r * r.sqrt())
}

/// Samples `ℓ_{from+1} >= ... >= ℓ_{to−1}` inside `[bottom, top]` from truncated `t₂`
/// proposals. Returns the proposal weight and `Σ (ℓ_k/ρ_k)²`, or `None` for an empty region.
fn student_block<T: Real>(rho: &[T], from: usize, to: usize, top: T, bottom: T, u: &[T]) -> Option<(T, T)> {
    let mut prev = top;
    let mut w = T::one();
    let mut q = T::zero();
    for (k, &uk) in (from + 1..to).zip(u) {
        let rk = rho[k - 1];
        let lo = t2_sf(prev / rk);
        let hi = t2_sf(bottom / rk);
        let len = hi - lo;
        if !(len > T::zero()) {
            return None;
        }
        let y = t2_isf(lo + uk * len);
        if !y.is_finite() {
            return None;
        }
        w = w * len * rk / t2_pdf(y);
        q = q + y * y;
        prev = rk * y;
    }
    Some((w, q))
}

/// Joint kernel `[1 + Σ_{k=a+1}^{c−1} (ℓ_k/ρ_k)²/ν]^{−(ν+c−1−a)/2}` over the ordered
/// region, with the survival coordinate of `ℓ_b` in `[lo, hi]` as `u[0]`.
#[allow(clippy::too_many_arguments)]
fn student_outer<T: Real>(
    rho: &[T],
    nu: T,
    (a, b, c): (usize, usize, usize),
    big_a: T,
    big_c: T,
    lo: T,
    hi: T,
    u: &[T],
) -> T {
    let len = hi - lo;
    if !(len > T::zero()) {
        return T::zero();
    }
    let rb = rho[b - 1];
    let y = t2_isf(lo + u[0] * len);
    if !y.is_finite() {
        return T::zero();
    }
    let lb = rb * y;
    let split = b - a;
    let Some((wl, ql)) = student_block(rho, a, b, big_a, lb, &u[1..split]) else {
        return T::zero();
    };
    let Some((wr, qr)) = student_block(rho, b, c, lb, big_c, &u[split..]) else {
        return T::zero();
    };
    let expo = (nu + T::from_count(c - 1 - a)) * T::c(0.5);
    let q = y * y + ql + qr;
    len * rb / t2_pdf(y) * wl * wr * (-(expo * (q / nu).ln_1p())).exp()
}

/// `F̃_abc(t)`: the joint kernel `[1 + Σ_{k=a+1}^{c−1} (ℓ_k/ρ_k)²/ν]^{−(ν+c−1−a)/2}`
/// integrated over `Λ_a >= ℓ_{a+1} >= ... >= ℓ_{c−1} >= Λ_c` with `ℓ_b <= t`, for
/// `Λ_c <= t <= Λ_a`, and 0 outside. For consecutive triples this is the Student
/// density of `ℓ_b` integrated over `[Λ_c, t]`.
pub fn tilde_f_abc<T: Real>(
    rho: &[T],
    nu: T,
    big_a: T,
    big_c: T,
    t: T,
    (a, b, c): (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<QmcEstimate<T>> {
    check_triple(rho, a, b, c)?;
    check_rho(rho, a, c)?;
    if !(nu >= T::one()) {
        return Err(LarError::RejectedInput("degrees of freedom must be >= 1".into()));
    }
    if !(big_c < big_a) || t <= big_c || t > big_a {
        return Ok(QmcEstimate::exact(T::zero(), budget));
    }
    let rb = rho[b - 1];
    let (lo, hi) = (t2_sf(t / rb), t2_sf(big_c / rb));
    let rule = LatticeRule::from_budget(c - a - 1, budget)?;
    lattice_integrate(|u: &[T]| student_outer(rho, nu, (a, b, c), big_a, big_c, lo, hi, u), &rule)
}

/// `1 − F̃_abc(Λ_b) / F̃_abc(Λ_a)` by QMC on shared points.
pub fn student_spacing_qmc<T: Real>(
    rho: &[T],
    nu: T,
    (big_a, big_b, big_c): (T, T, T),
    (a, b, c): (usize, usize, usize),
    budget: &QmcBudget,
) -> Result<QmcEstimate<T>> {
    check_triple(rho, a, b, c)?;
    check_rho(rho, a, c)?;
    if !(nu >= T::one()) {
        return Err(LarError::RejectedInput("degrees of freedom must be >= 1".into()));
    }
    let rb = rho[b - 1];
    let top = t2_sf(big_a / rb);
    let mid = t2_sf(big_b.min(big_a).max(big_c) / rb);
    let bottom = t2_sf(big_c / rb);
    let rule = LatticeRule::from_budget(c - a - 1, budget)?;
    lattice_ratio(
        |u: &[T], out: &mut [T]| {
            out[0] = student_outer(rho, nu, (a, b, c), big_a, big_c, top, mid, u);
            out[1] = student_outer(rho, nu, (a, b, c), big_a, big_c, top, bottom, u);
        },
        &rule,
    )
}
