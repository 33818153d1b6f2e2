mod common;

use common::rng;
use lar_core::quadrature::{
    consecutive_gaussian_pvalue, consecutive_student_pvalue, f_abc, gaussian_spacing_qmc, lattice_integrate,
    lattice_ratio, nested_i, ortho_pvalue_shortcut, ortho_pvalue_survival, rho_equal, student_spacing_qmc,
    tilde_f_abc, LatticeRule, QmcBudget,
};
use lar_core::special::{beta_inc, norm_cdf, norm_pdf, norm_sf};
use lar_core::LarError;
use rand::Rng;

fn budget(seed: u64) -> QmcBudget {
    QmcBudget { n_points: 4093, n_shifts: 16, seed }
}

/// Composite Simpson on `[lo, hi]`; an infinite upper end is mapped by `ℓ = lo + u / (1 − u)`.
fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    if hi.is_infinite() {
        let g = |u: f64| if u >= 1.0 { 0.0 } else { f(lo + u / (1.0 - u)) / ((1.0 - u) * (1.0 - u)) };
        return simpson_finite(&g, 0.0, 1.0);
    }
    simpson_finite(&f, lo, hi)
}

fn simpson_finite(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let m = 40_000;
    let h = (hi - lo) / m as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..m {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Descending knots `λ_1 > ... > λ_k` as sorted absolute Gaussian draws.
fn random_knots(r: &mut impl Rng, k: usize, scale: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| scale * r.random::<f64>() * 4.0).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn knot(knots: &[f64], k: usize) -> f64 {
    if k == 0 {
        f64::INFINITY
    } else {
        knots[k - 1]
    }
}

#[test]
fn constant_integrand_is_exact() {
    for dim in [1, 4, 9, 30] {
        let rule = LatticeRule::from_budget(dim, &budget(3)).unwrap();
        let est = lattice_integrate(|_: &[f64]| 1.0, &rule).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(est.sampled);
    }
}

#[test]
fn linear_moment() {
    let rule = LatticeRule::from_budget(3, &budget(1)).unwrap();
    let est = lattice_integrate(|x: &[f64]| x[0], &rule).unwrap();
    assert!((est.value - 0.5).abs() <= 3.0 * est.std_error, "{est:?}");
}

#[test]
fn product_integrand_within_three_standard_errors() {
    for d in [3, 5, 8] {
        let rule = LatticeRule::from_budget(d, &budget(17)).unwrap();
        let est = lattice_integrate(|x: &[f64]| x.iter().product::<f64>(), &rule).unwrap();
        let want = 0.5f64.powi(d as i32);
        assert!((est.value - want).abs() <= 3.0 * est.std_error, "d = {d}: {est:?}");
        assert!(est.std_error > 0.0);
    }
}

#[test]
fn estimates_are_reproducible_given_the_seed() {
    let f = |x: &[f64]| (x[0] * 3.0).sin() * x[1].exp() + x[2] * x[3];
    let run = |seed| lattice_integrate(f, &LatticeRule::from_budget(4, &budget(seed)).unwrap()).unwrap();
    let (a, b, c) = (run(9), run(9), run(10));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_ne!(a.value.to_bits(), c.value.to_bits());
}

/// Mean of independent randomized estimates matches the integral (t-test at 1%).
#[test]
fn randomized_estimator_is_unbiased() {
    let reps = 100;
    let f = |x: &[f64]| x[0] * x[0] * x[1] + x[2];
    let want = 1.0 / 6.0 + 0.5;
    let values: Vec<f64> = (0..reps)
        .map(|seed| {
            let b = QmcBudget { n_points: 1021, n_shifts: 2, seed };
            lattice_integrate(f, &LatticeRule::from_budget(3, &b).unwrap()).unwrap().value
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let t = (mean - want) / (sd / (reps as f64).sqrt());
    assert!(t.abs() < 2.63, "t = {t}");
}

#[test]
fn non_finite_integrand_reports_the_point() {
    let rule = LatticeRule::from_budget(2, &budget(0)).unwrap();
    let err = lattice_integrate(|x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 1.0 }, &rule).unwrap_err();
    match err {
        LarError::NonFiniteIntegrand { point, .. } => {
            assert_eq!(point.len(), 2);
            assert!(point[0] > 0.5);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn ratio_with_vanishing_denominator_is_unreliable() {
    let rule = LatticeRule::from_budget(1, &budget(0)).unwrap();
    let err = lattice_ratio(|x: &[f64], out: &mut [f64]| {
        out[0] = 1.0;
        out[1] = x[0] - 0.5;
    }, &rule)
    .unwrap_err();
    assert!(matches!(err, LarError::UnreliableDenominator { .. }));
}

#[test]
fn lattice_rule_validation() {
    assert!(LatticeRule::new(2, 7, vec![1, 7], 4, 0).is_err());
    assert!(LatticeRule::new(2, 8, vec![1, 4], 4, 0).is_err());
    assert!(LatticeRule::new(2, 7, vec![1, 3], 1, 0).is_err());
    assert!(LatticeRule::korobov(3, 1000, 4, 0).is_err());
    let rule = LatticeRule::korobov(30, 16381, 4, 0).unwrap();
    assert_eq!(rule.generating_vector.len(), 30);
    assert_eq!(rule.generating_vector[0], 1);
}

#[test]
fn nested_integral_convention_for_adjacent_indices() {
    let est = nested_i(&[1.3, 0.7], 1.0, 1, 2, 0.9, 0.2, &budget(0)).unwrap();
    assert_eq!(est.value, 1.0);
    assert!(!est.sampled);
}

#[test]
fn nested_integral_equal_rho_is_simplex_volume() {
    let rho = [1.0; 6];
    let est = nested_i(&rho, 1.0, 1, 5, 0.9, 0.1, &budget(4)).unwrap();
    let want = 0.8f64.powi(3) / 6.0;
    assert!((est.value - want).abs() <= 3.0 * est.std_error + 1e-12, "{est:?} vs {want}");
}

#[test]
fn nested_integral_empty_region_is_zero() {
    let est = nested_i(&[1.0; 4], 1.0, 1, 4, 0.2, 0.6, &budget(0)).unwrap();
    assert_eq!(est.value, 0.0);
    assert!(!est.sampled);
}

/// Two inner variables with distinct scales against a one-dimensional reduction:
/// `∫_{ℓ_b}^{ℓ_a} φ(ℓ/ρ₁)/ρ₁ [Φ(ℓ/ρ₂) − Φ(ℓ_b/ρ₂)] dℓ`.
#[test]
fn nested_integral_two_fold_matches_dense_quadrature() {
    let rho = [1.4, 0.8, 1.1, 0.6];
    let (la, lb) = (1.9, 0.3);
    let s = norm_cdf(la / rho[0]);
    let t = norm_cdf(lb / rho[3]);
    let est = nested_i(&rho, 1.0, 1, 4, s, t, &budget(8)).unwrap();
    let (r1, r2) = (rho[1], rho[2]);
    let want = simpson(|l| norm_pdf(l / r1) / r1 * (norm_cdf(l / r2) - norm_cdf(lb / r2)), lb, la);
    assert!((est.value - want).abs() <= 3.0 * est.std_error + 1e-4, "{est:?} vs {want}");
}

#[test]
fn f_abc_vanishes_at_and_outside_the_bottom_knot() {
    let rho = [1.0, 0.9, 1.2, 0.8];
    let b = budget(0);
    for t in [0.5, 0.2, 3.5] {
        let est = f_abc(&rho, 1.0, 3.0, 0.5, t, (0, 2, 4), &b).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(!est.sampled);
    }
    let est = tilde_f_abc(&rho, 5.0, 3.0, 0.5, 0.5, (0, 2, 4), &b).unwrap();
    assert_eq!(est.value, 0.0);
}

#[test]
fn f_abc_is_nondecreasing_in_t() {
    let rho = [1.0, 0.9, 1.2, 0.8, 1.1];
    let (la, lc) = (3.2, 0.4);
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=12 {
        let t = lc + (la - lc) * i as f64 / 12.0;
        let est = f_abc(&rho, 1.0, la, lc, t, (1, 3, 5), &budget(2)).unwrap();
        if let Some((v, se)) = prev {
            assert!(est.value >= v - 3.0 * (se + est.std_error), "t = {t}");
        }
        prev = Some((est.value, est.std_error));
    }
}

#[test]
fn consecutive_qmc_matches_the_gaussian_closed_form() {
    let mut r = rng(40);
    for _ in 0..20 {
        let k = 6;
        let knots = random_knots(&mut r, k, 1.0);
        let rho: Vec<f64> = (0..k).map(|_| 0.5 + r.random::<f64>()).collect();
        let sigma = 0.5 + r.random::<f64>();
        let knots: Vec<f64> = knots.iter().map(|v| v * sigma).collect();
        for a in 0..k - 1 {
            let (la, lb, lc) = (knot(&knots, a), knots[a], knots[a + 1]);
            let qmc = gaussian_spacing_qmc(&rho, sigma, (la, lb, lc), (a, a + 1, a + 2), &budget(1)).unwrap();
            let closed = consecutive_gaussian_pvalue(rho[a], sigma, la, lb, lc);
            assert!((qmc.value - closed).abs() < 1e-6, "{} vs {closed}", qmc.value);
        }
    }
}

#[test]
fn consecutive_gaussian_closed_form_first_step() {
    let (l1, l2) = (2.3, 1.1);
    let p = consecutive_gaussian_pvalue(1.0, 1.0, f64::INFINITY, l1, l2);
    assert!((p - norm_sf(l1) / norm_sf(l2)).abs() < 1e-15);
    assert_eq!(consecutive_gaussian_pvalue(1.0, 1.0, 3.0, 1.0, 1.0), 1.0);
}

#[test]
fn consecutive_student_matches_one_dimensional_quadrature() {
    let mut r = rng(41);
    for _ in 0..10 {
        let k = 4;
        let knots = random_knots(&mut r, k, 1.0);
        let rho: Vec<f64> = (0..k).map(|_| 0.5 + r.random::<f64>()).collect();
        let nu = [3.0, 10.0, 45.0][r.random_range(0..3)];
        for a in 0..k - 1 {
            let (la, lb, lc) = (knot(&knots, a), knots[a], knots[a + 1]);
            let rb = rho[a];
            let kernel = |l: f64| (1.0 + (l / rb).powi(2) / nu).powf(-(nu + 1.0) / 2.0);
            let want = simpson(kernel, lb, la) / simpson(kernel, lc, la);
            let closed = consecutive_student_pvalue(rb, nu, la, lb, lc);
            assert!((closed - want).abs() < 1e-8, "closed {closed} vs {want}");
            let qmc = student_spacing_qmc(&rho, nu, (la, lb, lc), (a, a + 1, a + 2), &budget(5)).unwrap();
            assert!((qmc.value - want).abs() < 1e-5, "qmc {} vs {want}", qmc.value);
        }
    }
}

/// Orthogonal design: the QMC ratio against the Beta distribution of the uniform
/// order statistic, over 50 random ordered knot triples.
#[test]
fn orthogonal_qmc_matches_beta_order_statistics() {
    let mut r = rng(42);
    let rho = [1.0; 8];
    for trial in 0..50 {
        let a = r.random_range(0..3);
        let b = a + 1 + r.random_range(0..3);
        let c = b + 1 + r.random_range(0..3);
        let knots = random_knots(&mut r, c, 1.0);
        let lam = (knot(&knots, a), knots[b - 1], knots[c - 1]);
        let qmc = gaussian_spacing_qmc(&rho, 1.0, lam, (a, b, c), &budget(trial)).unwrap();
        let beta = ortho_pvalue_survival(norm_sf(lam.0), norm_sf(lam.1), norm_sf(lam.2), a, b, c).unwrap();
        assert!(
            (qmc.value - beta).abs() <= 3.0 * qmc.std_error + 1e-3,
            "({a},{b},{c}): qmc {} ± {} vs beta {beta}",
            qmc.value,
            qmc.std_error
        );
        let top = f_abc(&rho, 1.0, lam.0, lam.2, lam.0, (a, b, c), &budget(trial)).unwrap();
        let mid = f_abc(&rho, 1.0, lam.0, lam.2, lam.1, (a, b, c), &budget(trial)).unwrap();
        let ratio = mid.value / top.value;
        let tol = 3.0 * (mid.std_error + ratio * top.std_error) / top.value + 1e-3;
        assert!((1.0 - ratio - beta).abs() <= tol, "F ratio {ratio} vs beta {beta}");
    }
}

#[test]
fn beta_shortcut_examples() {
    assert!((ortho_pvalue_shortcut(1.0f64, 0.5, 0.0, 0, 1, 2).unwrap() - 0.5).abs() < 1e-15);
    let (fa, fb, fc) = (0.9f64, 0.55, 0.2);
    let p = ortho_pvalue_shortcut(fa, fb, fc, 2, 3, 4).unwrap();
    assert!((p - (1.0 - (fb - fc) / (fa - fc))).abs() < 1e-14);
    assert!(ortho_pvalue_shortcut(0.2, 0.5, 0.1, 0, 1, 2).is_err());
    assert!(ortho_pvalue_shortcut(0.9, 0.5, 0.1, 1, 1, 2).is_err());
    let y: f64 = 0.3;
    let p = ortho_pvalue_shortcut(1.0, 1.0 - y, 0.0, 0, 1, 3).unwrap();
    assert!((p - (1.0 - (1.0 - y).powi(2))).abs() < 1e-14);
}

/// `(b−a, c−b) = (2, 3)`: probability that the 2nd smallest of four uniforms falls
/// below `y`, estimated from 10⁶ draws.
#[test]
fn beta_shortcut_matches_order_statistic_simulation() {
    let mut r = rng(43);
    let (fa, fb, fc) = (0.95, 0.6, 0.1);
    let y = (fa - fb) / (fa - fc);
    let draws = 1_000_000;
    let mut hits = 0usize;
    for _ in 0..draws {
        let mut u: [f64; 4] = std::array::from_fn(|_| r.random::<f64>());
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if u[1] <= y {
            hits += 1;
        }
    }
    let freq = hits as f64 / draws as f64;
    let p = ortho_pvalue_shortcut(fa, fb, fc, 1, 3, 6).unwrap();
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((freq - p).abs() <= 3.0 * se, "{freq} vs {p}");
    assert!((p - beta_inc(2.0, 3.0, y)).abs() < 1e-14);
}

#[test]
fn large_nu_student_ratio_matches_gaussian() {
    let rho = [1.0, 0.8, 1.3, 0.9, 1.1];
    let knots = [3.1, 2.2, 1.6, 0.9, 0.4];
    for (a, b, c) in [(0, 2, 4), (1, 2, 5), (0, 1, 3)] {
        let lam = (knot(&knots, a), knots[b - 1], knots[c - 1]);
        let g = gaussian_spacing_qmc(&rho, 1.0, lam, (a, b, c), &budget(6)).unwrap();
        let t = student_spacing_qmc(&rho, 1e6, lam, (a, b, c), &budget(6)).unwrap();
        assert!((g.value - t.value).abs() < 1e-3, "({a},{b},{c}) {} vs {}", g.value, t.value);
    }
}

#[test]
fn equal_rho_detection() {
    assert!(rho_equal(&[2.0, 1.0, 1.0, 1.0 + 1e-12, 5.0], 1, 5));
    assert!(!rho_equal(&[1.0, 1.0, 1.1], 0, 4));
    assert!(rho_equal(&[3.0, 1.0], 0, 2));
}

#[test]
fn dimension_follows_the_triple() {
    let rho = [1.0, 0.9, 1.2, 0.8, 1.1, 0.7];
    let est = f_abc(&rho, 1.0, 3.0, 0.2, 1.0, (1, 3, 6), &budget(0)).unwrap();
    assert!(est.sampled);
    assert!(LatticeRule::from_budget(6 - 1 - 1, &budget(0)).is_ok());
    assert!(f_abc(&rho, 1.0, 3.0, 0.2, 1.0, (1, 3, 9), &budget(0)).is_err());
    assert!(f_abc(&rho, 1.0, 3.0, 0.2, 1.0, (3, 3, 5), &budget(0)).is_err());
}

fn simpson_n(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
    let h = (hi - lo) / m as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..m {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Two free knots between `Λ_1` and `Λ_4`: the joint t kernel integrated by nested
/// Simpson rules over `Λ_1 >= ℓ_2 >= ℓ_3 >= Λ_4`.
#[test]
fn studentized_non_consecutive_matches_two_dimensional_quadrature() {
    let rho = [1.0, 0.9, 1.15, 1.0];
    let nu = 6.0;
    let (l1, l4) = (3.0, 0.4);
    let kernel = |x: f64, y: f64| {
        let q = (x / rho[1]).powi(2) + (y / rho[2]).powi(2);
        (-(nu + 2.0) * 0.5 * (q / nu).ln_1p()).exp()
    };
    // ℓ_3 outer, ℓ_2 inner on [ℓ_3, Λ_1].
    let mass_b3 = |lo: f64| simpson_n(&|y| simpson_n(&|x| kernel(x, y), y, l1, 400), lo, l1, 400);
    // ℓ_2 outer, ℓ_3 inner on [Λ_4, ℓ_2].
    let mass_b2 = |lo: f64| simpson_n(&|x| simpson_n(&|y| kernel(x, y), l4, x, 400), lo, l1, 400);
    let total = mass_b3(l4);
    for (b, lb) in [(3, 1.2), (3, 0.7), (2, 1.9), (2, 1.1)] {
        let want = if b == 3 { mass_b3(lb) } else { mass_b2(lb) } / total;
        let est = student_spacing_qmc(&rho, nu, (l1, lb, l4), (1, b, 4), &budget(8)).unwrap();
        assert!((est.value - want).abs() < 1e-5, "b={b}: {} vs {want}", est.value);
    }
}
