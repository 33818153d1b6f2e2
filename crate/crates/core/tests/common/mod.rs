//! Shared fixtures and dense-algebra oracles for the integration tests.
#![allow(dead_code)]

use lar_core::model::{DesignMatrix, ResponseVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Column-major Gaussian matrix with unit-norm columns.
pub fn sphere_columns(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut data = normals(n * p, rng);
    for col in data.chunks_mut(n) {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        col.iter_mut().for_each(|v| *v /= norm);
    }
    data
}

pub fn sphere_design(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DesignMatrix<f64> {
    DesignMatrix::from_col_major(n, p, sphere_columns(n, p, rng)).unwrap()
}

pub fn response(values: Vec<f64>) -> ResponseVector<f64> {
    ResponseVector::new(values).unwrap()
}

/// Column `j` of a column-major `n x p` matrix.
pub fn col(data: &[f64], n: usize, j: usize) -> &[f64] {
    &data[j * n..(j + 1) * n]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` (row-major `k x k`) by Gaussian elimination with partial pivoting.
pub fn solve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut m: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row = a[i * k..(i + 1) * k].to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap())
            .unwrap();
        m.swap(c, piv);
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            let (top, bottom) = m.split_at_mut(r);
            for (dst, src) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|q| m[r][q] * x[q]).sum();
        x[r] = (m[r][k] - s) / m[r][r];
    }
    x
}

/// Gram matrix `X_Aᵀ X_A` (row-major) of the given columns.
pub fn gram_of(cols: &[&[f64]]) -> Vec<f64> {
    let k = cols.len();
    let mut g = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            g[a * k + b] = dot(cols[a], cols[b]);
        }
    }
    g
}

/// Residual of `v` after least-squares projection onto the span of `cols`.
pub fn project_out(v: &[f64], cols: &[&[f64]]) -> Vec<f64> {
    if cols.is_empty() {
        return v.to_vec();
    }
    let g = gram_of(cols);
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, v)).collect();
    let coef = solve(&g, &rhs);
    let mut out = v.to_vec();
    for (c, w) in cols.iter().zip(&coef) {
        out.iter_mut().zip(c.iter()).for_each(|(o, x)| *o -= w * x);
    }
    out
}

/// X-space θ: `X_jᵀ X_A (X_Aᵀ X_A)⁻¹ s_A` for plain `j`.
pub fn x_space_theta(x: &[f64], n: usize, active: &[(usize, f64)], j: usize) -> f64 {
    let cols: Vec<&[f64]> = active.iter().map(|&(a, _)| col(x, n, a)).collect();
    let signs: Vec<f64> = active.iter().map(|&(_, s)| s).collect();
    let w = solve(&gram_of(&cols), &signs);
    cols.iter().zip(&w).map(|(c, wi)| dot(col(x, n, j), c) * wi).sum()
}

/// Textbook LAR on `(X, y)`: walk along the equiangular direction of the active set
/// until an inactive correlation ties the common active one. Returns the knots and
/// `(plain, sign)` of each entering predictor.
pub fn naive_lar(x: &[f64], n: usize, p: usize, y: &[f64], steps: usize) -> (Vec<f64>, Vec<(usize, f64)>) {
    let mut mu = vec![0.0; n];
    let mut active: Vec<(usize, f64)> = Vec::new();
    let mut knots = Vec::new();
    let corr = |mu: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
        (0..p).map(|j| dot(col(x, n, j), &r)).collect()
    };
    let c0 = corr(&mu);
    let (j0, _) = c0
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    active.push((j0, c0[j0].signum()));
    knots.push(c0[j0].abs());
    for _ in 0..steps {
        let c = corr(&mu);
        let big_c = knots[knots.len() - 1];
        let cols: Vec<&[f64]> = active.iter().map(|&(a, _)| col(x, n, a)).collect();
        let signs: Vec<f64> = active.iter().map(|&(_, s)| s).collect();
        let w = solve(&gram_of(&cols), &signs);
        let mut u = vec![0.0; n];
        for (c_a, wi) in cols.iter().zip(&w) {
            u.iter_mut().zip(c_a.iter()).for_each(|(o, v)| *o += wi * v);
        }
        let a_dir: Vec<f64> = (0..p).map(|j| dot(col(x, n, j), &u)).collect();
        let mut best: Option<(f64, usize, f64)> = None;
        for j in 0..p {
            if active.iter().any(|&(a, _)| a == j) {
                continue;
            }
            for s in [1.0, -1.0] {
                let den = 1.0 - s * a_dir[j];
                if den <= 1e-12 {
                    continue;
                }
                let gamma = (big_c - s * c[j]) / den;
                if gamma > 0.0 && best.is_none_or(|(g, _, _)| gamma < g) {
                    best = Some((gamma, j, s));
                }
            }
        }
        let Some((gamma, j, s)) = best else { break };
        mu.iter_mut().zip(&u).for_each(|(m, v)| *m += gamma * v);
        knots.push(big_c - gamma);
        active.push((j, s));
    }
    (knots, active)
}

/// Kolmogorov–Smirnov distance of a sample to the uniform law on `[0, 1]`.
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}
