//! Summary statistics over replicate records.

/// Number of interior grid points for empirical CDFs: `t = 0.01, 0.02, ..., 0.99`.
pub const GRID: usize = 99;

pub fn grid_point(i: usize) -> f64 {
    (i + 1) as f64 / (GRID + 1) as f64
}

/// Kolmogorov–Smirnov distance between the sample and `U(0, 1)`; `NaN` for no data.
pub fn ks_uniform(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Empirical CDF on the fixed grid.
pub fn ecdf(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len().max(1) as f64;
    (0..GRID)
        .map(|i| {
            let t = grid_point(i);
            v.partition_point(|&x| x <= t) as f64 / n
        })
        .collect()
}

/// Largest amount by which `upper`'s CDF exceeds `lower`'s; `lower ≼ upper` holds
/// with slack `s` when the gap is at most `s`.
pub fn dominance_gap(lower: &[f64], upper: &[f64]) -> f64 {
    lower.iter().zip(upper).map(|(l, u)| u - l).fold(f64::NEG_INFINITY, f64::max)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean with the `n − 1` variance.
pub fn std_error(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some((var / n as f64).sqrt())
}

/// Inverse empirical CDF: the smallest sample value with ECDF at least `q`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}
