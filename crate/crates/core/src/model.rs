//! Linear-model data types and the signed-index correlation primitives.
//!
//! A signed index `i` in `[0, 2p)` encodes the plain predictor `j = i mod p` and the
//! sign `s = +1` if `i < p`, `-1` otherwise. `Z_i = s z̄_j` and `R_{i,i'} = s s' R̄_{j,j'}`;
//! the doubled `2p x 2p` matrix is never built.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{LarError, Result};
use crate::real::{pivot_tol, Real};

/// `n x p` design matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    n: usize,
    p: usize,
    data: Vec<T>,
}

impl<T: Real> DesignMatrix<T> {
    /// Builds from row-major entries (the CSV layout).
    pub fn from_row_major(n: usize, p: usize, rows: &[T]) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(LarError::RejectedInput(format!("empty design {n}x{p}")));
        }
        if rows.len() != n * p {
            return Err(LarError::DimensionMismatch(format!(
                "{} entries for a {n}x{p} design",
                rows.len()
            )));
        }
        let mut data = vec![T::zero(); n * p];
        for i in 0..n {
            for j in 0..p {
                data[j * n + i] = rows[i * p + j];
            }
        }
        Self::from_col_major(n, p, data)
    }

    /// Builds from column-major entries.
    pub fn from_col_major(n: usize, p: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(LarError::RejectedInput(format!("empty design {n}x{p}")));
        }
        if data.len() != n * p {
            return Err(LarError::DimensionMismatch(format!(
                "{} entries for a {n}x{p} design",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LarError::RejectedInput("non-finite design entry".into()));
        }
        Ok(Self { n, p, data })
    }

    /// `[I_p; 0]`, the orthonormal design with `n >= p` rows.
    pub fn identity(n: usize, p: usize) -> Result<Self> {
        if n < p {
            return Err(LarError::RejectedInput(format!("identity design needs n >= p, got {n}x{p}")));
        }
        let mut data = vec![T::zero(); n * p];
        for j in 0..p {
            data[j * n + j] = T::one();
        }
        Self::from_col_major(n, p, data)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.n + i]
    }

    /// `X v` for a coefficient vector of length `p`.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.p {
            return Err(LarError::DimensionMismatch(format!(
                "coefficient length {} vs p = {}",
                v.len(),
                self.p
            )));
        }
        let mut out = vec![T::zero(); self.n];
        for (j, &vj) in v.iter().enumerate() {
            if vj != T::zero() {
                for (o, &x) in out.iter_mut().zip(self.column(j)) {
                    *o = *o + x * vj;
                }
            }
        }
        Ok(out)
    }

    /// `Xᵀ y` for a vector of length `n`.
    pub fn tr_mul_vec(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.n {
            return Err(LarError::DimensionMismatch(format!(
                "response length {} vs n = {}",
                y.len(),
                self.n
            )));
        }
        Ok((0..self.p).map(|j| dot(self.column(j), y)).collect())
    }

    /// Rescales every column to unit Euclidean norm. Zero columns are rejected.
    pub fn normalize_columns(&mut self) -> Result<()> {
        let n = self.n;
        for j in 0..self.p {
            let col = &mut self.data[j * n..(j + 1) * n];
            let norm = dot(col, col).sqrt();
            if norm == T::zero() {
                return Err(LarError::RejectedInput(format!("column {j} is identically zero")));
            }
            col.iter_mut().for_each(|x| *x = *x / norm);
        }
        Ok(())
    }

    /// Numerical rank via Gram-Schmidt with reorthogonalization; columns whose
    /// residual norm falls below `1e-10` times the largest column norm are dependent.
    pub fn rank(&self) -> usize {
        let max_norm = (0..self.p)
            .map(|j| dot(self.column(j), self.column(j)).sqrt())
            .fold(T::zero(), T::max);
        if max_norm == T::zero() {
            return 0;
        }
        let cutoff = pivot_tol::<T>() * max_norm;
        let mut basis: Vec<Vec<T>> = Vec::new();
        for j in 0..self.p {
            if basis.len() == self.n {
                break;
            }
            let mut v = self.column(j).to_vec();
            orthogonalize(&mut v, &basis);
            let norm = dot(&v, &v).sqrt();
            if norm > cutoff {
                v.iter_mut().for_each(|x| *x = *x / norm);
                basis.push(v);
            }
        }
        basis.len()
    }
}

/// Response vector `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector<T> {
    pub values: Vec<T>,
}

impl<T: Real> ResponseVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(LarError::RejectedInput("empty response".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LarError::RejectedInput("non-finite response entry".into()));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A predictor together with the sign it enters with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedIndex {
    /// Plain predictor index `j`, 0-based.
    pub plain: usize,
    /// `true` for `s = +1`.
    pub positive: bool,
}

impl SignedIndex {
    pub fn new(plain: usize, positive: bool) -> Self {
        Self { plain, positive }
    }

    /// Decodes a raw index in `[0, 2p)`.
    pub fn from_raw(raw: usize, p: usize) -> Result<Self> {
        if raw >= 2 * p {
            return Err(LarError::RejectedInput(format!("raw signed index {raw} outside [0, {})", 2 * p)));
        }
        Ok(Self {
            plain: raw % p,
            positive: raw < p,
        })
    }

    /// Raw encoding `j + p (1 - s) / 2`.
    pub fn raw(self, p: usize) -> usize {
        if self.positive {
            self.plain
        } else {
            self.plain + p
        }
    }

    pub fn sign<T: Real>(self) -> T {
        if self.positive {
            T::one()
        } else {
            -T::one()
        }
    }

    /// The partner index `i ± p` with the opposite sign.
    pub fn partner(self) -> Self {
        Self {
            plain: self.plain,
            positive: !self.positive,
        }
    }
}

enum GramSource<T> {
    Design(DesignMatrix<T>),
    Dense(Vec<T>),
}

/// Correlations `z̄ = XᵀY`, the gram `R̄ = XᵀX` and optionally `μ̄⁰ = R̄ β⁰`.
///
/// Gram columns are computed on first use, so paths that touch few predictors
/// stay `O(n p k)` even when `p` is large.
pub struct CorrelationState<T> {
    p: usize,
    zbar: Vec<T>,
    diag: Vec<T>,
    max_diag: T,
    mu0bar: Option<Vec<T>>,
    source: GramSource<T>,
    columns: Vec<OnceLock<Vec<T>>>,
}

impl<T: Real> std::fmt::Debug for CorrelationState<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorrelationState")
            .field("p", &self.p)
            .field("zbar", &self.zbar)
            .field("has_mu0", &self.mu0bar.is_some())
            .finish()
    }
}

/// Builds the correlation state of `(X, Y)`, with `μ̄⁰` when the truth `β⁰` is supplied.
pub fn build_correlation_state<T: Real>(
    design: &DesignMatrix<T>,
    response: &ResponseVector<T>,
    truth: Option<&[T]>,
) -> Result<CorrelationState<T>> {
    if response.len() != design.nrows() {
        return Err(LarError::DimensionMismatch(format!(
            "response has {} rows, design has {}",
            response.len(),
            design.nrows()
        )));
    }
    let zbar = design.tr_mul_vec(&response.values)?;
    let diag: Vec<T> = (0..design.ncols())
        .map(|j| dot(design.column(j), design.column(j)))
        .collect();
    let mu0bar = match truth {
        Some(beta) => Some(design.tr_mul_vec(&design.mul_vec(beta)?)?),
        None => None,
    };
    CorrelationState::assemble(zbar, diag, mu0bar, GramSource::Design(design.clone()))
}

impl<T: Real> CorrelationState<T> {
    /// Builds a state directly from a dense row-major `p x p` gram and `z̄`.
    pub fn from_gram(gram: Vec<T>, zbar: Vec<T>, mu0bar: Option<Vec<T>>) -> Result<Self> {
        let p = zbar.len();
        if p == 0 || gram.len() != p * p {
            return Err(LarError::DimensionMismatch(format!(
                "gram has {} entries for p = {p}",
                gram.len()
            )));
        }
        if mu0bar.as_ref().is_some_and(|m| m.len() != p) {
            return Err(LarError::DimensionMismatch("mu0 length differs from p".into()));
        }
        for j in 0..p {
            for k in 0..j {
                let (a, b) = (gram[j * p + k], gram[k * p + j]);
                if (a - b).abs() > T::c(1e-12) * (T::one() + a.abs()) {
                    return Err(LarError::RejectedInput(format!("gram not symmetric at ({j}, {k})")));
                }
            }
        }
        let diag = (0..p).map(|j| gram[j * p + j]).collect();
        Self::assemble(zbar, diag, mu0bar, GramSource::Dense(gram))
    }

    fn assemble(zbar: Vec<T>, diag: Vec<T>, mu0bar: Option<Vec<T>>, source: GramSource<T>) -> Result<Self> {
        if zbar.iter().chain(diag.iter()).any(|v| !v.is_finite()) {
            return Err(LarError::RejectedInput("non-finite correlation or gram entry".into()));
        }
        if let Some(j) = diag.iter().position(|&d| d <= T::zero()) {
            return Err(LarError::RejectedInput(format!("predictor {j} has zero norm")));
        }
        let p = zbar.len();
        let max_diag = diag.iter().copied().fold(T::zero(), T::max);
        Ok(Self {
            p,
            zbar,
            diag,
            max_diag,
            mu0bar,
            source,
            columns: (0..p).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `z̄ = XᵀY`.
    pub fn zbar(&self) -> &[T] {
        &self.zbar
    }

    /// `μ̄⁰ = XᵀXβ⁰`, when the truth was supplied.
    pub fn mu0bar(&self) -> Option<&[T]> {
        self.mu0bar.as_deref()
    }

    /// `Z_i` for a signed index.
    pub fn z(&self, i: SignedIndex) -> T {
        i.sign::<T>() * self.zbar[i.plain]
    }

    /// `μ⁰_i`, or zero under the null when no truth is attached.
    pub fn mu0(&self, i: SignedIndex) -> T {
        self.mu0bar
            .as_ref()
            .map_or(T::zero(), |m| i.sign::<T>() * m[i.plain])
    }

    /// The full doubled vector `Z = (z̄, −z̄)`.
    pub fn z_doubled(&self) -> Vec<T> {
        self.zbar.iter().copied().chain(self.zbar.iter().map(|&v| -v)).collect()
    }

    pub fn diag(&self, j: usize) -> T {
        self.diag[j]
    }

    pub fn max_diag(&self) -> T {
        self.max_diag
    }

    /// Column `j` of `R̄`, computed once and cached.
    pub fn gram_col(&self, j: usize) -> &[T] {
        self.columns[j].get_or_init(|| match &self.source {
            GramSource::Design(x) => {
                let cj = x.column(j);
                (0..self.p)
                    .map(|k| if k == j { self.diag[j] } else { dot(cj, x.column(k)) })
                    .collect()
            }
            GramSource::Dense(g) => (0..self.p).map(|k| g[k * self.p + j]).collect(),
        })
    }

    /// `R̄_{j,k}`.
    pub fn gram(&self, j: usize, k: usize) -> T {
        self.gram_col(k)[j]
    }

    /// `R_{i,i'} = s s' R̄_{j,j'}`.
    pub fn r(&self, i: SignedIndex, k: SignedIndex) -> T {
        let v = self.gram(i.plain, k.plain);
        if i.positive == k.positive {
            v
        } else {
            -v
        }
    }

    /// Dense row-major copy of `R̄`.
    pub fn dense_gram(&self) -> Vec<T> {
        let p = self.p;
        let mut out = vec![T::zero(); p * p];
        for k in 0..p {
            let col = self.gram_col(k);
            for j in 0..p {
                out[j * p + k] = col[j];
            }
        }
        out
    }
}

/// Ordered active signed indices with an incrementally extended Cholesky factor of
/// `M = (R_{i_a, i_b})`, plus the cached solves `M⁻¹ 1` and `M⁻¹ Z_A`.
#[derive(Debug, Clone)]
pub struct ActiveSequence<T> {
    indices: Vec<SignedIndex>,
    /// Row `k` holds `L[k][0..=k]`.
    chol: Vec<Vec<T>>,
    pivots: Vec<T>,
    w: Vec<T>,
    v: Vec<T>,
    member: Vec<bool>,
}

impl<T: Real> ActiveSequence<T> {
    pub fn new(p: usize) -> Self {
        Self {
            indices: Vec::new(),
            chol: Vec::new(),
            pivots: Vec::new(),
            w: Vec::new(),
            v: Vec::new(),
            member: vec![false; p],
        }
    }

    /// Builds by appending each index in turn.
    pub fn from_indices(state: &CorrelationState<T>, indices: &[SignedIndex]) -> Result<Self> {
        let mut a = Self::new(state.p());
        for &i in indices {
            a.push(state, i)?;
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[SignedIndex] {
        &self.indices
    }

    pub fn contains_plain(&self, j: usize) -> bool {
        self.member[j]
    }

    /// Schur-complement pivots `R_{ii} − r M⁻¹ rᵀ` recorded at each append.
    pub fn pivots(&self) -> &[T] {
        &self.pivots
    }

    /// `M⁻¹ 1`.
    pub fn w(&self) -> &[T] {
        &self.w
    }

    /// `M⁻¹ Z_A`.
    pub fn v(&self) -> &[T] {
        &self.v
    }

    /// Row `(R_{j,i_1}, ..., R_{j,i_k})`.
    pub fn cross(&self, state: &CorrelationState<T>, j: SignedIndex) -> Vec<T> {
        self.indices.iter().map(|&i| state.r(j, i)).collect()
    }

    /// Appends one index, extending the factorization by one row.
    pub fn push(&mut self, state: &CorrelationState<T>, i: SignedIndex) -> Result<T> {
        if i.plain >= state.p() {
            return Err(LarError::RejectedInput(format!("index {} outside p = {}", i.plain, state.p())));
        }
        if self.member[i.plain] {
            return Err(LarError::RejectedInput(format!("predictor {} already active", i.plain)));
        }
        let r = self.cross(state, i);
        let y = self.forward(&r);
        let pivot = state.diag(i.plain) - dot(&y, &y);
        let cutoff = pivot_tol::<T>() * state.max_diag();
        if !(pivot > cutoff) {
            return Err(LarError::Singular {
                context: format!("appending predictor {}", i.plain),
                pivot: pivot.as_f64(),
                cutoff: cutoff.as_f64(),
            });
        }
        let mut row = y;
        row.push(pivot.sqrt());
        self.chol.push(row);
        self.pivots.push(pivot);
        self.indices.push(i);
        self.member[i.plain] = true;
        let ones = vec![T::one(); self.len()];
        self.w = self.solve(&ones);
        let za: Vec<T> = self.indices.iter().map(|&a| state.z(a)).collect();
        self.v = self.solve(&za);
        Ok(pivot)
    }

    fn forward(&self, b: &[T]) -> Vec<T> {
        let mut y = Vec::with_capacity(b.len());
        for (k, row) in self.chol.iter().enumerate() {
            let s = b[k] - dot(&row[..k], &y);
            y.push(s / row[k]);
        }
        y
    }

    /// `M⁻¹ b` via the stored factor.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let k = self.len();
        let y = self.forward(b);
        let mut x = vec![T::zero(); k];
        for a in (0..k).rev() {
            let mut s = y[a];
            for (b_idx, xb) in x.iter().enumerate().skip(a + 1) {
                s = s - self.chol[b_idx][a] * *xb;
            }
            x[a] = s / self.chol[a][a];
        }
        x
    }

    /// Plain-coordinate `(θ̄, Π̄)` for every predictor: `θ_{+j} = θ̄_j`, `θ_{−j} = −θ̄_j`,
    /// and likewise for `Π`. Entries for active predictors are not meaningful.
    pub fn plain_theta_pi(&self, state: &CorrelationState<T>) -> (Vec<T>, Vec<T>) {
        let p = state.p();
        let mut theta = vec![T::zero(); p];
        let mut pi = vec![T::zero(); p];
        for (a, &i) in self.indices.iter().enumerate() {
            let s = i.sign::<T>();
            let (cw, cv) = (s * self.w[a], s * self.v[a]);
            for ((t, q), &g) in theta.iter_mut().zip(pi.iter_mut()).zip(state.gram_col(i.plain)) {
                *t = *t + g * cw;
                *q = *q + g * cv;
            }
        }
        (theta, pi)
    }
}

fn check_query<T: Real>(active: &ActiveSequence<T>, j: SignedIndex, p: usize) -> Result<()> {
    if j.plain >= p {
        return Err(LarError::RejectedInput(format!("index {} outside p = {p}", j.plain)));
    }
    if active.contains_plain(j.plain) {
        return Err(LarError::RejectedInput(format!("predictor {} is active", j.plain)));
    }
    Ok(())
}

/// `θ_j = (R_{j,i_1} … R_{j,i_k}) M⁻¹ 1`; zero for an empty active set.
pub fn theta<T: Real>(state: &CorrelationState<T>, active: &ActiveSequence<T>, j: SignedIndex) -> Result<T> {
    check_query(active, j, state.p())?;
    Ok(dot(&active.cross(state, j), active.w()))
}

/// `Π(Z_j) = (R_{j,i_1} … R_{j,i_k}) M⁻¹ Z_A`; zero for an empty active set.
pub fn pi_projection<T: Real>(
    state: &CorrelationState<T>,
    active: &ActiveSequence<T>,
    j: SignedIndex,
) -> Result<T> {
    check_query(active, j, state.p())?;
    Ok(dot(&active.cross(state, j), active.v()))
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Removes from `v` its components along the orthonormal `basis`, twice.
pub(crate) fn orthogonalize<T: Real>(v: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, &qi)| *x = *x - c * qi);
        }
    }
}
