//! Dense symmetric positive-definite linear algebra sized for small asset
//! universes (a handful to ~100 assets).
//!
//! Covariance inverses never appear explicitly: every `Σ⁻¹v` term is realized
//! as a Cholesky factorization followed by two triangular solves. Symmetric
//! matrices store only the lower triangle, so symmetry holds by construction
//! and cannot drift.

use thiserror::Error;

/// Scale-relative positive-definiteness threshold: a Cholesky pivot at or
/// below `PD_PIVOT_REL_TOL * max_diagonal` rejects the matrix.
pub const PD_PIVOT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    /// The matrix is numerically singular or indefinite. For covariance input
    /// this typically means a duplicated asset or a constant price series.
    #[error("pivot {pivot:e} at row {index} is not positive (threshold {threshold:e})")]
    NotPositiveDefinite {
        index: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

impl LinalgError {
    pub fn name(&self) -> &'static str {
        match self {
            LinalgError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            LinalgError::DimensionMismatch { .. } => "DimensionMismatch",
            LinalgError::NotSymmetric { .. } => "NotSymmetric",
            LinalgError::NonFinite { .. } => "NonFinite",
        }
    }
}

/// Dense real vector, at least one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    /// Panics if `entries` is empty.
    pub fn new(entries: Vec<f64>) -> Self {
        assert!(!entries.is_empty(), "a Vector has at least one entry");
        Vector { entries }
    }

    pub fn ones(n: usize) -> Self {
        Vector::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector::new(self.entries.iter().map(|v| v * factor).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Symmetric `n × n` matrix in packed lower-triangle storage.
///
/// `entry(i, j) == entry(j, i)` holds exactly because both read the same
/// stored value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed_index(row: usize, col: usize) -> usize {
    debug_assert!(col <= row);
    row * (row + 1) / 2 + col
}

impl SymMatrix {
    /// Builds from a full row-major `n × n` slice, rejecting asymmetric or
    /// non-finite input. Symmetry is checked with exact equality.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        assert!(n >= 1, "a SymMatrix has dimension at least 1");
        if entries.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
                if j < i && v != entries[j * n + i] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(entries[i * n + j]);
            }
        }
        Ok(SymMatrix { n, lower })
    }

    /// Builds by evaluating `f(i, j)` once per unordered pair, `j <= i`.
    /// Symmetry is structural; no check is needed.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n >= 1, "a SymMatrix has dimension at least 1");
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        SymMatrix { n, lower }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if col <= row { (row, col) } else { (col, row) };
        self.lower[packed_index(r, c)]
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n)
            .map(|i| self.lower[packed_index(i, i)])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Matrix-vector product.
    pub fn mat_vec(&self, x: &Vector) -> Result<Vector, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (i, out_i) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.entry(i, j) * x[j];
            }
            *out_i = acc;
        }
        Ok(Vector::new(out))
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ` equal to the source
/// matrix. The diagonal is strictly positive.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry of `L`; zero above the diagonal.
    pub fn lower_entry(&self, row: usize, col: usize) -> f64 {
        if col > row {
            0.0
        } else {
            self.lower[packed_index(row, col)]
        }
    }

    /// `L·Lᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_fn(self.n, |i, j| {
            (0..=j.min(i))
                .map(|k| self.lower[packed_index(i, k)] * self.lower[packed_index(j, k)])
                .sum()
        })
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Deterministic: identical input produces bit-identical factors. Fails with
/// [`LinalgError::NotPositiveDefinite`] when a pivot falls at or below the
/// scale-relative threshold `1e-12 × max diagonal`.
pub fn cholesky(m: &SymMatrix) -> Result<CholeskyFactor, LinalgError> {
    let n = m.n();
    let threshold = PD_PIVOT_REL_TOL * m.max_diagonal();
    let mut lower = vec![0.0; n * (n + 1) / 2];
    for j in 0..n {
        let mut pivot = m.entry(j, j);
        for k in 0..j {
            let l_jk = lower[packed_index(j, k)];
            pivot -= l_jk * l_jk;
        }
        // Negated form rather than `pivot <= threshold`: a NaN pivot must
        // also be rejected.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(pivot > threshold) {
            return Err(LinalgError::NotPositiveDefinite {
                index: j,
                pivot,
                threshold,
            });
        }
        let l_jj = pivot.sqrt();
        lower[packed_index(j, j)] = l_jj;
        for i in (j + 1)..n {
            let mut acc = m.entry(i, j);
            for k in 0..j {
                acc -= lower[packed_index(i, k)] * lower[packed_index(j, k)];
            }
            lower[packed_index(i, j)] = acc / l_jj;
        }
    }
    Ok(CholeskyFactor { n, lower })
}

/// Solves `m·x = v` through the factor of `m`: forward substitution with `L`,
/// back substitution with `Lᵀ`.
#[allow(clippy::needless_range_loop)] // triangular substitution reads clearest with indices
pub fn solve_spd(factor: &CholeskyFactor, v: &Vector) -> Result<Vector, LinalgError> {
    let n = factor.n;
    if v.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    // L y = v
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = v[i];
        for k in 0..i {
            acc -= factor.lower[packed_index(i, k)] * y[k];
        }
        y[i] = acc / factor.lower[packed_index(i, i)];
    }
    // Lᵀ x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc -= factor.lower[packed_index(k, i)] * x[k];
        }
        x[i] = acc / factor.lower[packed_index(i, i)];
    }
    Ok(Vector::new(x))
}

/// Quadratic form `xᵀ·m·x`, accumulated over each unordered pair once so the
/// result is symmetric in the storage rather than by cancellation.
pub fn quad_form(m: &SymMatrix, x: &Vector) -> Result<f64, LinalgError> {
    let n = m.n();
    if x.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..n {
        diag += m.entry(i, i) * x[i] * x[i];
        for j in 0..i {
            off += m.entry(i, j) * x[i] * x[j];
        }
    }
    Ok(diag + 2.0 * off)
}

/// Inner product `xᵀ·y`.
pub fn dot(x: &Vector, y: &Vector) -> Result<f64, LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a * b).sum())
}
