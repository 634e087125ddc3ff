//! Dense row-major `f64` matrices and the handful of kernels the rest of the
//! crate is built on: matrix product, row softmax, layer norm, GELU, cosine
//! similarity, and permutation matrices.
//!
//! Everything here is a pure function over immutable values. Accumulation
//! order is fixed (left-to-right over the inner dimension), so repeated runs
//! within one build are bit-identical.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("data length {len} does not match shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("mapping {mapping:?} is not a bijection on 0..{n}")]
    NotABijection { mapping: Vec<usize>, n: usize },
    #[error("row {row} has no finite entries; softmax cannot normalize it")]
    AllMaskedRow { row: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("vector length {got} does not match {expected} columns")]
    VectorLength { expected: usize, got: usize },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("cosine similarity needs equal-length nonempty vectors, got {0} and {1}")]
    CosineShape(usize, usize),
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNorm,
}

/// Dense 2-D table of `f64`, row-major. The carrier for embeddings, weights,
/// attention internals, and residual-stream snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadShape { rows, cols, len: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(LinalgError::BadShape { rows: n_rows, cols: n_cols, len: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: n_rows, cols: n_cols, data })
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Rows `0..n` as a new matrix.
    pub fn top_rows(&self, n: usize) -> Matrix {
        assert!(n <= self.rows, "prefix of {n} rows from a {}-row matrix", self.rows);
        Matrix { rows: n, cols: self.cols, data: self.data[..n * self.cols].to_vec() }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Largest absolute entry-wise difference. Matrices must share a shape.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.get(i, j).is_finite() {
                    return Err(LinalgError::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// A bijection on `0..n`, used to reorder matrix rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, LinalgError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &idx in &mapping {
            if idx >= n || seen[idx] {
                return Err(LinalgError::NotABijection { mapping, n });
            }
            seen[idx] = true;
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { mapping: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &p) in self.mapping.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { mapping: inv }
    }

    /// Reorders rows: output row `i` is input row `mapping[i]`. Same effect as
    /// left-multiplying by [`permutation_matrix`], but exact (no arithmetic).
    pub fn apply_to_rows(&self, m: &Matrix) -> Result<Matrix, LinalgError> {
        if self.mapping.len() != m.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.mapping.len(),
                left_cols: self.mapping.len(),
                right_rows: m.rows,
                right_cols: m.cols,
            });
        }
        let mut out = Matrix::zeros(m.rows, m.cols);
        for (i, &src) in self.mapping.iter().enumerate() {
            let dst_range = i * m.cols..(i + 1) * m.cols;
            out.data[dst_range].copy_from_slice(m.row(src));
        }
        Ok(out)
    }
}

/// Standard matrix product. Accumulates over the inner dimension in ascending
/// index order, so results are reproducible bit-for-bit within a build.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    // i-k-j loop order: cache friendly, and for each output cell the k terms
    // still arrive in ascending order.
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            let b_row = b.row(k);
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for j in 0..b.cols {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    Ok(out)
}

/// The 0/1 matrix realizing a permutation: exactly one 1 per row and column,
/// with the 1 of row `i` in column `mapping[i]`.
pub fn permutation_matrix(p: &Permutation) -> Matrix {
    let n = p.len();
    let mut m = Matrix::zeros(n, n);
    for (i, &j) in p.mapping().iter().enumerate() {
        m.set(i, j, 1.0);
    }
    m
}

/// Row-wise softmax with per-row max subtraction.
///
/// `f64::NEG_INFINITY` entries are the masking sentinel: they get weight
/// exactly 0. A row holding nothing but the sentinel cannot be normalized and
/// is rejected. Any other non-finite entry is rejected outright.
pub fn row_softmax(m: &Matrix) -> Result<Matrix, LinalgError> {
    let mut out = Matrix::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        let row = m.row(i);
        let mut max = f64::NEG_INFINITY;
        for (j, &v) in row.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(LinalgError::NonFiniteEntry { row: i, col: j });
            }
            max = max.max(v);
        }
        if max == f64::NEG_INFINITY {
            if m.cols == 0 {
                continue;
            }
            return Err(LinalgError::AllMaskedRow { row: i });
        }
        let mut sum = 0.0;
        let out_row = &mut out.data[i * m.cols..(i + 1) * m.cols];
        for (j, &v) in row.iter().enumerate() {
            // exp(-inf - max) = 0, so sentinel positions drop out here.
            let e = (v - max).exp();
            out_row[j] = e;
            sum += e;
        }
        for e in out_row.iter_mut() {
            *e /= sum;
        }
    }
    Ok(out)
}

/// Row-wise standardization: each row to mean 0 and variance 1 (denominator
/// `variance + eps`), then scaled by `gain` and shifted by `bias`.
pub fn layer_norm(m: &Matrix, gain: &[f64], bias: &[f64], eps: f64) -> Result<Matrix, LinalgError> {
    if gain.len() != m.cols {
        return Err(LinalgError::VectorLength { expected: m.cols, got: gain.len() });
    }
    if bias.len() != m.cols {
        return Err(LinalgError::VectorLength { expected: m.cols, got: bias.len() });
    }
    if !(eps > 0.0) {
        return Err(LinalgError::BadEpsilon(eps));
    }
    m.check_finite()?;
    let n = m.cols as f64;
    let mut out = Matrix::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        let row = m.row(i);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv_std = 1.0 / (var + eps).sqrt();
        let out_row = &mut out.data[i * m.cols..(i + 1) * m.cols];
        for j in 0..m.cols {
            out_row[j] = (row[j] - mean) * inv_std * gain[j] + bias[j];
        }
    }
    Ok(out)
}

/// Elementwise GELU in its exact erf form: `x/2 * (1 + erf(x / sqrt(2)))`.
pub fn gelu(m: &Matrix) -> Matrix {
    let data = m
        .data
        .iter()
        .map(|&x| 0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2)))
        .collect();
    Matrix { rows: m.rows, cols: m.cols, data }
}

/// `dot(u, v) / (|u| |v|)`; rejects empty, mismatched, or zero-norm inputs.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, LinalgError> {
    if u.is_empty() || u.len() != v.len() {
        return Err(LinalgError::CosineShape(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(LinalgError::ZeroNorm);
    }
    Ok(dot / (nu * nv))
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn matmul_identity_is_identity() {
        let b = mat(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let i3 = Matrix::identity(3);
        assert_eq!(matmul(&i3, &b).unwrap(), b);
    }

    #[test]
    fn matmul_hand_example() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = mat(&[&[0.0], &[1.0]]);
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c, mat(&[&[2.0], &[4.0]]));
    }

    #[test]
    fn matmul_rejects_dimension_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let err = matmul(&a, &b).unwrap_err();
        assert_eq!(
            err,
            LinalgError::DimensionMismatch { left_rows: 2, left_cols: 3, right_rows: 2, right_cols: 3 }
        );
    }

    #[test]
    fn permutation_matrix_swaps_rows() {
        let p = Permutation::new(vec![1, 0]).unwrap();
        let pm = permutation_matrix(&p);
        let x = mat(&[&[10.0], &[20.0]]);
        assert_eq!(matmul(&pm, &x).unwrap(), mat(&[&[20.0], &[10.0]]));
    }

    #[test]
    fn permutation_matrix_identity() {
        let p = Permutation::identity(3);
        assert_eq!(permutation_matrix(&p), Matrix::identity(3));
    }

    #[test]
    fn permutation_matrix_cycle_reorders_rows() {
        // output row i = input row p[i]
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let x = mat(&[&[0.0], &[1.0], &[2.0]]);
        let y = p.apply_to_rows(&x).unwrap();
        assert_eq!(y, mat(&[&[2.0], &[0.0], &[1.0]]));
        assert_eq!(matmul(&permutation_matrix(&p), &x).unwrap(), y);
    }

    #[test]
    fn permutation_matrices_are_orthogonal_exactly() {
        for mapping in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 0, 2], vec![2, 1, 0]] {
            let p = Permutation::new(mapping).unwrap();
            let pm = permutation_matrix(&p);
            let prod = matmul(&pm.transpose(), &pm).unwrap();
            assert_eq!(prod, Matrix::identity(3));
        }
    }

    #[test]
    fn permutation_rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn softmax_symmetric_row() {
        let s = row_softmax(&mat(&[&[0.0, 0.0]])).unwrap();
        assert_eq!(s.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_log_weights() {
        let s = row_softmax(&mat(&[&[1.0f64.ln(), 3.0f64.ln()]])).unwrap();
        assert!((s.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((s.get(0, 1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_sentinel_gets_weight_zero() {
        for x in [-7.3, 0.0, 42.0] {
            let s = row_softmax(&mat(&[&[x, f64::NEG_INFINITY]])).unwrap();
            assert_eq!(s.row(0), &[1.0, 0.0]);
        }
    }

    #[test]
    fn softmax_rejects_fully_masked_row() {
        let m = mat(&[&[f64::NEG_INFINITY, f64::NEG_INFINITY]]);
        assert_eq!(row_softmax(&m).unwrap_err(), LinalgError::AllMaskedRow { row: 0 });
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let m = mat(&[&[0.3, -2.0, 5.5, 0.0], &[100.0, 101.0, 99.0, 100.5]]);
        let s = row_softmax(&m).unwrap();
        for i in 0..2 {
            let sum: f64 = s.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "row {i} sums to {sum}");
            assert!(s.row(i).iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn layer_norm_constant_row_returns_bias() {
        let m = mat(&[&[3.0, 3.0, 3.0]]);
        let out = layer_norm(&m, &[2.0, 2.0, 2.0], &[0.5, -0.5, 0.0], 1e-5).unwrap();
        assert_eq!(out.row(0), &[0.5, -0.5, 0.0]);
    }

    #[test]
    fn layer_norm_unit_variance_row_is_near_fixed_point() {
        let m = mat(&[&[1.0, -1.0]]);
        let out = layer_norm(&m, &[1.0, 1.0], &[0.0, 0.0], 1e-12).unwrap();
        assert!((out.get(0, 0) - 1.0).abs() < 1e-6);
        assert!((out.get(0, 1) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn layer_norm_commutes_with_row_permutation() {
        let m = mat(&[&[1.0, 2.0, 4.0], &[-1.0, 0.5, 2.0], &[7.0, 7.5, -3.0]]);
        let gain = [1.1, 0.9, 1.0];
        let bias = [0.0, 0.1, -0.2];
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let a = layer_norm(&p.apply_to_rows(&m).unwrap(), &gain, &bias, 1e-5).unwrap();
        let b = p.apply_to_rows(&layer_norm(&m, &gain, &bias, 1e-5).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn layer_norm_rejects_bad_lengths_and_eps() {
        let m = Matrix::zeros(1, 3);
        assert!(layer_norm(&m, &[1.0, 1.0], &[0.0, 0.0, 0.0], 1e-5).is_err());
        assert!(layer_norm(&m, &[1.0; 3], &[0.0; 3], 0.0).is_err());
        assert!(layer_norm(&m, &[1.0; 3], &[0.0; 3], -1.0).is_err());
    }

    #[test]
    fn gelu_fixed_points() {
        let m = mat(&[&[0.0, 10.0, -10.0]]);
        let g = gelu(&m);
        assert_eq!(g.get(0, 0), 0.0);
        assert!((g.get(0, 1) - 10.0).abs() < 1e-6);
        assert!(g.get(0, 2).abs() < 1e-6);
    }

    #[test]
    fn gelu_commutes_with_row_permutation() {
        let m = mat(&[&[1.0, -2.0], &[0.25, 3.0]]);
        let p = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(gelu(&p.apply_to_rows(&m).unwrap()), p.apply_to_rows(&gelu(&m)).unwrap());
    }

    #[test]
    fn cosine_similarity_examples() {
        assert!((cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_similarity_rejects_degenerate_input() {
        assert!(cosine_similarity(&[], &[]).is_err());
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }
}
