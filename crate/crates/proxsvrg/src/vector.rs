//! Dense and sparse vector types used throughout the library.
//!
//! `DenseVector` is a thin wrapper over `Vec<f64>` with the handful of BLAS-1
//! style operations the solvers need. `SparseVector` stores index/value pairs
//! with strictly increasing indices and is used for feature vectors.

use serde::Serialize;

use crate::error::ModelError;

/// A dense vector in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// The zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        DenseVector(vec![0.0; d])
    }

    /// Builds a vector from raw entries, rejecting non-finite values.
    pub fn from_vec(entries: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(j) = entries.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteEntry { index: j });
        }
        Ok(DenseVector(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist_sq(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for s in &mut self.0 {
            *s *= alpha;
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.0.fill(value);
    }

    pub fn copy_from(&mut self, other: &DenseVector) {
        debug_assert_eq!(self.len(), other.len());
        self.0.copy_from_slice(&other.0);
    }

    /// Number of coordinates that are exactly nonzero.
    ///
    /// Soft-thresholding produces exact zeros, so this is a meaningful
    /// sparsity measure for iterates under l1 regularization.
    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// A sparse vector: index/value pairs with strictly increasing indices,
/// no explicit zeros, all indices in `[0, dim)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a sparse vector from `(index, value)` pairs.
    ///
    /// Indices must be strictly increasing and within `[0, dim)`; explicit
    /// zeros are dropped so the no-explicit-zeros invariant always holds.
    pub fn from_pairs(
        dim: usize,
        pairs: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<usize> = None;
        for (idx, val) in pairs {
            if idx >= dim {
                return Err(ModelError::IndexOutOfRange { index: idx, n: dim });
            }
            if let Some(prev) = last {
                if idx <= prev {
                    return Err(ModelError::NonAscendingIndices { index: idx });
                }
            }
            if !val.is_finite() {
                return Err(ModelError::NonFiniteEntry { index: idx });
            }
            last = Some(idx);
            if val != 0.0 {
                indices.push(idx);
                values.push(val);
            }
        }
        Ok(SparseVector { dim, indices, values })
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector { dim, indices: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Inner product with a dense vector of matching dimension.
    pub fn dot_dense(&self, x: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim, x.len());
        let xs = x.as_slice();
        self.iter().map(|(i, v)| v * xs[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `out += alpha * self`, touching only the support.
    pub fn add_scaled_into(&self, alpha: f64, out: &mut DenseVector) {
        debug_assert_eq!(self.dim, out.len());
        let os = out.as_mut_slice();
        for (i, v) in self.iter() {
            os[i] += alpha * v;
        }
    }

    /// Returns a copy with every stored value multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> SparseVector {
        let mut out = self.clone();
        if alpha == 0.0 {
            out.indices.clear();
            out.values.clear();
        } else {
            for v in &mut out.values {
                *v *= alpha;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim);
        self.add_scaled_into(1.0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_rejects_non_finite() {
        let err = DenseVector::from_vec(vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, ModelError::NonFiniteEntry { index: 1 }));
    }

    #[test]
    fn dense_ops() {
        let mut a = DenseVector::from_vec(vec![1.0, 2.0]).unwrap();
        let b = DenseVector::from_vec(vec![3.0, -1.0]).unwrap();
        assert_eq!(a.dot(&b), 1.0);
        a.axpy(2.0, &b);
        assert_eq!(a.as_slice(), &[7.0, 0.0]);
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn sparse_rejects_bad_indices() {
        assert!(SparseVector::from_pairs(3, [(0, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVector::from_pairs(3, [(2, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::from_pairs(3, [(3, 1.0)]).is_err());
    }

    #[test]
    fn sparse_drops_explicit_zeros() {
        let s = SparseVector::from_pairs(4, [(0, 1.0), (2, 0.0), (3, -2.0)]).unwrap();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense().as_slice(), &[1.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn sparse_dot_dense() {
        let s = SparseVector::from_pairs(3, [(0, 0.5), (2, 1.0)]).unwrap();
        let x = DenseVector::from_vec(vec![2.0, 10.0, 3.0]).unwrap();
        assert_eq!(s.dot_dense(&x), 4.0);
    }
}
