//! Compressed sparse row storage and the handful of kernels the meta-path
//! machinery needs: chain products, matrix-vector products in both
//! orientations, and row/column sums.

use ndarray::Array2;

use crate::scalar::Scalar;

/// Binary sparsity pattern in CSR layout. Used for adjacency matrices whose
/// nonzeros are all 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePattern {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl SparsePattern {
    /// Builds a pattern from `(row, col)` pairs. Duplicates collapse; the
    /// number of dropped duplicates is returned alongside.
    pub fn from_pairs(nrows: usize, ncols: usize, pairs: &[(usize, usize)]) -> (Self, usize) {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c) in pairs {
            assert!(r < nrows && c < ncols, "pair ({r},{c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![0usize; pairs.len()];
        for &(r, c) in pairs {
            raw[fill[r]] = c;
            fill[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(pairs.len());
        indptr.push(0);
        let mut dropped = 0;
        for r in 0..nrows {
            let row = &mut raw[counts[r]..counts[r + 1]];
            row.sort_unstable();
            let before = indices.len();
            for &c in row.iter() {
                if indices.len() > before && *indices.last().unwrap() == c {
                    dropped += 1;
                } else {
                    indices.push(c);
                }
            }
            indptr.push(indices.len());
        }
        (SparsePattern { nrows, ncols, indptr, indices }, dropped)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows).map(|i| self.row_nnz(i)).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> SparsePattern {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        for r in 0..self.nrows {
            for &c in self.row(r) {
                indices[fill[c]] = r;
                fill[c] += 1;
            }
        }
        SparsePattern { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices }
    }

    /// Number of nonzeros in every row.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.nrows).map(|i| self.row_nnz(i)).collect()
    }

    /// The pattern as a numeric matrix of ones.
    pub fn to_matrix<T: Scalar>(&self) -> CsrMatrix<T> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: vec![T::one(); self.nnz()],
        }
    }
}

/// Real-valued CSR matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => T::zero(),
        }
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows).map(|i| self.indptr[i + 1] - self.indptr[i]).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                indices[fill[c]] = r;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, values }
    }

    /// Sparse-sparse product `self × rhs` (Gustavson row-by-row with a dense
    /// accumulator). Output rows keep sorted column indices.
    pub fn matmul(&self, rhs: &CsrMatrix<T>) -> CsrMatrix<T> {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions differ");
        let mut acc = vec![T::zero(); rhs.ncols];
        let mut seen = vec![usize::MAX; rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            touched.clear();
            let (lcols, lvals) = self.row(i);
            for (&k, &a) in lcols.iter().zip(lvals) {
                let (rcols, rvals) = rhs.row(k);
                for (&j, &b) in rcols.iter().zip(rvals) {
                    if seen[j] != i {
                        seen[j] = i;
                        acc[j] = T::zero();
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != T::zero() {
                    indices.push(j);
                    values.push(acc[j]);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: rhs.ncols, indptr, indices, values }
    }

    /// `self × v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len(), "vector length differs from column count");
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).fold(T::zero(), |s, (&c, &a)| s + a * v[c])
            })
            .collect()
    }

    /// `selfᵀ × v`, scattered without forming the transpose.
    pub fn transpose_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.nrows, v.len(), "vector length differs from row count");
        let mut out = vec![T::zero(); self.ncols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &a) in cols.iter().zip(vals) {
                out[c] += a * vi;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows).map(|i| self.row(i).1.iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols];
        for (&c, &v) in self.indices.iter().zip(&self.values) {
            out[c] += v;
        }
        out
    }

    /// True when every row holds at most one nonzero and that nonzero is 1.
    pub fn is_row_selector(&self) -> bool {
        (0..self.nrows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.len() <= 1 && vals.iter().all(|&v| v == T::one())
        })
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[[i, c]] = v;
            }
        }
        out
    }

    pub fn from_dense(dense: &Array2<T>) -> Self {
        let (nrows, ncols) = dense.dim();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in dense.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }
}
