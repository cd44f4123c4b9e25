//! Compressed sparse row matrices for the assembled (physical-domain) blocks.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    /// Zero-valued matrix with a prescribed, per-row sorted pattern.
    pub fn from_pattern(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        debug_assert_eq!(row_ptr.len(), nrows + 1);
        let nnz = col_idx.len();
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    t.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.nrows(), d.ncols(), t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, Vec::new())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &a)| a * x[j])
                .sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.ncols, x.len())?;
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y += Aᵀ x`.
    pub fn transpose_matvec_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        check_len(self.ncols, other.nrows)?;
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut cols: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values })
    }

    /// `self + s · other` for matrices of equal shape.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Result<CsrMatrix> {
        check_len(self.nrows, other.nrows)?;
        check_len(self.ncols, other.ncols)?;
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, v)));
            triplets.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        Ok(CsrMatrix::from_triplets(self.nrows, self.ncols, triplets))
    }

    /// Galerkin product `Pᵀ A P`.
    pub fn galerkin(&self, p: &CsrMatrix) -> Result<CsrMatrix> {
        p.transpose().matmul(&self.matmul(p)?)
    }

    /// Rows `rows` and columns `cols` (each given as index lists into `self`).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = vec![0usize; rows.len() + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (new_i, &i) in rows.iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = self
                .row(i)
                .filter_map(|(j, v)| (map[j] != usize::MAX).then_some((map[j], v)))
                .collect();
            entries.sort_unstable_by_key(|e| e.0);
            for (j, v) in entries {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[new_i + 1] = col_idx.len();
        }
        CsrMatrix { nrows: rows.len(), ncols: cols.len(), row_ptr, col_idx, values }
    }

    /// Assembles a block matrix; `None` blocks are zero. Row and column block
    /// sizes are taken from `row_sizes` / `col_sizes`.
    pub fn block(
        blocks: &[Vec<Option<&CsrMatrix>>],
        row_sizes: &[usize],
        col_sizes: &[usize],
    ) -> Result<CsrMatrix> {
        let nrows: usize = row_sizes.iter().sum();
        let ncols: usize = col_sizes.iter().sum();
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut row0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            for (bj, b) in brow.iter().enumerate() {
                if let Some(b) = b {
                    check_len(row_sizes[bi], b.nrows)?;
                    check_len(col_sizes[bj], b.ncols)?;
                }
            }
            for i in 0..row_sizes[bi] {
                let mut col0 = 0;
                for (bj, b) in brow.iter().enumerate() {
                    if let Some(b) = b {
                        for (j, v) in b.row(i) {
                            col_idx.push(col0 + j);
                            values.push(v);
                        }
                    }
                    col0 += col_sizes[bj];
                }
                row_ptr[row0 + i + 1] = col_idx.len();
            }
            row0 += row_sizes[bi];
        }
        Ok(CsrMatrix { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// `max |A - Aᵀ|` over all entries.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut m = 0.0f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m = m.max((v - t.get(i, j)).abs());
            }
            for (j, v) in t.row(i) {
                m = m.max((v - self.get(i, j)).abs());
            }
        }
        m
    }

    fn checked_diagonal(&self) -> Result<Vec<f64>> {
        let d = self.diagonal();
        if let Some(i) = d.iter().position(|v| *v == 0.0) {
            return Err(Error::Numerical(format!("zero diagonal entry in row {i}")));
        }
        Ok(d)
    }

    /// Solves `(D + L) x = r` (one forward Gauss–Seidel sweep from zero).
    pub fn gauss_seidel_forward(&self, r: &[f64]) -> Result<Vec<f64>> {
        let d = self.checked_diagonal()?;
        let mut x = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let mut s = r[i];
            for (j, a) in self.row(i) {
                if j < i {
                    s -= a * x[j];
                }
            }
            x[i] = s / d[i];
        }
        Ok(x)
    }

    /// Solves `(D + U) x = r` (one backward Gauss–Seidel sweep from zero).
    pub fn gauss_seidel_backward(&self, r: &[f64]) -> Result<Vec<f64>> {
        let d = self.checked_diagonal()?;
        let mut x = vec![0.0; self.nrows];
        for i in (0..self.nrows).rev() {
            let mut s = r[i];
            for (j, a) in self.row(i) {
                if j > i {
                    s -= a * x[j];
                }
            }
            x[i] = s / d[i];
        }
        Ok(x)
    }

    /// Symmetric Gauss–Seidel: `(D + U)⁻¹ D (D + L)⁻¹ r`.
    pub fn symmetric_gauss_seidel(&self, r: &[f64]) -> Result<Vec<f64>> {
        let d = self.checked_diagonal()?;
        let mut y = self.gauss_seidel_forward(r)?;
        y.iter_mut().zip(&d).for_each(|(y, d)| *y *= d);
        self.gauss_seidel_backward(&y)
    }

    pub fn to_faer(&self) -> Result<faer::sparse::SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push(faer::sparse::Triplet::new(i, j, v));
            }
        }
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Numerical(format!("sparse conversion failed: {e:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 4.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 4.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 4.0), (2, 2, 1.0)],
        )
    }

    #[test]
    fn duplicates_are_summed() {
        assert_eq!(sample().get(2, 2), 5.0);
        assert_eq!(sample().nnz(), 7);
    }

    #[test]
    fn products_match_dense() {
        let a = sample();
        let b = CsrMatrix::from_dense(&DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 0.0, 3.0]));
        let c = a.matmul(&b).unwrap().to_dense();
        assert!((c - a.to_dense() * b.to_dense()).amax() < 1e-15);
        let g = a.galerkin(&b).unwrap().to_dense();
        assert!((g - b.to_dense().transpose() * a.to_dense() * b.to_dense()).amax() < 1e-14);
    }

    #[test]
    fn forward_sweep_on_diagonal_is_exact() {
        let d = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 2.0), (1, 1, 4.0), (2, 2, 8.0)]);
        assert_eq!(d.gauss_seidel_forward(&[2.0, 4.0, 8.0]).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn zero_diagonal_is_reported() {
        let d = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(d.gauss_seidel_forward(&[1.0, 1.0]), Err(Error::Numerical(_))));
    }

    #[test]
    fn block_layout() {
        let a = sample();
        let i = CsrMatrix::identity(3);
        let b = CsrMatrix::block(&[vec![Some(&a), None], vec![None, Some(&i)]], &[3, 3], &[3, 3]).unwrap();
        assert_eq!(b.get(4, 4), 1.0);
        assert_eq!(b.get(1, 2), -1.0);
        assert_eq!(b.get(1, 4), 0.0);
    }
}
