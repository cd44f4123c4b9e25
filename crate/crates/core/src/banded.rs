//! Row-banded storage for the univariate Galerkin factors.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// A (possibly rectangular) matrix whose nonzeros satisfy
/// `i - lower <= j <= i + upper`.
///
/// Storage is row-major over the band, `lower + upper + 1` slots per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    rows: usize,
    cols: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        BandedMatrix {
            rows,
            cols,
            lower,
            upper,
            data: vec![0.0; rows * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len(), 0, 0);
        m.data.copy_from_slice(diag);
        m
    }

    /// Builds the tightest band holding every nonzero of `dense`.
    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let (rows, cols) = dense.shape();
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..rows {
            for j in 0..cols {
                if dense[(i, j)] != 0.0 {
                    if i > j {
                        lower = lower.max(i - j);
                    } else {
                        upper = upper.max(j - i);
                    }
                }
            }
        }
        let mut m = Self::zeros(rows, cols, lower, upper);
        for i in 0..rows {
            for j in m.col_range(i) {
                let v = dense[(i, j)];
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    /// Largest `|i - j|` over the actually nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.rows {
            for j in self.col_range(i) {
                if self.get(i, j) != 0.0 {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        bw
    }

    /// Columns of row `i` that are inside the stored band.
    pub fn col_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.lower);
        let hi = (i + self.upper + 1).min(self.cols);
        lo..hi.max(lo)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.rows || j >= self.cols || j + self.lower < i || j > i + self.upper {
            return None;
        }
        Some(i * (self.lower + self.upper + 1) + (j + self.lower - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Panics if `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside the stored band");
        self.data[k] = v;
    }

    /// Panics if `(i, j)` is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside the stored band");
        self.data[k] += v;
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in self.col_range(i) {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.upper, self.lower);
        for i in 0..self.rows {
            for j in self.col_range(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Principal or rectangular sub-block `rows x cols`.
    pub fn submatrix(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> BandedMatrix {
        let mut dense = DMatrix::zeros(rows.len(), cols.len());
        for (a, i) in rows.clone().enumerate() {
            for (b, j) in cols.clone().enumerate() {
                dense[(a, b)] = self.get(i, j);
            }
        }
        Self::from_dense(&dense)
    }

    /// `Pᵀ · self · P`, the Galerkin projection onto the range of `p`.
    pub fn galerkin(&self, p: &BandedMatrix) -> BandedMatrix {
        let pd = p.to_dense();
        Self::from_dense(&(pd.transpose() * self.to_dense() * pd))
    }

    /// `Pᵀ · self · Q` for two (possibly different) transfer matrices.
    pub fn galerkin2(&self, p: &BandedMatrix, q: &BandedMatrix) -> BandedMatrix {
        Self::from_dense(&(p.to_dense().transpose() * self.to_dense() * q.to_dense()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| {
            self.col_range(i)
                .all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * scale)
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut y = vec![0.0; self.rows];
        self.apply_blocks(x, &mut y, 1);
        Ok(y)
    }

    /// `y = A x` where `x` holds `cols` blocks of `width` contiguous values
    /// (and `y` holds `rows` such blocks). With `width == 1` this is the
    /// plain product; larger widths apply the matrix along a strided axis.
    pub fn apply_blocks(&self, x: &[f64], y: &mut [f64], width: usize) {
        debug_assert_eq!(x.len(), self.cols * width);
        debug_assert_eq!(y.len(), self.rows * width);
        let stride = self.lower + self.upper + 1;
        if width == 1 {
            for i in 0..self.rows {
                let r = self.col_range(i);
                let row = &self.data[i * stride + r.start + self.lower - i..][..r.len()];
                y[i] = row.iter().zip(&x[r]).map(|(a, b)| a * b).sum();
            }
            return;
        }
        for i in 0..self.rows {
            let out = &mut y[i * width..(i + 1) * width];
            out.iter_mut().for_each(|v| *v = 0.0);
            for j in self.col_range(i) {
                let a = self.data[i * stride + j + self.lower - i];
                if a == 0.0 {
                    continue;
                }
                let src = &x[j * width..(j + 1) * width];
                out.iter_mut().zip(src).for_each(|(o, s)| *o += a * s);
            }
        }
    }

    /// Cholesky factorization of a symmetric positive definite band matrix.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        BandedCholesky::factor(self)
    }
}

/// Lower-triangular band factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Shape { expected: a.nrows(), actual: a.ncols() });
        }
        let n = a.nrows();
        let bw = a.lower().max(a.upper());
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = a.get(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[idx(i, k)] * l[idx(j, k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Numerical(format!(
                            "banded Cholesky: non-positive pivot {s:e} at row {i}"
                        )));
                    }
                    l[idx(i, i)] = s.sqrt();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_blocks(&mut x, 1);
        Ok(x)
    }

    /// In-place solve for `width` right-hand sides laid out as `n` blocks of
    /// `width` contiguous values.
    pub fn solve_blocks(&self, data: &mut [f64], width: usize) {
        debug_assert_eq!(data.len(), self.n * width);
        let w = self.bw + 1;
        let bw = self.bw;
        let idx = |i: usize, j: usize| i * w + (j + bw - i);
        if width == 1 {
            for i in 0..self.n {
                let mut s = data[i];
                for k in i.saturating_sub(bw)..i {
                    s -= self.l[idx(i, k)] * data[k];
                }
                data[i] = s / self.l[idx(i, i)];
            }
            for i in (0..self.n).rev() {
                let mut s = data[i];
                for k in (i + 1)..(i + bw + 1).min(self.n) {
                    s -= self.l[idx(k, i)] * data[k];
                }
                data[i] = s / self.l[idx(i, i)];
            }
            return;
        }
        for i in 0..self.n {
            let (head, tail) = data.split_at_mut(i * width);
            let row = &mut tail[..width];
            for k in i.saturating_sub(bw)..i {
                let a = self.l[idx(i, k)];
                let src = &head[k * width..(k + 1) * width];
                row.iter_mut().zip(src).for_each(|(r, s)| *r -= a * s);
            }
            let d = 1.0 / self.l[idx(i, i)];
            row.iter_mut().for_each(|r| *r *= d);
        }
        for i in (0..self.n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * width);
            let row = &mut head[i * width..];
            for k in (i + 1)..(i + bw + 1).min(self.n) {
                let a = self.l[idx(k, i)];
                let src = &tail[(k - i - 1) * width..(k - i) * width];
                row.iter_mut().zip(src).for_each(|(r, s)| *r -= a * s);
            }
            let d = 1.0 / self.l[idx(i, i)];
            row.iter_mut().for_each(|r| *r *= d);
        }
    }
}
