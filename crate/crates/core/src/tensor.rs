//! Kronecker-product operators on lexicographically ordered coefficient
//! vectors. The x index runs fastest: entry `(i, j)` lives at `i + nx * j`.

use nalgebra::{DMatrix, DMatrixView, DVector};

use crate::banded::{BandedCholesky, BandedMatrix};
use crate::error::{check_len, Error, Result};

/// A univariate factor of a Kronecker operator.
#[derive(Debug, Clone)]
pub enum Factor {
    Banded(BandedMatrix),
    Dense(DMatrix<f64>),
}

impl Factor {
    pub fn nrows(&self) -> usize {
        match self {
            Factor::Banded(b) => b.nrows(),
            Factor::Dense(d) => d.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Factor::Banded(b) => b.ncols(),
            Factor::Dense(d) => d.ncols(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Factor::Banded(b) => b.to_dense(),
            Factor::Dense(d) => d.clone(),
        }
    }

    /// See [`BandedMatrix::apply_blocks`].
    pub fn apply_blocks(&self, x: &[f64], y: &mut [f64], width: usize) {
        match self {
            Factor::Banded(b) => b.apply_blocks(x, y, width),
            Factor::Dense(d) => {
                for i in 0..d.nrows() {
                    let out = &mut y[i * width..(i + 1) * width];
                    out.iter_mut().for_each(|v| *v = 0.0);
                    for j in 0..d.ncols() {
                        let a = d[(i, j)];
                        if a != 0.0 {
                            let src = &x[j * width..(j + 1) * width];
                            out.iter_mut().zip(src).for_each(|(o, s)| *o += a * s);
                        }
                    }
                }
            }
        }
    }
}

impl From<BandedMatrix> for Factor {
    fn from(b: BandedMatrix) -> Self {
        Factor::Banded(b)
    }
}

impl From<DMatrix<f64>> for Factor {
    fn from(d: DMatrix<f64>) -> Self {
        Factor::Dense(d)
    }
}

/// Applies `a` along the x axis of the `nx_in x ny` array `v`.
pub(crate) fn apply_x(a: &Factor, v: &[f64], ny: usize) -> Vec<f64> {
    let (nin, nout) = (a.ncols(), a.nrows());
    if let Factor::Dense(d) = a {
        // column-major view: the fast x index is the row index
        let vm = DMatrixView::from_slice(v, nin, ny);
        return (d * vm).data.into();
    }
    let mut out = vec![0.0; nout * ny];
    for j in 0..ny {
        a.apply_blocks(&v[j * nin..(j + 1) * nin], &mut out[j * nout..(j + 1) * nout], 1);
    }
    out
}

/// Applies `a` along the y axis of the `nx x ny_in` array `v`.
pub(crate) fn apply_y(a: &Factor, v: &[f64], nx: usize) -> Vec<f64> {
    if let Factor::Dense(d) = a {
        let vm = DMatrixView::from_slice(v, nx, a.ncols());
        return (vm * d.transpose()).data.into();
    }
    let mut out = vec![0.0; a.nrows() * nx];
    a.apply_blocks(v, &mut out, nx);
    out
}

/// The operator `factor_y ⊗ factor_x`: the x factor acts on the fast index,
/// the y factor on the slow one.
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    pub factor_x: Factor,
    pub factor_y: Factor,
}

impl KroneckerOperator {
    pub fn new(factor_x: impl Into<Factor>, factor_y: impl Into<Factor>) -> Self {
        KroneckerOperator { factor_x: factor_x.into(), factor_y: factor_y.into() }
    }

    pub fn nrows(&self) -> usize {
        self.factor_x.nrows() * self.factor_y.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.factor_x.ncols() * self.factor_y.ncols()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.ncols(), v.len())?;
        let tmp = apply_x(&self.factor_x, v, self.factor_y.ncols());
        Ok(apply_y(&self.factor_y, &tmp, self.factor_x.nrows()))
    }

    /// Explicit Kronecker product; only sensible for small factors.
    pub fn to_dense(&self) -> DMatrix<f64> {
        self.factor_y.to_dense().kronecker(&self.factor_x.to_dense())
    }
}

/// `(factor_y ⊗ factor_x) v` without forming the product.
pub fn kron_apply(op: &KroneckerOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.apply(v)
}

/// A sum of Kronecker terms plus a multiple of the identity.
#[derive(Debug, Clone)]
pub struct SumKroneckerOperator {
    pub terms: Vec<KroneckerOperator>,
    pub shift: f64,
}

impl SumKroneckerOperator {
    pub fn new(terms: Vec<KroneckerOperator>) -> Self {
        SumKroneckerOperator { terms, shift: 0.0 }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// The two-term Laplacian-type operator `K_x ⊗ M_y + M_x ⊗ K_y`
    /// (stiffness in x times mass in y, plus mass in x times stiffness in y).
    pub fn laplacian(
        stiff_x: &BandedMatrix,
        mass_x: &BandedMatrix,
        stiff_y: &BandedMatrix,
        mass_y: &BandedMatrix,
    ) -> Self {
        Self::new(vec![
            KroneckerOperator::new(stiff_x.clone(), mass_y.clone()),
            KroneckerOperator::new(mass_x.clone(), stiff_y.clone()),
        ])
    }

    pub fn dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.nrows())
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = v.iter().map(|x| self.shift * x).collect();
        for t in &self.terms {
            let y = t.apply(v)?;
            check_len(out.len(), y.len())?;
            out.iter_mut().zip(&y).for_each(|(o, a)| *o += a);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::<f64>::identity(n, n) * self.shift;
        for t in &self.terms {
            d += t.to_dense();
        }
        d
    }
}

/// Exact inverse of `mass_y ⊗ mass_x` through banded Cholesky factors.
#[derive(Debug, Clone)]
pub struct KronMassInverse {
    chol_x: BandedCholesky,
    chol_y: BandedCholesky,
}

impl KronMassInverse {
    pub fn new(mass_x: &BandedMatrix, mass_y: &BandedMatrix) -> Result<Self> {
        Ok(KronMassInverse { chol_x: mass_x.cholesky()?, chol_y: mass_y.cholesky()? })
    }

    pub fn dim(&self) -> usize {
        self.chol_x.dim() * self.chol_y.dim()
    }

    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let mut out = v.to_vec();
        self.solve_in_place(&mut out);
        Ok(out)
    }

    pub fn solve_in_place(&self, v: &mut [f64]) {
        let nx = self.chol_x.dim();
        for block in v.chunks_mut(nx) {
            self.chol_x.solve_blocks(block, 1);
        }
        self.chol_y.solve_blocks(v, nx);
    }
}

/// `(mass_y ⊗ mass_x)^{-1} v`.
pub fn kron_mass_solve(mass_x: &BandedMatrix, mass_y: &BandedMatrix, v: &[f64]) -> Result<Vec<f64>> {
    KronMassInverse::new(mass_x, mass_y)?.solve(v)
}

/// Generalized eigendecomposition of a symmetric pencil `(K, M)` with `M`
/// SPD: columns `U` with `Uᵀ M U = I` and `Uᵀ K U = diag(λ)`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl GeneralizedEigen {
    pub fn new(stiff: &DMatrix<f64>, mass: &DMatrix<f64>) -> Result<Self> {
        let n = mass.nrows();
        let chol = mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("mass factor is not positive definite".into()))?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let mut c = &linv * stiff * linv.transpose();
        c = (&c + c.transpose()) * 0.5;
        let eig = c.symmetric_eigen();
        let vectors = linv.transpose() * eig.eigenvectors;
        debug_assert_eq!(vectors.nrows(), n);
        Ok(GeneralizedEigen { values: eig.eigenvalues.iter().copied().collect(), vectors })
    }
}

/// Fast-diagonalization solver for
/// `K_x ⊗ M_y + M_x ⊗ K_y + shift · M_x ⊗ M_y` (x factor named first).
#[derive(Debug, Clone)]
pub struct FastDiagSolver {
    ex: GeneralizedEigen,
    ey: GeneralizedEigen,
    ux: Factor,
    uy: Factor,
    ux_t: Factor,
    uy_t: Factor,
    inv_diag: Vec<f64>,
}

impl FastDiagSolver {
    pub fn new(
        stiff_x: &DMatrix<f64>,
        mass_x: &DMatrix<f64>,
        stiff_y: &DMatrix<f64>,
        mass_y: &DMatrix<f64>,
        shift: f64,
    ) -> Result<Self> {
        let ex = GeneralizedEigen::new(stiff_x, mass_x)?;
        let ey = GeneralizedEigen::new(stiff_y, mass_y)?;
        let scale = ex.values.iter().chain(&ey.values).fold(shift.abs(), |m, v| m.max(v.abs()));
        let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
        let nx = ex.values.len();
        let mut inv_diag = Vec::with_capacity(nx * ey.values.len());
        for &mu in &ey.values {
            for &lam in &ex.values {
                let d = lam + mu + shift;
                if d.abs() <= tol {
                    return Err(Error::Singular(
                        "fast diagonalization: operator has a nontrivial kernel".into(),
                    ));
                }
                inv_diag.push(1.0 / d);
            }
        }
        let ux = Factor::Dense(ex.vectors.clone());
        let uy = Factor::Dense(ey.vectors.clone());
        let ux_t = Factor::Dense(ex.vectors.transpose());
        let uy_t = Factor::Dense(ey.vectors.transpose());
        Ok(FastDiagSolver { ex, ey, ux, uy, ux_t, uy_t, inv_diag })
    }

    pub fn from_banded(
        stiff_x: &BandedMatrix,
        mass_x: &BandedMatrix,
        stiff_y: &BandedMatrix,
        mass_y: &BandedMatrix,
        shift: f64,
    ) -> Result<Self> {
        Self::new(&stiff_x.to_dense(), &mass_x.to_dense(), &stiff_y.to_dense(), &mass_y.to_dense(), shift)
    }

    pub fn dim(&self) -> usize {
        self.inv_diag.len()
    }

    pub fn eigenvalues_x(&self) -> &[f64] {
        &self.ex.values
    }

    pub fn eigenvalues_y(&self) -> &[f64] {
        &self.ey.values
    }

    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let nx = self.ux_t.nrows();
        let ny = self.uy_t.nrows();
        let mut t = apply_y(&self.uy_t, &apply_x(&self.ux_t, v, ny), nx);
        t.iter_mut().zip(&self.inv_diag).for_each(|(a, d)| *a *= d);
        Ok(apply_y(&self.uy, &apply_x(&self.ux, &t, ny), nx))
    }
}

/// `(K_x ⊗ M_y + M_x ⊗ K_y + shift · M_x ⊗ M_y)^{-1} v`.
pub fn fast_diag_solve(
    stiff_x: &DMatrix<f64>,
    mass_x: &DMatrix<f64>,
    stiff_y: &DMatrix<f64>,
    mass_y: &DMatrix<f64>,
    shift: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    FastDiagSolver::new(stiff_x, mass_x, stiff_y, mass_y, shift)?.solve(v)
}

/// Leading singular pair of `samples`, scaled so that `u wᵀ` is the best
/// rank-one approximation in the Frobenius norm.
///
/// Power iteration on `SᵀS` starting from the all-ones vector; signs are
/// fixed so that both factors have nonnegative sums.
pub fn rank_one_approx(samples: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if samples.iter().all(|v| *v == 0.0) || samples.is_empty() {
        return Err(Error::Degenerate("rank-one approximation of a zero matrix".into()));
    }
    let st = samples.transpose();
    let mut w = DVector::from_element(samples.ncols(), 1.0 / (samples.ncols() as f64).sqrt());
    for _ in 0..500 {
        let mut next = &st * (samples * &w);
        let norm = next.norm();
        if norm == 0.0 {
            // start vector orthogonal to the row space; restart from a basis vector
            let k = samples.column_iter().position(|c| c.norm() > 0.0).unwrap_or(0);
            w = DVector::from_fn(samples.ncols(), |i, _| if i == k { 1.0 } else { 0.0 });
            continue;
        }
        next /= norm;
        let change = (&next - &w).norm();
        w = next;
        if change <= 1e-12 {
            break;
        }
    }
    let mut u = samples * &w;
    if w.sum() < 0.0 || (w.sum() == 0.0 && u.sum() < 0.0) {
        w = -w;
        u = -u;
    }
    // balance the two factors
    let (nu, nw) = (u.norm(), w.norm());
    let s = (nu / nw).sqrt();
    Ok((u / s, w * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn banded(d: DMatrix<f64>) -> BandedMatrix {
        BandedMatrix::from_dense(&d)
    }

    #[test]
    fn identity_factors_leave_vector_unchanged() {
        let op = KroneckerOperator::new(BandedMatrix::identity(3), BandedMatrix::identity(3));
        let v: Vec<f64> = (0..9).map(|i| i as f64 * 0.7 - 2.0).collect();
        assert_eq!(kron_apply(&op, &v).unwrap(), v);
    }

    #[test]
    fn scalar_kronecker() {
        let op = KroneckerOperator::new(
            banded(DMatrix::from_element(1, 1, 2.0)),
            banded(DMatrix::from_element(1, 1, 3.0)),
        );
        assert_eq!(kron_apply(&op, &[5.0]).unwrap(), vec![30.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let op = KroneckerOperator::new(BandedMatrix::identity(3), BandedMatrix::identity(2));
        assert!(matches!(kron_apply(&op, &[1.0; 5]), Err(Error::Shape { .. })));
    }

    #[test]
    fn p0_mass_solve_scales() {
        let m = BandedMatrix::from_diagonal(&[0.25; 4]);
        let v: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let x = kron_mass_solve(&m, &m, &v).unwrap();
        for (a, b) in x.iter().zip(&v) {
            assert!((a - 16.0 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn fast_diag_scalar_and_diagonal() {
        let z = DMatrix::from_element(1, 1, 0.0);
        let one = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(fast_diag_solve(&z, &one, &z, &one, 1.0, &[2.0]).unwrap(), vec![2.0]);

        let kx = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let ky = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 5.0, 7.0]));
        let ix = DMatrix::identity(2, 2);
        let iy = DMatrix::identity(3, 3);
        let v = vec![1.0; 6];
        let x = fast_diag_solve(&kx, &ix, &ky, &iy, 0.5, &v).unwrap();
        for j in 0..3 {
            for i in 0..2 {
                let expect = 1.0 / (kx[(i, i)] + ky[(j, j)] + 0.5);
                assert!((x[i + 2 * j] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fast_diag_detects_pure_neumann() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let m = DMatrix::identity(2, 2);
        assert!(matches!(fast_diag_solve(&k, &m, &k, &m, 0.0, &[1.0; 4]), Err(Error::Singular(_))));
    }

    #[test]
    fn rank_one_of_identity_has_unit_error() {
        let (u, w) = rank_one_approx(&DMatrix::identity(2, 2)).unwrap();
        let err = (DMatrix::<f64>::identity(2, 2) - &u * w.transpose()).norm();
        assert!((err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_rejects_zero() {
        assert!(matches!(rank_one_approx(&DMatrix::zeros(3, 2)), Err(Error::Degenerate(_))));
    }
}
