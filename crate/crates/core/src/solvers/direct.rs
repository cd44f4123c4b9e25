use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use nalgebra::DMatrix;

use crate::discretization::{pressure_kernel, SaddleSystem};
use crate::error::{check_len, Error, Result};
use crate::solvers::minres::project_out;
use crate::solvers::operator::norm;
use crate::sparse::CsrMatrix;

/// Sparse LU factorization with partial pivoting.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Shape { expected: a.nrows(), actual: a.ncols() });
        }
        let lu = a.to_faer()?.sp_lu().map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { n: a.nrows(), lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("sparse LU produced non-finite values".into()));
        }
        Ok(out)
    }

    pub fn solve_dense(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_len(self.n, b.nrows())?;
        let rhs = Mat::<f64>::from_fn(self.n, b.ncols(), |i, j| b[(i, j)]);
        let x = self.lu.solve(&rhs);
        Ok(DMatrix::from_fn(self.n, b.ncols(), |i, j| x[(i, j)]))
    }
}

/// Solves a reduced saddle system exactly. The pressure kernel (the
/// constant and any spurious modes) is computed and removed, so the returned
/// pressure is orthogonal to it.
pub fn direct_solve(system: &SaddleSystem) -> Result<Vec<f64>> {
    direct_solve_with_kernel(system, &pressure_kernel(system)?)
}

/// [`direct_solve`] with a known orthonormal basis `kernel` of the pressure
/// kernel. One pressure unknown per kernel vector is fixed to zero (chosen
/// so that the remaining matrix is nonsingular), the pressure right-hand
/// side is made orthogonal to the kernel, and the solution is projected
/// back onto the orthogonal complement of the kernel. Unlike bordering with
/// the dense kernel vectors this keeps the factorization sparse.
pub fn direct_solve_with_kernel(system: &SaddleSystem, kernel: &[Vec<f64>]) -> Result<Vec<f64>> {
    let (nv, np) = (system.num_velocity(), system.num_pressure());
    let n = nv + np;
    for k in kernel {
        check_len(np, k.len())?;
    }
    let pinned: Vec<usize> = pivot_rows(kernel, np)?.into_iter().map(|r| nv + r).collect();
    let mut keep = vec![true; n];
    pinned.iter().for_each(|&i| keep[i] = false);
    let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();

    let a = system.full_matrix()?;
    let reduced = a.submatrix(&kept, &kept);
    let mut rhs = system.rhs();
    project_out(&mut rhs[nv..], kernel);
    let rhs_kept: Vec<f64> = kept.iter().map(|&i| rhs[i]).collect();
    let lu = SparseLu::new(&reduced)?;
    let sol = lu.solve(&rhs_kept)?;
    let mut x = vec![0.0; n];
    for (&i, v) in kept.iter().zip(sol) {
        x[i] = v;
    }
    let check = a.matvec(&x)?;
    let res: Vec<f64> = check.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    if norm(&res) > 1e-8 * norm(&rhs).max(f64::MIN_POSITIVE) {
        return Err(Error::Singular("saddle matrix is singular beyond the pressure kernel".into()));
    }
    project_out(&mut x[nv..], kernel);
    Ok(x)
}

/// Rows of the `np × m` matrix with columns `kernel` selected by Gaussian
/// elimination with complete pivoting; the selected `m × m` submatrix is
/// nonsingular.
fn pivot_rows(kernel: &[Vec<f64>], np: usize) -> Result<Vec<usize>> {
    let mut cols: Vec<Vec<f64>> = kernel.to_vec();
    let mut rows = Vec::with_capacity(cols.len());
    while !cols.is_empty() {
        let (c, r, v) = cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().enumerate().map(move |(r, &v)| (c, r, v)))
            .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
            .expect("non-empty kernel columns");
        if v.abs() <= 1e-12 {
            return Err(Error::Numerical("pressure kernel basis is rank deficient".into()));
        }
        let pivot = cols.swap_remove(c);
        for col in cols.iter_mut() {
            let f = col[r] / v;
            col.iter_mut().zip(&pivot).for_each(|(a, b)| *a -= f * b);
        }
        debug_assert!(r < np);
        rows.push(r);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -3.0)]);
        let lu = SparseLu::new(&a).unwrap();
        let x = lu.solve(&[1.0, 2.0]).unwrap();
        let r = a.matvec(&x).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_system() {
        let a = CsrMatrix::from_triplets(1, 1, vec![(0, 0, 4.0)]);
        assert_eq!(SparseLu::new(&a).unwrap().solve(&[2.0]).unwrap(), vec![0.5]);
    }
}
