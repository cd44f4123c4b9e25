use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::banded::BandedMatrix;
use crate::error::{check_len, Error, Result};
use crate::solvers::operator::LinearOperator;
use crate::splines::{prolongation_1d, SplineSpace1D};
use crate::sparse::CsrMatrix;

/// One smoothing step `x ← x + S r`, expressed through the correction `S r`.
pub trait Smoother {
    /// Correction applied before the coarse-grid step.
    fn pre(&self, r: &[f64]) -> Vec<f64>;
    /// Correction applied after the coarse-grid step; must be the adjoint
    /// of [`Smoother::pre`] for the cycle to be symmetric.
    fn post(&self, r: &[f64]) -> Vec<f64>;
}

/// Operator, smoother and transfer to the next finer level.
pub struct MgLevel {
    pub op: Box<dyn LinearOperator>,
    pub smoother: Option<Box<dyn Smoother>>,
}

/// Nested multigrid hierarchy, coarsest level first.
pub struct MgHierarchy {
    levels: Vec<MgLevel>,
    /// `prolongations[k]` maps level `k` to level `k + 1`.
    prolongations: Vec<Box<dyn LinearOperator>>,
    restrictions: Vec<Box<dyn LinearOperator>>,
    coarse: Cholesky<f64, Dyn>,
}

impl MgHierarchy {
    /// Builds a hierarchy; the coarsest operator is factored densely.
    pub fn new(
        levels: Vec<MgLevel>,
        prolongations: Vec<Box<dyn LinearOperator>>,
        restrictions: Vec<Box<dyn LinearOperator>>,
    ) -> Result<Self> {
        if levels.is_empty() || prolongations.len() + 1 != levels.len() || restrictions.len() != prolongations.len() {
            return Err(Error::Config("multigrid hierarchy needs one transfer pair per level step".into()));
        }
        for (k, (p, r)) in prolongations.iter().zip(&restrictions).enumerate() {
            check_len(levels[k].op.nrows(), p.ncols())?;
            check_len(levels[k + 1].op.nrows(), p.nrows())?;
            check_len(p.nrows(), r.ncols())?;
            check_len(p.ncols(), r.nrows())?;
        }
        if levels[1..].iter().any(|l| l.smoother.is_none()) {
            return Err(Error::Config("every level above the coarsest needs a smoother".into()));
        }
        let dense = operator_to_dense(levels[0].op.as_ref());
        let sym = (&dense + dense.transpose()) * 0.5;
        let coarse = sym
            .cholesky()
            .ok_or_else(|| Error::Numerical("coarsest multigrid operator is not positive definite".into()))?;
        Ok(MgHierarchy { levels, prolongations, restrictions, coarse })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.levels.last().unwrap().op.nrows()
    }

    pub fn level_operator(&self, k: usize) -> &dyn LinearOperator {
        self.levels[k].op.as_ref()
    }

    /// One V(1,1) cycle with zero initial guess applied to `r`.
    pub fn vcycle(&self, r: &[f64]) -> Vec<f64> {
        self.cycle(self.levels.len() - 1, r)
    }

    fn cycle(&self, k: usize, f: &[f64]) -> Vec<f64> {
        if k == 0 {
            let b = nalgebra::DVector::from_column_slice(f);
            return self.coarse.solve(&b).as_slice().to_vec();
        }
        let level = &self.levels[k];
        let smoother = level.smoother.as_ref().unwrap();
        let mut x = smoother.pre(f);
        let mut r = residual(level.op.as_ref(), f, &x);
        let rc = self.restrictions[k - 1].apply(&r);
        let xc = self.cycle(k - 1, &rc);
        let corr = self.prolongations[k - 1].apply(&xc);
        x.iter_mut().zip(&corr).for_each(|(a, b)| *a += b);
        r = residual(level.op.as_ref(), f, &x);
        let post = smoother.post(&r);
        x.iter_mut().zip(&post).for_each(|(a, b)| *a += b);
        x
    }
}

impl LinearOperator for MgHierarchy {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.vcycle(x));
    }
}

fn residual(op: &dyn LinearOperator, f: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = op.apply(x);
    f.iter().zip(&ax).map(|(a, b)| a - b).collect()
}

/// Dense matrix of an operator by applying it to unit vectors.
pub fn operator_to_dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let (m, n) = (op.nrows(), op.ncols());
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}

/// 1D spaces from the coarsest level `coarsest` up to `space`.
pub fn space_hierarchy(space: &SplineSpace1D, coarsest_elements: usize) -> Result<Vec<SplineSpace1D>> {
    let mut spaces = vec![space.clone()];
    while spaces.last().unwrap().num_elements() > coarsest_elements {
        let c = spaces.last().unwrap().coarsened()?;
        spaces.push(c);
    }
    if spaces.last().unwrap().num_elements() != coarsest_elements {
        return Err(Error::Config(format!(
            "{} elements cannot be coarsened dyadically to {coarsest_elements}",
            space.num_elements()
        )));
    }
    spaces.reverse();
    Ok(spaces)
}

/// Prolongation between consecutive spaces restricted to the coefficients
/// that vanish on the boundary (first and last removed).
pub fn interior_prolongation_1d(coarse: &SplineSpace1D, fine: &SplineSpace1D) -> Result<BandedMatrix> {
    let p = prolongation_1d(coarse, fine)?;
    Ok(p.submatrix(1..fine.dim() - 1, 1..coarse.dim() - 1))
}

/// Restriction of a univariate matrix to interior coefficients.
pub fn interior_1d(a: &BandedMatrix) -> BandedMatrix {
    a.submatrix(1..a.nrows() - 1, 1..a.ncols() - 1)
}

/// Gauss–Seidel smoother: forward sweep before, backward sweep after the
/// coarse-grid correction.
pub struct GaussSeidelSmoother {
    matrix: CsrMatrix,
}

impl GaussSeidelSmoother {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        if matrix.diagonal().contains(&0.0) {
            return Err(Error::Numerical("Gauss-Seidel needs a nonzero diagonal".into()));
        }
        Ok(GaussSeidelSmoother { matrix })
    }
}

impl Smoother for GaussSeidelSmoother {
    fn pre(&self, r: &[f64]) -> Vec<f64> {
        self.matrix.gauss_seidel_forward(r).expect("diagonal checked at setup")
    }
    fn post(&self, r: &[f64]) -> Vec<f64> {
        self.matrix.gauss_seidel_backward(r).expect("diagonal checked at setup")
    }
}

/// Gauss–Seidel multigrid for an assembled matrix, given the (sparse)
/// prolongations from each level to the next, coarsest first. Coarse
/// operators are Galerkin products.
pub fn gauss_seidel_hierarchy(fine: &CsrMatrix, prolongations: Vec<CsrMatrix>) -> Result<MgHierarchy> {
    let mut ops = vec![fine.clone()];
    for p in prolongations.iter().rev() {
        let coarse = ops.last().unwrap().galerkin(p)?;
        ops.push(coarse);
    }
    ops.reverse();
    let mut levels = Vec::with_capacity(ops.len());
    for (k, op) in ops.into_iter().enumerate() {
        let smoother: Option<Box<dyn Smoother>> =
            if k == 0 { None } else { Some(Box::new(GaussSeidelSmoother::new(op.clone())?)) };
        levels.push(MgLevel { op: Box::new(op), smoother });
    }
    let restrictions: Vec<Box<dyn LinearOperator>> =
        prolongations.iter().map(|p| Box::new(p.transpose()) as Box<dyn LinearOperator>).collect();
    let prolongations: Vec<Box<dyn LinearOperator>> =
        prolongations.into_iter().map(|p| Box::new(p) as Box<dyn LinearOperator>).collect();
    MgHierarchy::new(levels, prolongations, restrictions)
}

/// Sparse form of `P_y ⊗ P_x` for banded univariate factors.
pub fn kron_to_csr(px: &BandedMatrix, py: &BandedMatrix) -> CsrMatrix {
    let (mx, nx) = (px.nrows(), px.ncols());
    let (my, ny) = (py.nrows(), py.ncols());
    let mut t = Vec::new();
    for jr in 0..my {
        for jc in py.col_range(jr) {
            let b = py.get(jr, jc);
            if b == 0.0 {
                continue;
            }
            for ir in 0..mx {
                for ic in px.col_range(ir) {
                    let a = px.get(ir, ic);
                    if a != 0.0 {
                        t.push((ir + mx * jr, ic + nx * jc, a * b));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(mx * my, nx * ny, t)
}

/// Block-diagonal sparse matrix from diagonal blocks.
pub fn block_diagonal(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
    let k = blocks.len();
    let grid: Vec<Vec<Option<&CsrMatrix>>> =
        (0..k).map(|i| (0..k).map(|j| if i == j { Some(&blocks[i]) } else { None }).collect()).collect();
    let rows: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
    let cols: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
    CsrMatrix::block(&grid, &rows, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::{mass_1d, stiffness_1d};
    use crate::tensor::SumKroneckerOperator;

    #[test]
    fn kron_csr_matches_dense() {
        let s = SplineSpace1D::new(2, 1, 4).unwrap();
        let f = s.refined();
        let p = interior_prolongation_1d(&s, &f).unwrap();
        let k = kron_to_csr(&p, &p);
        let dense = p.to_dense().kronecker(&p.to_dense());
        assert!((k.to_dense() - dense).abs().max() < 1e-15);
    }

    #[test]
    fn two_level_gauss_seidel_is_symmetric_and_contracts() {
        let fine = SplineSpace1D::new(2, 1, 8).unwrap();
        let coarse = fine.coarsened().unwrap();
        let (k, m) = (interior_1d(&stiffness_1d(&fine)), interior_1d(&mass_1d(&fine)));
        let op = SumKroneckerOperator::laplacian(&k, &m, &k, &m);
        let a = CsrMatrix::from_dense(&op.to_dense());
        let p1 = interior_prolongation_1d(&coarse, &fine).unwrap();
        let h = gauss_seidel_hierarchy(&a, vec![kron_to_csr(&p1, &p1)]).unwrap();
        let v = operator_to_dense(&h);
        assert!((&v - v.transpose()).abs().max() < 1e-10 * v.abs().max());
        // error propagation I - V A has spectral radius below one
        let e = DMatrix::identity(v.nrows(), v.nrows()) - &v * a.to_dense();
        let rho = e.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(rho < 0.9, "rho = {rho}");
    }

    #[test]
    fn single_level_solves_exactly() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        let h = gauss_seidel_hierarchy(&a, vec![]).unwrap();
        let x = h.vcycle(&[1.0, 0.0]);
        let r = a.matvec(&x).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12 && r[1].abs() < 1e-12);
    }
}
