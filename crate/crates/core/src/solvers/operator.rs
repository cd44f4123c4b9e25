use crate::discretization::SaddleSystem;
use crate::sparse::CsrMatrix;
use crate::tensor::{KroneckerOperator, SumKroneckerOperator};

/// A linear map applied to coefficient vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.apply_into(x, &mut y);
        y
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        CsrMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        CsrMatrix::ncols(self)
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

impl LinearOperator for KroneckerOperator {
    fn nrows(&self) -> usize {
        KroneckerOperator::nrows(self)
    }
    fn ncols(&self) -> usize {
        KroneckerOperator::ncols(self)
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let out = KroneckerOperator::apply(self, x).expect("Kronecker operand length");
        y.copy_from_slice(&out);
    }
}

impl LinearOperator for SumKroneckerOperator {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let out = SumKroneckerOperator::apply(self, x).expect("Kronecker operand length");
        y.copy_from_slice(&out);
    }
}

impl LinearOperator for SaddleSystem {
    fn nrows(&self) -> usize {
        self.total_dofs()
    }
    fn ncols(&self) -> usize {
        self.total_dofs()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        SaddleSystem::apply(self, x, y);
    }
}

/// Euclidean inner product.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`.
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}
