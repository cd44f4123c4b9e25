use nalgebra::DMatrix;

use crate::discretization::assembly::SaddleSystem;
use crate::error::{Error, Result};
use crate::solvers::direct::SparseLu;
use crate::solvers::operator::norm;
use crate::solvers::project_out;
use crate::sparse::CsrMatrix;
use crate::tensor::GeneralizedEigen;

/// Eigenvalues of `D Dᵀ q = λ M_p q` below this fraction of the mean
/// eigenvalue are counted as kernel.
const KERNEL_THRESHOLD: f64 = 1e-9;
/// Relative shift used in the inverse iteration.
const SHIFT: f64 = 1e-11;
const INVERSE_STEPS: usize = 4;

/// Orthonormal basis (Euclidean inner product on the pressure coefficients)
/// of the kernel of `Dᵀ`, i.e. the pressures that are invisible to every
/// discrete velocity. The normalised constant vector comes first whenever
/// it belongs to the kernel.
pub fn pressure_kernel(system: &SaddleSystem) -> Result<Vec<Vec<f64>>> {
    let np = system.num_pressure();
    if np == 0 {
        return Ok(Vec::new());
    }
    let d = &system.divergence;
    let gram = d.matmul(&d.transpose())?;
    let mass = &system.pressure_mass;
    let scale = trace(&gram) / trace(mass);
    if !(scale > 0.0) {
        return Err(Error::Degenerate("divergence block vanishes".into()));
    }
    let shifted = gram.add_scaled(mass, SHIFT * scale)?;
    let lu = SparseLu::new(&shifted)?;

    let mut block = 8.min(np);
    loop {
        let (values, vectors) = lowest_modes(&gram, mass, &lu, block)?;
        let zero = values.iter().take_while(|&&l| l <= KERNEL_THRESHOLD * scale).count();
        if zero < block || block == np {
            return orthonormal_with_constant(&vectors.columns(0, zero).into_owned(), d);
        }
        block = (2 * block).min(np);
    }
}

/// Removes from the pressure `p` its L²-orthogonal projection onto the
/// kernel spanned by `kernel`, giving the representative with minimal
/// L² norm (for the constant mode alone: the zero-mean pressure).
pub fn l2_orthogonal_pressure(mass: &CsrMatrix, kernel: &[Vec<f64>], p: &[f64]) -> Result<Vec<f64>> {
    let np = p.len();
    if kernel.is_empty() {
        return Ok(p.to_vec());
    }
    let k = DMatrix::from_fn(np, kernel.len(), |i, j| kernel[j][i]);
    let mk = apply_dense(mass, &k)?;
    let gram = k.transpose() * &mk;
    let coef = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("kernel mass matrix is not positive definite".into()))?
        .solve(&(mk.transpose() * nalgebra::DVector::from_column_slice(p)));
    let correction = &k * coef;
    Ok(p.iter().zip(correction.iter()).map(|(a, b)| a - b).collect())
}

fn trace(a: &CsrMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.get(i, i)).sum()
}

/// Ritz pairs of `gram q = λ mass q` from a few steps of block inverse
/// iteration, ascending in λ.
fn lowest_modes(
    gram: &CsrMatrix,
    mass: &CsrMatrix,
    lu: &SparseLu,
    block: usize,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let np = gram.nrows();
    // Deterministic, non-degenerate start block.
    let mut v = DMatrix::from_fn(np, block, |i, j| {
        if j == 0 {
            1.0
        } else {
            ((i + 1) as f64 * (0.7548776662 * j as f64 + 0.5698402910)).sin()
        }
    });
    for _ in 0..INVERSE_STEPS {
        let mv = apply_dense(mass, &v)?;
        v = lu.solve_dense(&mv)?;
        v = v.qr().q();
    }
    let gv = apply_dense(gram, &v)?;
    let mv = apply_dense(mass, &v)?;
    let small_g = v.transpose() * gv;
    let small_m = v.transpose() * mv;
    let small_g = (&small_g + small_g.transpose()) * 0.5;
    let small_m = (&small_m + small_m.transpose()) * 0.5;
    let eig = GeneralizedEigen::new(&small_g, &small_m)?;
    let mut order: Vec<usize> = (0..block).collect();
    order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));
    let values = order.iter().map(|&k| eig.values[k]).collect();
    let ritz = &v * &eig.vectors;
    let vectors = DMatrix::from_fn(np, block, |i, j| ritz[(i, order[j])]);
    Ok((values, vectors))
}

fn apply_dense(a: &CsrMatrix, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(a.nrows(), x.ncols());
    for j in 0..x.ncols() {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        out.set_column(j, &nalgebra::DVector::from_vec(a.matvec(&col)?));
    }
    Ok(out)
}

/// Orthonormalises the span of `basis`, replacing its best approximation
/// of the constant by the exact constant when `Dᵀ 1 = 0`.
fn orthonormal_with_constant(basis: &DMatrix<f64>, d: &CsrMatrix) -> Result<Vec<Vec<f64>>> {
    let (np, m) = basis.shape();
    if m == 0 {
        return Ok(Vec::new());
    }
    let ones = vec![1.0 / (np as f64).sqrt(); np];
    let mut dt1 = vec![0.0; d.ncols()];
    d.transpose_matvec_add(&ones, &mut dt1);
    let constant_in_kernel = dt1.iter().fold(0.0f64, |a, v| a.max(v.abs())) <= 1e-9 * d.max_abs();

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(m);
    if constant_in_kernel {
        out.push(ones);
    }
    let mut rest: Vec<Vec<f64>> = basis.column_iter().map(|c| c.iter().copied().collect()).collect();
    // Greedy Gram–Schmidt with column pivoting (two projection passes).
    while out.len() < m {
        for r in rest.iter_mut() {
            project_out(r, &out);
            project_out(r, &out);
        }
        let (best, len) = rest
            .iter()
            .enumerate()
            .map(|(i, r)| (i, norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Numerical("kernel basis exhausted".into()))?;
        if len == 0.0 {
            return Err(Error::Numerical("kernel basis is rank deficient".into()));
        }
        let mut v = rest.swap_remove(best);
        v.iter_mut().for_each(|x| *x /= len);
        out.push(v);
    }
    Ok(out)
}
