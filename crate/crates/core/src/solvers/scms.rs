//! Subspace-corrected mass smoother for Kronecker-structured stiffness
//! operators `K_x ⊗ M_y + M_x ⊗ K_y` on spline spaces with homogeneous
//! Dirichlet conditions.
//!
//! Per direction the interior spline space is split into the subspace of
//! splines whose even derivatives of order `2, 4, … < p` vanish at both end
//! points, and its mass-orthogonal complement (at most `p` functions per end).
//! On the first subspace the stiffness is replaced by `σ` times the mass,
//! which is a robust upper bound there; the complement keeps the true
//! stiffness. Each of the four tensor-product subspaces is then corrected
//! exactly by fast diagonalization.

use nalgebra::DMatrix;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::solvers::multigrid::{interior_prolongation_1d, space_hierarchy, MgHierarchy, MgLevel, Smoother};
use crate::solvers::operator::{dot, LinearOperator};
use crate::splines::SplineSpace1D;
use crate::tensor::{apply_x, apply_y, Factor, GeneralizedEigen, KroneckerOperator, SumKroneckerOperator};

/// Univariate stiffness/mass pair of one direction, restricted to interior
/// coefficients.
#[derive(Debug, Clone)]
pub struct DirectionMatrices {
    pub space: SplineSpace1D,
    pub stiff: BandedMatrix,
    pub mass: BandedMatrix,
    /// Mass matrix carrying the weight of `stiff`; `σ` times it replaces
    /// the stiffness on the constrained subspace. Equals `mass` for
    /// unweighted matrices.
    pub surrogate: BandedMatrix,
}

/// Endpoint constraints `∂^{2l} u(0) = ∂^{2l} u(1) = 0`, `0 < 2l < p`, on the
/// interior coefficients of `space`.
pub fn boundary_constraints(space: &SplineSpace1D) -> Result<DMatrix<f64>> {
    let n = space.dim();
    let p = space.degree();
    let orders: Vec<usize> = (1..).map(|l| 2 * l).take_while(|&d| d < p).collect();
    let mut c = DMatrix::zeros(2 * orders.len(), n - 2);
    for (k, &d) in orders.iter().enumerate() {
        for (side, x) in [0.0, 1.0].into_iter().enumerate() {
            let (first, vals) = space.eval_basis(x, d)?;
            for (r, v) in vals.iter().enumerate() {
                let i = first + r;
                if i >= 1 && i <= n - 2 {
                    c[(2 * k + side, i - 1)] = *v;
                }
            }
        }
    }
    Ok(c)
}

/// Basis matrices `(B̃, B_Γ)` of the two subspaces of the interior space:
/// `B̃` spans the kernel of the constraints (orthonormal columns), `B_Γ =
/// M⁻¹ Cᵀ` its mass-orthogonal complement.
pub fn split_1d(space: &SplineSpace1D, mass: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = mass.nrows();
    let c = boundary_constraints(space)?;
    if c.nrows() == 0 {
        return Ok((DMatrix::identity(n, n), DMatrix::zeros(n, 0)));
    }
    // kernel of C from the eigenvectors of CᵀC with (numerically) zero eigenvalue
    // rows of different derivative order differ in scale by powers of n
    let mut cn = c.clone();
    for mut row in cn.row_iter_mut() {
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= nrm;
        }
    }
    let eig = (cn.transpose() * &cn).symmetric_eigen();
    let top = eig.eigenvalues.max();
    let kernel: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= 1e-10 * top).collect();
    let range: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
    let tilde = DMatrix::from_fn(n, kernel.len(), |i, j| eig.eigenvectors[(i, kernel[j])]);
    // independent constraint combinations span the row space of C
    let rows = DMatrix::from_fn(n, range.len(), |i, j| eig.eigenvectors[(i, range[j])]);
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("interior mass matrix is not positive definite".into()))?;
    let gamma = chol.solve(&rows);
    Ok((tilde, gamma))
}

/// Diagonalised smoother solve in transformed form.
#[derive(Debug, Clone)]
struct SubspaceSolve {
    tx: Factor,
    tx_t: Factor,
    ty: Factor,
    ty_t: Factor,
    inv_diag: Vec<f64>,
}

impl SubspaceSolve {
    fn add_correction(&self, r: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.tx.nrows(), self.ty.nrows());
        let (mx, my) = (self.tx.ncols(), self.ty.ncols());
        let mut t = apply_y(&self.ty_t, &apply_x(&self.tx_t, r, ny), mx);
        t.iter_mut().zip(&self.inv_diag).for_each(|(a, d)| *a *= d);
        let z = apply_y(&self.ty, &apply_x(&self.tx, &t, my), nx);
        out.iter_mut().zip(&z).for_each(|(o, v)| *o += v);
    }
}

/// Per-direction eigen data of one subspace: transformation `B U` and
/// eigenvalues of the (modified) stiffness relative to the mass.
struct DirectionPiece {
    transform: DMatrix<f64>,
    values: Vec<f64>,
}

fn direction_pieces(d: &DirectionMatrices, sigma: f64) -> Result<Vec<DirectionPiece>> {
    let k = d.stiff.to_dense();
    let m = d.mass.to_dense();
    let s = d.surrogate.to_dense();
    let (tilde, gamma) = split_1d(&d.space, &m)?;
    let mut pieces = Vec::with_capacity(2);
    for (basis, replace) in [(tilde, true), (gamma, false)] {
        if basis.ncols() == 0 {
            continue;
        }
        let bt = basis.transpose();
        let mass_sub = &bt * &m * &basis;
        let stiff_sub = if replace { &bt * &s * &basis * sigma } else { &bt * &k * &basis };
        let eig = GeneralizedEigen::new(&stiff_sub, &mass_sub)?;
        pieces.push(DirectionPiece { transform: basis * eig.vectors, values: eig.values });
    }
    Ok(pieces)
}

fn combine(pieces: Vec<DirectionPiece>) -> (DMatrix<f64>, Vec<f64>) {
    let cols: Vec<_> = pieces.iter().flat_map(|p| p.transform.column_iter()).collect();
    let t = DMatrix::from_columns(&cols);
    let values = pieces.into_iter().flat_map(|p| p.values).collect();
    (t, values)
}

/// The smoother `S = Σ_α B_α L_α⁻¹ B_αᵀ` over the four tensor subspaces.
#[derive(Debug, Clone)]
pub struct ScmsSmoother {
    solve: SubspaceSolve,
    dim: usize,
}

impl ScmsSmoother {
    /// `damping_scale` is `c` in `σ⁻¹ = c ĥ²`.
    pub fn new(x: &DirectionMatrices, y: &DirectionMatrices, damping_scale: f64) -> Result<Self> {
        if !(damping_scale > 0.0) {
            return Err(Error::Config(format!("damping scale {damping_scale} must be positive")));
        }
        let sigma = |d: &DirectionMatrices| {
            let h = 1.0 / d.space.num_elements() as f64;
            1.0 / (damping_scale * h * h)
        };
        // The subspace problems are decoupled, so their transformations
        // combine into one square transformation per direction and the
        // smoother is `(T_y ⊗ T_x) Λ⁻¹ (T_y ⊗ T_x)ᵀ` with diagonal `Λ`.
        let (tx, lx) = combine(direction_pieces(x, sigma(x))?);
        let (ty, ly) = combine(direction_pieces(y, sigma(y))?);
        let mut inv_diag = Vec::with_capacity(lx.len() * ly.len());
        for &mu in &ly {
            for &lam in &lx {
                inv_diag.push(1.0 / (lam + mu));
            }
        }
        let solve = SubspaceSolve {
            tx_t: Factor::Dense(tx.transpose()),
            tx: Factor::Dense(tx),
            ty_t: Factor::Dense(ty.transpose()),
            ty: Factor::Dense(ty),
            inv_diag,
        };
        Ok(ScmsSmoother { solve, dim: x.mass.nrows() * y.mass.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.solve.add_correction(r, &mut out);
        out
    }
}

impl Smoother for ScmsSmoother {
    fn pre(&self, r: &[f64]) -> Vec<f64> {
        self.apply(r)
    }
    fn post(&self, r: &[f64]) -> Vec<f64> {
        self.apply(r)
    }
}

impl LinearOperator for ScmsSmoother {
    fn nrows(&self) -> usize {
        self.dim
    }
    fn ncols(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.apply(x));
    }
}

/// Largest eigenvalue of `S A` estimated by power iteration in the energy
/// inner product. The smoothing iteration converges iff it is below 2.
pub fn smoother_max_eigenvalue(op: &dyn LinearOperator, smoother: &ScmsSmoother, iterations: usize) -> f64 {
    let n = op.nrows();
    // deterministic, non-smooth start vector
    let mut x: Vec<f64> = (0..n).map(|i| ((i * 7919 % 104729) as f64 / 104729.0) - 0.5).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let ax = op.apply(&x);
        let y = smoother.apply(&ax);
        let ay = op.apply(&y);
        let num = dot(&ay, &y);
        let den = dot(&ax, &y);
        let nx = dot(&ax, &x);
        lambda = if nx > 0.0 { den / nx } else { 0.0 };
        let scale = num.max(f64::MIN_POSITIVE).sqrt();
        x = y.into_iter().map(|v| v / scale).collect();
    }
    lambda
}

/// Kronecker-structured multigrid with SCMS smoothing for
/// `K_x ⊗ M_y + M_x ⊗ K_y` given on the finest level. Coarse univariate
/// matrices are Galerkin projections.
pub fn scms_hierarchy(
    finest_x: &DirectionMatrices,
    finest_y: &DirectionMatrices,
    damping_scale: f64,
    coarsest_elements: usize,
) -> Result<MgHierarchy> {
    let sx = space_hierarchy(&finest_x.space, coarsest_elements)?;
    let sy = space_hierarchy(&finest_y.space, coarsest_elements)?;
    let nlev = sx.len();
    if sy.len() != nlev {
        return Err(Error::Config("directions have different grid hierarchies".into()));
    }
    let mut px = Vec::with_capacity(nlev - 1);
    let mut py = Vec::with_capacity(nlev - 1);
    for k in 0..nlev - 1 {
        px.push(interior_prolongation_1d(&sx[k], &sx[k + 1])?);
        py.push(interior_prolongation_1d(&sy[k], &sy[k + 1])?);
    }
    // univariate matrices per level, finest first
    let mut dx = vec![finest_x.clone()];
    let mut dy = vec![finest_y.clone()];
    for k in (0..nlev - 1).rev() {
        let (fx, fy) = (dx.last().unwrap(), dy.last().unwrap());
        let cx = DirectionMatrices {
            space: sx[k].clone(),
            stiff: fx.stiff.galerkin(&px[k]),
            mass: fx.mass.galerkin(&px[k]),
            surrogate: fx.surrogate.galerkin(&px[k]),
        };
        let cy = DirectionMatrices {
            space: sy[k].clone(),
            stiff: fy.stiff.galerkin(&py[k]),
            mass: fy.mass.galerkin(&py[k]),
            surrogate: fy.surrogate.galerkin(&py[k]),
        };
        dx.push(cx);
        dy.push(cy);
    }
    dx.reverse();
    dy.reverse();

    let mut levels = Vec::with_capacity(nlev);
    for k in 0..nlev {
        let op = SumKroneckerOperator::laplacian(&dx[k].stiff, &dx[k].mass, &dy[k].stiff, &dy[k].mass);
        let smoother: Option<Box<dyn Smoother>> =
            if k == 0 { None } else { Some(Box::new(ScmsSmoother::new(&dx[k], &dy[k], damping_scale)?)) };
        levels.push(MgLevel { op: Box::new(op), smoother });
    }
    let prolongations: Vec<Box<dyn LinearOperator>> = px
        .iter()
        .zip(&py)
        .map(|(a, b)| Box::new(KroneckerOperator::new(a.clone(), b.clone())) as Box<dyn LinearOperator>)
        .collect();
    let restrictions: Vec<Box<dyn LinearOperator>> = px
        .iter()
        .zip(&py)
        .map(|(a, b)| Box::new(KroneckerOperator::new(a.transpose(), b.transpose())) as Box<dyn LinearOperator>)
        .collect();
    MgHierarchy::new(levels, prolongations, restrictions)
}
