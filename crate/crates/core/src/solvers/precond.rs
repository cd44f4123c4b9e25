use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::banded::BandedMatrix;
use crate::discretization::{Family, SaddleSystem, StokesSpaces, TensorSpace, Transform};
use crate::error::{check_len, Error, Result};
use crate::geometry::GeometryMap;
use crate::solvers::direct::SparseLu;
use crate::solvers::geo::{rank_one_geometry_factors, GeometryCoefficient, RankOneFactors};
use crate::solvers::multigrid::{
    block_diagonal, gauss_seidel_hierarchy, interior_1d, interior_prolongation_1d, kron_to_csr, space_hierarchy,
    MgHierarchy,
};
use crate::solvers::operator::LinearOperator;
use crate::solvers::scms::{scms_hierarchy, smoother_max_eigenvalue, DirectionMatrices, ScmsSmoother};
use crate::splines::{assemble_1d, mass_1d, stiffness_1d, SplineSpace1D};
use crate::sparse::CsrMatrix;
use crate::tensor::{FastDiagSolver, KronMassInverse, SumKroneckerOperator};

/// How the velocity block `K` of the block-diagonal preconditioner is
/// approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityStrategy {
    /// One V(1,1) cycle with the subspace-corrected mass smoother on the
    /// parameter-domain stiffness.
    ScmsMg,
    /// As `ScmsMg`, with univariate factors weighted by a rank-one
    /// approximation of the geometry coefficients.
    ScmsMgGeo,
    /// One V(1,1) cycle with Gauss–Seidel smoothing on the assembled
    /// stiffness; symmetric Gauss–Seidel on the pressure mass.
    GsMg,
    /// Exact inverse of the parameter-domain stiffness by fast
    /// diagonalization.
    ExactFastdiag,
    /// Exact inverse of the assembled stiffness by sparse LU.
    ExactDirect,
}

impl VelocityStrategy {
    pub const ALL: [VelocityStrategy; 5] = [
        VelocityStrategy::ScmsMg,
        VelocityStrategy::ScmsMgGeo,
        VelocityStrategy::GsMg,
        VelocityStrategy::ExactFastdiag,
        VelocityStrategy::ExactDirect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VelocityStrategy::ScmsMg => "scms_mg",
            VelocityStrategy::ScmsMgGeo => "scms_mg_geo",
            VelocityStrategy::GsMg => "gs_mg",
            VelocityStrategy::ExactFastdiag => "exact_fastdiag",
            VelocityStrategy::ExactDirect => "exact_direct",
        }
    }

    /// Label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            VelocityStrategy::ScmsMg => "SCMS-MG",
            VelocityStrategy::ScmsMgGeo => "SCMS-MG-geo",
            VelocityStrategy::GsMg => "GS-MG",
            VelocityStrategy::ExactFastdiag => "exact (fast diagonalization)",
            VelocityStrategy::ExactDirect => "exact (sparse LU)",
        }
    }
}

impl fmt::Display for VelocityStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VelocityStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::Parameter(format!("unknown preconditioner '{s}'")))
    }
}

/// Block-diagonal preconditioner settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionerConfig {
    pub velocity_strategy: VelocityStrategy,
    /// Pressure block is `β · M⁻¹`.
    pub beta: f64,
    /// `c` in the smoother damping `σ⁻¹ = c ĥ²`.
    pub damping_scale: f64,
    /// Coarsest multigrid level `ℓ₀` (`2^ℓ₀` elements).
    pub coarsest_level: usize,
    /// Verify at setup that the smoother iteration converges.
    pub check_smoother: bool,
}

/// Default pressure scaling.
pub fn default_beta(strategy: VelocityStrategy, family: Family, transform: Transform) -> f64 {
    match (strategy, family, transform) {
        (VelocityStrategy::ScmsMgGeo, _, _) => 0.01,
        (VelocityStrategy::ScmsMg, Family::RaviartThomas, Transform::Piola) => 0.0025,
        _ => 0.05,
    }
}

/// Default smoother damping scale.
pub fn default_damping_scale(family: Family) -> f64 {
    match family {
        Family::RaviartThomas => 0.16,
        Family::TaylorHood | Family::Nedelec => 0.04,
    }
}

impl PreconditionerConfig {
    pub fn new(velocity_strategy: VelocityStrategy, beta: f64, damping_scale: f64) -> Result<Self> {
        let c = PreconditionerConfig {
            velocity_strategy,
            beta,
            damping_scale,
            coarsest_level: 2,
            check_smoother: false,
        };
        c.validate()?;
        Ok(c)
    }

    /// Defaults for a space family and transform.
    pub fn defaults(velocity_strategy: VelocityStrategy, family: Family, transform: Transform) -> Self {
        PreconditionerConfig {
            velocity_strategy,
            beta: default_beta(velocity_strategy, family, transform),
            damping_scale: default_damping_scale(family),
            coarsest_level: 2,
            check_smoother: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("pressure scaling β = {} must be positive", self.beta)));
        }
        if !(self.damping_scale > 0.0 && self.damping_scale.is_finite()) {
            return Err(Error::Config(format!("damping scale {} must be positive", self.damping_scale)));
        }
        if self.coarsest_level < 2 {
            return Err(Error::Config(format!("coarsest level {} must be at least 2", self.coarsest_level)));
        }
        Ok(())
    }
}

enum PressureBlock {
    Kron(KronMassInverse),
    SymmetricGaussSeidel(CsrMatrix),
    Lu(Box<SparseLu>),
}

enum VelocityBlock {
    PerComponent(Vec<(Range<usize>, Box<dyn LinearOperator>)>),
    Whole(Box<dyn LinearOperator>),
}

/// `diag(K̃⁻¹, β M̃⁻¹)` for a reduced saddle system.
pub struct BlockPreconditioner {
    num_velocity: usize,
    num_pressure: usize,
    beta: f64,
    velocity: VelocityBlock,
    pressure: PressureBlock,
}

impl fmt::Debug for BlockPreconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockPreconditioner")
            .field("num_velocity", &self.num_velocity)
            .field("num_pressure", &self.num_pressure)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

struct FastDiagOp(FastDiagSolver);

impl LinearOperator for FastDiagOp {
    fn nrows(&self) -> usize {
        self.0.dim()
    }
    fn ncols(&self) -> usize {
        self.0.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.0.solve(x).expect("operand length"));
    }
}

struct LuOp(SparseLu);

impl LinearOperator for LuOp {
    fn nrows(&self) -> usize {
        self.0.dim()
    }
    fn ncols(&self) -> usize {
        self.0.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.0.solve(x).expect("operand length"));
    }
}

fn unweighted_direction(space: &SplineSpace1D) -> DirectionMatrices {
    let mass = interior_1d(&mass_1d(space));
    DirectionMatrices { space: space.clone(), stiff: interior_1d(&stiffness_1d(space)), surrogate: mass.clone(), mass }
}

fn weighted(space: &SplineSpace1D, deriv: usize, w: &dyn Fn(f64) -> f64) -> Result<BandedMatrix> {
    assemble_1d(space, space, deriv, deriv, w)
}

/// Univariate factors of the rank-one geometry approximation of the
/// stiffness `∫ (D ∇̂u)·∇̂v` with `D ≈ diag(a₁(x̂)b₁(ŷ), a₂(x̂)b₂(ŷ))`:
/// x pair `(K[a₁], M[a₂])`, y pair `(K[b₂], M[b₁])`. The smoother replaces
/// `K[a₁]` by `σ M[a₁]` (and `K[b₂]` by `σ M[b₂]`) on the constrained
/// subspace, so the weights enter the inverse inequality locally.
fn geo_directions(space: &TensorSpace, map: &GeometryMap) -> Result<(DirectionMatrices, DirectionMatrices)> {
    let gx = space.x.greville();
    let gy = space.y.greville();
    let dxx = rank_one_geometry_factors(map, Transform::Direct, GeometryCoefficient::DiffusionXX, &gx, &gy)?;
    let dyy = rank_one_geometry_factors(map, Transform::Direct, GeometryCoefficient::DiffusionYY, &gx, &gy)?;
    let a1 = |t: f64| dxx.factor_x(t);
    let b1 = |t: f64| dxx.factor_y(t);
    let a2 = |t: f64| dyy.factor_x(t);
    let b2 = |t: f64| dyy.factor_y(t);
    let x = DirectionMatrices {
        space: space.x.clone(),
        stiff: interior_1d(&weighted(&space.x, 1, &a1)?),
        mass: interior_1d(&weighted(&space.x, 0, &a2)?),
        surrogate: interior_1d(&weighted(&space.x, 0, &a1)?),
    };
    let y = DirectionMatrices {
        space: space.y.clone(),
        stiff: interior_1d(&weighted(&space.y, 1, &b2)?),
        mass: interior_1d(&weighted(&space.y, 0, &b1)?),
        surrogate: interior_1d(&weighted(&space.y, 0, &b2)?),
    };
    Ok((x, y))
}

fn geo_pressure_mass(space: &TensorSpace, map: &GeometryMap) -> Result<(BandedMatrix, BandedMatrix)> {
    let f: RankOneFactors = rank_one_geometry_factors(
        map,
        Transform::Direct,
        GeometryCoefficient::Measure,
        &space.x.greville(),
        &space.y.greville(),
    )?;
    Ok((weighted(&space.x, 0, &|t| f.factor_x(t))?, weighted(&space.y, 0, &|t| f.factor_y(t))?))
}

fn check_smoother(x: &DirectionMatrices, y: &DirectionMatrices, damping_scale: f64) -> Result<()> {
    let s = ScmsSmoother::new(x, y, damping_scale)?;
    let op = SumKroneckerOperator::laplacian(&x.stiff, &x.mass, &y.stiff, &y.mass);
    let lambda = smoother_max_eigenvalue(&op, &s, 30);
    log::debug!("smoother: largest eigenvalue of S·A is {lambda:.3}");
    if lambda >= 2.0 {
        return Err(Error::Config(format!(
            "smoother with damping scale {damping_scale} does not converge (largest eigenvalue {lambda:.3})"
        )));
    }
    Ok(())
}

/// Sets up the preconditioner for a reduced saddle system.
pub fn build_preconditioner(
    config: &PreconditionerConfig,
    spaces: &StokesSpaces,
    map: &GeometryMap,
    system: &SaddleSystem,
) -> Result<BlockPreconditioner> {
    config.validate()?;
    if !system.reduced {
        return Err(Error::Config("preconditioner needs the reduced saddle system".into()));
    }
    if spaces.level < config.coarsest_level {
        return Err(Error::Config(format!(
            "level {} is below the coarsest multigrid level {}",
            spaces.level, config.coarsest_level
        )));
    }
    let (nv, np) = (system.num_velocity(), system.num_pressure());
    let counts = system.layout.free_per_component();
    let ranges = [0..counts[0], counts[0]..nv];
    let coarsest_elements = 1usize << config.coarsest_level;
    let pressure_param = || -> Result<PressureBlock> {
        let s = &spaces.pressure;
        Ok(PressureBlock::Kron(KronMassInverse::new(&mass_1d(&s.x), &mass_1d(&s.y))?))
    };

    let (velocity, pressure) = match config.velocity_strategy {
        VelocityStrategy::ScmsMg | VelocityStrategy::ScmsMgGeo => {
            let geo = config.velocity_strategy == VelocityStrategy::ScmsMgGeo;
            if geo && spaces.transform == Transform::Piola {
                return Err(Error::Unsupported(
                    "rank-one geometry approximation is not available for the Piola transform".into(),
                ));
            }
            let mut blocks: Vec<(Range<usize>, Box<dyn LinearOperator>)> = Vec::with_capacity(2);
            for (c, space) in spaces.velocity.iter().enumerate() {
                let (dx, dy) = if geo {
                    geo_directions(space, map)?
                } else {
                    (unweighted_direction(&space.x), unweighted_direction(&space.y))
                };
                if config.check_smoother {
                    check_smoother(&dx, &dy, config.damping_scale)?;
                }
                let h = scms_hierarchy(&dx, &dy, config.damping_scale, coarsest_elements)?;
                check_len(ranges[c].len(), h.dim())?;
                blocks.push((ranges[c].clone(), Box::new(h)));
            }
            let pressure = if geo {
                let (mx, my) = geo_pressure_mass(&spaces.pressure, map)?;
                PressureBlock::Kron(KronMassInverse::new(&mx, &my)?)
            } else {
                pressure_param()?
            };
            (VelocityBlock::PerComponent(blocks), pressure)
        }
        VelocityStrategy::GsMg => {
            let hier: Vec<[Vec<SplineSpace1D>; 2]> = spaces
                .velocity
                .iter()
                .map(|s| Ok([space_hierarchy(&s.x, coarsest_elements)?, space_hierarchy(&s.y, coarsest_elements)?]))
                .collect::<Result<_>>()?;
            let nlev = hier[0][0].len();
            let mut prolongations = Vec::with_capacity(nlev - 1);
            for k in 0..nlev - 1 {
                let blocks = hier
                    .iter()
                    .map(|[hx, hy]| {
                        Ok(kron_to_csr(
                            &interior_prolongation_1d(&hx[k], &hx[k + 1])?,
                            &interior_prolongation_1d(&hy[k], &hy[k + 1])?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                prolongations.push(block_diagonal(&blocks)?);
            }
            let h: MgHierarchy = gauss_seidel_hierarchy(&system.stiffness, prolongations)?;
            (VelocityBlock::Whole(Box::new(h)), PressureBlock::SymmetricGaussSeidel(system.pressure_mass.clone()))
        }
        VelocityStrategy::ExactFastdiag => {
            let mut blocks: Vec<(Range<usize>, Box<dyn LinearOperator>)> = Vec::with_capacity(2);
            for (c, space) in spaces.velocity.iter().enumerate() {
                let (dx, dy) = (unweighted_direction(&space.x), unweighted_direction(&space.y));
                let fd = FastDiagSolver::from_banded(&dx.stiff, &dx.mass, &dy.stiff, &dy.mass, 0.0)?;
                check_len(ranges[c].len(), fd.dim())?;
                blocks.push((ranges[c].clone(), Box::new(FastDiagOp(fd))));
            }
            (VelocityBlock::PerComponent(blocks), pressure_param()?)
        }
        VelocityStrategy::ExactDirect => (
            VelocityBlock::Whole(Box::new(LuOp(SparseLu::new(&system.stiffness)?))),
            PressureBlock::Lu(Box::new(SparseLu::new(&system.pressure_mass)?)),
        ),
    };
    Ok(BlockPreconditioner { num_velocity: nv, num_pressure: np, beta: config.beta, velocity, pressure })
}

impl BlockPreconditioner {
    pub fn dim(&self) -> usize {
        self.num_velocity + self.num_pressure
    }

    fn apply_parts(&self, r: &[f64], z: &mut [f64]) {
        let (rv, rp) = r.split_at(self.num_velocity);
        let (zv, zp) = z.split_at_mut(self.num_velocity);
        match &self.velocity {
            VelocityBlock::PerComponent(blocks) => {
                for (range, op) in blocks {
                    op.apply_into(&rv[range.clone()], &mut zv[range.clone()]);
                }
            }
            VelocityBlock::Whole(op) => op.apply_into(rv, zv),
        }
        let p = match &self.pressure {
            PressureBlock::Kron(m) => m.solve(rp).expect("operand length"),
            PressureBlock::SymmetricGaussSeidel(m) => m.symmetric_gauss_seidel(rp).expect("mass diagonal"),
            PressureBlock::Lu(lu) => lu.solve(rp).expect("operand length"),
        };
        zp.iter_mut().zip(p).for_each(|(z, v)| *z = self.beta * v);
    }
}

impl LinearOperator for BlockPreconditioner {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_parts(x, y);
    }
}

/// `(z_v, z_p) = (K̃⁻¹ r_v, β M̃⁻¹ r_p)`.
pub fn block_precond_apply(precond: &BlockPreconditioner, r: &[f64]) -> Result<Vec<f64>> {
    check_len(precond.dim(), r.len())?;
    let mut z = vec![0.0; r.len()];
    precond.apply_parts(r, &mut z);
    Ok(z)
}
