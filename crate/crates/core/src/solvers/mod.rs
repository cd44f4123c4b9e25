//! MINRES with block-diagonal multigrid preconditioners, plus a sparse
//! direct solver used for reference solutions.

pub mod direct;
pub mod geo;
pub mod minres;
pub mod multigrid;
pub mod operator;
pub mod precond;
pub mod scms;

pub use direct::{direct_solve, direct_solve_with_kernel, SparseLu};
pub use geo::{rank_one_geometry_factors, GeometryCoefficient, RankOneFactors};
pub use minres::{minres, project_out, MinresOptions, SolveReport, StoppingRule};
pub use multigrid::{MgHierarchy, MgLevel, Smoother};
pub use operator::LinearOperator;
pub use precond::{
    block_precond_apply, build_preconditioner, default_beta, default_damping_scale, BlockPreconditioner,
    PreconditionerConfig, VelocityStrategy,
};
pub use scms::{scms_hierarchy, DirectionMatrices, ScmsSmoother};
