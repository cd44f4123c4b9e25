//! Stable velocity–pressure spline pairs, saddle-point assembly, Dirichlet
//! elimination, error norms and the discrete inf-sup diagnostic.

mod assembly;
mod infsup;
mod kernel;
mod manufactured;
mod norms;
mod spaces;

pub use assembly::{
    assemble_saddle, assemble_saddle_with, dirichlet_lifting, eliminate_dirichlet, BoundaryImposition, SaddleSystem,
    VelocityLayout,
};
pub use infsup::{inf_sup_constant, InfSupEstimate, MAX_INF_SUP_DOFS};
pub use kernel::{l2_orthogonal_pressure, pressure_kernel};
pub use manufactured::{ExactSolution, ManufacturedSolution};
pub use norms::l2_error;
pub use spaces::{stokes_spaces, Family, StokesSpaces, TensorSpace, Transform};
