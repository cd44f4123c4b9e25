//! Isogeometric discretizations of the Stokes equations and robust
//! block-diagonal multigrid preconditioners for MINRES.
//!
//! The crate is organised bottom-up:
//!
//! * [`splines`] — univariate B-spline spaces, 1D Galerkin matrices and
//!   dyadic refinement;
//! * [`tensor`] — Kronecker-product operators, tensor mass inverses and fast
//!   diagonalization;
//! * [`geometry`] — single-patch NURBS maps (unit square, quarter annulus);
//! * [`discretization`] — Taylor–Hood, Nédélec and Raviart–Thomas like spline
//!   pairs, saddle-point assembly, Dirichlet elimination and error norms;
//! * [`solvers`] — MINRES, multigrid with subspace-corrected mass or
//!   Gauss–Seidel smoothing, and a sparse direct reference solver;
//! * [`experiment`] — the batch runner behind the `iga-stokes` binary.

// Index loops mirror the formulas of the assembly and factorization kernels,
// and `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod discretization;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod splines;
pub mod tensor;

pub use error::{Error, Result};
