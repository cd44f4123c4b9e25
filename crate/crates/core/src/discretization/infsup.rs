use nalgebra::DMatrix;

use crate::discretization::assembly::SaddleSystem;
use crate::error::{Error, Result};
use crate::solvers::direct::SparseLu;
use crate::tensor::GeneralizedEigen;

/// Largest reduced system handled by the dense eigensolver.
pub const MAX_INF_SUP_DOFS: usize = 3000;

/// Result of the discrete inf-sup computation.
#[derive(Debug, Clone)]
pub struct InfSupEstimate {
    /// Square root of the smallest eigenvalue above the zero threshold.
    pub constant: f64,
    /// Number of eigenvalues treated as zero (the constant pressure mode
    /// and any spurious modes).
    pub zero_modes: usize,
    /// Whether stability is known theoretically for the space family.
    pub stability_proven: bool,
    /// All eigenvalues of `M_p⁻¹ D K⁻¹ Dᵀ`, ascending.
    pub eigenvalues: Vec<f64>,
}

/// Discrete inf-sup constant of a reduced saddle system through the
/// generalized eigenproblem `D K⁻¹ Dᵀ q = λ M_p q`.
pub fn inf_sup_constant(system: &SaddleSystem, stability_proven: bool) -> Result<InfSupEstimate> {
    if !system.reduced {
        return Err(Error::Config("inf-sup constant needs the reduced system".into()));
    }
    if system.total_dofs() > MAX_INF_SUP_DOFS {
        return Err(Error::Resource(format!(
            "{} unknowns exceed the dense eigensolver limit of {MAX_INF_SUP_DOFS}",
            system.total_dofs()
        )));
    }
    let np = system.num_pressure();
    let lu = SparseLu::new(&system.stiffness)?;
    let dt = system.divergence.transpose().to_dense();
    let kinv_dt = lu.solve_dense(&dt)?;
    let d = system.divergence.to_dense();
    let mut schur: DMatrix<f64> = &d * &kinv_dt;
    schur = (&schur + schur.transpose()) * 0.5;
    let mass = system.pressure_mass.to_dense();
    let eig = GeneralizedEigen::new(&schur, &mass)?;
    let mut eigenvalues = eig.values;
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    let top = eigenvalues.last().copied().unwrap_or(0.0).abs();
    let threshold = 1e-10 * top.max(f64::MIN_POSITIVE);
    let zero_modes = eigenvalues.iter().take_while(|&&l| l <= threshold).count();
    if zero_modes == np {
        return Err(Error::Degenerate("divergence block vanishes".into()));
    }
    Ok(InfSupEstimate {
        constant: eigenvalues[zero_modes].sqrt(),
        zero_modes,
        stability_proven,
        eigenvalues,
    })
}
