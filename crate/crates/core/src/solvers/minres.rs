use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::solvers::operator::{axpy, dot, norm, LinearOperator};

/// When MINRES stops.
#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// `‖x_k − x*‖ ≤ tol · ‖x_0 − x*‖` in the Euclidean norm of the
    /// coefficient vector, against a known reference solution `x*`.
    ErrorReduction { reference: Vec<f64>, tol: f64 },
    /// Preconditioned residual reduced by `tol` relative to the start.
    ResidualReduction { tol: f64 },
}

impl StoppingRule {
    pub fn tolerance(&self) -> f64 {
        match self {
            StoppingRule::ErrorReduction { tol, .. } | StoppingRule::ResidualReduction { tol } => *tol,
        }
    }
}

/// MINRES settings.
#[derive(Debug, Clone)]
pub struct MinresOptions {
    pub stop: StoppingRule,
    pub max_iters: usize,
    /// Orthonormal basis of the operator kernel; iterates, right-hand side
    /// and errors are kept orthogonal to it.
    pub kernel: Vec<Vec<f64>>,
}

/// Outcome of a MINRES run.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative error after each iteration (starting with 1 for `x_0`);
    /// empty for residual-based stopping without a reference.
    pub error_history: Vec<f64>,
    /// Relative preconditioned residual after each iteration.
    pub residual_history: Vec<f64>,
    pub seconds: f64,
    pub err_velocity: Option<f64>,
    pub err_pressure: Option<f64>,
}

impl SolveReport {
    /// Last recorded reduction factor of the quantity the rule monitors.
    pub fn final_reduction(&self) -> f64 {
        self.error_history.last().or(self.residual_history.last()).copied().unwrap_or(1.0)
    }
}

/// Removes the components of `v` along the orthonormal vectors `kernel`.
pub fn project_out(v: &mut [f64], kernel: &[Vec<f64>]) {
    for k in kernel {
        let a = dot(k, v);
        axpy(-a, k, v);
    }
}

/// Preconditioned MINRES for a symmetric operator `a` with symmetric
/// positive definite preconditioner `precond`, starting from zero.
///
/// The recurrence follows the Lanczos-based formulation with Givens
/// rotations; the preconditioned residual norm is available at no cost.
pub fn minres(
    a: &dyn LinearOperator,
    b: &[f64],
    precond: &dyn LinearOperator,
    options: &MinresOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    check_len(n, b.len())?;
    check_len(n, precond.nrows())?;
    for k in &options.kernel {
        check_len(n, k.len())?;
    }
    let project = |v: &mut [f64]| project_out(v, &options.kernel);

    let mut x = vec![0.0; n];
    let reference = match &options.stop {
        StoppingRule::ErrorReduction { reference, .. } => {
            check_len(n, reference.len())?;
            let mut r = reference.clone();
            project(&mut r);
            Some(r)
        }
        StoppingRule::ResidualReduction { .. } => None,
    };
    let tol = options.stop.tolerance();
    let error_norm = |x: &[f64]| -> f64 {
        let r = reference.as_ref().expect("reference present");
        let mut e: Vec<f64> = x.iter().zip(r).map(|(a, b)| a - b).collect();
        project(&mut e);
        norm(&e)
    };
    let initial_error = reference.as_ref().map(|r| norm(r));

    let mut report = SolveReport::default();
    let mut v = b.to_vec();
    project(&mut v);
    let mut z = precond.apply(&v);
    project(&mut z);
    let zv = dot(&z, &v);
    if zv < 0.0 {
        return Err(Error::Breakdown { iteration: 0, reason: "preconditioner is not positive definite".into() });
    }
    let mut gamma = zv.sqrt();
    let gamma1 = gamma;
    report.residual_history.push(1.0);
    if let Some(e0) = initial_error {
        report.error_history.push(1.0);
        if e0 == 0.0 {
            report.converged = true;
            report.seconds = start.elapsed().as_secs_f64();
            return Ok((x, report));
        }
    }
    if gamma1 == 0.0 {
        report.converged = true;
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut v_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w_old = vec![0.0; n];
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s, mut c_old, mut c) = (0.0, 0.0, 1.0, 1.0);
    let mut az = vec![0.0; n];

    for it in 1..=options.max_iters {
        z.iter_mut().for_each(|zi| *zi /= gamma);
        a.apply_into(&z, &mut az);
        project(&mut az);
        let delta = dot(&az, &z);
        // v_new = A z − (δ/γ) v − (γ/γ_old) v_old
        let mut v_new = az.clone();
        axpy(-delta / gamma, &v, &mut v_new);
        axpy(-gamma / gamma_old, &v_old, &mut v_new);
        let mut z_new = precond.apply(&v_new);
        project(&mut z_new);
        let zv = dot(&z_new, &v_new);
        if zv < -1e-14 * gamma1 * gamma1 {
            return Err(Error::Breakdown { iteration: it, reason: "preconditioner is not positive definite".into() });
        }
        let gamma_new = zv.max(0.0).sqrt();

        let alpha0 = c * delta - c_old * s * gamma;
        let alpha1 = (alpha0 * alpha0 + gamma_new * gamma_new).sqrt();
        let alpha2 = s * delta + c_old * c * gamma;
        let alpha3 = s_old * gamma;
        if alpha1 == 0.0 || !alpha1.is_finite() {
            return Err(Error::Breakdown { iteration: it, reason: "singular tridiagonal recurrence".into() });
        }
        let c_new = alpha0 / alpha1;
        let s_new = gamma_new / alpha1;

        // w_new = (z − α3 w_old − α2 w) / α1
        let mut w_new = z.clone();
        axpy(-alpha3, &w_old, &mut w_new);
        axpy(-alpha2, &w, &mut w_new);
        w_new.iter_mut().for_each(|wi| *wi /= alpha1);
        axpy(c_new * eta, &w_new, &mut x);
        eta *= -s_new;

        report.iterations = it;
        let res = eta.abs() / gamma1;
        report.residual_history.push(res);
        let done = match reference {
            Some(_) => {
                let rel = error_norm(&x) / initial_error.unwrap();
                report.error_history.push(rel);
                rel <= tol
            }
            None => res <= tol,
        };
        if done || gamma_new == 0.0 {
            report.converged = done || gamma_new == 0.0;
            break;
        }

        w_old = std::mem::replace(&mut w, w_new);
        v_old = std::mem::replace(&mut v, v_new);
        z = z_new;
        gamma_old = gamma;
        gamma = gamma_new;
        s_old = s;
        s = s_new;
        c_old = c;
        c = c_new;
    }
    project(&mut x);
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}
