//! Preconditioned MINRES on small Stokes systems: every preconditioner
//! converges, the exact variants are h-independent, and the solve agrees
//! with the direct reference.

use iga_stokes::discretization::{Family, Transform};
use iga_stokes::experiment::{GeometryKind, StokesProblem};
use iga_stokes::solvers::{
    build_preconditioner, minres, LinearOperator, MinresOptions, PreconditionerConfig, StoppingRule, VelocityStrategy,
};

const ALL: [VelocityStrategy; 5] = [
    VelocityStrategy::ScmsMg,
    VelocityStrategy::ScmsMgGeo,
    VelocityStrategy::GsMg,
    VelocityStrategy::ExactFastdiag,
    VelocityStrategy::ExactDirect,
];

fn solve(problem: &StokesProblem, strategy: VelocityStrategy, family: Family) -> (Vec<f64>, usize, bool) {
    let config = PreconditionerConfig::defaults(strategy, family, Transform::Direct);
    let precond = build_preconditioner(&config, &problem.spaces, &problem.map, &problem.system).unwrap();
    let reference = problem.reference_solution().unwrap();
    let options = MinresOptions {
        stop: StoppingRule::ErrorReduction { reference, tol: 1e-8 },
        max_iters: 1000,
        kernel: problem.kernel(),
    };
    let (x, report) = minres(&problem.system, &problem.system.rhs(), &precond, &options).unwrap();
    (x, report.iterations, report.converged)
}

#[test]
fn every_preconditioner_converges_for_every_family() {
    for family in [Family::TaylorHood, Family::Nedelec, Family::RaviartThomas] {
        let problem = StokesProblem::new(GeometryKind::Square, family, Transform::Direct, 2, 3).unwrap();
        for strategy in ALL {
            let (_, iterations, converged) = solve(&problem, strategy, family);
            assert!(converged, "{family} {strategy}: {iterations} iterations");
        }
    }
}

#[test]
fn exact_preconditioners_are_mesh_independent() {
    for strategy in [VelocityStrategy::ExactFastdiag, VelocityStrategy::ExactDirect] {
        let counts: Vec<usize> = (3..=5)
            .map(|level| {
                let problem =
                    StokesProblem::new(GeometryKind::Square, Family::TaylorHood, Transform::Direct, 2, level).unwrap();
                solve(&problem, strategy, Family::TaylorHood).1
            })
            .collect();
        let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
        assert!(hi <= lo + 6, "{strategy}: {counts:?}");
    }
}

#[test]
fn converged_solution_matches_the_direct_errors() {
    let problem = StokesProblem::new(GeometryKind::Annulus, Family::TaylorHood, Transform::Direct, 2, 3).unwrap();
    let (x, _, converged) = solve(&problem, VelocityStrategy::ScmsMgGeo, Family::TaylorHood);
    assert!(converged);
    let direct = problem.errors(&problem.reference_solution().unwrap()).unwrap();
    let iterative = problem.errors(&x).unwrap();
    assert!((direct.0 - iterative.0).abs() < 1e-3 * direct.0);
    assert!((direct.1 - iterative.1).abs() < 1e-3 * direct.1);
}

#[test]
fn preconditioners_are_symmetric_positive_definite() {
    let problem = StokesProblem::new(GeometryKind::Annulus, Family::Nedelec, Transform::Direct, 2, 3).unwrap();
    let n = problem.dofs();
    let x: Vec<f64> = (0..n).map(|i| (0.37 * i as f64).sin()).collect();
    let y: Vec<f64> = (0..n).map(|i| (0.91 * i as f64 + 0.3).cos()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    for strategy in ALL {
        let config = PreconditionerConfig::defaults(strategy, Family::Nedelec, Transform::Direct);
        let p = build_preconditioner(&config, &problem.spaces, &problem.map, &problem.system).unwrap();
        let (px, py) = (p.apply(&x), p.apply(&y));
        let (a, b) = (dot(&y, &px), dot(&x, &py));
        assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{strategy}: {a} vs {b}");
        assert!(dot(&x, &px) > 0.0, "{strategy}");
    }
}

#[test]
fn piola_transform_is_solved_on_the_annulus() {
    let problem = StokesProblem::new(GeometryKind::Annulus, Family::RaviartThomas, Transform::Piola, 2, 3).unwrap();
    let config = PreconditionerConfig::defaults(VelocityStrategy::ScmsMg, Family::RaviartThomas, Transform::Piola);
    let precond = build_preconditioner(&config, &problem.spaces, &problem.map, &problem.system).unwrap();
    let options = MinresOptions {
        stop: StoppingRule::ResidualReduction { tol: 1e-8 },
        max_iters: 1000,
        kernel: problem.kernel(),
    };
    let (_, report) = minres(&problem.system, &problem.system.rhs(), &precond, &options).unwrap();
    assert!(report.converged);
    assert!(report.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}
