//! Randomised invariants of the spline, tensor and solver building blocks.

use iga_stokes::solvers::project_out;
use iga_stokes::splines::{mass_1d, prolongation_1d, stiffness_1d, SplineSpace1D};
use iga_stokes::tensor::{kron_mass_solve, FastDiagSolver, KroneckerOperator};
use nalgebra::DVector;
use proptest::prelude::*;

/// Degree, smoothness and element count of a valid spline space.
fn space() -> impl Strategy<Value = SplineSpace1D> {
    (1usize..=6, 1usize..=9).prop_flat_map(|(p, n)| {
        (-1i32..p as i32).prop_map(move |q| SplineSpace1D::new(p, q, n).expect("valid space"))
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_a_nonnegative_partition_of_unity(s in space(), x in 0.0f64..=1.0) {
        let (_, values) = s.eval_basis(x, 0).unwrap();
        prop_assert!(values.iter().all(|&v| v >= -1e-14));
        prop_assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_derivatives_sum_to_zero(s in space(), x in 0.0f64..=1.0) {
        let (_, d) = s.eval_basis(x, 1).unwrap();
        let scale = d.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(d.iter().sum::<f64>().abs() < 1e-11 * scale);
    }

    #[test]
    fn mass_and_stiffness_are_symmetric_with_expected_row_sums(s in space()) {
        let m = mass_1d(&s);
        let k = stiffness_1d(&s);
        prop_assert!(m.is_symmetric(1e-14));
        prop_assert!(k.is_symmetric(1e-12));
        let ones = vec![1.0; s.dim()];
        // Σ_j M_ij = ∫ φ_i and the constant lies in the kernel of K.
        prop_assert!((m.matvec(&ones).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let kscale = k.to_dense().amax();
        prop_assert!(k.matvec(&ones).unwrap().iter().all(|v| v.abs() < 1e-10 * kscale));
    }

    #[test]
    fn prolongation_reproduces_coarse_functions(s in space(), x in 0.0f64..=1.0, seed in vector(16)) {
        let fine = s.refined();
        let p = prolongation_1d(&s, &fine).unwrap();
        let c: Vec<f64> = (0..s.dim()).map(|i| seed[i % seed.len()]).collect();
        let f = p.matvec(&c).unwrap();
        prop_assert!((s.eval(&c, x, 0).unwrap() - fine.eval(&f, x, 0).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn galerkin_coarsening_matches_coarse_assembly(s in space()) {
        let fine = s.refined();
        let p = prolongation_1d(&s, &fine).unwrap();
        for (coarse, fine) in [(mass_1d(&s), mass_1d(&fine)), (stiffness_1d(&s), stiffness_1d(&fine))] {
            let g = fine.galerkin(&p).to_dense();
            let c = coarse.to_dense();
            prop_assert!((&g - &c).amax() <= 1e-11 * c.amax());
        }
    }

    #[test]
    fn kronecker_apply_matches_dense_product(sx in space(), sy in space(), seed in vector(32)) {
        let (a, b) = (stiffness_1d(&sx), mass_1d(&sy));
        let op = KroneckerOperator::new(a.clone(), b.clone());
        let v: Vec<f64> = (0..sx.dim() * sy.dim()).map(|i| seed[i % seed.len()] + 1e-3 * i as f64).collect();
        let dense = b.to_dense().kronecker(&a.to_dense()) * DVector::from_column_slice(&v);
        let fast = op.apply(&v).unwrap();
        prop_assert!(max_diff(&fast, dense.as_slice()) <= 1e-12 * dense.amax().max(1.0));
    }

    #[test]
    fn kronecker_mass_solve_inverts_the_mass(sx in space(), sy in space(), seed in vector(32)) {
        let (mx, my) = (mass_1d(&sx), mass_1d(&sy));
        let u: Vec<f64> = (0..sx.dim() * sy.dim()).map(|i| seed[i % seed.len()]).collect();
        let w = KroneckerOperator::new(mx.clone(), my.clone()).apply(&u).unwrap();
        let back = kron_mass_solve(&mx, &my, &w).unwrap();
        prop_assert!(max_diff(&back, &u) < 1e-8);
    }

    #[test]
    fn fast_diagonalization_solves_the_shifted_laplacian(sx in space(), sy in space(), shift in 0.1f64..10.0, seed in vector(32)) {
        let (kx, mx, ky, my) = (stiffness_1d(&sx), mass_1d(&sx), stiffness_1d(&sy), mass_1d(&sy));
        let solver = FastDiagSolver::from_banded(&kx, &mx, &ky, &my, shift).unwrap();
        let (kx, mx, ky, my) = (kx.to_dense(), mx.to_dense(), ky.to_dense(), my.to_dense());
        let dense = my.kronecker(&kx) + ky.kronecker(&mx) + my.kronecker(&mx) * shift;
        let x: Vec<f64> = (0..sx.dim() * sy.dim()).map(|i| seed[i % seed.len()]).collect();
        let b = &dense * DVector::from_column_slice(&x);
        let solved = solver.solve(b.as_slice()).unwrap();
        prop_assert!(max_diff(&solved, &x) < 1e-7);
    }

    #[test]
    fn project_out_leaves_a_vector_orthogonal_to_the_kernel(v in vector(12), a in vector(12), b in vector(12)) {
        // orthonormalise two random directions
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(na > 1e-3);
        let e1: Vec<f64> = a.iter().map(|x| x / na).collect();
        let mut e2 = b.clone();
        project_out(&mut e2, std::slice::from_ref(&e1));
        let n2 = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n2 > 1e-3);
        e2.iter_mut().for_each(|x| *x /= n2);
        let kernel = vec![e1, e2];
        let mut w = v.clone();
        project_out(&mut w, &kernel);
        for k in &kernel {
            prop_assert!(k.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>().abs() < 1e-12);
        }
        // idempotent
        let mut again = w.clone();
        project_out(&mut again, &kernel);
        prop_assert!(max_diff(&again, &w) < 1e-14);
    }
}
