//! Acceptance gate: reproduces the published iteration-count and error
//! tables at desk scale and checks the numerical invariants.
//!
//! Prints one `PASS`/`FAIL` line per criterion followed by a summary. The
//! process exits with failure only when `ACCEPTANCE_STRICT` is set, so that
//! known deviations (documented in the project notes) stay visible without
//! breaking the regular test run.
//!
//! | # | Criterion | Reference values |
//! |---|-----------|------------------|
//! | 1 | unit-square SCMS-MG counts within ±30 % | published iteration counts |
//! | 2 | p-robustness of SCMS-MG, GS-MG blow-up at p = 5 | published iteration counts |
//! | 3 | dof count and L² errors | published errors |
//! | 4 | annulus counts, rank-one geometry gain ≥ 2× | published annulus counts |
//! | 5 | Piola transform costs more iterations | published annulus counts |
//! | 6 | h-robustness of SCMS-MG | published iteration counts |
//! | 7 | property suite | derived oracles |
//! | 8 | discrete inf-sup stability | derived (dense eigensolve) |

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use iga_stokes::discretization::{inf_sup_constant, Family, StokesSpaces, Transform};
use iga_stokes::experiment::{run_cell, CellReport, CellStatus, ExperimentConfig, GeometryKind, StokesProblem};
use iga_stokes::geometry::quarter_annulus_map;
use iga_stokes::solvers::operator::LinearOperator;
use iga_stokes::solvers::{
    build_preconditioner, minres, MinresOptions, PreconditionerConfig, StoppingRule, VelocityStrategy,
};
use iga_stokes::splines::{mass_1d, prolongation_1d, stiffness_1d, SplineSpace1D};
use iga_stokes::tensor::{kron_mass_solve, KroneckerOperator};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ═══════════════════════════════════════════════════════════════════
// Tolerances
// ═══════════════════════════════════════════════════════════════════

/// Relative band around published iteration counts. The smoother's inner
/// splitting is only described in a companion work, hence the width.
const COUNT_BAND: f64 = 0.30;
/// Allowed relative spread of SCMS-MG counts over polynomial degrees.
const P_SPREAD: f64 = 0.30;
/// Allowed relative spread of SCMS-MG counts over refinement levels.
const H_SPREAD: f64 = 0.25;
/// GS-MG at p = 5 must need more than this many iterations.
const GS_BLOWUP: usize = 500;
/// Minimum iteration reduction of the rank-one geometry preconditioner.
const GEO_GAIN: f64 = 2.0;
/// Machine-precision identities.
const EXACT: f64 = 1e-12;
const MASS_SOLVE: f64 = 1e-11;
const PRECOND_SYMMETRY: f64 = 1e-10;
/// Central differences with step 1e-6 on a smooth map.
const JACOBIAN_FD: f64 = 1e-5;
const AREA: f64 = 1e-10;
/// Inf-sup constants over levels must stay within this ratio.
const INF_SUP_RATIO: f64 = 0.75;

// ═══════════════════════════════════════════════════════════════════
// Published values
// ═══════════════════════════════════════════════════════════════════

/// Unit square, SCMS-MG: (family, p, ℓ) → iterations.
const SQUARE_COUNTS: &[(Family, usize, usize, usize)] = &[
    (Family::TaylorHood, 2, 5, 55),
    (Family::TaylorHood, 3, 5, 54),
    (Family::TaylorHood, 2, 6, 54),
    (Family::TaylorHood, 3, 6, 58),
    (Family::Nedelec, 2, 5, 80),
    (Family::Nedelec, 3, 5, 74),
    (Family::Nedelec, 2, 6, 76),
    (Family::Nedelec, 3, 6, 76),
    (Family::RaviartThomas, 2, 5, 44),
    (Family::RaviartThomas, 3, 5, 36),
    (Family::RaviartThomas, 2, 6, 44),
    (Family::RaviartThomas, 3, 6, 37),
];
const ANNULUS_SCMS_TH_2_5: usize = 195;
const ANNULUS_GEO_TH_2_5: usize = 72;

struct Outcome {
    id: usize,
    passed: bool,
    detail: String,
}

/// Runs experiment cells once and remembers them for later criteria.
type CellKey = (GeometryKind, Transform, VelocityStrategy, Family, usize, usize);

struct Cells {
    cache: HashMap<CellKey, (CellReport, Duration)>,
}

impl Cells {
    fn get(
        &mut self,
        geometry: GeometryKind,
        transform: Transform,
        precond: VelocityStrategy,
        family: Family,
        p: usize,
        level: usize,
    ) -> (CellReport, Duration) {
        let key = (geometry, transform, precond, family, p, level);
        self.cache
            .entry(key)
            .or_insert_with(|| {
                let config = ExperimentConfig {
                    geometry,
                    families: vec![family],
                    transform,
                    degrees: vec![p],
                    levels: vec![level],
                    precond,
                    ..ExperimentConfig::default()
                };
                let start = Instant::now();
                let report = run_cell(&config, family, p, level).expect("experiment cell");
                (report, start.elapsed())
            })
            .clone()
    }

    fn iterations(&mut self, g: GeometryKind, t: Transform, s: VelocityStrategy, f: Family, p: usize, l: usize) -> usize {
        let (r, _) = self.get(g, t, s, f, p, l);
        assert_eq!(r.status, CellStatus::Converged, "{f} p={p} ℓ={l} {s} did not converge");
        r.iterations
    }
}

fn within(value: usize, target: usize, band: f64) -> bool {
    let t = target as f64;
    (value as f64 - t).abs() <= band * t
}

fn spread(values: &[usize]) -> f64 {
    let lo = *values.iter().min().unwrap() as f64;
    let hi = *values.iter().max().unwrap() as f64;
    (hi - lo) / lo
}

// ═══════════════════════════════════════════════════════════════════
// Criteria
// ═══════════════════════════════════════════════════════════════════

fn criterion_1(cells: &mut Cells) -> Outcome {
    let mut misses = Vec::new();
    let mut parts = Vec::new();
    let mut slowest = Duration::ZERO;
    for &(family, p, level, target) in SQUARE_COUNTS {
        let (report, elapsed) =
            cells.get(GeometryKind::Square, Transform::Direct, VelocityStrategy::ScmsMg, family, p, level);
        slowest = slowest.max(elapsed);
        let ok = report.converged() && within(report.iterations, target, COUNT_BAND);
        parts.push(format!("{family} p={p} ℓ={level}: {} (ref {target})", report.iterations));
        if !ok {
            misses.push(format!("{family} p={p} ℓ={level}"));
        }
    }
    let time_ok = slowest <= Duration::from_secs(120);
    Outcome {
        id: 1,
        passed: misses.is_empty() && time_ok,
        detail: format!(
            "{}; slowest cell {:.1}s{}",
            parts.join(", "),
            slowest.as_secs_f64(),
            if misses.is_empty() { String::new() } else { format!("; outside ±30%: {}", misses.join(", ")) }
        ),
    }
}

fn criterion_2(cells: &mut Cells) -> Outcome {
    let th = Family::TaylorHood;
    let counts: Vec<usize> = [2, 3, 5]
        .iter()
        .map(|&p| cells.iterations(GeometryKind::Square, Transform::Direct, VelocityStrategy::ScmsMg, th, p, 5))
        .collect();
    let (gs, _) = cells.get(GeometryKind::Square, Transform::Direct, VelocityStrategy::GsMg, th, 5, 5);
    let gs_text = if gs.converged() { gs.iterations.to_string() } else { format!(">{}", gs.iterations) };
    let s = spread(&counts);
    Outcome {
        id: 2,
        passed: s <= P_SPREAD && gs.iterations > GS_BLOWUP,
        detail: format!("SCMS-MG TH ℓ=5 p=2,3,5: {counts:?} (spread {:.0}%); GS-MG p=5: {gs_text}", 100.0 * s),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let solve = |family, level| {
        let problem = StokesProblem::new(GeometryKind::Square, family, Transform::Direct, 2, level).expect("problem");
        let x = problem.reference_solution().expect("direct solve");
        let (ev, ep) = problem.errors(&x).expect("errors");
        (problem.dofs(), ev, ep)
    };
    let (dofs4, ev4, ep4) = solve(Family::TaylorHood, 4);
    let (_, ev5, _) = solve(Family::TaylorHood, 5);
    let th_ok = dofs4 == 2372
        && (1e-5..=4e-5).contains(&ev4)
        && (1e-5 / 3.0..=3e-5).contains(&ep4)
        && (5e-7..=2e-6).contains(&ev5);
    let rt: Vec<(usize, f64, f64)> = (4..=6).map(|l| solve(Family::RaviartThomas, l)).collect();
    let velocity_decreases = rt.windows(2).all(|w| w[1].1 < w[0].1);
    // stagnation: every pressure error stays above 5e-3 and no level gains
    // even a factor 4, while the velocity converges
    let pressure_stagnates = rt.iter().all(|r| r.2 > 5e-3) && rt.windows(2).all(|w| w[1].2 > w[0].2 / 4.0);
    let elapsed = start.elapsed();
    Outcome {
        id: 3,
        passed: th_ok && velocity_decreases && pressure_stagnates && elapsed <= Duration::from_secs(300),
        detail: format!(
            "TH ℓ=4: {dofs4} dofs, v {ev4:.2e}, p {ep4:.2e}; TH ℓ=5: v {ev5:.2e}; RT ℓ=4..6 v {:.1e}/{:.1e}/{:.1e}, \
             p {:.1e}/{:.1e}/{:.1e}; {:.0}s",
            rt[0].1,
            rt[1].1,
            rt[2].1,
            rt[0].2,
            rt[1].2,
            rt[2].2,
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_4(cells: &mut Cells) -> Outcome {
    let th = Family::TaylorHood;
    let a = GeometryKind::Annulus;
    let scms = cells.iterations(a, Transform::Direct, VelocityStrategy::ScmsMg, th, 2, 5);
    let geo = cells.iterations(a, Transform::Direct, VelocityStrategy::ScmsMgGeo, th, 2, 5);
    let mut gains = Vec::new();
    for level in [5, 6] {
        for p in [2, 3] {
            let plain = cells.iterations(a, Transform::Direct, VelocityStrategy::ScmsMg, th, p, level);
            let g = cells.iterations(a, Transform::Direct, VelocityStrategy::ScmsMgGeo, th, p, level);
            gains.push((p, level, plain, g, plain as f64 / g as f64));
        }
    }
    let scms_ok = within(scms, ANNULUS_SCMS_TH_2_5, COUNT_BAND);
    let geo_ok = within(geo, ANNULUS_GEO_TH_2_5, COUNT_BAND);
    let gain_ok = gains.iter().all(|g| g.4 >= GEO_GAIN);
    let gain_text: Vec<String> =
        gains.iter().map(|(p, l, a, b, r)| format!("p={p} ℓ={l}: {a}→{b} ({r:.2}×)")).collect();
    Outcome {
        id: 4,
        passed: scms_ok && geo_ok && gain_ok,
        detail: format!(
            "TH p=2 ℓ=5 SCMS-MG {scms} (ref {ANNULUS_SCMS_TH_2_5}) [{}], SCMS-MG-geo {geo} (ref {ANNULUS_GEO_TH_2_5}) [{}]; \
             gains {} [{}]",
            verdict(scms_ok),
            verdict(geo_ok),
            gain_text.join(", "),
            verdict(gain_ok)
        ),
    }
}

fn criterion_5(cells: &mut Cells) -> Outcome {
    let th = Family::TaylorHood;
    let a = GeometryKind::Annulus;
    let mut rows = Vec::new();
    let mut ok = true;
    for level in [5, 6] {
        for p in [2, 3] {
            let direct = cells.iterations(a, Transform::Direct, VelocityStrategy::ScmsMg, th, p, level);
            let piola = cells.iterations(a, Transform::Piola, VelocityStrategy::ScmsMg, th, p, level);
            ok &= piola > direct;
            rows.push(format!("p={p} ℓ={level}: Piola {piola} vs direct {direct}"));
        }
    }
    Outcome { id: 5, passed: ok, detail: rows.join(", ") }
}

fn criterion_6(cells: &mut Cells) -> Outcome {
    let counts: Vec<usize> = (5..=7)
        .map(|l| {
            cells.iterations(GeometryKind::Square, Transform::Direct, VelocityStrategy::ScmsMg, Family::TaylorHood, 2, l)
        })
        .collect();
    let s = spread(&counts);
    Outcome {
        id: 6,
        passed: s <= H_SPREAD,
        detail: format!("SCMS-MG TH p=2 ℓ=5,6,7: {counts:?} (spread {:.0}%)", 100.0 * s),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    // partition of unity
    let mut worst = 0.0f64;
    for (p, q, n) in [(1, 0, 3), (2, 1, 8), (3, 1, 5), (5, 4, 7), (8, 7, 4)] {
        let s = SplineSpace1D::new(p, q, n).unwrap();
        for _ in 0..50 {
            let x: f64 = rng.gen();
            let (_, vals) = s.eval_basis(x, 0).unwrap();
            worst = worst.max((vals.iter().sum::<f64>() - 1.0).abs());
        }
    }
    checks.push(("partition of unity", worst, EXACT));

    // Kronecker apply vs dense oracle
    let sx = SplineSpace1D::new(3, 2, 6).unwrap();
    let sy = SplineSpace1D::new(2, 0, 5).unwrap();
    let (kx, my) = (stiffness_1d(&sx), mass_1d(&sy));
    let op = KroneckerOperator::new(kx.clone(), my.clone());
    let dense = my.to_dense().kronecker(&kx.to_dense());
    let v: Vec<f64> = (0..dense.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fast = op.apply(&v).unwrap();
    let slow = &dense * nalgebra::DVector::from_vec(v.clone());
    let scale = slow.amax();
    checks.push(("Kronecker apply", fast.iter().zip(slow.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale, EXACT));

    // mass solve identity
    let (mx, my) = (mass_1d(&sx), mass_1d(&sy));
    let u: Vec<f64> = (0..sx.dim() * sy.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w = KroneckerOperator::new(mx.clone(), my.clone()).apply(&u).unwrap();
    let back = kron_mass_solve(&mx, &my, &w).unwrap();
    checks.push(("mass apply∘solve", back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max), MASS_SOLVE));

    // Galerkin coarse operator of a refined space equals the coarse matrix
    let coarse = SplineSpace1D::new(3, 2, 4).unwrap();
    let fine = coarse.refined();
    let pr = prolongation_1d(&coarse, &fine).unwrap();
    let galerkin = stiffness_1d(&fine).galerkin(&pr).to_dense();
    let direct = stiffness_1d(&coarse).to_dense();
    checks.push(("Galerkin identity", (&galerkin - &direct).amax() / direct.amax(), EXACT));

    // MINRES residual monotonicity and preconditioner symmetry on a Stokes system
    let problem = StokesProblem::new(GeometryKind::Square, Family::TaylorHood, Transform::Direct, 2, 3).unwrap();
    let config = PreconditionerConfig::defaults(VelocityStrategy::ScmsMg, Family::TaylorHood, Transform::Direct);
    let precond = build_preconditioner(&config, &problem.spaces, &problem.map, &problem.system).unwrap();
    let options = MinresOptions {
        stop: StoppingRule::ResidualReduction { tol: 1e-10 },
        max_iters: 500,
        kernel: problem.kernel(),
    };
    let (_, report) = minres(&problem.system, &problem.system.rhs(), &precond, &options).unwrap();
    let increase = report.residual_history.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    checks.push(("MINRES residual increase", increase, 1e-14));
    let n = precond.nrows();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (px, py) = (precond.apply(&x), precond.apply(&y));
    let ypx: f64 = y.iter().zip(&px).map(|(a, b)| a * b).sum();
    let xpy: f64 = x.iter().zip(&py).map(|(a, b)| a * b).sum();
    checks.push(("preconditioner symmetry", (ypx - xpy).abs() / ypx.abs().max(xpy.abs()), PRECOND_SYMMETRY));

    // manufactured velocity is divergence free
    let exact = &problem.exact;
    let div = (0..200)
        .map(|_| exact.divergence(rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0)).abs())
        .fold(0.0, f64::max);
    checks.push(("manufactured divergence", div, EXACT));

    // annulus Jacobian vs central differences, and area
    let map = quarter_annulus_map();
    let h = 1e-6;
    let mut jac_err = 0.0f64;
    for _ in 0..100 {
        let (u, v) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        let g = map.eval(u, v).unwrap();
        let fd = |du: f64, dv: f64| {
            let a = map.eval_map(u + du, v + dv);
            let b = map.eval_map(u - du, v - dv);
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let (cu, cv) = (fd(h, 0.0), fd(0.0, h));
        for i in 0..2 {
            jac_err = jac_err.max((g.jacobian[i][0] - cu[i]).abs()).max((g.jacobian[i][1] - cv[i]).abs());
        }
    }
    checks.push(("Jacobian vs finite differences", jac_err, JACOBIAN_FD));
    checks.push(("annulus area", (map.area(4, 8).unwrap() - 0.75 * PI).abs(), AREA));

    let elapsed = start.elapsed();
    let failed: Vec<String> =
        checks.iter().filter(|c| c.1.is_nan() || c.1 > c.2).map(|c| format!("{} {:.1e} > {:.0e}", c.0, c.1, c.2)).collect();
    let worst: Vec<String> = checks.iter().map(|c| format!("{} {:.1e}", c.0, c.1)).collect();
    Outcome {
        id: 7,
        passed: failed.is_empty() && elapsed <= Duration::from_secs(60),
        detail: if failed.is_empty() {
            format!("{}; {:.1}s", worst.join(", "), elapsed.as_secs_f64())
        } else {
            format!("violations: {}", failed.join(", "))
        },
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let constants: Vec<f64> = (2..=4)
        .map(|level| {
            let problem =
                StokesProblem::new(GeometryKind::Square, Family::TaylorHood, Transform::Direct, 2, level).unwrap();
            let proven = StokesSpaces::new(Family::TaylorHood, Transform::Direct, 2, level).unwrap().stability_proven();
            inf_sup_constant(&problem.system, proven).unwrap().constant
        })
        .collect();
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().cloned().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    Outcome {
        id: 8,
        passed: lo > 0.0 && lo >= INF_SUP_RATIO * hi && elapsed <= Duration::from_secs(60),
        detail: format!(
            "TH p=2 ℓ=2,3,4: {} (min/max {:.3}); {:.1}s",
            constants.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", "),
            lo / hi,
            elapsed.as_secs_f64()
        ),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "miss"
    }
}

fn main() {
    let mut cells = Cells { cache: HashMap::new() };
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("criterion {}: {} — {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        outcomes.push(o.passed);
    };
    report(criterion_7());
    report(criterion_8());
    report(criterion_3());
    report(criterion_1(&mut cells));
    report(criterion_2(&mut cells));
    report(criterion_6(&mut cells));
    report(criterion_4(&mut cells));
    report(criterion_5(&mut cells));
    let passed = outcomes.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if passed < outcomes.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
