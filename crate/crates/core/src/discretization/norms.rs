use crate::discretization::manufactured::ExactSolution;
use crate::discretization::spaces::{StokesSpaces, Transform};
use crate::error::{check_len, Result};
use crate::geometry::GeometryMap;
use crate::quadrature::{gauss_legendre, IntervalRule};

/// Physical velocity and pressure of a discrete solution at `(u, v)`.
fn eval_discrete(
    spaces: &StokesSpaces,
    map: &GeometryMap,
    velocity: [&[f64]; 2],
    pressure: &[f64],
    u: f64,
    v: f64,
) -> Result<([f64; 2], f64, [f64; 2], f64)> {
    let g = map.eval(u, v)?;
    let vh = [
        spaces.velocity[0].eval_with_gradient(velocity[0], u, v)?.0,
        spaces.velocity[1].eval_with_gradient(velocity[1], u, v)?.0,
    ];
    let vel = match spaces.transform {
        Transform::Direct => vh,
        Transform::Piola => {
            let j = &g.jacobian;
            [(j[0][0] * vh[0] + j[0][1] * vh[1]) / g.det, (j[1][0] * vh[0] + j[1][1] * vh[1]) / g.det]
        }
    };
    let p = spaces.pressure.eval_with_gradient(pressure, u, v)?.0;
    Ok((vel, p, g.point, g.det))
}

/// L² errors of a discrete solution against `exact`.
///
/// `velocity` holds the full coefficient vectors of both components
/// (boundary included, component 0 first). Both pressures are shifted to
/// zero mean over Ω before they are compared.
pub fn l2_error(
    velocity: &[f64],
    pressure: &[f64],
    spaces: &StokesSpaces,
    map: &GeometryMap,
    exact: &dyn ExactSolution,
) -> Result<(f64, f64)> {
    let d0 = spaces.velocity[0].dim();
    check_len(d0 + spaces.velocity[1].dim(), velocity.len())?;
    check_len(spaces.pressure.dim(), pressure.len())?;
    let comps = [&velocity[..d0], &velocity[d0..]];

    let n = spaces.num_elements();
    let reference = gauss_legendre(spaces.max_degree() + 3);
    let rules: Vec<IntervalRule> = (0..n)
        .map(|e| IntervalRule::new(&reference, e as f64 / n as f64, (e + 1) as f64 / n as f64))
        .collect();

    // samples: (weight·det, discrete velocity, exact velocity, discrete p, exact p)
    let mut samples = Vec::with_capacity(n * n * reference.0.len().pow(2));
    for ry in &rules {
        for rx in &rules {
            for (&v, &wv) in ry.points.iter().zip(&ry.weights) {
                for (&u, &wu) in rx.points.iter().zip(&rx.weights) {
                    let (vel, p, [x, y], det) = eval_discrete(spaces, map, comps, pressure, u, v)?;
                    samples.push((wu * wv * det, vel, exact.velocity(x, y), p, exact.pressure(x, y)));
                }
            }
        }
    }
    let area: f64 = samples.iter().map(|s| s.0).sum();
    let mean_h = samples.iter().map(|s| s.0 * s.3).sum::<f64>() / area;
    let mean_e = samples.iter().map(|s| s.0 * s.4).sum::<f64>() / area;
    let (mut ev, mut ep) = (0.0, 0.0);
    for (w, vh, ve, ph, pe) in samples {
        ev += w * ((vh[0] - ve[0]).powi(2) + (vh[1] - ve[1]).powi(2));
        ep += w * ((ph - mean_h) - (pe - mean_e)).powi(2);
    }
    Ok((ev.sqrt(), ep.sqrt()))
}
