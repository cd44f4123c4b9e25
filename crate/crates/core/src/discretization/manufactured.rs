use crate::error::Result;
use crate::geometry::{GeometryMap, Mat2};
use crate::quadrature::{gauss_legendre, IntervalRule};

/// Analytic solution of the Stokes problem, used for boundary data, the
/// right-hand side and error measurement.
pub trait ExactSolution {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2];
    fn pressure(&self, x: f64, y: f64) -> f64;
    /// `f = -Δu + ∇p`.
    fn force(&self, x: f64, y: f64) -> [f64; 2];
}

/// `u = (cos(5x+5y) + sin(5x-5y), -1 - cos(5x+5y) + sin(5x-5y))`,
/// `p = -(1+x)(1+y) + c` with `c` making the mean of `p` vanish on Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub pressure_shift: f64,
}

impl ManufacturedSolution {
    pub fn new(map: &GeometryMap) -> Result<Self> {
        let rule = gauss_legendre(12);
        let cells = 8;
        let (mut int_p, mut area) = (0.0, 0.0);
        for ey in 0..cells {
            let ry = IntervalRule::new(&rule, ey as f64 / cells as f64, (ey + 1) as f64 / cells as f64);
            for ex in 0..cells {
                let rx = IntervalRule::new(&rule, ex as f64 / cells as f64, (ex + 1) as f64 / cells as f64);
                for (&v, &wv) in ry.points.iter().zip(&ry.weights) {
                    for (&u, &wu) in rx.points.iter().zip(&rx.weights) {
                        let g = map.eval(u, v)?;
                        let [x, y] = g.point;
                        int_p += wu * wv * g.det * (-(1.0 + x) * (1.0 + y));
                        area += wu * wv * g.det;
                    }
                }
            }
        }
        Ok(ManufacturedSolution { pressure_shift: -int_p / area })
    }

    pub fn velocity_gradient(&self, x: f64, y: f64) -> Mat2 {
        let (a, b) = (5.0 * x + 5.0 * y, 5.0 * x - 5.0 * y);
        let (sa, cb) = (5.0 * a.sin(), 5.0 * b.cos());
        [[-sa + cb, -sa - cb], [sa + cb, sa - cb]]
    }

    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        let g = self.velocity_gradient(x, y);
        g[0][0] + g[1][1]
    }
}

impl ExactSolution for ManufacturedSolution {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let (a, b) = (5.0 * x + 5.0 * y, 5.0 * x - 5.0 * y);
        [a.cos() + b.sin(), -1.0 - a.cos() + b.sin()]
    }

    fn pressure(&self, x: f64, y: f64) -> f64 {
        -(1.0 + x) * (1.0 + y) + self.pressure_shift
    }

    fn force(&self, x: f64, y: f64) -> [f64; 2] {
        let (a, b) = (5.0 * x + 5.0 * y, 5.0 * x - 5.0 * y);
        // each trigonometric term is an eigenfunction of -Δ with eigenvalue 50
        [
            50.0 * (a.cos() + b.sin()) - (1.0 + y),
            50.0 * (-a.cos() + b.sin()) - (1.0 + x),
        ]
    }
}
