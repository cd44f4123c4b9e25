//! Single-patch geometry maps `G: (0,1)² → Ω`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, IntervalRule};
use crate::splines::SplineSpace1D;

pub type Mat2 = [[f64; 2]; 2];

/// `G(x̂)`, `J_G(x̂)` (`jacobian[i][k] = ∂G_i/∂x̂_k`) and `det J_G(x̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPoint {
    pub point: [f64; 2],
    pub jacobian: Mat2,
    pub det: f64,
}

impl GeometryPoint {
    pub fn inverse_jacobian(&self) -> Mat2 {
        let j = &self.jacobian;
        let d = self.det;
        [[j[1][1] / d, -j[0][1] / d], [-j[1][0] / d, j[0][0] / d]]
    }
}

/// Second derivatives `hessian[i][k][l] = ∂²G_i / ∂x̂_k ∂x̂_l`.
pub type Hessian = [[[f64; 2]; 2]; 2];

/// Tensor-product NURBS patch with control points ordered x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsPatch {
    basis_x: SplineSpace1D,
    basis_y: SplineSpace1D,
    control: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl NurbsPatch {
    pub fn new(
        basis_x: SplineSpace1D,
        basis_y: SplineSpace1D,
        control: Vec<[f64; 2]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = basis_x.dim() * basis_y.dim();
        if control.len() != n || weights.len() != n {
            return Err(Error::Parameter(format!(
                "control net needs {n} points and weights, got {} and {}",
                control.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::Parameter("NURBS weights must be positive".into()));
        }
        Ok(NurbsPatch { basis_x, basis_y, control, weights })
    }

    /// Homogeneous evaluation: returns (A, W) derivatives up to second order,
    /// indexed `[d_u][d_v]`.
    #[allow(clippy::type_complexity)]
    fn homogeneous(&self, u: f64, v: f64) -> ([[[f64; 2]; 3]; 3], [[f64; 3]; 3]) {
        let ex = self.basis_x.element_of(u);
        let ey = self.basis_y.element_of(v);
        let bx = self.basis_x.basis_ders_in_element(ex, u, 2);
        let by = self.basis_y.basis_ders_in_element(ey, v, 2);
        let (fx, fy) = (self.basis_x.first_active(ex), self.basis_y.first_active(ey));
        let nx = self.basis_x.dim();
        let mut a = [[[0.0; 2]; 3]; 3];
        let mut w = [[0.0; 3]; 3];
        for (s, _) in by[0].iter().enumerate() {
            for (r, _) in bx[0].iter().enumerate() {
                let idx = fx + r + nx * (fy + s);
                let (cp, wt) = (self.control[idx], self.weights[idx]);
                for du in 0..3 {
                    for dv in 0..(3 - du) {
                        let b = bx[du][r] * by[dv][s] * wt;
                        w[du][dv] += b;
                        a[du][dv][0] += b * cp[0];
                        a[du][dv][1] += b * cp[1];
                    }
                }
            }
        }
        (a, w)
    }

    fn eval_full(&self, u: f64, v: f64) -> ([f64; 2], Mat2, Hessian) {
        let (a, w) = self.homogeneous(u, v);
        let w0 = w[0][0];
        let mut g = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        let mut hes = [[[0.0; 2]; 2]; 2];
        let dw = [w[1][0], w[0][1]];
        let ddw = [[w[2][0], w[1][1]], [w[1][1], w[0][2]]];
        for i in 0..2 {
            g[i] = a[0][0][i] / w0;
            let da = [a[1][0][i], a[0][1][i]];
            for k in 0..2 {
                jac[i][k] = (da[k] - g[i] * dw[k]) / w0;
            }
            let dda = [[a[2][0][i], a[1][1][i]], [a[1][1][i], a[0][2][i]]];
            for k in 0..2 {
                for l in 0..2 {
                    hes[i][k][l] = (dda[k][l]
                        - jac[i][k] * dw[l]
                        - jac[i][l] * dw[k]
                        - g[i] * ddw[k][l])
                        / w0;
                }
            }
        }
        (g, jac, hes)
    }
}

/// A geometry transformation of the parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryMap {
    Identity,
    Nurbs(NurbsPatch),
}

/// Identity map: the parameter domain is the physical domain.
pub fn unit_square_map() -> GeometryMap {
    GeometryMap::Identity
}

/// Exact NURBS parametrization of `{1 < x² + y² < 4, x, y > 0}`.
///
/// The first parameter direction is radial (linear, radius 1 to 2), the
/// second angular (rational quadratic arc with middle weight `1/√2`).
pub fn quarter_annulus_map() -> GeometryMap {
    let radial = SplineSpace1D::new(1, 0, 1).expect("valid space");
    let angular = SplineSpace1D::new(2, 1, 1).expect("valid space");
    let mut control = Vec::new();
    let mut weights = Vec::new();
    let arc = [([1.0, 0.0], 1.0), ([1.0, 1.0], FRAC_1_SQRT_2), ([0.0, 1.0], 1.0)];
    for (dir, w) in arc {
        for r in [1.0, 2.0] {
            control.push([r * dir[0], r * dir[1]]);
            weights.push(w);
        }
    }
    GeometryMap::Nurbs(NurbsPatch::new(radial, angular, control, weights).expect("valid patch"))
}

impl GeometryMap {
    pub fn is_identity(&self) -> bool {
        matches!(self, GeometryMap::Identity)
    }

    /// `G(x̂)` without any Jacobian check.
    pub fn eval_map(&self, u: f64, v: f64) -> [f64; 2] {
        match self {
            GeometryMap::Identity => [u, v],
            GeometryMap::Nurbs(p) => p.eval_full(u, v).0,
        }
    }

    fn check_point(u: f64, v: f64) -> Result<()> {
        for x in [u, v] {
            if !(0.0..=1.0).contains(&x) || x.is_nan() {
                return Err(Error::Domain(x));
            }
        }
        Ok(())
    }

    /// Map, Jacobian and its determinant at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> Result<GeometryPoint> {
        Ok(self.eval_second(u, v)?.0)
    }

    /// Like [`GeometryMap::eval`], also returning second derivatives.
    pub fn eval_second(&self, u: f64, v: f64) -> Result<(GeometryPoint, Hessian)> {
        Self::check_point(u, v)?;
        let (point, jacobian, hessian) = match self {
            GeometryMap::Identity => ([u, v], [[1.0, 0.0], [0.0, 1.0]], [[[0.0; 2]; 2]; 2]),
            GeometryMap::Nurbs(p) => p.eval_full(u, v),
        };
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        if det <= 1e-14 {
            return Err(Error::Geometry { u, v, det });
        }
        Ok((GeometryPoint { point, jacobian, det }, hessian))
    }

    /// Change-of-variables coefficients for directly composed scalars:
    /// `diffusion = det J · J⁻¹ J⁻ᵀ` and `measure = det J`.
    pub fn pullback_coefficients(&self, u: f64, v: f64) -> Result<(Mat2, f64)> {
        let g = self.eval(u, v)?;
        Ok((diffusion_of(&g), g.det))
    }

    /// `∫_Ω̂ det J` by tensor Gauss quadrature on a `cells x cells` grid.
    pub fn area(&self, cells: usize, points: usize) -> Result<f64> {
        let rule = gauss_legendre(points);
        let mut total = 0.0;
        for ey in 0..cells {
            let ry = IntervalRule::new(&rule, ey as f64 / cells as f64, (ey + 1) as f64 / cells as f64);
            for ex in 0..cells {
                let rx =
                    IntervalRule::new(&rule, ex as f64 / cells as f64, (ex + 1) as f64 / cells as f64);
                for (&y, &wy) in ry.points.iter().zip(&ry.weights) {
                    for (&x, &wx) in rx.points.iter().zip(&rx.weights) {
                        total += wx * wy * self.eval(x, y)?.det;
                    }
                }
            }
        }
        Ok(total)
    }
}

pub(crate) fn diffusion_of(g: &GeometryPoint) -> Mat2 {
    let ji = g.inverse_jacobian();
    let mut d = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            d[a][b] = g.det * (ji[a][0] * ji[b][0] + ji[a][1] * ji[b][1]);
        }
    }
    d
}

/// Free-function form of [`GeometryMap::eval`].
pub fn eval_geometry(map: &GeometryMap, u: f64, v: f64) -> Result<GeometryPoint> {
    map.eval(u, v)
}

/// Free-function form of [`GeometryMap::pullback_coefficients`].
pub fn pullback_coefficients(map: &GeometryMap, u: f64, v: f64) -> Result<(Mat2, f64)> {
    map.pullback_coefficients(u, v)
}
