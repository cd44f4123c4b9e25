//! Separable (tensor-rank-one) approximations of geometry coefficients,
//! used to carry part of the geometry into Kronecker preconditioners.

use nalgebra::DMatrix;

use crate::discretization::Transform;
use crate::error::{Error, Result};
use crate::geometry::{diffusion_of, GeometryMap};
use crate::tensor::rank_one_approx;

/// Scalar coefficient of the pulled-back forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryCoefficient {
    /// `det J`, weighting mass matrices.
    Measure,
    /// Entry `(0, 0)` of `det J · J⁻¹ J⁻ᵀ`, weighting `∂x̂ ∂x̂` terms.
    DiffusionXX,
    /// Entry `(1, 1)`, weighting `∂ŷ ∂ŷ` terms.
    DiffusionYY,
}

/// `c(x̂, ŷ) ≈ f(x̂) g(ŷ)` with piecewise-linear factors through the
/// sample points.
#[derive(Debug, Clone)]
pub struct RankOneFactors {
    pub points_x: Vec<f64>,
    pub values_x: Vec<f64>,
    pub points_y: Vec<f64>,
    pub values_y: Vec<f64>,
    /// Frobenius norm of the sampled residual relative to the samples.
    pub relative_error: f64,
}

fn interpolate_linear(points: &[f64], values: &[f64], t: f64) -> f64 {
    if points.len() == 1 {
        return values[0];
    }
    let k = points.partition_point(|&p| p <= t).clamp(1, points.len() - 1);
    let (a, b) = (points[k - 1], points[k]);
    let s = if b > a { ((t - a) / (b - a)).clamp(0.0, 1.0) } else { 0.0 };
    values[k - 1] * (1.0 - s) + values[k] * s
}

impl RankOneFactors {
    pub fn factor_x(&self, t: f64) -> f64 {
        interpolate_linear(&self.points_x, &self.values_x, t)
    }

    pub fn factor_y(&self, t: f64) -> f64 {
        interpolate_linear(&self.points_y, &self.values_y, t)
    }
}

/// Samples `coefficient` on the grid `points_x × points_y` (strictly
/// increasing abscissae in [0, 1]) and returns its best rank-one
/// factorization.
pub fn rank_one_geometry_factors(
    map: &GeometryMap,
    transform: Transform,
    coefficient: GeometryCoefficient,
    points_x: &[f64],
    points_y: &[f64],
) -> Result<RankOneFactors> {
    if transform == Transform::Piola {
        return Err(Error::Unsupported(
            "rank-one geometry approximation is only available for direct composition".into(),
        ));
    }
    if points_x.is_empty() || points_y.is_empty() {
        return Err(Error::Parameter("rank-one sampling needs points in both directions".into()));
    }
    let mut samples = DMatrix::zeros(points_x.len(), points_y.len());
    for (i, &u) in points_x.iter().enumerate() {
        for (j, &v) in points_y.iter().enumerate() {
            let g = map.eval(u, v)?;
            samples[(i, j)] = match coefficient {
                GeometryCoefficient::Measure => g.det,
                GeometryCoefficient::DiffusionXX => diffusion_of(&g)[0][0],
                GeometryCoefficient::DiffusionYY => diffusion_of(&g)[1][1],
            };
        }
    }
    let (u, w) = rank_one_approx(&samples)?;
    let approx = &u * w.transpose();
    let relative_error = (&samples - approx).norm() / samples.norm();
    Ok(RankOneFactors {
        points_x: points_x.to_vec(),
        values_x: u.iter().copied().collect(),
        points_y: points_y.to_vec(),
        values_y: w.iter().copied().collect(),
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{quarter_annulus_map, unit_square_map};

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn identity_factors_are_constant() {
        let f = rank_one_geometry_factors(
            &unit_square_map(),
            Transform::Direct,
            GeometryCoefficient::Measure,
            &grid(5),
            &grid(7),
        )
        .unwrap();
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert!((f.factor_x(t) * f.factor_y(0.5) - 1.0).abs() < 1e-12);
        }
        assert!(f.relative_error < 1e-12);
    }

    #[test]
    fn annulus_coefficients_are_separable() {
        for c in [GeometryCoefficient::Measure, GeometryCoefficient::DiffusionXX, GeometryCoefficient::DiffusionYY] {
            let f = rank_one_geometry_factors(&quarter_annulus_map(), Transform::Direct, c, &grid(12), &grid(12))
                .unwrap();
            assert!(f.relative_error < 1e-8, "{c:?}: {}", f.relative_error);
        }
    }

    #[test]
    fn piola_is_rejected() {
        let r = rank_one_geometry_factors(
            &unit_square_map(),
            Transform::Piola,
            GeometryCoefficient::Measure,
            &grid(2),
            &grid(2),
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
