use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::splines::SplineSpace1D;

/// The three velocity/pressure spline pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    TaylorHood,
    Nedelec,
    RaviartThomas,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::TaylorHood, Family::Nedelec, Family::RaviartThomas];

    pub fn short_name(self) -> &'static str {
        match self {
            Family::TaylorHood => "TH",
            Family::Nedelec => "NE",
            Family::RaviartThomas => "RT",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Family::TaylorHood => "Taylor-Hood",
            Family::Nedelec => "Nédélec",
            Family::RaviartThomas => "Raviart-Thomas",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "th" | "taylor-hood" | "taylorhood" => Ok(Family::TaylorHood),
            "ne" | "nedelec" => Ok(Family::Nedelec),
            "rt" | "raviart-thomas" | "raviartthomas" => Ok(Family::RaviartThomas),
            _ => Err(Error::Parameter(format!("unknown space family '{s}'"))),
        }
    }
}

/// How velocity fields are pulled back to the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Transform {
    /// `v ∘ G` is a parameter-domain spline.
    Direct,
    /// Contravariant Piola: `v ∘ G = J_G v̂ / det J_G`.
    Piola,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Direct => "direct",
            Transform::Piola => "piola",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "d" => Ok(Transform::Direct),
            "piola" | "p" => Ok(Transform::Piola),
            _ => Err(Error::Parameter(format!("unknown transform '{s}'"))),
        }
    }
}

/// Tensor product `x ⊗ y` of two univariate spaces, coefficients ordered
/// x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSpace {
    pub x: SplineSpace1D,
    pub y: SplineSpace1D,
}

impl TensorSpace {
    pub fn new(x: SplineSpace1D, y: SplineSpace1D) -> Self {
        TensorSpace { x, y }
    }

    /// `S^{qx,qy}_{px,py}` on the uniform `n x n` grid.
    pub fn uniform(px: usize, py: usize, qx: i32, qy: i32, n: usize) -> Result<Self> {
        Ok(TensorSpace { x: SplineSpace1D::new(px, qx, n)?, y: SplineSpace1D::new(py, qy, n)? })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.dim(), self.y.dim())
    }

    pub fn dim(&self) -> usize {
        self.x.dim() * self.y.dim()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.x.dim() * j
    }

    pub fn max_degree(&self) -> usize {
        self.x.degree().max(self.y.degree())
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let (nx, ny) = self.dims();
        i == 0 || j == 0 || i + 1 == nx || j + 1 == ny
    }

    /// Indices of basis functions vanishing on the boundary, x-fastest.
    pub fn interior_indices(&self) -> Vec<usize> {
        let (nx, ny) = self.dims();
        (1..ny.saturating_sub(1))
            .flat_map(|j| (1..nx.saturating_sub(1)).map(move |i| i + nx * j))
            .collect()
    }

    pub fn boundary_indices(&self) -> Vec<usize> {
        let (nx, ny) = self.dims();
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_boundary(i, j))
            .map(|(i, j)| self.index(i, j))
            .collect()
    }

    pub fn num_interior(&self) -> usize {
        let (nx, ny) = self.dims();
        nx.saturating_sub(2) * ny.saturating_sub(2)
    }

    pub fn coarsened(&self) -> Result<TensorSpace> {
        Ok(TensorSpace { x: self.x.coarsened()?, y: self.y.coarsened()? })
    }

    /// Value and parameter gradient of the spline with coefficients `c`.
    pub fn eval_with_gradient(&self, c: &[f64], u: f64, v: f64) -> Result<(f64, [f64; 2])> {
        crate::error::check_len(self.dim(), c.len())?;
        let ex = self.x.element_of(u);
        let ey = self.y.element_of(v);
        let bx = self.x.basis_ders_in_element(ex, u, 1);
        let by = self.y.basis_ders_in_element(ey, v, 1);
        let (fx, fy) = (self.x.first_active(ex), self.y.first_active(ey));
        let (mut val, mut gu, mut gv) = (0.0, 0.0, 0.0);
        for s in 0..by[0].len() {
            for r in 0..bx[0].len() {
                let coef = c[self.index(fx + r, fy + s)];
                val += coef * bx[0][r] * by[0][s];
                gu += coef * bx[1][r] * by[0][s];
                gv += coef * bx[0][r] * by[1][s];
            }
        }
        Ok((val, [gu, gv]))
    }
}

/// Velocity component spaces and pressure space for one family.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesSpaces {
    pub family: Family,
    pub transform: Transform,
    pub degree: usize,
    pub level: usize,
    pub velocity: [TensorSpace; 2],
    pub pressure: TensorSpace,
}

impl StokesSpaces {
    pub fn new(family: Family, transform: Transform, degree: usize, level: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Parameter(format!("degree parameter p = {degree} must be at least 2")));
        }
        if level < 2 {
            return Err(Error::Parameter(format!("level {level} must be at least 2")));
        }
        if level > 12 {
            return Err(Error::Parameter(format!("level {level} is beyond any sensible size")));
        }
        let n = 1usize << level;
        let p = degree;
        let (pi, qi) = (p as i32, p as i32 - 1);
        let velocity = match family {
            Family::TaylorHood => {
                let s = TensorSpace::uniform(p + 1, p + 1, qi, qi, n)?;
                [s.clone(), s]
            }
            Family::Nedelec => [
                TensorSpace::uniform(p + 1, p + 1, pi, qi, n)?,
                TensorSpace::uniform(p + 1, p + 1, qi, pi, n)?,
            ],
            Family::RaviartThomas => [
                TensorSpace::uniform(p + 1, p, pi, qi, n)?,
                TensorSpace::uniform(p, p + 1, qi, pi, n)?,
            ],
        };
        let pressure = TensorSpace::uniform(p, p, qi, qi, n)?;
        Ok(StokesSpaces { family, transform, degree, level, velocity, pressure })
    }

    pub fn num_elements(&self) -> usize {
        1 << self.level
    }

    pub fn max_degree(&self) -> usize {
        self.velocity.iter().map(|s| s.max_degree()).max().unwrap().max(self.pressure.max_degree())
    }

    /// Velocity unknowns after eliminating every boundary coefficient.
    pub fn free_velocity_dofs(&self) -> usize {
        self.velocity.iter().map(|s| s.num_interior()).sum()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.pressure.dim()
    }

    /// Size of the reduced saddle-point system.
    pub fn total_dofs(&self) -> usize {
        self.free_velocity_dofs() + self.pressure_dofs()
    }

    /// Whether discrete inf-sup stability is known for this configuration.
    pub fn stability_proven(&self) -> bool {
        match self.family {
            Family::TaylorHood => true,
            Family::Nedelec => self.transform == Transform::Piola,
            Family::RaviartThomas => false,
        }
    }
}

/// Builds the spaces of one family at degree parameter `p` and level `ℓ`
/// (`2^ℓ` elements per direction).
pub fn stokes_spaces(family: Family, transform: Transform, p: usize, level: usize) -> Result<StokesSpaces> {
    StokesSpaces::new(family, transform, p, level)
}
