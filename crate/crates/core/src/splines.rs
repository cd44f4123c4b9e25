//! Univariate B-spline spaces on uniform grids of (0, 1).

use std::ops::Range;

use nalgebra::DMatrix;

pub use crate::banded::{BandedCholesky, BandedMatrix};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, IntervalRule};

/// The spline space `S^q_{p,h}` of degree `p` and continuity `C^q` on the
/// uniform grid with `n` elements, equipped with its B-spline basis over an
/// open knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace1D {
    degree: usize,
    smoothness: i32,
    num_elements: usize,
    knots: Vec<f64>,
}

impl SplineSpace1D {
    /// Open knot vector: boundary knots repeated `p + 1` times, interior
    /// breakpoints `i / n` repeated `p - q` times.
    pub fn new(degree: usize, smoothness: i32, num_elements: usize) -> Result<Self> {
        if smoothness < -1 || smoothness > degree as i32 - 1 {
            return Err(Error::Parameter(format!(
                "smoothness {smoothness} must lie in [-1, {}]",
                degree as i32 - 1
            )));
        }
        if num_elements == 0 {
            return Err(Error::Parameter("a spline space needs at least one element".into()));
        }
        let mult = (degree as i32 - smoothness) as usize;
        let mut knots = vec![0.0; degree + 1];
        for i in 1..num_elements {
            let t = i as f64 / num_elements as f64;
            knots.extend(std::iter::repeat_n(t, mult));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Ok(SplineSpace1D { degree, smoothness, num_elements, knots })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn smoothness(&self) -> i32 {
        self.smoothness
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Multiplicity `p - q` of the interior breakpoints.
    pub fn multiplicity(&self) -> usize {
        (self.degree as i32 - self.smoothness) as usize
    }

    /// `n (p - q) + q + 1`.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn element_size(&self) -> f64 {
        1.0 / self.num_elements as f64
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let n = self.num_elements as f64;
        (e as f64 / n, (e + 1) as f64 / n)
    }

    /// Index of the first of the `p + 1` basis functions active on element `e`.
    pub fn first_active(&self, e: usize) -> usize {
        e * self.multiplicity()
    }

    /// Element containing `x`; the right end point belongs to the last element.
    pub fn element_of(&self, x: f64) -> usize {
        ((x * self.num_elements as f64).floor().max(0.0) as usize).min(self.num_elements - 1)
    }

    /// Elements on which basis function `i` does not vanish identically.
    pub fn support_elements(&self, i: usize) -> Range<usize> {
        let m = self.multiplicity();
        let lo = i.saturating_sub(self.degree).div_ceil(m);
        let hi = (i / m).min(self.num_elements - 1);
        lo..hi + 1
    }

    /// Basis functions of `self` whose support meets the support of basis
    /// function `i` of `other` (same breakpoints assumed).
    pub fn overlapping(&self, other: &SplineSpace1D, i: usize) -> Range<usize> {
        let elems = other.support_elements(i);
        let lo = self.first_active(elems.start);
        let hi = self.first_active(elems.end - 1) + self.degree;
        lo..hi + 1
    }

    pub fn same_grid(&self, other: &SplineSpace1D) -> bool {
        self.num_elements == other.num_elements
    }

    /// Greville abscissae (knot averages).
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.dim())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// The space one dyadic refinement up.
    pub fn refined(&self) -> SplineSpace1D {
        Self::new(self.degree, self.smoothness, 2 * self.num_elements)
            .expect("refining a valid space stays valid")
    }

    /// The space one dyadic refinement down.
    pub fn coarsened(&self) -> Result<SplineSpace1D> {
        if !self.num_elements.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "cannot coarsen a grid with {} elements",
                self.num_elements
            )));
        }
        Self::new(self.degree, self.smoothness, self.num_elements / 2)
    }

    /// Values and derivatives up to `nders` of the `p + 1` basis functions
    /// active on element `e`, at `x` (which should lie in the closure of `e`).
    ///
    /// `result[k][r]` is the `k`-th derivative of basis function
    /// `first_active(e) + r`.
    pub fn basis_ders_in_element(&self, e: usize, x: f64, nders: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let span = p + e * self.multiplicity();
        let u = &self.knots;
        let mut ders = vec![vec![0.0; p + 1]; nders + 1];

        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let top = nders.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p as i64 {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=top as i64 {
                let mut d = 0.0;
                let rk = r - k;
                let pk = p as i64 - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk as usize];
                }
                let j1 = if rk >= -1 { 1 } else { -rk };
                let j2 = if r - 1 <= pk { k - 1 } else { p as i64 - r };
                for j in j1..=j2 {
                    let (ju, rkj) = (j as usize, (rk + j) as usize);
                    a[s2][ju] = (a[s1][ju] - a[s1][ju - 1]) / ndu[(pk + 1) as usize][rkj];
                    d += a[s2][ju] * ndu[rkj][pk as usize];
                }
                if r <= pk {
                    let ku = k as usize;
                    a[s2][ku] = -a[s1][ku - 1] / ndu[(pk + 1) as usize][r as usize];
                    d += a[s2][ku] * ndu[r as usize][pk as usize];
                }
                ders[k as usize][r as usize] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=top {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// `deriv_order`-th derivatives of the basis functions supported at `x`.
    ///
    /// Returns the index of the first active basis function together with
    /// `p + 1` values; every other basis function vanishes at `x`.
    pub fn eval_basis(&self, x: f64, deriv_order: usize) -> Result<(usize, Vec<f64>)> {
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(Error::Domain(x));
        }
        let e = self.element_of(x);
        let mut ders = self.basis_ders_in_element(e, x, deriv_order);
        Ok((self.first_active(e), ders.swap_remove(deriv_order)))
    }

    /// Evaluates the spline with coefficients `coefs` (or its derivative).
    pub fn eval(&self, coefs: &[f64], x: f64, deriv_order: usize) -> Result<f64> {
        crate::error::check_len(self.dim(), coefs.len())?;
        let (first, vals) = self.eval_basis(x, deriv_order)?;
        Ok(vals.iter().enumerate().map(|(r, v)| v * coefs[first + r]).sum())
    }

    /// Collocation matrix `B[k][j] = N_j(τ_k)` at the Greville abscissae.
    pub fn greville_collocation(&self) -> DMatrix<f64> {
        let g = self.greville();
        let mut b = DMatrix::zeros(self.dim(), self.dim());
        for (k, &t) in g.iter().enumerate() {
            let (first, vals) = self.eval_basis(t, 0).expect("Greville points lie in [0, 1]");
            for (r, v) in vals.into_iter().enumerate() {
                b[(k, first + r)] = v;
            }
        }
        b
    }

    /// Coefficients of the spline interpolating `f` at the Greville abscissae.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let rhs = nalgebra::DVector::from_iterator(self.dim(), self.greville().into_iter().map(f));
        self.greville_collocation()
            .lu()
            .solve(&rhs)
            .map(|v| v.as_slice().to_vec())
            .ok_or_else(|| Error::Singular("Greville collocation matrix".into()))
    }
}

/// Galerkin matrix `∫ w D^a φ_i D^b ψ_j dx` over (0, 1), using Gauss–Legendre
/// quadrature with `max(p_row, p_col) + 1` points per element.
pub fn assemble_1d(
    row_space: &SplineSpace1D,
    col_space: &SplineSpace1D,
    row_deriv: usize,
    col_deriv: usize,
    weight: &dyn Fn(f64) -> f64,
) -> Result<BandedMatrix> {
    let nq = row_space.degree().max(col_space.degree()) + 1;
    assemble_1d_with_points(row_space, col_space, row_deriv, col_deriv, weight, nq)
}

/// [`assemble_1d`] with an explicit number of quadrature points per element.
pub fn assemble_1d_with_points(
    row_space: &SplineSpace1D,
    col_space: &SplineSpace1D,
    row_deriv: usize,
    col_deriv: usize,
    weight: &dyn Fn(f64) -> f64,
    nq: usize,
) -> Result<BandedMatrix> {
    if !row_space.same_grid(col_space) {
        return Err(Error::Assembly(format!(
            "spaces live on different grids ({} vs {} elements)",
            row_space.num_elements(),
            col_space.num_elements()
        )));
    }
    let n = row_space.num_elements();
    let (mr, mc) = (row_space.multiplicity(), col_space.multiplicity());
    let (pr, pc) = (row_space.degree(), col_space.degree());
    let mut lower = 0usize;
    let mut upper = 0usize;
    for e in [0, n - 1] {
        let (r0, c0) = (e * mr, e * mc);
        lower = lower.max((r0 + pr).saturating_sub(c0));
        upper = upper.max((c0 + pc).saturating_sub(r0));
    }
    let mut mat = BandedMatrix::zeros(row_space.dim(), col_space.dim(), lower, upper);
    let reference = gauss_legendre(nq);
    for e in 0..n {
        let (a, b) = row_space.element_bounds(e);
        let rule = IntervalRule::new(&reference, a, b);
        let (fr, fc) = (row_space.first_active(e), col_space.first_active(e));
        for (&x, &w) in rule.points.iter().zip(&rule.weights) {
            let rv = &row_space.basis_ders_in_element(e, x, row_deriv)[row_deriv];
            let cv = &col_space.basis_ders_in_element(e, x, col_deriv)[col_deriv];
            let ww = w * weight(x);
            for (i, ri) in rv.iter().enumerate() {
                if *ri == 0.0 {
                    continue;
                }
                for (j, cj) in cv.iter().enumerate() {
                    mat.add(fr + i, fc + j, ww * ri * cj);
                }
            }
        }
    }
    Ok(mat)
}

/// Mass matrix of a space with itself.
pub fn mass_1d(space: &SplineSpace1D) -> BandedMatrix {
    assemble_1d(space, space, 0, 0, &|_| 1.0).expect("a space shares its own grid")
}

/// Stiffness matrix `∫ φ_i' φ_j'` of a space with itself.
pub fn stiffness_1d(space: &SplineSpace1D) -> BandedMatrix {
    assemble_1d(space, space, 1, 1, &|_| 1.0).expect("a space shares its own grid")
}

/// Knot-insertion matrix mapping coefficients of `coarse` to the coefficients
/// of the identical function in `fine`.
pub fn prolongation_1d(coarse: &SplineSpace1D, fine: &SplineSpace1D) -> Result<BandedMatrix> {
    if coarse.degree() != fine.degree()
        || coarse.smoothness() != fine.smoothness()
        || fine.num_elements() != 2 * coarse.num_elements()
    {
        return Err(Error::Parameter(
            "prolongation needs equal degree and smoothness and a halved grid size".into(),
        ));
    }
    let p = coarse.degree();
    let mut knots = coarse.knots().to_vec();
    let mut coefs = DMatrix::<f64>::identity(coarse.dim(), coarse.dim());
    let nc = coarse.num_elements();
    for e in 0..nc {
        let u = (2 * e + 1) as f64 / (2 * nc) as f64;
        for _ in 0..coarse.multiplicity() {
            // last index k with knots[k] <= u
            let k = knots.iter().rposition(|&t| t <= u).expect("u lies inside the knot range");
            let old_n = coefs.nrows();
            let mut next = DMatrix::zeros(old_n + 1, coefs.ncols());
            for i in 0..=old_n {
                if i + p <= k {
                    next.set_row(i, &coefs.row(i));
                } else if i > k {
                    next.set_row(i, &coefs.row(i - 1));
                } else {
                    let alpha = (u - knots[i]) / (knots[i + p] - knots[i]);
                    let row = coefs.row(i) * alpha + coefs.row(i - 1) * (1.0 - alpha);
                    next.set_row(i, &row);
                }
            }
            knots.insert(k + 1, u);
            coefs = next;
        }
    }
    debug_assert_eq!(coefs.nrows(), fine.dim());
    debug_assert!(knots.iter().zip(fine.knots()).all(|(a, b)| (a - b).abs() < 1e-14));
    Ok(BandedMatrix::from_dense(&coefs))
}
