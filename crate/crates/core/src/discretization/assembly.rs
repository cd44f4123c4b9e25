use crate::discretization::manufactured::ExactSolution;
use crate::discretization::spaces::{Family, StokesSpaces, TensorSpace, Transform};
use crate::error::{check_len, Error, Result};
use crate::geometry::{GeometryMap, GeometryPoint, Hessian};
use crate::quadrature::{gauss_legendre, IntervalRule};
use crate::sparse::CsrMatrix;
use crate::splines::{mass_1d, SplineSpace1D};

/// Sparse block coupling two tensor spaces, with the sparsity pattern
/// derived from overlapping 1D supports so that entries can be located in
/// constant time during assembly.
struct TensorBlock {
    ncols_x: usize,
    col_x: Vec<std::ops::Range<usize>>,
    col_y: Vec<std::ops::Range<usize>>,
    nrows_x: usize,
    csr: CsrMatrix,
}

impl TensorBlock {
    fn new(rows: &TensorSpace, cols: &TensorSpace) -> Self {
        let (nrx, nry) = rows.dims();
        let ncx = cols.x.dim();
        let col_x: Vec<_> = (0..nrx).map(|i| cols.x.overlapping(&rows.x, i)).collect();
        let col_y: Vec<_> = (0..nry).map(|j| cols.y.overlapping(&rows.y, j)).collect();
        let mut row_ptr = Vec::with_capacity(nrx * nry + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for j in 0..nry {
            for i in 0..nrx {
                for jj in col_y[j].clone() {
                    for ii in col_x[i].clone() {
                        col_idx.push(ii + ncx * jj);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        let csr = CsrMatrix::from_pattern(nrx * nry, cols.dim(), row_ptr, col_idx);
        TensorBlock { ncols_x: ncx, col_x, col_y, nrows_x: nrx, csr }
    }

    #[inline]
    fn add(&mut self, (ri, rj): (usize, usize), (ci, cj): (usize, usize), v: f64) {
        let row = ri + self.nrows_x * rj;
        let xr = &self.col_x[ri];
        let yr = &self.col_y[rj];
        debug_assert!(xr.contains(&ci) && yr.contains(&cj));
        let pos = self.csr.row_ptr()[row] + (cj - yr.start) * xr.len() + (ci - xr.start);
        debug_assert_eq!(self.csr.col_idx()[pos], ci + self.ncols_x * cj);
        self.csr.values_mut()[pos] += v;
    }
}

/// Index set bookkeeping for the two velocity components.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityLayout {
    /// Number of coefficients of each component (boundary included).
    pub dims: [usize; 2],
    /// Free (interior) coefficients as indices into the full velocity
    /// vector; component 0 first, each x-fastest.
    pub free: Vec<usize>,
    /// Boundary coefficients as indices into the full velocity vector.
    pub boundary: Vec<usize>,
}

impl VelocityLayout {
    fn new(spaces: &StokesSpaces) -> Self {
        let d0 = spaces.velocity[0].dim();
        let mut free = spaces.velocity[0].interior_indices();
        free.extend(spaces.velocity[1].interior_indices().into_iter().map(|i| i + d0));
        let mut boundary = spaces.velocity[0].boundary_indices();
        boundary.extend(spaces.velocity[1].boundary_indices().into_iter().map(|i| i + d0));
        VelocityLayout { dims: [d0, spaces.velocity[1].dim()], free, boundary }
    }

    pub fn full_len(&self) -> usize {
        self.dims[0] + self.dims[1]
    }

    /// Number of free coefficients of each component.
    pub fn free_per_component(&self) -> [usize; 2] {
        let n0 = self.free.iter().take_while(|&&i| i < self.dims[0]).count();
        [n0, self.free.len() - n0]
    }
}

/// The assembled saddle-point system `[[K, Dᵀ], [D, 0]] (u, p) = (f, g)`.
///
/// Before [`eliminate_dirichlet`] the velocity blocks cover every
/// coefficient and `rhs_velocity` is the plain load vector; afterwards they
/// cover only the free coefficients and the right-hand sides carry the
/// lifted boundary data.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub family: Family,
    pub transform: Transform,
    pub stiffness: CsrMatrix,
    pub divergence: CsrMatrix,
    pub pressure_mass: CsrMatrix,
    pub velocity_mass: CsrMatrix,
    pub rhs_velocity: Vec<f64>,
    pub rhs_pressure: Vec<f64>,
    /// Full-length velocity coefficients holding the boundary data.
    pub dirichlet_lifting: Vec<f64>,
    pub layout: VelocityLayout,
    pub reduced: bool,
}

impl SaddleSystem {
    pub fn num_velocity(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn num_pressure(&self) -> usize {
        self.pressure_mass.nrows()
    }

    pub fn total_dofs(&self) -> usize {
        self.num_velocity() + self.num_pressure()
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut b = self.rhs_velocity.clone();
        b.extend_from_slice(&self.rhs_pressure);
        b
    }

    /// `y = A x` for the stacked vector `x = (u, p)`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nv = self.num_velocity();
        let (xu, xp) = x.split_at(nv);
        let (yu, yp) = y.split_at_mut(nv);
        self.stiffness.matvec_into(xu, yu);
        self.divergence.transpose_matvec_add(xp, yu);
        self.divergence.matvec_into(xu, yp);
    }

    /// The full symmetric indefinite matrix.
    pub fn full_matrix(&self) -> Result<CsrMatrix> {
        let dt = self.divergence.transpose();
        let (nv, np) = (self.num_velocity(), self.num_pressure());
        CsrMatrix::block(
            &[vec![Some(&self.stiffness), Some(&dt)], vec![Some(&self.divergence), None]],
            &[nv, np],
            &[nv, np],
        )
    }

    /// Full velocity coefficients from free ones (boundary data re-inserted).
    pub fn expand_velocity(&self, free: &[f64]) -> Result<Vec<f64>> {
        if !self.reduced {
            check_len(self.layout.full_len(), free.len())?;
            return Ok(free.to_vec());
        }
        check_len(self.layout.free.len(), free.len())?;
        let mut full = self.dirichlet_lifting.clone();
        for (&k, &v) in self.layout.free.iter().zip(free) {
            full[k] = v;
        }
        Ok(full)
    }
}

/// Per-element basis data of one univariate space: `vals[q][k][r]` is the
/// `k`-th derivative of local function `r` at quadrature point `q`.
struct ElementBasis {
    first: usize,
    vals: Vec<Vec<Vec<f64>>>,
}

fn element_basis(space: &crate::splines::SplineSpace1D, e: usize, points: &[f64]) -> ElementBasis {
    ElementBasis {
        first: space.first_active(e),
        vals: points.iter().map(|&x| space.basis_ders_in_element(e, x, 1)).collect(),
    }
}

/// Geometry-dependent factors of one velocity basis direction under the
/// Piola map: `a = J e_c / det` and its parameter derivatives.
fn piola_column(g: &GeometryPoint, h: &Hessian, c: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let j = &g.jacobian;
    let det = g.det;
    let mut ddet = [0.0; 2];
    for k in 0..2 {
        ddet[k] = h[0][0][k] * j[1][1] + j[0][0] * h[1][1][k] - h[0][1][k] * j[1][0] - j[0][1] * h[1][0][k];
    }
    let a = [j[0][c] / det, j[1][c] / det];
    let mut da = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            da[i][k] = h[i][c][k] / det - j[i][c] * ddet[k] / (det * det);
        }
    }
    (a, da)
}

/// Assembles stiffness, divergence and mass matrices plus the load vector
/// and the Dirichlet lifting for `exact` (boundary data by L² projection).
pub fn assemble_saddle(
    spaces: &StokesSpaces,
    map: &GeometryMap,
    exact: &dyn ExactSolution,
) -> Result<SaddleSystem> {
    assemble_saddle_with(spaces, map, exact, BoundaryImposition::default())
}

/// Additional Gauss points per direction on curved geometries, where the
/// integrands are rational. Too few points leave `Dᵀ 1` visibly nonzero on
/// coarse meshes, so the constant pressure stops being an exact kernel mode.
const CURVED_EXTRA_POINTS: usize = 3;

/// [`assemble_saddle`] with an explicit choice of boundary imposition.
pub fn assemble_saddle_with(
    spaces: &StokesSpaces,
    map: &GeometryMap,
    exact: &dyn ExactSolution,
    imposition: BoundaryImposition,
) -> Result<SaddleSystem> {
    let n = spaces.num_elements();
    let piola = spaces.transform == Transform::Piola;
    let vel = &spaces.velocity;
    let pre = &spaces.pressure;
    let nq = spaces.max_degree() + 1 + if map.is_identity() { 0 } else { CURVED_EXTRA_POINTS };
    let reference = gauss_legendre(nq);

    let coupled: Vec<(usize, usize)> =
        if piola { vec![(0, 0), (0, 1), (1, 0), (1, 1)] } else { vec![(0, 0), (1, 1)] };
    let mut kblocks: Vec<TensorBlock> =
        coupled.iter().map(|&(a, b)| TensorBlock::new(&vel[a], &vel[b])).collect();
    let mut mblocks: Vec<TensorBlock> =
        coupled.iter().map(|&(a, b)| TensorBlock::new(&vel[a], &vel[b])).collect();
    let mut dblocks = [TensorBlock::new(pre, &vel[0]), TensorBlock::new(pre, &vel[1])];
    let mut pmass = TensorBlock::new(pre, pre);
    let mut load = [vec![0.0; vel[0].dim()], vec![0.0; vel[1].dim()]];

    let rules: Vec<IntervalRule> = (0..n)
        .map(|e| IntervalRule::new(&reference, e as f64 / n as f64, (e + 1) as f64 / n as f64))
        .collect();

    // per quadrature point, per component: (value, physical-or-parameter data)
    let nloc: [usize; 2] = [
        (vel[0].x.degree() + 1) * (vel[0].y.degree() + 1),
        (vel[1].x.degree() + 1) * (vel[1].y.degree() + 1),
    ];
    let nloc_p = (pre.x.degree() + 1) * (pre.y.degree() + 1);
    let mut phi: [Vec<f64>; 2] = [vec![0.0; nloc[0]], vec![0.0; nloc[1]]];
    // gradient (direct: physical gradient of the scalar; piola: 2x2 physical
    // gradient of the vector field, row-major)
    let mut grad: [Vec<[f64; 4]>; 2] = [vec![[0.0; 4]; nloc[0]], vec![[0.0; 4]; nloc[1]]];
    let mut vecval: [Vec<[f64; 2]>; 2] = [vec![[0.0; 2]; nloc[0]], vec![[0.0; 2]; nloc[1]]];
    let mut pdiv: [Vec<f64>; 2] = [vec![0.0; nloc[0]], vec![0.0; nloc[1]]];
    let mut psi = vec![0.0; nloc_p];

    for ey in 0..n {
        let ry = &rules[ey];
        let by: Vec<ElementBasis> = vel.iter().map(|s| element_basis(&s.y, ey, &ry.points)).collect();
        let bpy = element_basis(&pre.y, ey, &ry.points);
        for ex in 0..n {
            let rx = &rules[ex];
            let bx: Vec<ElementBasis> = vel.iter().map(|s| element_basis(&s.x, ex, &rx.points)).collect();
            let bpx = element_basis(&pre.x, ex, &rx.points);

            let mut kloc: Vec<Vec<f64>> = coupled.iter().map(|&(a, b)| vec![0.0; nloc[a] * nloc[b]]).collect();
            let mut mloc: Vec<Vec<f64>> = coupled.iter().map(|&(a, b)| vec![0.0; nloc[a] * nloc[b]]).collect();
            let mut dloc = [vec![0.0; nloc_p * nloc[0]], vec![0.0; nloc_p * nloc[1]]];
            let mut ploc = vec![0.0; nloc_p * nloc_p];
            let mut floc = [vec![0.0; nloc[0]], vec![0.0; nloc[1]]];

            for (qy, &wy) in ry.weights.iter().enumerate() {
                for (qx, &wx) in rx.weights.iter().enumerate() {
                    let (u, v) = (rx.points[qx], ry.points[qy]);
                    let (g, h) = if piola {
                        map.eval_second(u, v)?
                    } else {
                        (map.eval(u, v)?, [[[0.0; 2]; 2]; 2])
                    };
                    let ji = g.inverse_jacobian();
                    let w = wx * wy;
                    let f = exact.force(g.point[0], g.point[1]);

                    for c in 0..2 {
                        let (vx, vy) = (&bx[c].vals[qx], &by[c].vals[qy]);
                        let npx = vx[0].len();
                        let (a, da) = if piola { piola_column(&g, &h, c) } else { ([0.0; 2], [[0.0; 2]; 2]) };
                        for s in 0..vy[0].len() {
                            for r in 0..npx {
                                let k = r + npx * s;
                                let val = vx[0][r] * vy[0][s];
                                let gp = [vx[1][r] * vy[0][s], vx[0][r] * vy[1][s]];
                                phi[c][k] = val;
                                pdiv[c][k] = gp[c];
                                if piola {
                                    let mut gv = [[0.0; 2]; 2];
                                    for i in 0..2 {
                                        for kk in 0..2 {
                                            gv[i][kk] = da[i][kk] * val + a[i] * gp[kk];
                                        }
                                    }
                                    let mut out = [0.0; 4];
                                    for i in 0..2 {
                                        for m in 0..2 {
                                            out[2 * i + m] = gv[i][0] * ji[0][m] + gv[i][1] * ji[1][m];
                                        }
                                    }
                                    grad[c][k] = out;
                                    vecval[c][k] = [a[0] * val, a[1] * val];
                                } else {
                                    // J^{-T} ∇̂φ
                                    grad[c][k] = [
                                        ji[0][0] * gp[0] + ji[1][0] * gp[1],
                                        ji[0][1] * gp[0] + ji[1][1] * gp[1],
                                        0.0,
                                        0.0,
                                    ];
                                }
                            }
                        }
                    }
                    {
                        let (px, py) = (&bpx.vals[qx], &bpy.vals[qy]);
                        let npx = px[0].len();
                        for s in 0..py[0].len() {
                            for r in 0..npx {
                                psi[r + npx * s] = px[0][r] * py[0][s];
                            }
                        }
                    }

                    let wd = w * g.det;
                    for (b, &(c1, c2)) in coupled.iter().enumerate() {
                        let kl = &mut kloc[b];
                        let ml = &mut mloc[b];
                        let n2 = nloc[c2];
                        for a1 in 0..nloc[c1] {
                            let g1 = grad[c1][a1];
                            let row = a1 * n2;
                            if piola {
                                let v1 = vecval[c1][a1];
                                for a2 in 0..n2 {
                                    let g2 = &grad[c2][a2];
                                    kl[row + a2] +=
                                        wd * (g1[0] * g2[0] + g1[1] * g2[1] + g1[2] * g2[2] + g1[3] * g2[3]);
                                    let v2 = vecval[c2][a2];
                                    ml[row + a2] += wd * (v1[0] * v2[0] + v1[1] * v2[1]);
                                }
                            } else {
                                let p1 = phi[c1][a1];
                                for a2 in 0..n2 {
                                    let g2 = &grad[c2][a2];
                                    kl[row + a2] += wd * (g1[0] * g2[0] + g1[1] * g2[1]);
                                    ml[row + a2] += wd * p1 * phi[c2][a2];
                                }
                            }
                        }
                    }
                    for c in 0..2 {
                        let nc = nloc[c];
                        for (qi, &q) in psi.iter().enumerate() {
                            let row = qi * nc;
                            for a1 in 0..nc {
                                // -(q, div v)
                                let div = if piola { w * pdiv[c][a1] } else { wd * grad[c][a1][c] };
                                dloc[c][row + a1] -= q * div;
                            }
                        }
                        for a1 in 0..nc {
                            floc[c][a1] += if piola {
                                w * (f[0] * g.jacobian[0][c] + f[1] * g.jacobian[1][c]) * phi[c][a1]
                            } else {
                                wd * f[c] * phi[c][a1]
                            };
                        }
                    }
                    for (q1, &a) in psi.iter().enumerate() {
                        for (q2, &b) in psi.iter().enumerate() {
                            ploc[q1 * nloc_p + q2] += wd * a * b;
                        }
                    }
                }
            }

            // scatter
            let local_index = |c: usize, k: usize| -> (usize, usize) {
                let npx = vel[c].x.degree() + 1;
                (bx[c].first + k % npx, by[c].first + k / npx)
            };
            let plocal = |k: usize| -> (usize, usize) {
                let npx = pre.x.degree() + 1;
                (bpx.first + k % npx, bpy.first + k / npx)
            };
            for (b, &(c1, c2)) in coupled.iter().enumerate() {
                let n2 = nloc[c2];
                for a1 in 0..nloc[c1] {
                    let ri = local_index(c1, a1);
                    for a2 in 0..n2 {
                        let ci = local_index(c2, a2);
                        kblocks[b].add(ri, ci, kloc[b][a1 * n2 + a2]);
                        mblocks[b].add(ri, ci, mloc[b][a1 * n2 + a2]);
                    }
                }
            }
            for c in 0..2 {
                for q in 0..nloc_p {
                    let ri = plocal(q);
                    for a1 in 0..nloc[c] {
                        dblocks[c].add(ri, local_index(c, a1), dloc[c][q * nloc[c] + a1]);
                    }
                }
                for a1 in 0..nloc[c] {
                    let (i, j) = local_index(c, a1);
                    load[c][vel[c].index(i, j)] += floc[c][a1];
                }
            }
            for q1 in 0..nloc_p {
                for q2 in 0..nloc_p {
                    pmass.add(plocal(q1), plocal(q2), ploc[q1 * nloc_p + q2]);
                }
            }
        }
    }

    let dims = [vel[0].dim(), vel[1].dim()];
    let combine = |blocks: Vec<TensorBlock>| -> Result<CsrMatrix> {
        let mats: Vec<CsrMatrix> = blocks.into_iter().map(|b| b.csr).collect();
        let grid: Vec<Vec<Option<&CsrMatrix>>> = if piola {
            vec![vec![Some(&mats[0]), Some(&mats[1])], vec![Some(&mats[2]), Some(&mats[3])]]
        } else {
            vec![vec![Some(&mats[0]), None], vec![None, Some(&mats[1])]]
        };
        CsrMatrix::block(&grid, &dims, &dims)
    };
    let stiffness = combine(kblocks)?;
    let velocity_mass = combine(mblocks)?;
    let [d0, d1] = dblocks;
    let divergence = CsrMatrix::block(&[vec![Some(&d0.csr), Some(&d1.csr)]], &[pre.dim()], &dims)?;

    let layout = VelocityLayout::new(spaces);
    let dirichlet_lifting = dirichlet_lifting(spaces, map, exact, imposition)?;
    let mut rhs_velocity = load[0].clone();
    rhs_velocity.extend_from_slice(&load[1]);

    Ok(SaddleSystem {
        family: spaces.family,
        transform: spaces.transform,
        stiffness,
        divergence,
        pressure_mass: pmass.csr,
        velocity_mass,
        rhs_velocity,
        rhs_pressure: vec![0.0; pre.dim()],
        dirichlet_lifting,
        layout,
        reduced: false,
    })
}

/// Parameter-domain velocity field whose pull-back is `exact.velocity`.
fn pulled_back_velocity(
    transform: Transform,
    map: &GeometryMap,
    exact: &dyn ExactSolution,
    u: f64,
    v: f64,
) -> Result<[f64; 2]> {
    let g = map.eval(u, v)?;
    let val = exact.velocity(g.point[0], g.point[1]);
    Ok(match transform {
        Transform::Direct => val,
        Transform::Piola => {
            // v̂ = det J · J⁻¹ v
            let ji = g.inverse_jacobian();
            [
                g.det * (ji[0][0] * val[0] + ji[0][1] * val[1]),
                g.det * (ji[1][0] * val[0] + ji[1][1] * val[1]),
            ]
        }
    })
}

/// How inhomogeneous Dirichlet data enter the boundary coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryImposition {
    /// Edge-wise L² projection onto the trace space, with the corner
    /// coefficients interpolating the data.
    #[default]
    L2Projection,
    /// Interpolation at the Greville points of each edge.
    GrevilleInterpolation,
}

/// Edge-wise L² projection of `f` onto `space` with interpolated end values.
fn project_edge(space: &SplineSpace1D, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let n = space.dim();
    let reference = gauss_legendre(space.degree() + 4);
    let mut load = vec![0.0; n];
    for e in 0..space.num_elements() {
        let (a, b) = space.element_bounds(e);
        let rule = IntervalRule::new(&reference, a, b);
        let first = space.first_active(e);
        for (&x, &w) in rule.points.iter().zip(&rule.weights) {
            let fx = f(x);
            for (k, v) in space.basis_ders_in_element(e, x, 0)[0].iter().enumerate() {
                load[first + k] += w * v * fx;
            }
        }
    }
    let mut coefs = vec![0.0; n];
    coefs[0] = f(0.0);
    coefs[n - 1] = f(1.0);
    if n > 2 {
        let mass = mass_1d(space);
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|i| load[i] - mass.get(i, 0) * coefs[0] - mass.get(i, n - 1) * coefs[n - 1])
            .collect();
        let inner = mass.submatrix(1..n - 1, 1..n - 1).cholesky()?;
        inner.solve_blocks(&mut rhs, 1);
        coefs[1..n - 1].copy_from_slice(&rhs);
    }
    Ok(coefs)
}

/// Boundary coefficients approximating the exact velocity on each edge;
/// interior coefficients are zero.
pub fn dirichlet_lifting(
    spaces: &StokesSpaces,
    map: &GeometryMap,
    exact: &dyn ExactSolution,
    imposition: BoundaryImposition,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (c, space) in spaces.velocity.iter().enumerate() {
        let (nx, ny) = space.dims();
        let mut coefs = vec![0.0; space.dim()];
        let field = |u: f64, v: f64| -> f64 {
            pulled_back_velocity(spaces.transform, map, exact, u, v).map(|w| w[c]).unwrap_or(f64::NAN)
        };
        let edge = |s: &SplineSpace1D, f: &dyn Fn(f64) -> f64| -> Result<Vec<f64>> {
            match imposition {
                BoundaryImposition::L2Projection => project_edge(s, f),
                BoundaryImposition::GrevilleInterpolation => s.interpolate(f),
            }
        };
        for (v, j) in [(0.0, 0), (1.0, ny - 1)] {
            for (i, val) in edge(&space.x, &|u| field(u, v))?.into_iter().enumerate() {
                coefs[space.index(i, j)] = val;
            }
        }
        for (u, i) in [(0.0, 0), (1.0, nx - 1)] {
            for (j, val) in edge(&space.y, &|v| field(u, v))?.into_iter().enumerate() {
                coefs[space.index(i, j)] = val;
            }
        }
        if coefs.iter().any(|x| x.is_nan()) {
            return Err(Error::Assembly("boundary data could not be evaluated".into()));
        }
        out.extend(coefs);
    }
    Ok(out)
}

/// Removes the boundary velocity coefficients, moving their contribution
/// to the right-hand side.
pub fn eliminate_dirichlet(system: &SaddleSystem) -> Result<SaddleSystem> {
    if system.reduced {
        return Ok(system.clone());
    }
    let layout = &system.layout;
    let free = &layout.free;
    let lift = &system.dirichlet_lifting;
    let k_lift = system.stiffness.matvec(lift)?;
    let d_lift = system.divergence.matvec(lift)?;
    let all_p: Vec<usize> = (0..system.num_pressure()).collect();
    let rhs_velocity = free.iter().map(|&i| system.rhs_velocity[i] - k_lift[i]).collect();
    let rhs_pressure = system.rhs_pressure.iter().zip(&d_lift).map(|(g, d)| g - d).collect();
    Ok(SaddleSystem {
        family: system.family,
        transform: system.transform,
        stiffness: system.stiffness.submatrix(free, free),
        divergence: system.divergence.submatrix(&all_p, free),
        pressure_mass: system.pressure_mass.clone(),
        velocity_mass: system.velocity_mass.submatrix(free, free),
        rhs_velocity,
        rhs_pressure,
        dirichlet_lifting: lift.clone(),
        layout: layout.clone(),
        reduced: true,
    })
}
