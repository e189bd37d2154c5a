//! Pointwise geometry of the near-identity map `A = x + ℓ`.
//!
//! Physical tensor arrays use the layout `row * dim + col`:
//! `M_{mj} = ∂_j A^m` sits at `m * dim + j`, `Q_{ji}` at `j * dim + i`, and
//! the connection coefficient `C^m_{k;i}` at `(m * dim + k) * dim + i`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, PhysicalField, Rank};
use crate::tensor::{self, Mat3, IDENTITY};

/// Physical arrays of `∇A = I + ∇ℓ`.
pub fn grad_map(grid: &Grid, ell: &Field) -> Result<Vec<Vec<f64>>> {
    ell.check(grid)?;
    if ell.rank() != Rank::Vector {
        return Err(Error::Rank("displacement must be a vector field".into()));
    }
    let d = grid.dim();
    let mut m = grid.physical_gradient(ell);
    for a in 0..d {
        for x in &mut m[a * d + a] {
            *x += 1.0;
        }
    }
    Ok(m)
}

pub(crate) fn mat_at(m: &[Vec<f64>], d: usize, p: usize) -> Mat3 {
    let mut out = IDENTITY;
    for a in 0..d {
        for b in 0..d {
            out[a][b] = m[a * d + b][p];
        }
    }
    out
}

/// Pointwise inverse `Q = (∇A)⁻¹` and `det ∇A`.
///
/// Fails with an invertibility error when `|det| < guard` anywhere.
pub fn inverse_grad(dim: usize, m: &[Vec<f64>], guard: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let len = m[0].len();
    let per_point: Vec<(f64, Mat3)> =
        (0..len).into_par_iter().map(|p| tensor::det_inverse(&mat_at(m, dim, p), dim)).collect();
    let min_det = per_point.iter().map(|(det, _)| det.abs()).fold(f64::INFINITY, f64::min);
    if !(min_det >= guard) {
        return Err(Error::Invertibility { min_det, guard });
    }
    let mut q = vec![vec![0.0; len]; dim * dim];
    let mut det = vec![0.0; len];
    for (p, (dt, inv)) in per_point.into_iter().enumerate() {
        det[p] = dt;
        for a in 0..dim {
            for b in 0..dim {
                q[a * dim + b][p] = inv[a][b];
            }
        }
    }
    Ok((q, det))
}

/// `∇A`, its inverse and determinant, sampled on the grid.
#[derive(Clone, Debug)]
pub struct MapGeometry {
    pub dim: usize,
    pub m: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub det: Vec<f64>,
}

impl MapGeometry {
    pub fn new(grid: &Grid, ell: &Field, guard: f64) -> Result<Self> {
        let m = grad_map(grid, ell)?;
        let (q, det) = inverse_grad(grid.dim(), &m, guard)?;
        Ok(Self { dim: grid.dim(), m, q, det })
    }

    /// Pointwise Frobenius norm of `∇ℓ = ∇A − I`.
    pub fn grad_ell_norm(&self) -> Vec<f64> {
        let d = self.dim;
        (0..self.det.len())
            .map(|p| {
                let mut s = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        let x = self.m[a * d + b][p] - if a == b { 1.0 } else { 0.0 };
                        s += x * x;
                    }
                }
                s.sqrt()
            })
            .collect()
    }

    pub fn max_grad_ell(&self) -> f64 {
        self.grad_ell_norm().into_iter().fold(0.0, f64::max)
    }
}

/// `∇^A_i f_c = Q_{ji} ∂_j f_c` from physical Eulerian gradients (layout `c * dim + j`).
pub(crate) fn el_gradient_from(dim: usize, grad: &[Vec<f64>], q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ncomp = grad.len() / dim;
    let len = grad[0].len();
    let mut out = vec![vec![0.0; len]; ncomp * dim];
    for c in 0..ncomp {
        for i in 0..dim {
            let o = &mut out[c * dim + i];
            for j in 0..dim {
                let (g, qq) = (&grad[c * dim + j], &q[j * dim + i]);
                for p in 0..len {
                    o[p] += qq[p] * g[p];
                }
            }
        }
    }
    out
}

/// Eulerian–Lagrangian gradient `∇^A f`; scalar → vector, vector → tensor.
pub fn el_gradient(grid: &Grid, f: &Field, q: &[Vec<f64>]) -> Result<PhysicalField> {
    f.check(grid)?;
    let rank = match f.rank() {
        Rank::Scalar => Rank::Vector,
        Rank::Vector => Rank::Tensor,
        Rank::Tensor => return Err(Error::Rank("Eulerian-Lagrangian gradient of a tensor".into())),
    };
    let grad = grid.physical_gradient(f);
    Ok(PhysicalField::from_parts(rank, el_gradient_from(grid.dim(), &grad, q)))
}

/// Curl built from an Eulerian–Lagrangian gradient of a vector (layout `c * dim + i`).
pub(crate) fn curl_from_el_gradient(dim: usize, ga: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = ga[0].len();
    if dim == 2 {
        return vec![(0..len).map(|p| ga[2][p] - ga[1][p]).collect()];
    }
    // ζ_k = ε_{kij} ∇^A_i v_j
    let at = |c: usize, i: usize, p: usize| ga[c * 3 + i][p];
    vec![
        (0..len).map(|p| at(2, 1, p) - at(1, 2, p)).collect(),
        (0..len).map(|p| at(0, 2, p) - at(2, 0, p)).collect(),
        (0..len).map(|p| at(1, 0, p) - at(0, 1, p)).collect(),
    ]
}

/// Where a virtual vorticity came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaSource {
    DerivedFromV,
    Evolved,
}

#[derive(Clone, Debug)]
pub struct VirtualVorticity {
    pub field: PhysicalField,
    pub source: ZetaSource,
}

/// `ζ = ∇^A × v` (scalar in 2-d).
pub fn el_curl(grid: &Grid, v: &Field, q: &[Vec<f64>]) -> Result<VirtualVorticity> {
    if v.rank() != Rank::Vector {
        return Err(Error::Rank("el_curl needs a vector field".into()));
    }
    let ga = el_gradient(grid, v, q)?;
    let d = grid.dim();
    let rank = if d == 2 { Rank::Scalar } else { Rank::Vector };
    let z = curl_from_el_gradient(d, ga.comps());
    Ok(VirtualVorticity { field: PhysicalField::from_parts(rank, z), source: ZetaSource::DerivedFromV })
}

/// Connection coefficients `C^m_{k;i} = Q_{ji} ∂_j ∂_k ℓ_m` and the `Q` they were built from.
#[derive(Clone, Debug)]
pub struct Connection {
    pub dim: usize,
    pub c: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl Connection {
    pub fn at(&self, m: usize, k: usize, i: usize) -> &[f64] {
        &self.c[(m * self.dim + k) * self.dim + i]
    }

    /// Pointwise `|C|² = C^m_{k;i} C^m_{k;i}`.
    pub fn norm_sq(&self) -> Vec<f64> {
        let len = self.c[0].len();
        (0..len).map(|p| self.c.iter().map(|a| a[p] * a[p]).sum()).collect()
    }
}

/// Physical arrays of `∂_j ∂_k ℓ_m` at `(m * dim + j) * dim + k`.
pub(crate) fn second_derivatives(grid: &Grid, ell: &Field) -> Vec<Vec<f64>> {
    let d = grid.dim();
    let mut pairs = Vec::new();
    for j in 0..d {
        for k in j..d {
            pairs.push((j, k));
        }
    }
    let specs: Vec<Vec<Complex64>> =
        ell.comps().iter().flat_map(|c| pairs.iter().map(move |&(j, k)| grid.deriv2(c, j, k))).collect();
    let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
    let phys = grid.inverse_many(&refs);
    let mut out = vec![Vec::new(); d * d * d];
    for m in 0..d {
        for (s, &(j, k)) in pairs.iter().enumerate() {
            let arr = &phys[m * pairs.len() + s];
            out[(m * d + j) * d + k] = arr.clone();
            out[(m * d + k) * d + j] = arr.clone();
        }
    }
    out
}

pub(crate) fn connection_from(dim: usize, hess: &[Vec<f64>], q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = q[0].len();
    let mut c = vec![vec![0.0; len]; dim * dim * dim];
    for m in 0..dim {
        for k in 0..dim {
            for i in 0..dim {
                let o = &mut c[(m * dim + k) * dim + i];
                for j in 0..dim {
                    let (h, qq) = (&hess[(m * dim + j) * dim + k], &q[j * dim + i]);
                    for p in 0..len {
                        o[p] += qq[p] * h[p];
                    }
                }
            }
        }
    }
    c
}

pub fn connection_coeffs(grid: &Grid, ell: &Field, q: &[Vec<f64>]) -> Result<Connection> {
    ell.check(grid)?;
    let hess = second_derivatives(grid, ell);
    Ok(Connection { dim: grid.dim(), c: connection_from(grid.dim(), &hess, q), q: q.to_vec() })
}

/// `(∇A)ᵀ v` pointwise: component `i` is `M_{mi} v_m`.
pub(crate) fn weber_product(dim: usize, m: &[Vec<f64>], v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = v[0].len();
    (0..dim)
        .map(|i| (0..len).map(|p| (0..dim).map(|a| m[a * dim + i][p] * v[a][p]).sum()).collect())
        .collect()
}

/// Weber velocity `u = P((∇A)ᵀ v)`, dealiased and zero-mean.
pub fn weber_velocity(grid: &Grid, ell: &Field, v: &Field) -> Result<Field> {
    v.check(grid)?;
    let m = grad_map(grid, ell)?;
    let vp = grid.to_physical(v)?;
    weber_from(grid, &m, vp.comps())
}

pub(crate) fn weber_from(grid: &Grid, m: &[Vec<f64>], v: &[Vec<f64>]) -> Result<Field> {
    let w = weber_product(grid.dim(), m, v);
    let mut u = grid.leray_project(&grid.project_products(Rank::Vector, &w))?;
    u.remove_mean();
    Ok(u)
}

/// Cauchy vorticity `𝓒(ζ, ∇A)` pointwise; `det(∇A) ζ` in 2-d.
pub fn cauchy_vorticity(dim: usize, zeta: &[Vec<f64>], m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = zeta[0].len();
    if dim == 2 {
        return vec![(0..len)
            .map(|p| {
                let mm = [[m[0][p], m[1][p]], [m[2][p], m[3][p]]];
                tensor::cauchy_action_2d(zeta[0][p], &mm)
            })
            .collect()];
    }
    let pts: Vec<[f64; 3]> = (0..len)
        .into_par_iter()
        .map(|p| tensor::cauchy_action([zeta[0][p], zeta[1][p], zeta[2][p]], &mat_at(m, 3, p)))
        .collect();
    (0..3).map(|k| pts.iter().map(|x| x[k]).collect()).collect()
}
