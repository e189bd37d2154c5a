//! Right-hand sides of the Eulerian–Lagrangian system (diffusion excluded).

use num_complex::Complex64;

use super::kinematics::{self, Connection, MapGeometry};
use crate::error::Result;
use crate::spectral::{Field, Grid, Rank};
use crate::tensor::levi_civita;

fn physical(grid: &Grid, specs: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
    grid.inverse_many(&refs)
}

fn gradient_specs(grid: &Grid, f: &Field) -> Vec<Vec<Complex64>> {
    let d = grid.dim();
    f.comps().iter().flat_map(|c| (0..d).map(move |j| grid.deriv(c, j))).collect()
}

/// `−u·∇f_c` for every component, from physical `u` and gradients (`c * dim + j`).
pub(crate) fn advection(u: &[Vec<f64>], grad: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = u.len();
    let ncomp = grad.len() / d;
    let len = u[0].len();
    (0..ncomp)
        .map(|c| (0..len).map(|p| -(0..d).map(|j| u[j][p] * grad[c * d + j][p]).sum::<f64>()).collect())
        .collect()
}

/// Pointwise `−u·∇ℓ − u`.
pub(crate) fn displacement_terms(u: &[Vec<f64>], grad_ell: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = advection(u, grad_ell);
    for (o, uc) in out.iter_mut().zip(u) {
        for (x, y) in o.iter_mut().zip(uc) {
            *x -= y;
        }
    }
    out
}

/// `−u·∇ℓ − u`, dealiased.
pub fn displacement_rhs(grid: &Grid, ell: &Field, u: &Field) -> Result<Field> {
    ell.check(grid)?;
    u.check(grid)?;
    let d = grid.dim();
    let mut specs = u.comps().to_vec();
    specs.extend(gradient_specs(grid, ell));
    let phys = physical(grid, &specs);
    Ok(grid.project_products(Rank::Vector, &displacement_terms(&phys[..d], &phys[d..])))
}

/// Pointwise `−u·∇v_i + 2ν C^m_{k;i} ∂_k v_m`.
pub(crate) fn virtual_velocity_terms(u: &[Vec<f64>], grad_v: &[Vec<f64>], c: &[Vec<f64>], nu: f64) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut out = advection(u, grad_v);
    if nu == 0.0 {
        return out;
    }
    for (i, o) in out.iter_mut().enumerate() {
        for m in 0..d {
            for k in 0..d {
                let (cc, gv) = (&c[(m * d + k) * d + i], &grad_v[m * d + k]);
                for p in 0..o.len() {
                    o[p] += 2.0 * nu * cc[p] * gv[p];
                }
            }
        }
    }
    out
}

/// `−u·∇v + 2ν C∇v`, dealiased.
pub fn virtual_velocity_rhs(grid: &Grid, v: &Field, u: &Field, c: &Connection, nu: f64) -> Result<Field> {
    v.check(grid)?;
    u.check(grid)?;
    let d = grid.dim();
    let mut specs = u.comps().to_vec();
    specs.extend(gradient_specs(grid, v));
    let phys = physical(grid, &specs);
    let terms = virtual_velocity_terms(&phys[..d], &phys[d..], &c.c, nu);
    Ok(grid.project_products(Rank::Vector, &terms))
}

/// Pointwise source `ν C^i_{k;s} C^s_{k;i}` of the log-determinant.
pub fn logdet_rhs(c: &Connection, nu: f64) -> Vec<f64> {
    let d = c.dim;
    let len = c.c[0].len();
    let mut out = vec![0.0; len];
    if nu == 0.0 {
        return out;
    }
    for i in 0..d {
        for k in 0..d {
            for s in 0..d {
                let (a, b) = (c.at(i, k, s), c.at(s, k, i));
                for p in 0..len {
                    out[p] += nu * a[p] * b[p];
                }
            }
        }
    }
    out
}

/// Pointwise right-hand side of the evolved virtual vorticity (3-d):
/// `−u·∇ζ_q + 2νC^m_{k;m}∂_kζ_q − 2νC^q_{k;j}∂_kζ_j + νC^m_{k;i}C^r_{k;j}ε_{qji}ε_{rmp}ζ_p`.
pub(crate) fn virtual_vorticity_terms(
    u: &[Vec<f64>],
    zeta: &[Vec<f64>],
    grad_zeta: &[Vec<f64>],
    c: &[Vec<f64>],
    nu: f64,
) -> Vec<Vec<f64>> {
    let d = 3;
    let mut out = advection(u, grad_zeta);
    if nu == 0.0 {
        return out;
    }
    let len = u[0].len();
    let ca = |m: usize, k: usize, i: usize, p: usize| c[(m * d + k) * d + i][p];
    let mut eps = Vec::new();
    for q in 0..3 {
        for j in 0..3 {
            for i in 0..3 {
                let e1 = levi_civita(q, j, i);
                if e1 == 0.0 {
                    continue;
                }
                for r in 0..3 {
                    for m in 0..3 {
                        for pp in 0..3 {
                            let e2 = levi_civita(r, m, pp);
                            if e2 != 0.0 {
                                eps.push((q, j, i, r, m, pp, e1 * e2));
                            }
                        }
                    }
                }
            }
        }
    }
    for p in 0..len {
        let trace: [f64; 3] = std::array::from_fn(|k| (0..3).map(|m| ca(m, k, m, p)).sum());
        for q in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += 2.0 * trace[k] * grad_zeta[q * d + k][p];
                for j in 0..3 {
                    s -= 2.0 * ca(q, k, j, p) * grad_zeta[j * d + k][p];
                }
            }
            out[q][p] += nu * s;
        }
        for &(q, j, i, r, m, pp, e) in &eps {
            let cc: f64 = (0..3).map(|k| ca(m, k, i, p) * ca(r, k, j, p)).sum();
            out[q][p] += nu * e * cc * zeta[pp][p];
        }
    }
    out
}

/// Evolved virtual vorticity right-hand side, dealiased (3-d only).
pub fn virtual_vorticity_rhs(grid: &Grid, zeta: &Field, u: &Field, c: &Connection, nu: f64) -> Result<Field> {
    zeta.check(grid)?;
    u.check(grid)?;
    if grid.dim() != 3 {
        return Err(crate::Error::config("evolved virtual vorticity is three-dimensional only"));
    }
    let mut specs = u.comps().to_vec();
    specs.extend(zeta.comps().iter().cloned());
    specs.extend(gradient_specs(grid, zeta));
    let phys = physical(grid, &specs);
    let terms = virtual_vorticity_terms(&phys[..3], &phys[3..6], &phys[6..], &c.c, nu);
    Ok(grid.project_products(Rank::Vector, &terms))
}

/// Everything a stage computes from `(ℓ, v)`.
pub(crate) struct Stage {
    pub geo: MapGeometry,
    pub u_phys: Vec<Vec<f64>>,
    pub conn: Connection,
}

impl Stage {
    pub fn new(grid: &Grid, ell: &Field, v: &Field, guard: f64) -> Result<Self> {
        let geo = MapGeometry::new(grid, ell, guard)?;
        let v_phys = grid.to_physical(v)?;
        let u = kinematics::weber_from(grid, &geo.m, v_phys.comps())?;
        let u_phys = grid.to_physical(&u)?.into_comps();
        let hess = kinematics::second_derivatives(grid, ell);
        let c = kinematics::connection_from(grid.dim(), &hess, &geo.q);
        let conn = Connection { dim: grid.dim(), c, q: geo.q.clone() };
        Ok(Self { geo, u_phys, conn })
    }

    /// Displacement gradient `∂_j ℓ_m` (layout `m * dim + j`).
    pub fn grad_ell(&self) -> Vec<Vec<f64>> {
        let d = self.geo.dim;
        let mut g = self.geo.m.clone();
        for a in 0..d {
            for x in &mut g[a * d + a] {
                *x -= 1.0;
            }
        }
        g
    }
}

/// Combined right-hand side for the stacked state `[ℓ | v | log det | ζ?]`.
pub(crate) fn stacked_rhs(grid: &Grid, y: &[Vec<Complex64>], nu: f64, guard: f64, with_zeta: bool) -> Result<Vec<Vec<Complex64>>> {
    let d = grid.dim();
    let ell = Field::from_parts(Rank::Vector, y[..d].to_vec());
    let v = Field::from_parts(Rank::Vector, y[d..2 * d].to_vec());
    let phi = Field::from_parts(Rank::Scalar, vec![y[2 * d].clone()]);
    let stage = Stage::new(grid, &ell, &v, guard)?;

    let mut specs = gradient_specs(grid, &v);
    specs.extend(gradient_specs(grid, &phi));
    let zeta = with_zeta.then(|| Field::from_parts(Rank::Vector, y[2 * d + 1..2 * d + 4].to_vec()));
    if let Some(z) = &zeta {
        specs.extend(z.comps().iter().cloned());
        specs.extend(gradient_specs(grid, z));
    }
    let phys = physical(grid, &specs);
    let (grad_v, rest) = phys.split_at(d * d);
    let (grad_phi, rest) = rest.split_at(d);
    let u = &stage.u_phys;

    let mut arrays = displacement_terms(u, &stage.grad_ell());
    arrays.extend(virtual_velocity_terms(u, grad_v, &stage.conn.c, nu));
    let mut phi_terms = advection(u, grad_phi).pop().unwrap_or_default();
    for (x, s) in phi_terms.iter_mut().zip(logdet_rhs(&stage.conn, nu)) {
        *x += s;
    }
    arrays.push(phi_terms);
    if zeta.is_some() {
        let (zp, gz) = rest.split_at(3);
        arrays.extend(virtual_vorticity_terms(u, zp, gz, &stage.conn.c, nu));
    }
    let refs: Vec<&[f64]> = arrays.iter().map(Vec::as_slice).collect();
    let mut out = grid.forward_many(&refs);
    let mask = grid.mask();
    for c in &mut out {
        for (z, &keep) in c.iter_mut().zip(mask) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}
