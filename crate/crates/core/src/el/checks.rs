//! Consistency measurements between the Eulerian–Lagrangian state and the
//! Eulerian quantities it represents.

use num_complex::Complex64;

use super::kinematics::{self, curl_from_el_gradient, el_gradient_from, MapGeometry};
use super::rhs::virtual_vorticity_terms;
use super::ElState;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, Rank};

fn rel_l2(diff_sq: f64, ref_sq: f64) -> f64 {
    if ref_sq > 0.0 {
        (diff_sq / ref_sq).sqrt()
    } else if diff_sq > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn sum_sq(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum()
}

fn diff_sq(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q))).sum()
}

/// Per-output monitored quantities of an Eulerian–Lagrangian state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElMeasures {
    pub max_grad_ell: f64,
    pub min_det: f64,
    /// `sup_x |evolved log det − P log det(I + ∇ℓ)|`, `P` the projection onto retained modes.
    pub logdet_err: f64,
    /// `‖curl u − 𝓒(ζ, ∇A)‖₂ / ‖curl u‖₂` on the resolved modes.
    pub weber_cauchy_err: f64,
    /// Relative L² gap between evolved and derived `ζ` (evolved mode only).
    pub zeta_gap: Option<f64>,
}

impl ElMeasures {
    pub fn measure(grid: &Grid, s: &ElState, guard: f64) -> Result<Self> {
        let d = grid.dim();
        let geo = MapGeometry::new(grid, &s.ell, guard)?;
        let v_phys = grid.to_physical(&s.v)?;
        let u = kinematics::weber_from(grid, &geo.m, v_phys.comps())?;
        let omega = grid.curl(&u)?;

        let grad_v = grid.physical_gradient(&s.v);
        let zeta = curl_from_el_gradient(d, &el_gradient_from(d, &grad_v, &geo.q));
        let cv = kinematics::cauchy_vorticity(d, &zeta, &geo.m);
        let rank = if d == 2 { Rank::Scalar } else { Rank::Vector };
        let cv_spec = grid.project_products(rank, &cv);
        let weber_cauchy_err = rel_l2(omega.sub(&cv_spec).spectral_sum_sq(), omega.spectral_sum_sq());

        // the evolved log det lives on the retained modes, so compare with the projection
        let log: Vec<f64> = geo.det.iter().map(|det| det.ln()).collect();
        let projected = grid.to_physical(&grid.project_products(Rank::Scalar, &[log]))?;
        let phi = grid.to_physical(&s.logdet)?;
        let logdet_err =
            phi.comp(0).iter().zip(projected.comp(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let zeta_gap = match &s.zeta {
            Some(z) => {
                let zp = grid.to_physical(z)?;
                Some(rel_l2(diff_sq(zp.comps(), &zeta), sum_sq(&zeta)))
            }
            None => None,
        };
        Ok(Self {
            max_grad_ell: geo.max_grad_ell(),
            min_det: geo.det.iter().copied().fold(f64::INFINITY, f64::min),
            logdet_err,
            weber_cauchy_err,
            zeta_gap,
        })
    }
}

/// Relative error of `(ω·∇)f = det(∇A) (ζ·∇^A) f`, with `ω = curl u` from the
/// Weber velocity and `ζ = ∇^A × v`.
pub fn derivs_identity_error(grid: &Grid, s: &ElState, f: &Field, guard: f64) -> Result<f64> {
    if grid.dim() != 3 || f.rank() != Rank::Scalar {
        return Err(Error::Rank("derivative identity is checked for scalar f in 3-d".into()));
    }
    let geo = MapGeometry::new(grid, &s.ell, guard)?;
    let u = s.velocity(grid)?;
    let omega = grid.to_physical(&grid.curl(&u)?)?;
    let grad_v = grid.physical_gradient(&s.v);
    let zeta = curl_from_el_gradient(3, &el_gradient_from(3, &grad_v, &geo.q));
    let grad_f = grid.physical_gradient(f);
    let el_grad_f = el_gradient_from(3, &grad_f, &geo.q);
    let len = grid.len();
    let lhs: Vec<f64> = (0..len).map(|p| (0..3).map(|j| omega.comp(j)[p] * grad_f[j][p]).sum()).collect();
    let rhs: Vec<f64> =
        (0..len).map(|p| geo.det[p] * (0..3).map(|c| zeta[c][p] * el_grad_f[c][p]).sum::<f64>()).collect();
    Ok(rel_l2(diff_sq(std::slice::from_ref(&lhs), &[rhs]), sum_sq(&[lhs])))
}

/// Largest pointwise defect of `[∇^A_i, ∂_k] f = C^m_{k;i} ∇^A_m f`, relative
/// to the largest value of the right side.
pub fn commutator_error(grid: &Grid, ell: &Field, f: &Field, guard: f64) -> Result<f64> {
    if f.rank() != Rank::Scalar {
        return Err(Error::Rank("commutator is checked on a scalar field".into()));
    }
    let d = grid.dim();
    let geo = MapGeometry::new(grid, ell, guard)?;
    let conn = kinematics::connection_coeffs(grid, ell, &geo.q)?;
    let grad_f = grid.physical_gradient(f);
    let el_f = el_gradient_from(d, &grad_f, &geo.q);
    // ∇^A_i (∂_k f)
    let hess: Vec<Vec<f64>> = {
        let specs: Vec<Vec<Complex64>> =
            (0..d).flat_map(|k| (0..d).map(move |j| (k, j))).map(|(k, j)| grid.deriv2(f.comp(0), k, j)).collect();
        let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
        grid.inverse_many(&refs)
    };
    // ∂_k (∇^A_i f), differentiating the full (non-dealiased) spectrum
    let el_spec = {
        let refs: Vec<&[f64]> = el_f.iter().map(Vec::as_slice).collect();
        grid.forward_many(&refs)
    };
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..d {
        let dk: Vec<Vec<Complex64>> = el_spec.iter().map(|c| grid.deriv(c, k)).collect();
        let refs: Vec<&[Complex64]> = dk.iter().map(Vec::as_slice).collect();
        let d_el = grid.inverse_many(&refs);
        for i in 0..d {
            for p in 0..grid.len() {
                let a: f64 = (0..d).map(|j| geo.q[j * d + i][p] * hess[k * d + j][p]).sum();
                let lhs = a - d_el[i][p];
                let rhs: f64 = (0..d).map(|m| conn.at(m, k, i)[p] * el_f[m][p]).sum();
                worst = worst.max((lhs - rhs).abs());
                scale = scale.max(rhs.abs());
            }
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Physical connection coefficients of a state.
fn connection_of(grid: &Grid, s: &ElState, guard: f64) -> Result<(MapGeometry, Vec<Vec<f64>>)> {
    let geo = MapGeometry::new(grid, &s.ell, guard)?;
    let conn = kinematics::connection_coeffs(grid, &s.ell, &geo.q)?;
    Ok((geo, conn.c))
}

/// Relative L² residual of the coefficient evolution law
/// `Γ_ν C^m_{k;i} = −(∂_l A^m)∇^A_i(∂_k u_l) − (∂_k u_l) C^m_{l;i} + 2ν C^j_{l;i} ∂_l C^m_{k;j}`
/// at the middle state, with `∂_t C` from a centred difference of the
/// recomputed coefficients at `t ∓ h`.
pub fn curveq_residual(grid: &Grid, prev: &ElState, cur: &ElState, next: &ElState, nu: f64, guard: f64) -> Result<f64> {
    if prev.t1 != cur.t1 || cur.t1 != next.t1 {
        return Err(Error::config("coefficient residual needs three states from one restart window"));
    }
    let h = 0.5 * (next.t - prev.t);
    let d = grid.dim();
    let len = grid.len();
    let (_, c_prev) = connection_of(grid, prev, guard)?;
    let (_, c_next) = connection_of(grid, next, guard)?;
    let (geo, c) = connection_of(grid, cur, guard)?;
    let u = cur.velocity(grid)?;
    let u_phys = grid.to_physical(&u)?;
    let grad_u = grid.physical_gradient(&u);
    // ∇^A_i ∂_k u_l at ((l * d + k) * d + i)
    let hess_u = kinematics::second_derivatives(grid, &u);
    let el_hess_u: Vec<Vec<f64>> = {
        let mut out = vec![vec![0.0; len]; d * d * d];
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    let o = &mut out[(l * d + k) * d + i];
                    for j in 0..d {
                        let (hh, q) = (&hess_u[(l * d + j) * d + k], &geo.q[j * d + i]);
                        for p in 0..len {
                            o[p] += q[p] * hh[p];
                        }
                    }
                }
            }
        }
        out
    };
    // spectral gradient and Laplacian of each C component
    let c_spec = {
        let refs: Vec<&[f64]> = c.iter().map(Vec::as_slice).collect();
        grid.forward_many(&refs)
    };
    let mut specs: Vec<Vec<Complex64>> = Vec::with_capacity(c_spec.len() * (d + 1));
    for cs in &c_spec {
        for l in 0..d {
            specs.push(grid.deriv(cs, l));
        }
        let k2 = grid.k2();
        specs.push(cs.iter().zip(k2).map(|(z, &q)| -q * z).collect());
    }
    let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
    let dc = grid.inverse_many(&refs);
    let grad_c = |idx: usize, l: usize| &dc[idx * (d + 1) + l];
    let lap_c = |idx: usize| &dc[idx * (d + 1) + d];
    let cidx = |m: usize, k: usize, i: usize| (m * d + k) * d + i;

    let mut res_sq = 0.0;
    let mut ref_sq = 0.0;
    for m in 0..d {
        for k in 0..d {
            for i in 0..d {
                let idx = cidx(m, k, i);
                for p in 0..len {
                    let dt_c = (c_next[idx][p] - c_prev[idx][p]) / (2.0 * h);
                    let adv: f64 = (0..d).map(|l| u_phys.comp(l)[p] * grad_c(idx, l)[p]).sum();
                    let lhs = dt_c + adv - nu * lap_c(idx)[p];
                    let mut rhs = 0.0;
                    for l in 0..d {
                        rhs -= geo.m[m * d + l][p] * el_hess_u[(l * d + k) * d + i][p];
                        rhs -= grad_u[l * d + k][p] * c[cidx(m, l, i)][p];
                        for j in 0..d {
                            rhs += 2.0 * nu * c[cidx(j, l, i)][p] * grad_c(cidx(m, k, j), l)[p];
                        }
                    }
                    res_sq += (lhs - rhs) * (lhs - rhs);
                    ref_sq += rhs * rhs;
                }
            }
        }
    }
    Ok(rel_l2(res_sq, ref_sq))
}

/// Largest pointwise ratio `(Γ_ν|ζ|² + ν|∇ζ|²) / (17ν|C|²|ζ|²)` for the derived
/// `ζ` (3-d), using `Γ_ν|ζ|² = 2ζ·Γ_νζ − 2ν|∇ζ|²`. Report-only.
pub fn zeta_inequality_ratio(grid: &Grid, s: &ElState, nu: f64, guard: f64) -> Result<f64> {
    if grid.dim() != 3 || nu == 0.0 {
        return Ok(0.0);
    }
    let geo = MapGeometry::new(grid, &s.ell, guard)?;
    let conn = kinematics::connection_coeffs(grid, &s.ell, &geo.q)?;
    let grad_v = grid.physical_gradient(&s.v);
    let zeta = curl_from_el_gradient(3, &el_gradient_from(3, &grad_v, &geo.q));
    let zeta_spec = {
        let refs: Vec<&[f64]> = zeta.iter().map(Vec::as_slice).collect();
        Field::from_parts(Rank::Vector, grid.forward_many(&refs))
    };
    let grad_z = grid.physical_gradient(&zeta_spec);
    let zero_u = vec![vec![0.0; grid.len()]; 3];
    // source part of Γ_ν ζ (the advection is inside Γ_ν)
    let src = virtual_vorticity_terms(&zero_u, &zeta, &grad_z, &conn.c, nu);
    let c2 = conn.norm_sq();
    let mut worst: f64 = 0.0;
    for p in 0..grid.len() {
        let z2: f64 = (0..3).map(|q| zeta[q][p] * zeta[q][p]).sum();
        let denom = 17.0 * nu * c2[p] * z2;
        if denom <= 1e-300 {
            continue;
        }
        let gz2: f64 = (0..9).map(|a| grad_z[a][p] * grad_z[a][p]).sum();
        let two_z_src: f64 = 2.0 * (0..3).map(|q| zeta[q][p] * src[q][p]).sum::<f64>();
        worst = worst.max((two_z_src - nu * gz2) / denom);
    }
    Ok(worst)
}
