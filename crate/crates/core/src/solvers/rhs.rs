//! Nonlinear right-hand sides; viscosity is left to the integrating factor.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::spectral::{Field, Grid, Rank};

fn expect_rank(f: &Field, rank: Rank, what: &str) -> Result<()> {
    if f.rank() != rank {
        return Err(Error::Rank(format!("{what} expects a {rank:?} field, got {:?}", f.rank())));
    }
    Ok(())
}

fn filtered(grid: &Grid, f: &Field, m: Option<&Mollifier>) -> Result<Field> {
    match m {
        Some(m) => m.apply(grid, f),
        None => Ok(f.clone()),
    }
}

/// Gradient spectra of every component, in the tensor layout `c * dim + j`.
fn gradient_specs<'a>(grid: &'a Grid, f: &'a Field) -> impl Iterator<Item = Vec<Complex64>> + 'a {
    let d = grid.dim();
    f.comps().iter().flat_map(move |c| (0..d).map(move |j| grid.deriv(c, j)))
}

fn physical(grid: &Grid, specs: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
    grid.inverse_many(&refs)
}

/// `−(a·∇) f_c` pointwise for every component `c`.
fn advect(a: &[Vec<f64>], grad: &[Vec<f64>], ncomp: usize) -> Vec<Vec<f64>> {
    let d = a.len();
    let len = a[0].len();
    (0..ncomp)
        .map(|c| {
            (0..len)
                .map(|p| -(0..d).map(|j| a[j][p] * grad[c * d + j][p]).sum::<f64>())
                .collect()
        })
        .collect()
}

/// `P(−u·∇u)`, dealiased.
pub fn nse_rhs(grid: &Grid, u: &Field) -> Result<Field> {
    mollified_rhs(grid, u, None)
}

/// `P(−[u]·∇u)` with `[u]` the filtered velocity; `None` means no filter.
pub fn mollified_rhs(grid: &Grid, u: &Field, m: Option<&Mollifier>) -> Result<Field> {
    u.check(grid)?;
    expect_rank(u, Rank::Vector, "velocity right-hand side")?;
    let d = grid.dim();
    let a = filtered(grid, u, m)?;
    let mut specs: Vec<Vec<Complex64>> = a.comps().to_vec();
    specs.extend(gradient_specs(grid, u));
    let phys = physical(grid, &specs);
    let prod = advect(&phys[..d], &phys[d..], d);
    let n = grid.project_products(Rank::Vector, &prod);
    grid.leray_project(&n)
}

/// Vortex-method right-hand side `−[u]·∇ω + ω·∇[u]` with `u` from Biot–Savart.
///
/// In 2-d `ω` is a scalar and the stretching term is absent.
pub fn vortex_rhs(grid: &Grid, omega: &Field, m: Option<&Mollifier>) -> Result<Field> {
    omega.check(grid)?;
    let d = grid.dim();
    let u = grid.biot_savart(omega)?;
    let a = filtered(grid, &u, m)?;
    let mut specs: Vec<Vec<Complex64>> = a.comps().to_vec();
    specs.extend(gradient_specs(grid, omega));
    if d == 2 {
        let phys = physical(grid, &specs);
        let prod = advect(&phys[..2], &phys[2..], 1);
        return Ok(grid.project_products(Rank::Scalar, &prod));
    }
    specs.extend(gradient_specs(grid, &a));
    specs.extend(omega.comps().iter().cloned());
    let phys = physical(grid, &specs);
    let (av, rest) = phys.split_at(3);
    let (gw, rest) = rest.split_at(9);
    let (ga, w) = rest.split_at(9);
    let mut prod = advect(av, gw, 3);
    for (i, out) in prod.iter_mut().enumerate() {
        for (p, o) in out.iter_mut().enumerate() {
            *o += (0..3).map(|j| w[j][p] * ga[i * 3 + j][p]).sum::<f64>();
        }
    }
    Ok(grid.project_products(Rank::Vector, &prod))
}

/// Advecting velocity of the cotangent system: `[P w]` with the mean removed.
pub fn cotangent_velocity(grid: &Grid, w: &Field, m: Option<&Mollifier>) -> Result<Field> {
    let mut u = grid.leray_project(w)?;
    u.remove_mean();
    filtered(grid, &u, m)
}

/// Cotangent right-hand side `−[u]·∇w − (∇[u])ᵀw` with `[u] = [P w]`.
pub fn cotangent_rhs(grid: &Grid, w: &Field, m: Option<&Mollifier>) -> Result<Field> {
    w.check(grid)?;
    expect_rank(w, Rank::Vector, "cotangent right-hand side")?;
    let d = grid.dim();
    let a = cotangent_velocity(grid, w, m)?;
    let mut specs: Vec<Vec<Complex64>> = a.comps().to_vec();
    specs.extend(gradient_specs(grid, w));
    specs.extend(gradient_specs(grid, &a));
    specs.extend(w.comps().iter().cloned());
    let phys = physical(grid, &specs);
    let (av, rest) = phys.split_at(d);
    let (gw, rest) = rest.split_at(d * d);
    let (ga, wv) = rest.split_at(d * d);
    let mut prod = advect(av, gw, d);
    for (i, out) in prod.iter_mut().enumerate() {
        for (p, o) in out.iter_mut().enumerate() {
            *o -= (0..d).map(|j| ga[j * d + i][p] * wv[j][p]).sum::<f64>();
        }
    }
    Ok(grid.project_products(Rank::Vector, &prod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::MollifierKind;
    use crate::spectral::test_support::random_vector_field;

    fn solenoidal(g: &Grid, seed: u64) -> Field {
        g.leray_project(&random_vector_field(g, seed)).unwrap()
    }

    fn inner(g: &Grid, a: &Field, b: &Field) -> f64 {
        let s: f64 = a
            .comps()
            .iter()
            .zip(b.comps())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p.conj() * q).re))
            .sum();
        g.volume() * s
    }

    #[test]
    fn zero_state_gives_zero() {
        let g = Grid::new(3, 8).unwrap();
        let m = Mollifier::new(MollifierKind::Poisson, 0.3).unwrap();
        let z = Field::zeros(&g, Rank::Vector);
        assert_eq!(nse_rhs(&g, &z).unwrap().max_abs(), 0.0);
        assert_eq!(mollified_rhs(&g, &z, Some(&m)).unwrap().max_abs(), 0.0);
        assert_eq!(vortex_rhs(&g, &z, Some(&m)).unwrap().max_abs(), 0.0);
        assert_eq!(cotangent_rhs(&g, &z, Some(&m)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        let g = Grid::new(2, 32).unwrap();
        let u = g.field_from_fn(Rank::Vector, |x| vec![x[0].cos() * x[1].sin(), -x[0].sin() * x[1].cos()]);
        assert!(nse_rhs(&g, &u).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn nonlinear_terms_conserve_energy() {
        let m = Mollifier::new(MollifierKind::Gaussian, 0.4).unwrap();
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            let u = solenoidal(&g, 4);
            let scale = u.l2_sq(&g);
            let r = nse_rhs(&g, &u).unwrap();
            assert!(inner(&g, &u, &r).abs() < 1e-10 * scale, "{}", inner(&g, &u, &r));
            let r = mollified_rhs(&g, &u, Some(&m)).unwrap();
            assert!(inner(&g, &u, &r).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn zero_delta_matches_direct() {
        let g = Grid::new(3, 16).unwrap();
        let u = solenoidal(&g, 8);
        let m = Mollifier::new(MollifierKind::Poisson, 0.0).unwrap();
        assert_eq!(mollified_rhs(&g, &u, Some(&m)).unwrap(), nse_rhs(&g, &u).unwrap());
    }

    #[test]
    fn vortex_rhs_is_solenoidal_in_3d() {
        let g = Grid::new(3, 16).unwrap();
        let w = g.curl(&solenoidal(&g, 12)).unwrap();
        let m = Mollifier::new(MollifierKind::Poisson, 0.2).unwrap();
        let r = vortex_rhs(&g, &w, Some(&m)).unwrap();
        assert!(g.divergence(&r).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn curl_of_cotangent_rhs_is_vortex_rhs() {
        let m = Mollifier::new(MollifierKind::Poisson, 0.25).unwrap();
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            let w = random_vector_field(&g, 21);
            let lhs = g.curl(&cotangent_rhs(&g, &w, Some(&m)).unwrap()).unwrap();
            let rhs = vortex_rhs(&g, &g.curl(&w).unwrap(), Some(&m)).unwrap();
            assert!(lhs.sub(&rhs).max_abs() < 1e-10, "dim {dim}: {}", lhs.sub(&rhs).max_abs());
        }
    }
}
