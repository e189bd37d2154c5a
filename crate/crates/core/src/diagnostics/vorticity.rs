use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, Rank};

/// Relative magnitude below which the vorticity direction is left undefined.
pub const DIRECTION_THRESHOLD: f64 = 1e-12;

/// Unit vorticity direction `ξ = ω/|ω|`, `None` where `|ω|` is negligible.
///
/// In two dimensions `ξ = (0, 0, sign ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionField {
    pub xi: Vec<Option<[f64; 3]>>,
}

impl DirectionField {
    pub fn defined_count(&self) -> usize {
        self.xi.iter().filter(|x| x.is_some()).count()
    }
}

fn vorticity_rank(grid: &Grid) -> Rank {
    if grid.dim() == 2 {
        Rank::Scalar
    } else {
        Rank::Vector
    }
}

fn check_vorticity(grid: &Grid, omega: &Field) -> Result<()> {
    omega.check(grid)?;
    if omega.rank() != vorticity_rank(grid) {
        return Err(Error::Rank(format!("vorticity in {} dimensions must be {:?}", grid.dim(), vorticity_rank(grid))));
    }
    Ok(())
}

/// Physical vorticity padded to three components, with its pointwise norm.
fn vorticity_points(grid: &Grid, omega: &Field) -> Result<(Vec<[f64; 3]>, Vec<f64>)> {
    check_vorticity(grid, omega)?;
    let p = grid.to_physical(omega)?;
    let pts: Vec<[f64; 3]> = (0..grid.len())
        .map(|i| match grid.dim() {
            2 => [0.0, 0.0, p.comp(0)[i]],
            _ => [p.comp(0)[i], p.comp(1)[i], p.comp(2)[i]],
        })
        .collect();
    let norm = pts.iter().map(|w| (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()).collect();
    Ok((pts, norm))
}

fn cutoff(norm: &[f64]) -> f64 {
    DIRECTION_THRESHOLD * norm.iter().copied().fold(0.0, f64::max)
}

pub fn vorticity_direction(grid: &Grid, omega: &Field) -> Result<DirectionField> {
    let (pts, norm) = vorticity_points(grid, omega)?;
    let eps = cutoff(&norm);
    let xi = pts
        .iter()
        .zip(&norm)
        .map(|(w, &n)| (n > eps && n > 0.0).then(|| [w[0] / n, w[1] / n, w[2] / n]))
        .collect();
    Ok(DirectionField { xi })
}

/// `∫ |ω| |∇ξ|² dx` over the region where `ξ` is defined.
///
/// Uses `|ω||∇ξ|² = (|∇ω|² − Σ_j (ξ·∂_jω)²) / |ω|`; zero in two dimensions.
pub fn direction_dissipation(grid: &Grid, omega: &Field) -> Result<f64> {
    check_vorticity(grid, omega)?;
    if grid.dim() == 2 {
        return Ok(0.0);
    }
    let (pts, norm) = vorticity_points(grid, omega)?;
    let eps = cutoff(&norm);
    let grad = grid.physical_gradient(omega);
    let mut total = 0.0;
    for p in 0..grid.len() {
        let n = norm[p];
        if !(n > eps && n > 0.0) {
            continue;
        }
        let xi = [pts[p][0] / n, pts[p][1] / n, pts[p][2] / n];
        let mut full = 0.0;
        let mut along = 0.0;
        for j in 0..3 {
            let mut proj = 0.0;
            for i in 0..3 {
                let g = grad[i * 3 + j][p];
                full += g * g;
                proj += xi[i] * g;
            }
            along += proj * proj;
        }
        total += (full - along).max(0.0) / n;
    }
    Ok(total * grid.cell_volume())
}

/// Logarithmic stretching rate `α = ξ·Sξ`, `S = (∇u + ∇uᵀ)/2`.
///
/// `None` where `ξ` is undefined; identically zero in two dimensions.
pub fn stretching_alpha(grid: &Grid, u: &Field, omega: &Field) -> Result<Vec<Option<f64>>> {
    u.check(grid)?;
    if u.rank() != Rank::Vector {
        return Err(Error::Rank("stretching rate needs a velocity field".into()));
    }
    let dir = vorticity_direction(grid, omega)?;
    if grid.dim() == 2 {
        return Ok(dir.xi.iter().map(|x| x.map(|_| 0.0)).collect());
    }
    let grad = grid.physical_gradient(u);
    Ok(dir
        .xi
        .iter()
        .enumerate()
        .map(|(p, x)| {
            x.map(|xi| {
                let mut a = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        a += xi[i] * grad[i * 3 + j][p] * xi[j];
                    }
                }
                a
            })
        })
        .collect())
}

/// Largest defined stretching rate (zero if none is defined).
pub fn alpha_max(alpha: &[Option<f64>]) -> f64 {
    alpha.iter().flatten().copied().fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a)))).unwrap_or(0.0)
}

/// `∫ |ω| dx` by quadrature.
pub fn vorticity_l1(grid: &Grid, omega: &Field) -> Result<f64> {
    let (_, norm) = vorticity_points(grid, omega)?;
    Ok(grid.cell_volume() * norm.iter().sum::<f64>())
}

/// Largest excess of `|û(k)|` over `|ω̂(k)|/|k|` across the retained modes,
/// relative to `max_k |û(k)|` (`≤ 0` up to roundoff for divergence-free `u`).
pub fn mode_bound_excess(grid: &Grid, u: &Field, omega: &Field) -> Result<f64> {
    u.check(grid)?;
    check_vorticity(grid, omega)?;
    let kabs = grid.kabs();
    let mask = grid.mask();
    let mut worst = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    for k in 0..grid.len() {
        if kabs[k] == 0.0 || !mask[k] {
            continue;
        }
        let uk = u.comps().iter().map(|c| c[k].norm_sqr()).sum::<f64>().sqrt();
        if uk == 0.0 {
            continue;
        }
        let wk = omega.comps().iter().map(|c| c[k].norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(uk - wk / kabs[k]);
        scale = scale.max(uk);
    }
    Ok(if worst.is_finite() { worst / scale } else { 0.0 })
}

/// `‖u‖_∞ / (√(4π) ‖ω‖₂^{1/2} ‖∇ω‖₂^{1/2})`, reported only.
pub fn interpolation_ratio(grid: &Grid, u_linf: f64, omega: &Field) -> Result<f64> {
    check_vorticity(grid, omega)?;
    let w2 = omega.l2(grid);
    let gw2 = grid.volume().sqrt()
        * omega
            .comps()
            .iter()
            .map(|c| c.iter().zip(grid.k2()).map(|(z, k)| k * z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt();
    let denom = (4.0 * std::f64::consts::PI).sqrt() * (w2 * gw2).sqrt();
    Ok(if denom > 0.0 { u_linf / denom } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::test_support::random_vector_field;
    use nalgebra::{Matrix3, Vector3};

    #[test]
    fn constant_vorticity_direction() {
        let g = Grid::new(3, 8).unwrap();
        let mut w = Field::zeros(&g, Rank::Vector);
        w.comps_mut()[2][0] = 2.5.into();
        let d = vorticity_direction(&g, &w).unwrap();
        assert!(d.xi.iter().all(|x| x.unwrap() == [0.0, 0.0, 1.0]));
        assert_eq!(direction_dissipation(&g, &w).unwrap(), 0.0);
    }

    #[test]
    fn zero_vorticity_is_undefined_not_an_error() {
        let g = Grid::new(3, 8).unwrap();
        let w = Field::zeros(&g, Rank::Vector);
        assert_eq!(vorticity_direction(&g, &w).unwrap().defined_count(), 0);
        assert_eq!(direction_dissipation(&g, &w).unwrap(), 0.0);
    }

    #[test]
    fn planar_direction_is_out_of_plane() {
        let g = Grid::new(2, 16).unwrap();
        let u = g.leray_project(&random_vector_field(&g, 3)).unwrap();
        let w = g.curl(&u).unwrap();
        let d = vorticity_direction(&g, &w).unwrap();
        assert!(d.xi.iter().flatten().all(|x| x[0] == 0.0 && x[1] == 0.0 && x[2].abs() == 1.0));
        assert_eq!(direction_dissipation(&g, &w).unwrap(), 0.0);
        let a = stretching_alpha(&g, &u, &w).unwrap();
        assert!(a.iter().flatten().all(|&x| x == 0.0));
    }

    fn abc(x: [f64; 3]) -> [f64; 3] {
        [x[2].sin() + x[1].cos(), x[0].sin() + x[2].cos(), x[1].sin() + x[0].cos()]
    }

    #[test]
    fn abc_direction_dissipation_matches_finite_differences() {
        let g = Grid::new(3, 32).unwrap();
        // Beltrami: ω = u
        let w = g.field_from_fn(Rank::Vector, |x| abc(x).to_vec());
        let got = direction_dissipation(&g, &w).unwrap();

        let xi = |x: [f64; 3]| {
            let v = Vector3::from(abc(x));
            v / v.norm()
        };
        let h = 1e-5;
        let mut want = 0.0;
        for p in 0..g.len() {
            let x = g.point(p);
            let mut s = 0.0;
            for j in 0..3 {
                let (mut xp, mut xm) = (x, x);
                xp[j] += h;
                xm[j] -= h;
                s += ((xi(xp) - xi(xm)) / (2.0 * h)).norm_squared();
            }
            want += Vector3::from(abc(x)).norm() * s;
        }
        want *= g.cell_volume();
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn alpha_matches_eigen_decomposition() {
        let g = Grid::new(3, 16).unwrap();
        let u = g.leray_project(&random_vector_field(&g, 4)).unwrap();
        let w = g.curl(&u).unwrap();
        let alpha = stretching_alpha(&g, &u, &w).unwrap();
        let wp = g.to_physical(&w).unwrap();
        let grad = g.physical_gradient(&u);
        for p in (0..g.len()).step_by(97) {
            let gm = Matrix3::from_fn(|i, j| grad[i * 3 + j][p]);
            let s = (gm + gm.transpose()) * 0.5;
            let eig = s.symmetric_eigen();
            let om = Vector3::new(wp.comp(0)[p], wp.comp(1)[p], wp.comp(2)[p]);
            let xi = om / om.norm();
            let want: f64 = (0..3).map(|i| eig.eigenvalues[i] * xi.dot(&eig.eigenvectors.column(i)).powi(2)).sum();
            assert!((alpha[p].unwrap() - want).abs() < 1e-10, "{p}");
        }
        assert!(alpha_max(&alpha) >= alpha.iter().flatten().copied().fold(f64::MIN, f64::max));
    }

    #[test]
    fn rotation_points_have_no_stretching() {
        let g = Grid::new(3, 16).unwrap();
        let u = g.field_from_fn(Rank::Vector, |x| vec![-x[1].sin(), x[0].sin(), 0.0]);
        let w = g.curl(&u).unwrap();
        let alpha = stretching_alpha(&g, &u, &w).unwrap();
        for i in 0..16 {
            for k in 0..16 {
                let p = g.index([i, i, k]);
                if let Some(a) = alpha[p] {
                    assert!(a.abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mode_bound_is_tight_for_solenoidal_fields() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            let u = g.leray_project(&random_vector_field(&g, 6)).unwrap();
            let w = g.curl(&u).unwrap();
            let e = mode_bound_excess(&g, &u, &w).unwrap();
            assert!(e <= 1e-14 && e > -1e-14, "{e}");
        }
    }

    #[test]
    fn l1_of_single_mode() {
        let g = Grid::new(2, 32).unwrap();
        let w = g.field_from_fn(Rank::Scalar, |x| vec![x[0].cos()]);
        // ∫∫ |cos x| = 4 · 2π
        let want = 8.0 * std::f64::consts::PI;
        assert!((vorticity_l1(&g, &w).unwrap() - want).abs() < 1e-2 * want);
    }
}
