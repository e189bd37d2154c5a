use log::warn;

use crate::error::Result;
use crate::mollifier::Mollifier;
use crate::spectral::{Field, Grid, PhysicalField};

/// `K = ½ ∫ |u|² dx` from the spectrum.
pub fn kinetic_energy(grid: &Grid, u: &Field) -> f64 {
    0.5 * u.l2_sq(grid)
}

/// `K` by grid quadrature of physical values.
pub fn kinetic_energy_physical(grid: &Grid, u: &PhysicalField) -> f64 {
    0.5 * u.l2_sq(grid)
}

/// `ε = ν ∫ |∇u|² dx = ν (2π)^d Σ |k|² |û_k|²`.
pub fn dissipation_rate(grid: &Grid, u: &Field, nu: f64) -> f64 {
    nu * grid.volume() * weighted_sum(u, grid.k2())
}

/// `∫ |ω|² dx`.
pub fn enstrophy(grid: &Grid, omega: &Field) -> f64 {
    omega.l2_sq(grid)
}

fn weighted_sum(f: &Field, w: &[f64]) -> f64 {
    f.comps().iter().map(|c| c.iter().zip(w).map(|(z, &s)| s * z.norm_sqr()).sum::<f64>()).sum()
}

/// Cumulative trapezoid integral of `y` over `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `K(t) + ∫_{t₀}^t ε ds − K(t₀)` at every sample of a `(t, K, ε)` series.
pub fn energy_budget_residual(series: &[(f64, f64, f64)]) -> Vec<f64> {
    let Some(&(_, k0, _)) = series.first() else { return Vec::new() };
    let t: Vec<f64> = series.iter().map(|s| s.0).collect();
    let eps: Vec<f64> = series.iter().map(|s| s.2).collect();
    trapezoid(&t, &eps).into_iter().zip(series).map(|(int, s)| s.1 + int - k0).collect()
}

/// Energy pairing of the vortex method between `u` and `[u]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedEnergy {
    /// `½ ∫ u·[u] dx` by quadrature.
    pub energy: f64,
    /// `½ (2π)^d Σ Ĵ⁻¹ |[û]|²`.
    pub energy_spectral: f64,
    /// `ν ∫ tr{∇u (∇[u])ᵀ} dx` by quadrature.
    pub dissipation: f64,
    /// `ν (2π)^d Σ Ĵ⁻¹ |k|² |[û]|²`.
    pub dissipation_spectral: f64,
    /// `½ ∫ |Ĵ^{−1/2}[u]|² dx`, absent when the inverse square root overflows.
    pub analytic_energy: Option<f64>,
    /// `∫ |∇ Ĵ^{−1/2}[u]|² dx`.
    pub analytic_dissipation: Option<f64>,
    pub omitted: Option<String>,
}

impl PairedEnergy {
    /// Largest relative gap between the quadrature and spectral paths.
    pub fn dual_path_error(&self) -> f64 {
        let rel = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        rel(self.energy, self.energy_spectral).max(rel(self.dissipation, self.dissipation_spectral))
    }
}

/// Paired energy and dissipation of `u` against its mollification.
pub fn vortex_energy_pair(grid: &Grid, u: &Field, m: &Mollifier, nu: f64) -> Result<PairedEnergy> {
    let mu = m.apply(grid, u)?;
    let cell = grid.cell_volume();

    let up = grid.to_physical(u)?;
    let mup = grid.to_physical(&mu)?;
    let dot: f64 = up.comps().iter().zip(mup.comps()).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y)).sum();
    let gu = grid.physical_gradient(u);
    let gm = grid.physical_gradient(&mu);
    let tr: f64 = gu.iter().zip(&gm).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y)).sum();

    let jhat = m.multipliers(grid);
    let kd2 = grid.kd2();
    let (mut e_spec, mut d_spec) = (0.0, 0.0);
    for c in mu.comps() {
        for k in 0..grid.len() {
            let w = 1.0 / jhat[k];
            if jhat[k] == 0.0 || !w.is_finite() {
                continue;
            }
            let a = w * c[k].norm_sqr();
            e_spec += a;
            d_spec += a * kd2[k];
        }
    }

    let (analytic_energy, analytic_dissipation, omitted) = match m.apply_inverse_sqrt(grid, &mu) {
        Ok(w) => (Some(kinetic_energy(grid, &w)), Some(dissipation_rate(grid, &w, 1.0)), None),
        Err(e) => {
            warn!("analytic energy omitted: {e}");
            (None, None, Some(e.to_string()))
        }
    };
    Ok(PairedEnergy {
        energy: 0.5 * cell * dot,
        energy_spectral: 0.5 * grid.volume() * e_spec,
        dissipation: nu * cell * tr,
        dissipation_spectral: nu * grid.volume() * d_spec,
        analytic_energy,
        analytic_dissipation,
        omitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::MollifierKind;
    use crate::spectral::test_support::random_vector_field;
    use crate::spectral::Rank;
    use std::f64::consts::PI;

    #[test]
    fn energy_of_transverse_sine() {
        let g = Grid::new(3, 16).unwrap();
        let u = g.field_from_fn(Rank::Vector, |x| vec![0.0, x[0].sin(), 0.0]);
        // ½ ∫ sin² x = ½ · ½ (2π)³
        let want = 2.0 * PI.powi(3);
        assert!((kinetic_energy(&g, &u) - want).abs() < 1e-12 * want);
        assert!((want - 62.01255336059963).abs() < 1e-12);
        assert_eq!(kinetic_energy(&g, &Field::zeros(&g, Rank::Vector)), 0.0);
    }

    #[test]
    fn parseval_and_quadrature_agree() {
        let g = Grid::new(3, 16).unwrap();
        let u = random_vector_field(&g, 5);
        let a = kinetic_energy(&g, &u);
        let b = kinetic_energy_physical(&g, &g.to_physical(&u).unwrap());
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn budget_of_decaying_mode() {
        // u = e^{-ν t} sin y: K = K₀ e^{-2νt}, ε = 2ν K
        let nu = 0.3;
        let k0 = 2.0 * PI * PI * 0.5;
        let series: Vec<(f64, f64, f64)> = (0..=4000)
            .map(|i| {
                let t = i as f64 * 2.5e-4;
                let k = k0 * (-2.0 * nu * t).exp();
                (t, k, 2.0 * nu * k)
            })
            .collect();
        let r = energy_budget_residual(&series);
        assert!(r.iter().all(|x| x.abs() < 1e-8 * k0), "{}", r.last().unwrap());
        let inviscid: Vec<_> = series.iter().map(|&(t, k, _)| (t, k, 0.0)).collect();
        let r0 = energy_budget_residual(&inviscid);
        assert!((r0.last().unwrap() - (series.last().unwrap().1 - k0)).abs() < 1e-15);
    }

    #[test]
    fn pairing_reduces_without_smoothing() {
        let g = Grid::new(3, 16).unwrap();
        let u = g.leray_project(&random_vector_field(&g, 2)).unwrap();
        let m = Mollifier::new(MollifierKind::Poisson, 0.0).unwrap();
        let p = vortex_energy_pair(&g, &u, &m, 0.2).unwrap();
        let k = kinetic_energy(&g, &u);
        let eps = dissipation_rate(&g, &u, 0.2);
        assert!((p.energy - k).abs() < 1e-12 * k);
        assert!((p.dissipation - eps).abs() < 1e-12 * eps);
        assert!((p.analytic_energy.unwrap() - k).abs() < 1e-12 * k);
    }

    #[test]
    fn single_mode_pairing_weight() {
        let g = Grid::new(2, 16).unwrap();
        let u = g.field_from_fn(Rank::Vector, |x| vec![x[1].cos(), 0.0]);
        let m = Mollifier::new(MollifierKind::Poisson, 0.5).unwrap();
        let p = vortex_energy_pair(&g, &u, &m, 0.1).unwrap();
        let filtered = kinetic_energy(&g, &m.apply(&g, &u).unwrap());
        assert!((p.energy_spectral - 0.5f64.exp() * filtered).abs() < 1e-13 * p.energy);
        // direct value: Ĵ = e^{-1/2}, K = π², paired = e^{-1/2} π²
        assert!((p.energy - (-0.5f64).exp() * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn dual_paths_agree() {
        let g = Grid::new(3, 16).unwrap();
        let u = g.leray_project(&random_vector_field(&g, 8)).unwrap();
        for kind in [MollifierKind::Poisson, MollifierKind::Gaussian, MollifierKind::SharpTruncation] {
            let m = Mollifier::new(kind, 0.2).unwrap();
            let p = vortex_energy_pair(&g, &u, &m, 0.05).unwrap();
            assert!(p.dual_path_error() < 1e-12, "{kind}: {}", p.dual_path_error());
        }
    }

    #[test]
    fn overflowing_analytic_energy_is_omitted() {
        let g = Grid::new(2, 64).unwrap();
        let u = g.leray_project(&random_vector_field(&g, 1)).unwrap();
        let m = Mollifier::new(MollifierKind::Gaussian, 1.0).unwrap();
        let p = vortex_energy_pair(&g, &u, &m, 0.05).unwrap();
        assert!(p.analytic_energy.is_none() && p.omitted.is_some());
        assert!(p.dual_path_error() < 1e-12);
    }
}
