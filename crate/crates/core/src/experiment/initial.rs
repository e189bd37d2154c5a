use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, IcKind, InitialCondition};
use crate::diagnostics::{enstrophy, kinetic_energy, reynolds_r0};
use crate::error::{Error, Result};
use crate::solvers::State;
use crate::spectral::{Field, Grid, Rank};

/// Taylor-Green vortex of unit amplitude.
pub fn taylor_green(grid: &Grid) -> Field {
    if grid.dim() == 2 {
        grid.field_from_fn(Rank::Vector, |x| vec![x[0].cos() * x[1].sin(), -x[0].sin() * x[1].cos()])
    } else {
        grid.field_from_fn(Rank::Vector, |x| {
            let cz = x[2].cos();
            vec![x[0].sin() * x[1].cos() * cz, -x[0].cos() * x[1].sin() * cz, 0.0]
        })
    }
}

/// Arnold-Beltrami-Childress flow with `A = B = C = a`.
pub fn abc(grid: &Grid, a: f64) -> Result<Field> {
    if grid.dim() != 3 {
        return Err(Error::config("abc flow is three-dimensional"));
    }
    Ok(grid.field_from_fn(Rank::Vector, |x| {
        vec![
            a * (x[2].sin() + x[1].cos()),
            a * (x[0].sin() + x[2].cos()),
            a * (x[1].sin() + x[0].cos()),
        ]
    }))
}

/// Seeded solenoidal field supported on `kmin ≤ |k| ≤ kmax`, scaled to kinetic energy `energy`.
pub fn random_band(grid: &Grid, seed: u64, kmin: f64, kmax: f64, energy: f64) -> Result<Field> {
    let in_shell: Vec<bool> = grid
        .kabs()
        .iter()
        .zip(grid.mask())
        .map(|(&k, &m)| m && k > 0.0 && k >= kmin && k <= kmax)
        .collect();
    if !in_shell.iter().any(|&b| b) {
        return Err(Error::config(format!("wavenumber shell {kmin}..{kmax} holds no modes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<Vec<f64>> =
        (0..grid.dim()).map(|_| (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let refs: Vec<&[f64]> = noise.iter().map(Vec::as_slice).collect();
    let spec = grid.forward_many(&refs);
    let raw = grid.field_from_modes(Rank::Vector, |k, c| if in_shell[k] { spec[c][k] } else { 0.0.into() });
    let u = grid.leray_project(&raw)?;
    let k = kinetic_energy(grid, &u);
    if energy == 0.0 {
        return Ok(Field::zeros(grid, Rank::Vector));
    }
    if !(k > 0.0) {
        return Err(Error::config(format!("wavenumber shell {kmin}..{kmax} has no solenoidal modes")));
    }
    Ok(u.scaled((energy / k).sqrt()))
}

/// The initial velocity described by `ic`.
pub fn initial_velocity(grid: &Grid, ic: &InitialCondition, nu: f64) -> Result<Field> {
    let mut u = match ic.kind {
        IcKind::TaylorGreen => taylor_green(grid).scaled(ic.amplitude),
        IcKind::Abc => abc(grid, ic.amplitude)?,
        IcKind::RandomBand => random_band(grid, ic.seed, ic.kmin, ic.kmax, ic.amplitude)?,
    };
    if ic.perturb > 0.0 {
        let size = u.l2(grid);
        let p = random_band(grid, ic.seed.wrapping_add(1), ic.kmin, ic.kmax, 1.0)?;
        u = u.axpy(ic.perturb * size / p.l2(grid), &p);
    }
    if let Some(target) = ic.r0 {
        let r0 = reynolds_r0(kinetic_energy(grid, &u), enstrophy(grid, &grid.curl(&u)?), nu);
        if r0 == 0.0 {
            return Err(Error::config("cannot rescale a zero field to a Reynolds number"));
        }
        u = u.scaled(target / r0);
    }
    u.remove_mean();
    Ok(u)
}

/// Initial state of the configured formulation.
pub fn make_initial(grid: &Grid, cfg: &ExperimentConfig) -> Result<State> {
    let u = initial_velocity(grid, &cfg.ic, cfg.solver.nu)?;
    State::from_velocity(grid, cfg.solver.formulation, u, 0.0, cfg.solver.el.evolve_zeta)
}
