//! Mollified and vortex-method velocities approach the direct solution as delta shrinks.

use nitns::experiment::{initial_velocity, InitialCondition};
use nitns::solvers::{run, Formulation, SolverConfig, State};
use nitns::{Field, Grid, Mollifier, MollifierKind};

fn final_velocity(g: &Grid, f: Formulation, delta: Option<f64>, u0: &Field) -> nitns::Result<Field> {
    let mut cfg = SolverConfig::new(f, 0.1, 2e-3, 0.5).with_output_every(1000);
    if let Some(d) = delta {
        cfg = cfg.with_mollifier(Mollifier::new(MollifierKind::Poisson, d)?);
    }
    let out = run(g, &cfg, State::from_velocity(g, f, u0.clone(), 0.0, false)?).map_err(|e| e.error)?;
    out.final_state.velocity(g)
}

fn main() -> nitns::Result<()> {
    let g = Grid::new(2, 64)?;
    let ic = InitialCondition { perturb: 0.1, seed: 1, ..Default::default() };
    let u0 = initial_velocity(&g, &ic, 0.1)?;
    let reference = final_velocity(&g, Formulation::Direct, None, &u0)?;
    let norm = reference.l2(&g);
    println!("{:>6} {:>12} {:>12}", "delta", "mollified", "vortex");
    for delta in [0.4, 0.2, 0.1, 0.05] {
        let m = final_velocity(&g, Formulation::Mollified, Some(delta), &u0)?.sub(&reference).l2(&g) / norm;
        let v = final_velocity(&g, Formulation::Vortex, Some(delta), &u0)?.sub(&reference).l2(&g) / norm;
        println!("{delta:6.2} {m:12.4e} {v:12.4e}");
    }
    Ok(())
}
