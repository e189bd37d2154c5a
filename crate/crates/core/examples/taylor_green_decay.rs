//! Direct integration of the 2-d Taylor-Green vortex against its closed-form decay.

use nitns::diagnostics::kinetic_energy;
use nitns::experiment::taylor_green;
use nitns::solvers::{run, Formulation, SolverConfig, State};
use nitns::Grid;

fn main() -> nitns::Result<()> {
    let g = Grid::new(2, 32)?;
    let nu = 0.1;
    let u0 = taylor_green(&g);
    let k0 = kinetic_energy(&g, &u0);
    let cfg = SolverConfig::new(Formulation::Direct, nu, 1e-2, 1.0).with_output_every(20);
    let out = run(&g, &cfg, State::from_velocity(&g, cfg.formulation, u0, 0.0, false)?).map_err(|f| f.error)?;
    println!("{:>6} {:>14} {:>14} {:>10}", "t", "K", "exact", "rel err");
    for r in &out.records {
        let exact = k0 * (-4.0 * nu * r.t).exp();
        println!("{:6.2} {:14.8e} {:14.8e} {:10.2e}", r.t, r.energy, exact, (r.energy - exact).abs() / exact);
    }
    Ok(())
}
