//! Decaying 3-d random flow with the Gevrey-norm and dimensionless-number monitors.

use nitns::experiment::{initial_velocity, IcKind, InitialCondition};
use nitns::solvers::{run, Formulation, SolverConfig, State};
use nitns::Grid;

fn main() -> nitns::Result<()> {
    let g = Grid::new(3, 16)?;
    let ic = InitialCondition { kind: IcKind::RandomBand, seed: 42, kmin: 1.0, kmax: 4.0, r0: Some(0.4), ..Default::default() };
    let nu = 1.0;
    let u0 = initial_velocity(&g, &ic, nu)?;
    let cfg = SolverConfig::new(Formulation::Direct, nu, 1e-2, 0.5).with_output_every(5);
    let out = run(&g, &cfg, State::from_velocity(&g, cfg.formulation, u0, 0.0, false)?).map_err(|e| e.error)?;
    println!("{:>5} {:>11} {:>11} {:>11} {:>11} {:>9}", "t", "K", "y_gevrey", "suf2", "maxu", "R0");
    for r in &out.records {
        let y = r.y_gevrey.map_or("-".to_string(), |y| format!("{y:.4e}"));
        println!("{:5.2} {:11.4e} {:>11} {:11.4e} {:11.4e} {:9.4}", r.t, r.energy, y, r.suf2, r.maxu, r.numbers.r0);
    }
    if let Some(last) = out.records.last() {
        println!("G = {:?}, rho = {:?}, tau = {:?}", last.numbers.g_number, last.numbers.rho, last.numbers.tau);
    }
    Ok(())
}
