//! Eulerian-Lagrangian run with back-to-labels restarts, compared with the direct solver.

use nitns::experiment::{initial_velocity, InitialCondition};
use nitns::solvers::{run, Formulation, SolverConfig, State};
use nitns::Grid;

fn main() -> nitns::Result<()> {
    let g = Grid::new(2, 32)?;
    let ic = InitialCondition { perturb: 0.1, seed: 1, ..Default::default() };
    let u0 = initial_velocity(&g, &ic, 0.1)?;
    let mut cfg = SolverConfig::new(Formulation::EulerianLagrangian, 0.1, 2e-3, 0.5).with_output_every(25);
    cfg.el.g = 0.1;
    let s = State::from_velocity(&g, cfg.formulation, u0.clone(), 0.0, false)?;
    let el = run(&g, &cfg, s).map_err(|f| f.error)?;
    for r in &el.restarts {
        println!("restart at t={:.3}: sup|grad l| reached {:.4}", r.t, r.peak);
    }
    for r in &el.records {
        if let Some(e) = &r.el {
            println!(
                "t={:.3} sup|grad l|={:.4} min det={:.4} cauchy err={:.2e} logdet err={:.2e}",
                r.t, e.measures.max_grad_ell, e.measures.min_det, e.measures.weber_cauchy_err, e.measures.logdet_err
            );
        }
    }
    let direct_cfg = SolverConfig { formulation: Formulation::Direct, ..cfg.clone() };
    let s = State::from_velocity(&g, Formulation::Direct, u0, 0.0, false)?;
    let direct = run(&g, &direct_cfg, s).map_err(|f| f.error)?;
    let (ue, ud) = (el.final_state.velocity(&g)?, direct.final_state.velocity(&g)?);
    println!("{} restarts; relative L2 gap to direct: {:.2e}", el.restarts.len(), ue.sub(&ud).l2(&g) / ud.l2(&g));
    Ok(())
}
