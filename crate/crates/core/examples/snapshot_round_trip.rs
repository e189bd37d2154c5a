//! Writes an Eulerian-Lagrangian snapshot, reads it back and resumes from it.

use nitns::experiment::{make_initial, parse_config, read_snapshot, write_snapshot, Snapshot};
use nitns::solvers::run;

fn main() -> nitns::Result<()> {
    let cfg = parse_config(
        "grid.dim = 3\ngrid.n = 16\nnu = 0.1\ndt = 0.01\nt_end = 0.1\nformulation = eulerian_lagrangian\nic.kind = abc\nel.g = 0.05\n",
        &[],
    )?;
    let g = cfg.grid()?;
    let out = run(&g, &cfg.solver, make_initial(&g, &cfg)?).map_err(|f| f.error)?;
    let snap = Snapshot::from_state(&g, &out.final_state, cfg.solver.formulation, cfg.solver.nu, 0.0, cfg.solver.el.g)?;
    let path = std::env::temp_dir().join("nitns_example_snapshot.bin");
    write_snapshot(&path, &snap)?;
    let back = read_snapshot(&path, Some(cfg.solver.formulation))?;
    println!("wrote {} ({} bytes); identical on read: {}", path.display(), snap.to_bytes().len(), back == snap);
    let mut resumed = cfg.solver.clone();
    resumed.t_end = 0.2;
    let more = run(&g, &resumed, back.to_state(&g)?).map_err(|f| f.error)?;
    let t = more.records.last().map_or(snap.t, |r| r.t);
    println!("resumed from t={:.2} to t={t:.2} with {} further restarts", snap.t, more.restarts.len());
    std::fs::remove_file(path)?;
    Ok(())
}
