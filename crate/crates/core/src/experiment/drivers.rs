use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;

use super::config::{ExperimentConfig, IcKind};
use super::initial::initial_velocity;
use super::output::write_timeseries;
use super::snapshot::{write_snapshot, Snapshot};
use crate::error::{Error, Result};
use crate::mollifier::{Mollifier, MollifierKind};
use crate::solvers::{run, run_observed, Formulation, RunOutput, SolverConfig, State};
use crate::spectral::{Field, Grid};

/// Files written by [`cmd_run`] and the trajectory behind them.
#[derive(Debug)]
pub struct RunReport {
    pub output: RunOutput,
    pub csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

fn delta_of(cfg: &SolverConfig) -> f64 {
    cfg.mollifier.map_or(0.0, |m| m.delta())
}

fn snapshot(cfg: &ExperimentConfig, grid: &Grid, state: &State, name: &str) -> Result<PathBuf> {
    let path = cfg.output.dir.join(name);
    let s = &cfg.solver;
    write_snapshot(&path, &Snapshot::from_state(grid, state, s.formulation, s.nu, delta_of(s), s.el.g)?)?;
    Ok(path)
}

/// Runs one trajectory, writing `timeseries.csv` and start/end snapshots.
///
/// On failure the partial series and a snapshot of the last good state are
/// still written before the error is returned.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = cfg.grid()?;
    fs::create_dir_all(&cfg.output.dir)?;
    let u0 = initial_velocity(&grid, &cfg.ic, cfg.solver.nu)?;
    let initial = State::from_velocity(&grid, cfg.solver.formulation, u0, 0.0, cfg.solver.el.evolve_zeta)?;
    let csv = cfg.output.dir.join("timeseries.csv");
    let mut snapshots = Vec::new();
    if cfg.output.snapshots {
        snapshots.push(snapshot(cfg, &grid, &initial, "snapshot_start.bin")?);
    }
    match run(&grid, &cfg.solver, initial) {
        Ok(output) => {
            write_timeseries(&csv, &output.records)?;
            if cfg.output.snapshots {
                snapshots.push(snapshot(cfg, &grid, &output.final_state, "snapshot_end.bin")?);
            }
            Ok(RunReport { output, csv, snapshots })
        }
        Err(failure) => {
            warn!("run failed: {failure}");
            write_timeseries(&csv, &failure.records)?;
            if cfg.output.snapshots {
                snapshot(cfg, &grid, &failure.last_good, "snapshot_failure.bin")?;
            }
            Err(failure.error)
        }
    }
}

/// Velocities sampled every `output_every` steps, keyed by step index.
struct Trajectory {
    samples: BTreeMap<usize, (f64, Field)>,
    terminal: Field,
}

fn trajectory(grid: &Grid, cfg: &SolverConfig, u0: &Field, evolve_zeta: bool) -> Result<Trajectory> {
    let initial = State::from_velocity(grid, cfg.formulation, u0.clone(), 0.0, evolve_zeta)?;
    let mut samples = BTreeMap::new();
    samples.insert(0, (0.0, u0.clone()));
    let mut step = 0;
    let out = run_observed(grid, cfg, initial, &mut |ev| {
        step += 1;
        if step % cfg.output_every == 0 {
            if let Ok(u) = ev.state.velocity(grid) {
                samples.insert(step, (ev.state.t(), u));
            }
        }
    })
    .map_err(|f| f.error)?;
    Ok(Trajectory { samples, terminal: out.final_state.velocity(grid)? })
}

/// L² velocity differences between two formulations at one mollifier scale.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub delta: f64,
    pub a: Formulation,
    pub b: Formulation,
    pub terminal: f64,
    /// Largest difference over the shared output times.
    pub running_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// For each pair involving a mollified member: terminal differences
    /// strictly decrease as `δ` decreases.
    pub decreasing: Vec<(Formulation, Formulation, bool)>,
}

impl CompareReport {
    pub fn all_decreasing(&self) -> bool {
        self.decreasing.iter().all(|d| d.2)
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "delta,a,b,terminal_l2,running_max_l2")?;
        for r in &self.rows {
            writeln!(f, "{},{},{},{:e},{:e}", r.delta, r.a, r.b, r.terminal, r.running_max)?;
        }
        for (a, b, ok) in &self.decreasing {
            writeln!(f, "# {a} vs {b}: terminal difference decreasing in delta: {ok}")?;
        }
        Ok(())
    }
}

/// Runs every formulation of `cfg.compare_formulations` at every `δ` of
/// `cfg.compare_deltas` from one initial velocity and reports pairwise gaps.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    let forms = &cfg.compare_formulations;
    if forms.len() < 2 {
        return Err(Error::ConfigKey {
            line: 0,
            key: "compare.formulations".into(),
            msg: "compare needs at least two formulations".into(),
        });
    }
    if cfg.compare_deltas.is_empty() {
        return Err(Error::ConfigKey { line: 0, key: "compare.deltas".into(), msg: "no deltas given".into() });
    }
    let grid = cfg.grid()?;
    let u0 = initial_velocity(&grid, &cfg.ic, cfg.solver.nu)?;
    let kind = cfg.solver.mollifier.map_or(MollifierKind::Poisson, |m| m.kind());

    let mut members: Vec<(Formulation, Option<usize>)> = Vec::new();
    for &f in forms {
        if f.needs_mollifier() {
            members.extend((0..cfg.compare_deltas.len()).map(|i| (f, Some(i))));
        } else {
            members.push((f, None));
        }
    }
    let results: Vec<Result<Trajectory>> = members
        .par_iter()
        .map(|&(f, di)| {
            let mut sc = cfg.solver.clone();
            sc.formulation = f;
            sc.mollifier = match di {
                Some(i) => Some(Mollifier::new(kind, cfg.compare_deltas[i])?),
                None => None,
            };
            info!("compare: {f} delta = {:?}", di.map(|i| cfg.compare_deltas[i]));
            trajectory(&grid, &sc, &u0, cfg.solver.el.evolve_zeta)
        })
        .collect();
    let mut trajs = BTreeMap::new();
    for (m, r) in members.iter().zip(results) {
        trajs.insert((m.0.tag(), m.1), r?);
    }
    let get = |f: Formulation, di: usize| &trajs[&(f.tag(), if f.needs_mollifier() { Some(di) } else { None })];

    let mut rows = Vec::new();
    let mut decreasing = Vec::new();
    for (ia, &a) in forms.iter().enumerate() {
        for &b in &forms[ia + 1..] {
            let mut terminals = Vec::new();
            for (di, &delta) in cfg.compare_deltas.iter().enumerate() {
                let (ta, tb) = (get(a, di), get(b, di));
                let terminal = ta.terminal.sub(&tb.terminal).l2(&grid);
                let running_max = ta
                    .samples
                    .iter()
                    .filter_map(|(k, (t, ua))| {
                        tb.samples.get(k).filter(|(s, _)| (s - t).abs() < 1e-9).map(|(_, ub)| ua.sub(ub).l2(&grid))
                    })
                    .fold(terminal, f64::max);
                terminals.push((delta, terminal));
                rows.push(CompareRow { delta, a, b, terminal, running_max });
            }
            if a.needs_mollifier() || b.needs_mollifier() {
                terminals.sort_by(|x, y| y.0.total_cmp(&x.0));
                decreasing.push((a, b, terminals.windows(2).all(|w| w[1].1 < w[0].1)));
            }
        }
    }
    let report = CompareReport { rows, decreasing };
    if fs::create_dir_all(&cfg.output.dir).is_ok() {
        fs::write(cfg.output.dir.join("compare.csv"), report.to_string())?;
    }
    Ok(report)
}

/// Restart statistics of one Eulerian-Lagrangian run.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub ic: IcKind,
    pub g: f64,
    pub restarts: usize,
    /// Mean length of the completed windows (the first one starts at `t = 0`).
    pub mean_interval: Option<f64>,
    pub min_interval: Option<f64>,
    /// Measured `G` over the run.
    pub g_number: Option<f64>,
    /// `g G⁻⁷`.
    pub tau: Option<f64>,
    pub max_grad_ell: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    /// Per initial condition: the mean interval never shrinks as `g` grows
    /// (a run without restarts counts as an infinite interval).
    pub monotone: Vec<(IcKind, bool)>,
}

impl fmt::Display for StudyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(f, "ic,g,restarts,mean_interval,min_interval,G,g_G^-7,max_grad_ell")?;
        for r in &self.rows {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{:e}",
                r.ic,
                r.g,
                r.restarts,
                opt(r.mean_interval),
                opt(r.min_interval),
                opt(r.g_number),
                opt(r.tau),
                r.max_grad_ell
            )?;
        }
        for (ic, ok) in &self.monotone {
            writeln!(f, "# {ic}: mean interval non-decreasing in g: {ok}")?;
        }
        Ok(())
    }
}

/// Runs the Eulerian-Lagrangian formulation for every `g` and initial
/// condition of the study lists and tabulates the restart intervals.
pub fn cmd_restart_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    if cfg.study_g.is_empty() || cfg.study_ics.is_empty() {
        return Err(Error::ConfigKey { line: 0, key: "study.g".into(), msg: "empty study".into() });
    }
    let grid = cfg.grid()?;
    let mut rows = Vec::new();
    let mut monotone = Vec::new();
    for &ic_kind in &cfg.study_ics {
        let mut ic = cfg.ic.clone();
        ic.kind = ic_kind;
        let u0 = initial_velocity(&grid, &ic, cfg.solver.nu)?;
        let mut gs = cfg.study_g.clone();
        gs.sort_by(f64::total_cmp);
        let mut ic_rows = Vec::new();
        for g in gs {
            let mut sc = cfg.solver.clone();
            sc.formulation = Formulation::EulerianLagrangian;
            sc.el.g = g;
            let initial = State::from_velocity(&grid, sc.formulation, u0.clone(), 0.0, sc.el.evolve_zeta)?;
            info!("restart study: {ic_kind} g = {g}");
            let out = run(&grid, &sc, initial).map_err(|f| f.error)?;
            let mut times = vec![0.0];
            times.extend(out.restarts.iter().map(|r| r.t));
            let intervals: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
            let numbers = out.records.last().map(|r| r.numbers).unwrap_or_default();
            ic_rows.push(StudyRow {
                ic: ic_kind,
                g,
                restarts: out.restarts.len(),
                mean_interval: (!intervals.is_empty()).then(|| intervals.iter().sum::<f64>() / intervals.len() as f64),
                min_interval: intervals.iter().copied().reduce(f64::min),
                g_number: numbers.g_number,
                tau: numbers.tau,
                max_grad_ell: out.max_grad_ell,
            });
        }
        let key = |r: &StudyRow| r.mean_interval.unwrap_or(f64::INFINITY);
        monotone.push((ic_kind, ic_rows.windows(2).all(|w| key(&w[1]) >= key(&w[0]))));
        rows.extend(ic_rows);
    }
    let report = StudyReport { rows, monotone };
    if fs::create_dir_all(&cfg.output.dir).is_ok() {
        fs::write(cfg.output.dir.join("restart_study.csv"), report.to_string())?;
    }
    Ok(report)
}
