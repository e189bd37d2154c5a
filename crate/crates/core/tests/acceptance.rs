//! End-to-end acceptance checks. Each criterion prints one line:
//! `criterion NN [PASS|FAIL] name: measured values`.

use std::time::Instant;

use nitns::diagnostics::{mode_bound_excess, stretching_alpha, DiagnosticsRecord};
use nitns::el::{curveq_residual, ElState};
use nitns::experiment::{cauchy_algebra_residuals, initial_velocity, random_band, IcKind, InitialCondition};
use nitns::solvers::{run_observed, Formulation, RunOutput, Scheme, SolverConfig, State};
use nitns::{Field, Grid, Mollifier, MollifierKind, PhysicalField, Rank};

struct Report {
    lines: Vec<(u32, String, bool, String)>,
}

impl Report {
    fn add(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("criterion {id:02} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, name.to_string(), pass, detail));
    }
}

/// A run together with the worst per-step mode-bound excess.
struct Observed {
    out: RunOutput,
    mode_excess: f64,
    seconds: f64,
}

fn observed_run(grid: &Grid, cfg: &SolverConfig, u0: &Field, mut extra: impl FnMut(&State)) -> Observed {
    let start = Instant::now();
    let mut mode_excess = {
        let w = grid.curl(u0).unwrap();
        mode_bound_excess(grid, u0, &w).unwrap()
    };
    let s = State::from_velocity(grid, cfg.formulation, u0.clone(), 0.0, cfg.el.evolve_zeta).unwrap();
    let out = run_observed(grid, cfg, s, &mut |ev| {
        let u = ev.state.velocity(grid).unwrap();
        let w = grid.curl(&u).unwrap();
        mode_excess = mode_excess.max(mode_bound_excess(grid, &u, &w).unwrap());
        extra(ev.state);
    })
    .unwrap_or_else(|f| panic!("{} run failed: {f}", cfg.formulation));
    Observed { out, mode_excess, seconds: start.elapsed().as_secs_f64() }
}

fn perturbed_taylor_green(grid: &Grid) -> Field {
    let ic = InitialCondition {
        kind: IcKind::TaylorGreen,
        seed: 1,
        amplitude: 1.0,
        kmin: 1.0,
        kmax: 4.0,
        perturb: 0.1,
        r0: None,
    };
    initial_velocity(grid, &ic, 0.1).unwrap()
}

fn el_records(out: &RunOutput) -> impl Iterator<Item = &nitns::diagnostics::ElRecord> {
    out.records.iter().filter_map(|r| r.el.as_ref())
}

fn max_of<T>(it: impl Iterator<Item = T>, f: impl Fn(T) -> f64) -> f64 {
    it.map(f).fold(f64::NEG_INFINITY, f64::max)
}

struct ElCase {
    dim: usize,
    dt: f64,
    el: Observed,
    direct: Observed,
    gap: f64,
}

const NU: f64 = 0.1;
const G: f64 = 0.1;

fn el_case(dim: usize, n: usize, dt: f64) -> ElCase {
    let grid = Grid::new(dim, n).unwrap();
    let u0 = perturbed_taylor_green(&grid);
    let mut cfg = SolverConfig::new(Formulation::EulerianLagrangian, NU, dt, 0.5)
        .with_scheme(Scheme::Rk2)
        .with_output_every(5);
    cfg.el.g = G;
    let el = observed_run(&grid, &cfg, &u0, |_| {});
    let direct = observed_run(&grid, &SolverConfig { formulation: Formulation::Direct, ..cfg }, &u0, |_| {});
    let ue = el.out.final_state.velocity(&grid).unwrap();
    let ud = direct.out.final_state.velocity(&grid).unwrap();
    let gap = ue.sub(&ud).l2(&grid) / ud.l2(&grid);
    ElCase { dim, dt, el, direct, gap }
}

/// Embeds a planar velocity in a three-dimensional grid (no `z` dependence, `u_z = 0`).
fn embed_planar(g2: &Grid, u: &Field) -> (Grid, Field) {
    let n = g2.n();
    let g3 = Grid::new(3, n).unwrap();
    let p = g2.to_physical(u).unwrap();
    let mut comps = vec![vec![0.0; g3.len()]; 3];
    for (c, src) in p.comps().iter().enumerate() {
        for ij in 0..g2.len() {
            for k in 0..n {
                comps[c][ij * n + k] = src[ij];
            }
        }
    }
    let f = g3.to_spectral(&PhysicalField::new(&g3, Rank::Vector, comps).unwrap()).unwrap();
    (g3, f)
}

fn budget(records: &[DiagnosticsRecord]) -> f64 {
    let k0 = records[0].energy;
    max_of(records.iter(), |r| r.budget_residual.abs() / k0)
}

#[test]
fn acceptance() {
    let mut rep = Report { lines: Vec::new() };
    let mut mode_excess: f64 = f64::NEG_INFINITY;

    // EL vs direct: 2D n = 64 and 3D n = 32 at dt and dt/2
    let cases: Vec<ElCase> = [(2, 64), (3, 32)]
        .into_iter()
        .flat_map(|(d, n)| [2e-3, 1e-3].map(|dt| el_case(d, n, dt)))
        .collect();
    for c in &cases {
        mode_excess = mode_excess.max(c.el.mode_excess).max(c.direct.mode_excess);
    }

    let mut ok1 = true;
    let mut detail1 = Vec::new();
    for pair in cases.chunks(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let order = (coarse.gap / fine.gap).log2();
        let secs = fine.el.seconds + fine.direct.seconds + coarse.el.seconds + coarse.direct.seconds;
        let restarts = fine.el.out.restarts.len();
        let pass = fine.gap <= 1e-3 && order >= 2.0 - 0.05 && restarts >= 1 && secs <= 120.0;
        ok1 &= pass;
        detail1.push(format!(
            "{}D gap(dt={:e})={:.3e} order={:.2} restarts={} runtime={:.0}s",
            fine.dim, fine.dt, fine.gap, order, restarts, secs
        ));
    }
    rep.add(1, "formulation equivalence", ok1, detail1.join("; "));

    let wc = max_of(cases.iter().flat_map(|c| el_records(&c.el.out)), |e| e.measures.weber_cauchy_err);
    rep.add(2, "Cauchy formula at every output", wc <= 1e-6, format!("max rel L2 = {wc:.3e} (tol 1e-6)"));

    let mut ok3 = true;
    let mut detail3 = Vec::new();
    for pair in cases.chunks(2) {
        let e: Vec<f64> = pair.iter().map(|c| max_of(el_records(&c.el.out), |e| e.measures.logdet_err)).collect();
        let pass = e[0] <= 1e-4 && e[1] <= 1e-4 && e[1] <= 0.5 * e[0];
        ok3 &= pass;
        detail3.push(format!("{}D {:.3e} -> {:.3e} (ratio {:.2})", pair[0].dim, e[0], e[1], e[1] / e[0]));
    }
    rep.add(3, "determinant consistency", ok3, detail3.join("; "));

    // δ-family: direct, mollified and vortex on perturbed 2D Taylor-Green
    let g2 = Grid::new(2, 64).unwrap();
    let u0 = perturbed_taylor_green(&g2);
    let base = SolverConfig::new(Formulation::Direct, NU, 1e-3, 0.5).with_output_every(10);
    let direct = observed_run(&g2, &base, &u0, |_| {});
    mode_excess = mode_excess.max(direct.mode_excess);
    let ud = direct.out.final_state.velocity(&g2).unwrap();
    let deltas = [0.4, 0.2, 0.1];
    let mut budget4 = budget(&direct.out.records);
    let (mut dual5, mut paired5): (f64, f64) = (0.0, 0.0);
    let mut diffs = Vec::new();
    for f in [Formulation::Mollified, Formulation::Vortex] {
        let mut d = Vec::new();
        for delta in deltas {
            let cfg = SolverConfig { formulation: f, ..base.clone() }
                .with_mollifier(Mollifier::new(MollifierKind::Poisson, delta).unwrap());
            let o = observed_run(&g2, &cfg, &u0, |_| {});
            mode_excess = mode_excess.max(o.mode_excess);
            match f {
                Formulation::Mollified => budget4 = budget4.max(budget(&o.out.records)),
                _ => {
                    let p0 = o.out.records[0].paired.as_ref().unwrap().energy;
                    for r in &o.out.records {
                        let p = r.paired.as_ref().unwrap();
                        dual5 = dual5.max(p.dual_path_err);
                        paired5 = paired5.max(p.residual.abs() / p0);
                    }
                }
            }
            d.push(o.out.final_state.velocity(&g2).unwrap().sub(&ud).l2(&g2));
        }
        diffs.push((f, d));
    }
    rep.add(4, "energy budget", budget4 <= 1e-6, format!("max |K+int eps-K0|/K0 = {budget4:.3e} (tol 1e-6)"));
    rep.add(
        5,
        "vortex paired energy",
        dual5 <= 1e-12 && paired5 <= 1e-6,
        format!("dual path {dual5:.3e} (tol 1e-12), paired residual {paired5:.3e} (tol 1e-6)"),
    );

    let [cyc, idd, nid] = cauchy_algebra_residuals(1000, 2024, false);
    let [scyc, sidd, snid] = cauchy_algebra_residuals(1000, 2025, true);
    let alg = [cyc, idd, nid, scyc, sidd, snid].into_iter().fold(0.0, f64::max);
    rep.add(
        6,
        "Cauchy-action algebra",
        alg <= 1e-12,
        format!("cyc {cyc:.1e} idd {idd:.1e} nid {nid:.1e}; singular M: {scyc:.1e} {sidd:.1e} {snid:.1e}"),
    );

    // small-Reynolds decay; t_end fixed from a pilot (K(1)/K(0) ≈ 3.7e-3)
    let g3 = Grid::new(3, 32).unwrap();
    let ic = InitialCondition {
        kind: IcKind::RandomBand,
        seed: 42,
        amplitude: 1.0,
        kmin: 1.0,
        kmax: 4.0,
        perturb: 0.0,
        r0: Some(0.4),
    };
    let nu8 = 1.0;
    let t_end8 = 1.0;
    let u8 = initial_velocity(&g3, &ic, nu8).unwrap();
    let mut cfg8 = SolverConfig::new(Formulation::Direct, nu8, 1e-2, t_end8).with_output_every(1);
    cfg8.horizon = Some(t_end8);
    let decay = observed_run(&g3, &cfg8, &u8, |_| {});
    mode_excess = mode_excess.max(decay.mode_excess);
    let recs = &decay.out.records;

    rep.add(7, "pointwise spectral bound", mode_excess <= 1e-14, format!("max excess {mode_excess:.3e} (tol 1e-14)"));

    let late: Vec<&DiagnosticsRecord> = recs.iter().filter(|r| r.t >= 0.05).collect();
    let monotone = late.windows(2).all(|w| w[1].energy <= w[0].energy && w[1].enstrophy <= w[0].enstrophy);
    let kratio = recs.last().unwrap().energy / recs[0].energy;
    let r0 = recs[0].numbers.r0;
    rep.add(
        8,
        "small-Reynolds decay",
        monotone && kratio <= 0.01 && (r0 - 0.4).abs() < 1e-12,
        format!("R0 = {r0:.4}, monotone after t=0.05: {monotone}, K(T)/K(0) = {kratio:.3e} at T = {t_end8}"),
    );

    let decreasing = diffs.iter().all(|(_, d)| d.windows(2).all(|w| w[1] < w[0]));
    rep.add(
        9,
        "delta convergence",
        decreasing,
        diffs.iter().map(|(f, d)| format!("{f}: {:.3e} {:.3e} {:.3e}", d[0], d[1], d[2])).collect::<Vec<_>>().join("; "),
    );

    let peak = cases.iter().map(|c| c.el.out.max_grad_ell).fold(0.0, f64::max);
    let resets: Vec<_> = cases.iter().flat_map(|c| c.el.out.restarts.iter()).collect();
    let reset_ell = max_of(resets.iter(), |r| r.after.max_grad_ell);
    let reset_wc = max_of(resets.iter(), |r| r.after.weber_cauchy_err);
    rep.add(
        10,
        "restart guarantee",
        peak <= 1.05 * G && reset_ell == 0.0 && reset_wc <= 1e-10 && !resets.is_empty(),
        format!(
            "sup|grad l| = {peak:.5} (limit {:.3}), {} resets, |grad l| after reset {reset_ell:e}, curl/Cauchy at reset {reset_wc:.3e}",
            1.05 * G,
            resets.len()
        ),
    );

    let twod: Vec<&ElCase> = cases.iter().filter(|c| c.dim == 2).collect();
    let cauchy2 = max_of(twod.iter().flat_map(|c| el_records(&c.el.out)), |e| e.measures.weber_cauchy_err);
    let (g3e, u3e) = embed_planar(&g2, &twod[1].el.out.final_state.velocity(&g2).unwrap());
    let w3e = g3e.curl(&u3e).unwrap();
    let alpha3 = stretching_alpha(&g3e, &u3e, &w3e).unwrap().into_iter().flatten().fold(0.0, |a: f64, x| a.max(x.abs()));
    let alpha2 = max_of(twod.iter().flat_map(|c| c.el.out.records.iter()), |r| r.alpha_max.abs());
    rep.add(
        11,
        "planar reductions",
        cauchy2 <= 1e-8 && alpha3 == 0.0 && alpha2 == 0.0,
        format!("omega vs det*zeta {cauchy2:.3e} (tol 1e-8); alpha of embedded flow {alpha3:e}, recorded {alpha2:e}"),
    );

    let max_ens = max_of(recs.iter(), |r| r.enstrophy / g3.volume());
    let y = max_of(late.iter().filter(|r| r.t >= 0.05 * t_end8), |r| r.y_gevrey.unwrap());
    rep.add(12, "Gevrey monitor", y <= 2.0 * max_ens, format!("max y = {y:.4e} vs 2 max sum|w|^2 = {:.4e}", 2.0 * max_ens));

    let mut bmax = nitns::diagnostics::DisplacementBounds::default();
    for c in &cases {
        if let Some(e) = c.el.out.records.last().and_then(|r| r.el.as_ref()) {
            bmax = bmax.max(e.bounds_max);
        }
        for e in el_records(&c.el.out) {
            bmax = bmax.max(e.bounds);
        }
    }
    rep.add(
        13,
        "explicit-constant displacement bounds",
        bmax.ltwo_ratio <= 1.0 && bmax.nablaeltwo_ratio <= 1.0,
        format!(
            "ltwo {:.4} nablaeltwo {:.4} (<= 1); report-only: linf {:.3e} lbound {:?} grl {:?}",
            bmax.ltwo_ratio, bmax.nablaeltwo_ratio, bmax.linf_ratio, bmax.lbound_ratio, bmax.grl_ratio
        ),
    );

    // coefficient evolution law on a perturbed shear flow
    let gs = Grid::new(2, 32).unwrap();
    let shear = gs.field_from_fn(Rank::Vector, |x| vec![x[1].sin(), 0.0]);
    let p = random_band(&gs, 3, 1.0, 4.0, 1.0).unwrap();
    let us = shear.axpy(0.05 * shear.l2(&gs) / p.l2(&gs), &p);
    let target = 0.05;
    let residuals: Vec<f64> = [2e-3, 1e-3]
        .into_iter()
        .map(|dt| {
            let mut cfg = SolverConfig::new(Formulation::EulerianLagrangian, NU, dt, target + 2.0 * dt).with_output_every(1000);
            cfg.el.g = G;
            let mut states: Vec<ElState> = Vec::new();
            observed_run(&gs, &cfg, &us, |s| {
                if let State::El(s) = s {
                    if (s.t - target).abs() < 1.5 * dt {
                        states.push(s.clone());
                    }
                }
            });
            let i = states.iter().position(|s| (s.t - target).abs() < 0.5 * dt).unwrap();
            curveq_residual(&gs, &states[i - 1], &states[i], &states[i + 1], NU, cfg.el.det_guard).unwrap()
        })
        .collect();
    let order14 = (residuals[0] / residuals[1]).log2();
    rep.add(
        14,
        "coefficient evolution consistency",
        order14 >= 1.0,
        format!("residual {:.3e} -> {:.3e}, order {order14:.2}", residuals[0], residuals[1]),
    );

    let failed: Vec<String> = rep.lines.iter().filter(|l| !l.2).map(|l| format!("{} {}", l.0, l.1)).collect();
    println!("acceptance: {}/{} criteria pass", rep.lines.len() - failed.len(), rep.lines.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
