use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::initial::{random_band, taylor_green};
use crate::diagnostics::{kinetic_energy, mode_bound_excess};
use crate::error::{Error, Result};
use crate::mollifier::{Mollifier, MollifierKind};
use crate::solvers::{run, run_observed, Formulation, SolverConfig, State};
use crate::spectral::{Grid, Rank};
use crate::tensor::{cauchy_identity_residuals, Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Spectral,
    Energy,
    Cauchy,
    Consistency,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Self::Algebra, Self::Spectral, Self::Energy, Self::Cauchy, Self::Consistency];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown suite `{s}` (algebra | spectral | energy | cauchy | consistency)")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Algebra => "algebra",
            Self::Spectral => "spectral",
            Self::Energy => "energy",
            Self::Cauchy => "cauchy",
            Self::Consistency => "consistency",
        })
    }
}

/// One measured property against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} check={} value={:e} tol={:e} status={}",
            self.suite,
            self.name,
            self.value,
            self.tolerance,
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

fn random_mat(rng: &mut ChaCha8Rng) -> Mat3 {
    [[0.0; 3]; 3].map(|row| row.map(|_: f64| rng.gen_range(-2.0..=2.0)))
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    [0.0; 3].map(|_: f64| rng.gen_range(-2.0..=2.0))
}

/// Largest residuals of the Cauchy-action identities over `samples` random
/// `(q, M, N)`; with `singular` the third column of `M` is a combination of the
/// first two.
pub fn cauchy_algebra_residuals(samples: usize, seed: u64, singular: bool) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let q = random_vec(&mut rng);
        let mut m = random_mat(&mut rng);
        let n = random_mat(&mut rng);
        if singular {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for row in &mut m {
                row[2] = a * row[0] + b * row[1];
            }
        }
        let r = cauchy_identity_residuals(q, &m, &n);
        worst = [worst[0].max(r.cyc), worst[1].max(r.idd), worst[2].max(r.nid)];
    }
    worst
}

fn algebra() -> Vec<Check> {
    let [cyc, idd, nid] = cauchy_algebra_residuals(1000, 11, false);
    let [scyc, sidd, snid] = cauchy_algebra_residuals(1000, 12, true);
    let c = |name, value| Check { suite: Suite::Algebra, name, value, tolerance: 1e-12 };
    vec![c("cyc", cyc), c("idd", idd), c("nid", nid), c("cyc_singular", scyc), c("idd_singular", sidd), c("nid_singular", snid)]
}

fn spectral() -> Result<Vec<Check>> {
    let g = Grid::new(3, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let raw: Vec<Vec<f64>> = (0..3).map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let phys = crate::spectral::PhysicalField::new(&g, Rank::Vector, raw)?;
    let back = g.to_physical(&g.to_spectral(&phys)?)?;
    let round_trip = phys
        .comps()
        .iter()
        .zip(back.comps())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let mut u = g.leray_project(&g.dealias(&g.to_spectral(&phys)?))?;
    u.remove_mean();
    let div = g.divergence(&u)?.max_abs() / u.max_abs();
    let omega = g.curl(&u)?;
    let bs = g.biot_savart(&omega)?.sub(&u).max_abs() / u.max_abs();
    let excess = mode_bound_excess(&g, &u, &omega)?;
    let c = |name, value, tolerance| Check { suite: Suite::Spectral, name, value, tolerance };
    Ok(vec![
        c("fft_round_trip", round_trip, 1e-13),
        c("leray_divergence", div, 1e-12),
        c("biot_savart_inverse", bs, 1e-12),
        c("mode_bound_excess", excess, 1e-14),
    ])
}

fn energy() -> Result<Vec<Check>> {
    let g = Grid::new(2, 32)?;
    let u0 = taylor_green(&g).axpy(0.05, &random_band(&g, 3, 1.0, 6.0, 1.0)?);
    let mut checks = Vec::new();
    for f in [Formulation::Direct, Formulation::Mollified, Formulation::Vortex] {
        let mut cfg = SolverConfig::new(f, 0.1, 2e-3, 0.2).with_output_every(10);
        if f.needs_mollifier() {
            cfg = cfg.with_mollifier(Mollifier::new(MollifierKind::Poisson, 0.2)?);
        }
        let s = State::from_velocity(&g, f, u0.clone(), 0.0, false)?;
        let out = run(&g, &cfg, s).map_err(|e| e.error)?;
        let k0 = out.records[0].energy;
        let (residual, dual) = out.records.iter().fold((0.0f64, 0.0f64), |(r, d), rec| match &rec.paired {
            Some(p) => (r.max(p.residual.abs() / out.records[0].paired.as_ref().map_or(k0, |q| q.energy)), d.max(p.dual_path_err)),
            None => (r.max(rec.budget_residual.abs() / k0), d),
        });
        let name = match f {
            Formulation::Direct => "budget_direct",
            Formulation::Mollified => "budget_mollified",
            _ => "budget_vortex_paired",
        };
        checks.push(Check { suite: Suite::Energy, name, value: residual, tolerance: 1e-6 });
        if f == Formulation::Vortex {
            checks.push(Check { suite: Suite::Energy, name: "paired_dual_path", value: dual, tolerance: 1e-12 });
        }
    }
    Ok(checks)
}

fn el_run(dim: usize, n: usize, t_end: f64) -> Result<(Grid, SolverConfig, crate::solvers::RunOutput, crate::spectral::Field)> {
    let g = Grid::new(dim, n)?;
    let u0 = taylor_green(&g);
    let mut cfg = SolverConfig::new(Formulation::EulerianLagrangian, 0.1, 1e-3, t_end).with_output_every(10);
    cfg.el.g = 0.05;
    let s = State::from_velocity(&g, cfg.formulation, u0.clone(), 0.0, false)?;
    let out = run(&g, &cfg, s).map_err(|e| e.error)?;
    Ok((g, cfg, out, u0))
}

fn cauchy() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (dim, n, names) in [(2, 32, ["cauchy_2d", "logdet_2d", "restarted_2d"]), (3, 16, ["cauchy_3d", "logdet_3d", "restarted_3d"])] {
        let (_, _, out, _) = el_run(dim, n, 0.15)?;
        let el = out.records.iter().filter_map(|r| r.el.as_ref());
        let (wc, ld) = el.fold((0.0f64, 0.0f64), |(a, b), e| (a.max(e.measures.weber_cauchy_err), b.max(e.measures.logdet_err)));
        let c = |name, value, tolerance| Check { suite: Suite::Cauchy, name, value, tolerance };
        checks.push(c(names[0], wc, 1e-6));
        checks.push(c(names[1], ld, 1e-4));
        checks.push(c(names[2], if out.restarts.is_empty() { 1.0 } else { 0.0 }, 0.0));
    }
    Ok(checks)
}

fn consistency() -> Result<Vec<Check>> {
    let (g, cfg, out, u0) = el_run(2, 32, 0.15)?;
    let direct_cfg = SolverConfig { formulation: Formulation::Direct, ..cfg.clone() };
    let mut excess: f64 = 0.0;
    let s = State::from_velocity(&g, Formulation::Direct, u0, 0.0, false)?;
    let direct = run_observed(&g, &direct_cfg, s, &mut |ev| {
        if let Ok(u) = ev.state.velocity(&g) {
            if let Ok(w) = g.curl(&u) {
                excess = excess.max(mode_bound_excess(&g, &u, &w).unwrap_or(f64::INFINITY));
            }
        }
    })
    .map_err(|e| e.error)?;
    let ue = out.final_state.velocity(&g)?;
    let ud = direct.final_state.velocity(&g)?;
    let gap = ue.sub(&ud).l2(&g) / ud.l2(&g);
    let k = kinetic_energy(&g, &ud);
    let ke = kinetic_energy(&g, &ue);
    let c = |name, value, tolerance| Check { suite: Suite::Consistency, name, value, tolerance };
    Ok(vec![
        c("el_vs_direct_l2", gap, 1e-3),
        c("el_vs_direct_energy", (k - ke).abs() / k, 1e-3),
        c("mode_bound_every_step", excess, 1e-14),
    ])
}

/// Runs one property suite; each check is quick enough for a fresh checkout.
pub fn cmd_verify(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Algebra => Ok(algebra()),
        Suite::Spectral => spectral(),
        Suite::Energy => energy(),
        Suite::Cauchy => cauchy(),
        Suite::Consistency => consistency(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("geometry".parse::<Suite>().is_err());
    }

    #[test]
    fn algebra_suite_passes() {
        let checks = cmd_verify(Suite::Algebra).unwrap();
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(Check::passed), "{checks:?}");
        assert!(checks[0].to_string().starts_with("suite=algebra check=cyc"));
    }

    #[test]
    fn spectral_suite_passes() {
        let checks = cmd_verify(Suite::Spectral).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
    }
}
