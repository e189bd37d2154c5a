use crate::el::{ElMeasures, ElState};
use crate::error::Result;
use crate::mollifier::Mollifier;
use crate::spectral::{Field, Grid};

use super::energy::{dissipation_rate, kinetic_energy, vortex_energy_pair};
use super::norms::{analytic_norm, gevrey_y};
use super::numbers::{k_infinity, nondim_numbers, AnalyticScale, BoundParams, DisplacementBounds, NondimNumbers, WindowIntegral};
use super::vorticity::{alpha_max, direction_dissipation, interpolation_ratio, mode_bound_excess, stretching_alpha, vorticity_l1};

/// Time-series columns, in output order.
pub const CSV_COLUMNS: [&str; 20] = [
    "t",
    "K",
    "eps",
    "enstrophy",
    "omega_l1",
    "dir_diss",
    "alpha_max",
    "u_linf",
    "suf1",
    "suf2",
    "maxu",
    "y_gevrey",
    "budget_residual",
    "max_grad_ell",
    "logdet_err",
    "weber_cauchy_err",
    "restarts",
    "G",
    "rho",
    "tau",
];

/// Settings of the monitored quantities.
#[derive(Clone, Debug)]
pub struct DiagnosticsConfig {
    pub nu: f64,
    /// Time scale `T`.
    pub horizon: f64,
    /// Gevrey window start as a fraction of `T`.
    pub gevrey_start: f64,
    /// Restart threshold reported with the numbers.
    pub g: f64,
    pub s0: f64,
    /// Extra analytic norm `(λ, p)` to report.
    pub analytic: Option<(f64, u32)>,
    /// Mollifier of a vortex-type run; enables the paired energy budget.
    pub paired: Option<Mollifier>,
}

/// Vortex-method energy pairing at one output.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedRecord {
    pub energy: f64,
    pub dissipation: f64,
    /// Paired energy plus integrated paired dissipation minus its initial value.
    pub residual: f64,
    pub dual_path_err: f64,
    pub analytic_energy: Option<f64>,
}

/// Eulerian–Lagrangian quantities at one output.
#[derive(Clone, Debug, PartialEq)]
pub struct ElRecord {
    pub measures: ElMeasures,
    pub restarts: usize,
    pub t1: f64,
    pub bounds: DisplacementBounds,
    /// Running maxima of the explicit-constant ratios over every step so far.
    pub bounds_max: DisplacementBounds,
}

/// Everything monitored at one output step.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub eps: f64,
    pub enstrophy: f64,
    pub omega_l1: f64,
    pub dir_diss: f64,
    pub alpha_max: f64,
    pub u_linf: f64,
    pub suf1: f64,
    pub suf2: f64,
    pub maxu: f64,
    /// `y(t)`, present once `t` is inside the Gevrey window.
    pub y_gevrey: Option<f64>,
    pub analytic_norm: Option<f64>,
    /// `K(t) + ∫ε − K(0)`.
    pub budget_residual: f64,
    pub paired: Option<PairedRecord>,
    pub interp_ratio: f64,
    pub mode_bound_excess: f64,
    /// `∫‖u‖_∞ / K_∞` with the universal constant set to 1.
    pub maxu_ratio: Option<f64>,
    pub numbers: NondimNumbers,
    pub el: Option<ElRecord>,
}

impl DiagnosticsRecord {
    /// Values in [`CSV_COLUMNS`] order; paired runs report their paired residual.
    pub fn csv_values(&self) -> [Option<f64>; 20] {
        let el = self.el.as_ref();
        let residual = self.paired.as_ref().map_or(self.budget_residual, |p| p.residual);
        [
            Some(self.t),
            Some(self.energy),
            Some(self.eps),
            Some(self.enstrophy),
            Some(self.omega_l1),
            Some(self.dir_diss),
            Some(self.alpha_max),
            Some(self.u_linf),
            Some(self.suf1),
            Some(self.suf2),
            Some(self.maxu),
            self.y_gevrey,
            Some(residual),
            el.map(|e| e.measures.max_grad_ell),
            el.map(|e| e.measures.logdet_err),
            el.map(|e| e.measures.weber_cauchy_err),
            el.map(|e| e.restarts as f64),
            self.numbers.g_number,
            self.numbers.rho,
            self.numbers.tau,
        ]
    }
}

#[derive(Clone, Copy, Debug)]
struct Last {
    t: f64,
    eps: f64,
    enstrophy: f64,
    u_linf: f64,
    paired_diss: f64,
}

/// Per-step accumulator turning a trajectory into [`DiagnosticsRecord`]s.
///
/// `observe_flow` must see every step so the time integrals are trapezoid
/// sums at the step resolution.
#[derive(Clone, Debug)]
pub struct Tracker {
    cfg: DiagnosticsConfig,
    k0: Option<f64>,
    enstrophy0: f64,
    enstrophy_max: f64,
    energy: f64,
    last: Option<Last>,
    int_eps: f64,
    suf1: f64,
    suf2: f64,
    maxu: f64,
    paired0: Option<f64>,
    paired_energy: f64,
    int_paired: f64,
    window: WindowIntegral,
    bounds_max: DisplacementBounds,
}

fn paired_spectral(grid: &Grid, u: &Field, m: &Mollifier, nu: f64) -> (f64, f64) {
    let j = m.multipliers(grid);
    let k2 = grid.k2();
    let (mut e, mut d) = (0.0, 0.0);
    for c in u.comps() {
        for k in 0..grid.len() {
            let a = j[k] * c[k].norm_sqr();
            e += a;
            d += a * k2[k];
        }
    }
    (0.5 * grid.volume() * e, nu * grid.volume() * d)
}

impl Tracker {
    pub fn new(cfg: DiagnosticsConfig) -> Self {
        Self {
            cfg,
            k0: None,
            enstrophy0: 0.0,
            enstrophy_max: 0.0,
            energy: 0.0,
            last: None,
            int_eps: 0.0,
            suf1: 0.0,
            suf2: 0.0,
            maxu: 0.0,
            paired0: None,
            paired_energy: 0.0,
            int_paired: 0.0,
            window: WindowIntegral::default(),
            bounds_max: DisplacementBounds::default(),
        }
    }

    pub fn config(&self) -> &DiagnosticsConfig {
        &self.cfg
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.k0
    }

    pub fn initial_enstrophy(&self) -> f64 {
        self.enstrophy0
    }

    /// Largest enstrophy seen so far (`𝓔`).
    pub fn max_enstrophy(&self) -> f64 {
        self.enstrophy_max
    }

    /// Accumulates the time integrals with the velocity at time `t`; returns the enstrophy.
    pub fn observe_flow(&mut self, grid: &Grid, t: f64, u: &Field) -> Result<f64> {
        let nu = self.cfg.nu;
        let energy = kinetic_energy(grid, u);
        let enstrophy = dissipation_rate(grid, u, 1.0);
        let eps = nu * enstrophy;
        let u_linf = grid.to_physical(u)?.max_norm();
        let (pe, pd) = match &self.cfg.paired {
            Some(m) => paired_spectral(grid, u, m, nu),
            None => (0.0, 0.0),
        };
        match self.last {
            None => {
                self.k0 = Some(energy);
                self.enstrophy0 = enstrophy;
                if self.cfg.paired.is_some() {
                    self.paired0 = Some(pe);
                }
            }
            Some(l) => {
                let h = 0.5 * (t - l.t);
                self.int_eps += h * (eps + l.eps);
                self.suf1 += h * (enstrophy * enstrophy + l.enstrophy * l.enstrophy);
                self.suf2 += h * (u_linf * u_linf + l.u_linf * l.u_linf);
                self.maxu += h * (u_linf + l.u_linf);
                self.int_paired += h * (pd + l.paired_diss);
            }
        }
        self.enstrophy_max = self.enstrophy_max.max(enstrophy);
        self.energy = energy;
        self.paired_energy = pe;
        self.last = Some(Last { t, eps, enstrophy, u_linf, paired_diss: pd });
        Ok(enstrophy)
    }

    fn bound_params(&self, numbers: &NondimNumbers) -> BoundParams {
        let (nu, horizon) = (self.cfg.nu, self.cfg.horizon);
        let k0 = self.k0.unwrap_or(0.0);
        BoundParams { k0, k_inf: k_infinity(k0, nu, horizon), nu, scale: AnalyticScale::new(numbers, nu, horizon) }
    }

    /// Updates the reset-window integral of `∫|∇ℓ|²` and the running maxima of
    /// the explicit-constant displacement ratios. Call on every EL state,
    /// including the one just before a reset.
    pub fn observe_displacement(&mut self, grid: &Grid, s: &ElState) -> Result<DisplacementBounds> {
        let integral = self.window.push(s.t, s.t1, dissipation_rate(grid, &s.ell, 1.0));
        let dt = s.t - s.t1;
        let k0 = self.k0.unwrap_or(0.0);
        let mut b = DisplacementBounds::default();
        if dt > 0.0 && k0 > 0.0 {
            b.ltwo_ratio = 2.0 * kinetic_energy(grid, &s.ell) / (2.0 * k0 * dt * dt);
            b.nablaeltwo_ratio = if self.cfg.nu > 0.0 { integral / (k0 * dt * dt / self.cfg.nu) } else { 0.0 };
        }
        self.bounds_max = self.bounds_max.max(b);
        Ok(b)
    }

    pub fn numbers(&self) -> NondimNumbers {
        nondim_numbers(
            self.k0.unwrap_or(0.0),
            &[self.enstrophy0, self.enstrophy_max],
            self.cfg.nu,
            self.cfg.horizon,
            self.cfg.g,
            self.cfg.s0,
        )
    }

    /// Full record at the last observed time; `u` must be the velocity passed
    /// to the latest `observe_flow`.
    pub fn record(&self, grid: &Grid, u: &Field, el: Option<(&ElState, &ElMeasures)>) -> Result<DiagnosticsRecord> {
        let last = self.last.expect("record before any observation");
        let t = last.t;
        let omega = grid.curl(u)?;
        let alpha = stretching_alpha(grid, u, &omega)?;
        let s = self.cfg.gevrey_start * self.cfg.horizon;
        let y_gevrey = if t >= s && self.cfg.horizon > 0.0 {
            gevrey_y(grid, &omega, self.cfg.nu, self.cfg.horizon, s, t).ok()
        } else {
            None
        };
        let analytic_norm = match self.cfg.analytic {
            Some((lambda, p)) => analytic_norm(grid, u, lambda, p).ok(),
            None => None,
        };
        let paired = match (&self.cfg.paired, self.paired0) {
            (Some(m), Some(p0)) => {
                let p = vortex_energy_pair(grid, u, m, self.cfg.nu)?;
                Some(PairedRecord {
                    energy: p.energy,
                    dissipation: p.dissipation,
                    residual: self.paired_energy + self.int_paired - p0,
                    dual_path_err: p.dual_path_error(),
                    analytic_energy: p.analytic_energy,
                })
            }
            _ => None,
        };
        let numbers = self.numbers();
        let k0 = self.k0.unwrap_or(0.0);
        let k_inf = k_infinity(k0, self.cfg.nu, self.cfg.horizon);
        let el = match el {
            Some((state, measures)) => {
                let params = self.bound_params(&numbers);
                let bounds = DisplacementBounds::measure(grid, &state.ell, state.t, state.t1, self.window.value(), &params)?;
                Some(ElRecord {
                    measures: *measures,
                    restarts: state.restart_count,
                    t1: state.t1,
                    bounds,
                    bounds_max: self.bounds_max.max(DisplacementBounds {
                        ltwo_ratio: bounds.ltwo_ratio,
                        nablaeltwo_ratio: bounds.nablaeltwo_ratio,
                        ..Default::default()
                    }),
                })
            }
            None => None,
        };
        Ok(DiagnosticsRecord {
            t,
            energy: self.energy,
            eps: last.eps,
            enstrophy: last.enstrophy,
            omega_l1: vorticity_l1(grid, &omega)?,
            dir_diss: direction_dissipation(grid, &omega)?,
            alpha_max: alpha_max(&alpha),
            u_linf: last.u_linf,
            suf1: self.suf1,
            suf2: self.suf2,
            maxu: self.maxu,
            y_gevrey,
            analytic_norm,
            budget_residual: self.energy + self.int_eps - k0,
            paired,
            interp_ratio: interpolation_ratio(grid, last.u_linf, &omega)?,
            mode_bound_excess: mode_bound_excess(grid, u, &omega)?,
            maxu_ratio: (k_inf.is_finite() && k_inf > 0.0).then(|| self.maxu / k_inf),
            numbers,
            el,
        })
    }
}
