//! Time stepping for the direct, mollified, vortex and cotangent formulations.

mod integrator;
pub mod rhs;
mod run;

use std::fmt;
use std::str::FromStr;

pub use integrator::{Integrator, Spectra};
pub use rhs::{cotangent_rhs, mollified_rhs, nse_rhs, vortex_rhs};
pub use run::{run, run_observed, Failure, RestartEvent, RunOutput, State, StepEvent, BLOW_UP_GROWTH};

use crate::el::ElParams;
use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::spectral::{Field, Grid, Rank};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Rk2,
    Rk4,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk2" => Ok(Self::Rk2),
            "rk4" => Ok(Self::Rk4),
            other => Err(Error::config(format!("unknown scheme `{other}` (rk2 | rk4)"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rk2 => "rk2",
            Self::Rk4 => "rk4",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Direct,
    Mollified,
    Vortex,
    Cotangent,
    EulerianLagrangian,
}

impl Formulation {
    pub const ALL: [Formulation; 5] =
        [Self::Direct, Self::Mollified, Self::Vortex, Self::Cotangent, Self::EulerianLagrangian];

    /// Numeric tag stored in snapshot headers.
    pub fn tag(self) -> u32 {
        match self {
            Self::Direct => 0,
            Self::Mollified => 1,
            Self::Vortex => 2,
            Self::Cotangent => 3,
            Self::EulerianLagrangian => 4,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag() == tag)
    }

    pub fn needs_mollifier(self) -> bool {
        matches!(self, Self::Mollified | Self::Vortex | Self::Cotangent)
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Self::Direct),
            "mollified" => Ok(Self::Mollified),
            "vortex" => Ok(Self::Vortex),
            "cotangent" => Ok(Self::Cotangent),
            "eulerian_lagrangian" | "el" => Ok(Self::EulerianLagrangian),
            other => Err(Error::config(format!("unknown formulation `{other}`"))),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Mollified => "mollified",
            Self::Vortex => "vortex",
            Self::Cotangent => "cotangent",
            Self::EulerianLagrangian => "eulerian_lagrangian",
        })
    }
}

/// Everything a trajectory needs besides the grid and the initial state.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub nu: f64,
    /// Fixed step; `None` picks every step from the CFL target.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub formulation: Formulation,
    pub mollifier: Option<Mollifier>,
    pub scheme: Scheme,
    /// Steps between diagnostics records.
    pub output_every: usize,
    pub el: ElParams,
    /// Time scale `T` used by the Gevrey monitor and the non-dimensional numbers.
    pub horizon: Option<f64>,
    /// Gevrey window start `s` as a fraction of the horizon.
    pub gevrey_start: f64,
    /// Extra analytic norm `(λ, p)` of the velocity to record.
    pub analytic: Option<(f64, u32)>,
}

impl SolverConfig {
    pub fn new(formulation: Formulation, nu: f64, dt: f64, t_end: f64) -> Self {
        Self {
            nu,
            dt: Some(dt),
            cfl: 0.5,
            t_end,
            formulation,
            mollifier: None,
            scheme: Scheme::Rk4,
            output_every: 1,
            el: ElParams::default(),
            horizon: None,
            gevrey_start: 0.05,
            analytic: None,
        }
    }

    pub fn with_mollifier(mut self, m: Mollifier) -> Self {
        self.mollifier = Some(m);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_output_every(mut self, every: usize) -> Self {
        self.output_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::config(format!("nu must be finite and >= 0, got {}", self.nu)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.cfl > 0.0) {
            return Err(Error::config(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::config("output interval must be at least one step"));
        }
        if self.formulation.needs_mollifier() && self.mollifier.is_none() {
            return Err(Error::config(format!("formulation {} needs a mollifier", self.formulation)));
        }
        self.el.validate()
    }
}

/// Prognostic variable of the four Eulerian formulations.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowVariable {
    Velocity(Field),
    Vorticity(Field),
    Cotangent(Field),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub var: FlowVariable,
}

impl FlowState {
    pub fn field(&self) -> &Field {
        match &self.var {
            FlowVariable::Velocity(f) | FlowVariable::Vorticity(f) | FlowVariable::Cotangent(f) => f,
        }
    }

    /// Velocity carried by the state (Biot–Savart or projection as needed).
    pub fn velocity(&self, grid: &Grid) -> Result<Field> {
        match &self.var {
            FlowVariable::Velocity(u) => Ok(u.clone()),
            FlowVariable::Vorticity(w) => grid.biot_savart(w),
            FlowVariable::Cotangent(w) => {
                let mut u = grid.leray_project(w)?;
                u.remove_mean();
                Ok(u)
            }
        }
    }

    /// Initial state for `formulation` from a velocity field.
    pub fn from_velocity(grid: &Grid, formulation: Formulation, u: Field, t: f64) -> Result<Self> {
        let var = match formulation {
            Formulation::Direct | Formulation::Mollified => FlowVariable::Velocity(u),
            Formulation::Vortex => FlowVariable::Vorticity(grid.curl(&u)?),
            Formulation::Cotangent => FlowVariable::Cotangent(u),
            Formulation::EulerianLagrangian => {
                return Err(Error::config("the Eulerian-Lagrangian formulation uses ElState"))
            }
        };
        Ok(Self { t, var })
    }
}

/// Largest stable step `cfl · h / max|u|` (infinite for a resting fluid).
pub fn cfl_limit(grid: &Grid, u: &Field, cfl: f64) -> Result<f64> {
    let umax = grid.to_physical(u)?.max_norm();
    Ok(if umax > 0.0 { cfl * grid.spacing() / umax } else { f64::INFINITY })
}

/// Advances one of the Eulerian formulations by `dt`.
pub fn step(grid: &Grid, cfg: &SolverConfig, state: &FlowState, dt: f64) -> Result<FlowState> {
    let integ = Integrator::new(grid, cfg.nu, cfg.scheme);
    let m = cfg.mollifier.as_ref();
    let (rank, f) = match &state.var {
        FlowVariable::Velocity(u) => (Rank::Vector, u),
        FlowVariable::Vorticity(w) => (w.rank(), w),
        FlowVariable::Cotangent(w) => (Rank::Vector, w),
    };
    let var_kind = &state.var;
    let y = f.comps().to_vec();
    let next = integ.step(&y, state.t, dt, |y, _| {
        let f = Field::from_parts(rank, y.clone());
        let r = match var_kind {
            FlowVariable::Velocity(_) => match cfg.formulation {
                Formulation::Mollified => mollified_rhs(grid, &f, m)?,
                _ => nse_rhs(grid, &f)?,
            },
            FlowVariable::Vorticity(_) => vortex_rhs(grid, &f, m)?,
            FlowVariable::Cotangent(_) => cotangent_rhs(grid, &f, m)?,
        };
        Ok(r.into_comps())
    })?;
    let field = Field::from_parts(rank, next);
    let var = match &state.var {
        FlowVariable::Velocity(_) => FlowVariable::Velocity(field),
        FlowVariable::Vorticity(_) => FlowVariable::Vorticity(field),
        FlowVariable::Cotangent(_) => FlowVariable::Cotangent(field),
    };
    Ok(FlowState { t: state.t + dt, var })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_green(g: &Grid) -> Field {
        g.field_from_fn(Rank::Vector, |x| vec![x[0].cos() * x[1].sin(), -x[0].sin() * x[1].cos()])
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = Grid::new(2, 32).unwrap();
        let u0 = taylor_green(&g);
        let cfg = SolverConfig::new(Formulation::Direct, 0.1, 1e-3, 0.1);
        let mut s = FlowState::from_velocity(&g, Formulation::Direct, u0.clone(), 0.0).unwrap();
        for _ in 0..100 {
            s = step(&g, &cfg, &s, 1e-3).unwrap();
        }
        let want = u0.scaled((-2.0f64 * 0.1 * s.t).exp());
        assert!(s.field().sub(&want).max_abs() <= 1e-8 * want.max_abs());
    }

    #[test]
    fn tags_round_trip() {
        for f in Formulation::ALL {
            assert_eq!(Formulation::from_tag(f.tag()), Some(f));
            assert_eq!(f.to_string().parse::<Formulation>().unwrap(), f);
        }
    }

    #[test]
    fn validation() {
        let mut cfg = SolverConfig::new(Formulation::Vortex, 0.1, 1e-3, 1.0);
        assert!(cfg.validate().is_err());
        cfg.mollifier = Some(Mollifier::new(crate::mollifier::MollifierKind::Poisson, 0.1).unwrap());
        assert!(cfg.validate().is_ok());
        cfg.nu = -1.0;
        assert!(cfg.validate().is_err());
    }
}
