use log::{info, warn};

use super::{cfl_limit, step, FlowState, Formulation, SolverConfig};
use crate::diagnostics::{DiagnosticsConfig, DiagnosticsRecord, Tracker};
use crate::el::{el_step, ElMeasures, ElState};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Enstrophy growth factor treated as a blow-up.
pub const BLOW_UP_GROWTH: f64 = 1e12;

/// State of any formulation.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Flow(FlowState),
    El(ElState),
}

impl State {
    /// Initial state of `formulation` from a velocity field at time `t`.
    pub fn from_velocity(grid: &Grid, formulation: Formulation, u: Field, t: f64, evolve_zeta: bool) -> Result<Self> {
        match formulation {
            Formulation::EulerianLagrangian => Ok(Self::El(ElState::new(grid, u, t, evolve_zeta)?)),
            f => Ok(Self::Flow(FlowState::from_velocity(grid, f, u, t)?)),
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            Self::Flow(s) => s.t,
            Self::El(s) => s.t,
        }
    }

    pub fn velocity(&self, grid: &Grid) -> Result<Field> {
        match self {
            Self::Flow(s) => s.velocity(grid),
            Self::El(s) => s.velocity(grid),
        }
    }
}

/// One reset of the near-identity map.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartEvent {
    pub t: f64,
    /// `sup |∇ℓ|_F` that triggered the reset.
    pub peak: f64,
    /// Measures of the freshly reset state.
    pub after: ElMeasures,
}

/// Passed to the step observer after every accepted step.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub state: &'a State,
    /// State at the end of the step before a reset, when one happened.
    pub before_reset: Option<&'a ElState>,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    pub steps: usize,
    pub restarts: Vec<RestartEvent>,
    /// Largest `sup |∇ℓ|_F` reached at the end of any step.
    pub max_grad_ell: f64,
}

/// A run that stopped early; keeps everything produced up to the failure.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub records: Vec<DiagnosticsRecord>,
    pub last_good: State,
    pub restarts: Vec<RestartEvent>,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (last good t = {})", self.error, self.last_good.t())
    }
}

impl std::error::Error for Failure {}

fn diagnostics_config(cfg: &SolverConfig) -> DiagnosticsConfig {
    DiagnosticsConfig {
        nu: cfg.nu,
        horizon: cfg.horizon.unwrap_or(cfg.t_end),
        gevrey_start: cfg.gevrey_start,
        g: cfg.el.g,
        s0: cfg.el.s0,
        analytic: cfg.analytic,
        paired: match cfg.formulation {
            Formulation::Vortex | Formulation::Cotangent => cfg.mollifier,
            _ => None,
        },
    }
}

struct Runner<'a> {
    grid: &'a Grid,
    cfg: &'a SolverConfig,
    tracker: Tracker,
    records: Vec<DiagnosticsRecord>,
    restarts: Vec<RestartEvent>,
    max_grad_ell: f64,
}

impl Runner<'_> {
    fn observe(&mut self, state: &State) -> Result<Field> {
        let u = state.velocity(self.grid)?;
        let ens = self.tracker.observe_flow(self.grid, state.t(), &u)?;
        let ens0 = self.tracker.initial_enstrophy();
        if !ens.is_finite() || (ens0 > 0.0 && ens > BLOW_UP_GROWTH * ens0) {
            return Err(Error::BlowUp { t: state.t(), reason: format!("enstrophy {ens:e} from {ens0:e}") });
        }
        if let State::El(s) = state {
            self.tracker.observe_displacement(self.grid, s)?;
        }
        Ok(u)
    }

    fn record(&mut self, state: &State, u: &Field) -> Result<()> {
        let rec = match state {
            State::El(s) => {
                let m = ElMeasures::measure(self.grid, s, self.cfg.el.det_guard)?;
                self.tracker.record(self.grid, u, Some((s, &m)))?
            }
            State::Flow(_) => self.tracker.record(self.grid, u, None)?,
        };
        self.records.push(rec);
        Ok(())
    }

    fn advance(&mut self, state: &State, dt: f64, observer: &mut dyn FnMut(&StepEvent)) -> Result<State> {
        match state {
            State::Flow(s) => {
                let next = State::Flow(step(self.grid, self.cfg, s, dt)?);
                observer(&StepEvent { state: &next, before_reset: None, dt });
                Ok(next)
            }
            State::El(s) => {
                let out = el_step(self.grid, s, self.cfg.nu, dt, self.cfg.scheme, &self.cfg.el)?;
                self.max_grad_ell = self.max_grad_ell.max(out.grad_ell_peak);
                if let Some(before) = &out.before_reset {
                    self.tracker.observe_displacement(self.grid, before)?;
                    let after = ElMeasures::measure(self.grid, &out.state, self.cfg.el.det_guard)?;
                    self.restarts.push(RestartEvent { t: out.state.t, peak: out.grad_ell_peak, after });
                }
                let next = State::El(out.state.clone());
                observer(&StepEvent { state: &next, before_reset: out.before_reset.as_ref(), dt: out.dt });
                Ok(next)
            }
        }
    }

    fn step_size(&self, state: &State, u: &Field) -> Result<f64> {
        let limit = cfl_limit(self.grid, u, self.cfg.cfl)?;
        let remaining = self.cfg.t_end - state.t();
        let dt = match self.cfg.dt {
            Some(dt) if dt > limit => {
                warn!("t = {:.6}: dt {dt:e} exceeds the CFL limit {limit:e}, reducing", state.t());
                limit
            }
            Some(dt) => dt,
            None => limit.min(remaining.max(0.0)),
        };
        Ok(dt.min(remaining))
    }
}

/// Advances `initial` to `cfg.t_end`, recording diagnostics every
/// `cfg.output_every` steps and at both ends.
pub fn run(grid: &Grid, cfg: &SolverConfig, initial: State) -> std::result::Result<RunOutput, Failure> {
    run_observed(grid, cfg, initial, &mut |_| {})
}

/// [`run`] with a callback invoked after every accepted step.
pub fn run_observed(
    grid: &Grid,
    cfg: &SolverConfig,
    initial: State,
    observer: &mut dyn FnMut(&StepEvent),
) -> std::result::Result<RunOutput, Failure> {
    let mut runner = Runner {
        grid,
        cfg,
        tracker: Tracker::new(diagnostics_config(cfg)),
        records: Vec::new(),
        restarts: Vec::new(),
        max_grad_ell: 0.0,
    };
    let mut state = initial;
    let mut steps = 0;
    let result = (|| -> Result<()> {
        cfg.validate()?;
        let mut u = runner.observe(&state)?;
        runner.record(&state, &u)?;
        // tolerance keeps a fixed-step run from taking a sliver step at the end
        let tol = 1e-9 * cfg.dt.unwrap_or(cfg.t_end).max(f64::MIN_POSITIVE);
        while cfg.t_end - state.t() > tol {
            let dt = runner.step_size(&state, &u)?;
            if !(dt > 0.0) {
                return Err(Error::BlowUp { t: state.t(), reason: format!("step size collapsed to {dt:e}") });
            }
            let next = runner.advance(&state, dt, observer)?;
            u = runner.observe(&next)?;
            state = next;
            steps += 1;
            if steps % cfg.output_every == 0 || cfg.t_end - state.t() <= tol {
                runner.record(&state, &u)?;
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => {
            info!("{} reached t = {} in {steps} steps ({} restarts)", cfg.formulation, state.t(), runner.restarts.len());
            Ok(RunOutput {
                records: runner.records,
                final_state: state,
                steps,
                restarts: runner.restarts,
                max_grad_ell: runner.max_grad_ell,
            })
        }
        Err(error) => Err(Failure { error, records: runner.records, last_good: state, restarts: runner.restarts }),
    }
}
