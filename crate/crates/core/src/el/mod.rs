//! Diffusive near-identity Eulerian–Lagrangian formulation with restarts.
//!
//! The state is a displacement `ℓ` (so `A = x + ℓ`), a virtual velocity `v`
//! and the evolved `log det ∇A`; the velocity is recovered from the Weber
//! formula `u = P((∇A)ᵀ v)`. Once `sup |∇ℓ|_F` reaches `g` the map is reset
//! to the identity and `v` is reloaded with the current velocity.

pub mod checks;
pub mod kinematics;
pub mod rhs;

pub use checks::{
    commutator_error, curveq_residual, derivs_identity_error, zeta_inequality_ratio, ElMeasures,
};
pub use kinematics::{
    cauchy_vorticity, connection_coeffs, el_curl, el_gradient, grad_map, inverse_grad, weber_velocity,
    Connection, MapGeometry, VirtualVorticity, ZetaSource,
};
pub use rhs::{displacement_rhs, logdet_rhs, virtual_velocity_rhs, virtual_vorticity_rhs};

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::solvers::{Integrator, Scheme, Spectra};
use crate::spectral::{Field, Grid, Rank};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElParams {
    /// Restart threshold on `sup_x |∇ℓ(x)|_F`.
    pub g: f64,
    /// Smallest admissible `|det ∇A|`.
    pub det_guard: f64,
    /// Step halvings attempted after an invertibility failure.
    pub max_retries: u32,
    /// Also evolve the virtual vorticity (3-d only).
    pub evolve_zeta: bool,
    /// Transience fraction bounding the analyticity length.
    pub s0: f64,
}

impl Default for ElParams {
    fn default() -> Self {
        Self { g: 0.1, det_guard: 0.1, max_retries: 5, evolve_zeta: false, s0: 0.25 }
    }
}

impl ElParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g < 1.0) {
            return Err(Error::config(format!("el.g must lie in (0, 1), got {}", self.g)));
        }
        if !(self.det_guard > 0.0 && self.det_guard < 1.0) {
            return Err(Error::config(format!("det guard must lie in (0, 1), got {}", self.det_guard)));
        }
        if !(self.s0 > 0.0 && self.s0 < 1.0) {
            return Err(Error::config(format!("el.s0 must lie in (0, 1), got {}", self.s0)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElState {
    pub ell: Field,
    pub v: Field,
    /// Evolved `log det ∇A`.
    pub logdet: Field,
    /// Evolved virtual vorticity, when enabled.
    pub zeta: Option<Field>,
    pub t: f64,
    /// Time of the last reset.
    pub t1: f64,
    pub restart_count: usize,
}

impl ElState {
    /// Identity map with `v = u₀` at time `t`.
    pub fn new(grid: &Grid, u0: Field, t: f64, evolve_zeta: bool) -> Result<Self> {
        u0.check(grid)?;
        if u0.rank() != Rank::Vector {
            return Err(Error::Rank("initial velocity must be a vector field".into()));
        }
        if evolve_zeta && grid.dim() != 3 {
            return Err(Error::config("evolved virtual vorticity is three-dimensional only"));
        }
        let zeta = if evolve_zeta { Some(grid.curl(&u0)?) } else { None };
        Ok(Self {
            ell: Field::zeros(grid, Rank::Vector),
            v: u0,
            logdet: Field::zeros(grid, Rank::Scalar),
            zeta,
            t,
            t1: t,
            restart_count: 0,
        })
    }

    pub fn velocity(&self, grid: &Grid) -> Result<Field> {
        weber_velocity(grid, &self.ell, &self.v)
    }

    pub fn geometry(&self, grid: &Grid, guard: f64) -> Result<MapGeometry> {
        MapGeometry::new(grid, &self.ell, guard)
    }

    fn stack(&self) -> Spectra {
        let mut y: Spectra = self.ell.comps().to_vec();
        y.extend(self.v.comps().iter().cloned());
        y.extend(self.logdet.comps().iter().cloned());
        if let Some(z) = &self.zeta {
            y.extend(z.comps().iter().cloned());
        }
        y
    }

    fn unstack(&self, dim: usize, mut y: Spectra, t: f64) -> Self {
        let zeta = self.zeta.as_ref().map(|_| Field::from_parts(Rank::Vector, y.split_off(2 * dim + 1)));
        let logdet = Field::from_parts(Rank::Scalar, y.split_off(2 * dim));
        let v = Field::from_parts(Rank::Vector, y.split_off(dim));
        let ell = Field::from_parts(Rank::Vector, y);
        Self { ell, v, logdet, zeta, t, t1: self.t1, restart_count: self.restart_count }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartDecision {
    Continue,
    Restart,
}

/// Restart iff `sup_x |∇ℓ|_F ≥ g`; also returns the supremum.
pub fn restart_check(grid: &Grid, state: &ElState, g: f64) -> Result<(RestartDecision, f64)> {
    let m = grad_map(grid, &state.ell)?;
    let geo = MapGeometry { dim: grid.dim(), m, q: Vec::new(), det: vec![0.0; grid.len()] };
    let sup = geo.max_grad_ell();
    let decision = if sup >= g { RestartDecision::Restart } else { RestartDecision::Continue };
    Ok((decision, sup))
}

/// Resets to the identity map, reloading `v` with the current Weber velocity.
pub fn apply_restart(grid: &Grid, state: &ElState) -> Result<ElState> {
    let u = state.velocity(grid)?;
    let zeta = match state.zeta {
        Some(_) => Some(grid.curl(&u)?),
        None => None,
    };
    Ok(ElState {
        ell: Field::zeros(grid, Rank::Vector),
        v: u,
        logdet: Field::zeros(grid, Rank::Scalar),
        zeta,
        t: state.t,
        t1: state.t,
        restart_count: state.restart_count + 1,
    })
}

/// Result of one accepted step.
#[derive(Clone, Debug)]
pub struct ElStepOutcome {
    pub state: ElState,
    /// Step actually taken (smaller than requested after retries).
    pub dt: f64,
    /// `sup |∇ℓ|_F` at the end of the step, before any reset.
    pub grad_ell_peak: f64,
    pub restarted: bool,
    /// End-of-step state before the reset, when one happened.
    pub before_reset: Option<ElState>,
    pub retries: u32,
}

/// Advances `(ℓ, v, log det, ζ)` by one integrator step, then applies the restart policy.
///
/// An invertibility failure rolls the step back and retries with half the step.
pub fn el_step(grid: &Grid, state: &ElState, nu: f64, dt: f64, scheme: Scheme, params: &ElParams) -> Result<ElStepOutcome> {
    let integ = Integrator::new(grid, nu, scheme);
    let y = state.stack();
    let with_zeta = state.zeta.is_some();
    let mut h = dt;
    let mut retries = 0;
    let next = loop {
        let attempt = integ.step(&y, state.t, h, |y, _| rhs::stacked_rhs(grid, y, nu, params.det_guard, with_zeta));
        let attempt = attempt.and_then(|y| {
            let s = state.unstack(grid.dim(), y, state.t + h);
            MapGeometry::new(grid, &s.ell, params.det_guard).map(|_| s)
        });
        match attempt {
            Ok(s) => break s,
            Err(Error::Invertibility { min_det, guard }) if retries < params.max_retries => {
                warn!("t = {:.6}: |det| {min_det:.3e} below {guard}, halving dt to {:.3e}", state.t, h / 2.0);
                retries += 1;
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    };
    let (decision, peak) = restart_check(grid, &next, params.g)?;
    let (state, before_reset) = match decision {
        RestartDecision::Continue => (next, None),
        RestartDecision::Restart => {
            debug!("restart at t = {:.6} (sup |grad l| = {peak:.4})", next.t);
            (apply_restart(grid, &next)?, Some(next))
        }
    };
    Ok(ElStepOutcome { state, dt: h, grad_ell_peak: peak, restarted: before_reset.is_some(), before_reset, retries })
}
