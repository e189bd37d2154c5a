use std::f64::consts::{E, PI};

use crate::el::ElState;
use crate::error::Result;
use crate::spectral::{Field, Grid};

use super::energy::{dissipation_rate, kinetic_energy};
use super::norms::analytic_norm;

/// Initial Reynolds number below which decay to rest is guaranteed.
pub fn r0_threshold() -> f64 {
    2.0 / PI.sqrt() * 3f64.powf(-0.75)
}

/// Fraction `γ` with `r̃ = (1−γ)λ̃` and `r̃₁ = (1−γ)r̃`.
pub const STRIP_FRACTION: f64 = 0.125;

/// `R₀ = ν⁻¹ (∫|u₀|²)^{1/4} (∫|∇u₀|²)^{1/4}`.
pub fn reynolds_r0(k0: f64, enstrophy0: f64, nu: f64) -> f64 {
    let num = (2.0 * k0).powf(0.25) * enstrophy0.powf(0.25);
    if num == 0.0 {
        0.0
    } else {
        num / nu
    }
}

/// Non-dimensional numbers of a trajectory; universal constants are set to 1.
///
/// `None` marks numbers that need `ν > 0` and `T > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NondimNumbers {
    pub r0: f64,
    /// `G = (ν^{−3/2} T^{1/2} 𝓔)^{1/2}`.
    pub g_number: Option<f64>,
    /// `ρ = G⁴`.
    pub rho: Option<f64>,
    /// `λ̃ = min{s₀, G⁻⁴}`.
    pub lambda_tilde: Option<f64>,
    /// `Ũ = (λ̃ − r̃)^{−1/2} G` at `r̃ = (1−γ)λ̃`.
    pub u_tilde: Option<f64>,
    /// `τ = g G⁻⁷`, a time scale in units of `T`.
    pub tau: Option<f64>,
    pub g: f64,
}

/// Numbers from the initial energy and the enstrophy history (`𝓔` its maximum).
pub fn nondim_numbers(k0: f64, enstrophy: &[f64], nu: f64, horizon: f64, g: f64, s0: f64) -> NondimNumbers {
    let ens0 = enstrophy.first().copied().unwrap_or(0.0);
    let ens_max = enstrophy.iter().copied().fold(0.0, f64::max);
    let mut out = NondimNumbers { r0: reynolds_r0(k0, ens0, nu), g, ..Default::default() };
    if !(nu > 0.0 && horizon > 0.0) {
        return out;
    }
    let g_number = (nu.powf(-1.5) * horizon.sqrt() * ens_max).sqrt();
    out.g_number = Some(g_number);
    out.rho = Some(g_number.powi(4));
    out.tau = Some(g * g_number.powi(-7));
    let lt = s0.min(g_number.powi(-4));
    out.lambda_tilde = Some(lt);
    out.u_tilde = Some((STRIP_FRACTION * lt).powf(-0.5) * g_number);
    out
}

/// Dimensional radii and velocity bound behind the analytic displacement estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticScale {
    pub r: f64,
    pub r1: f64,
    pub u_r: f64,
}

impl AnalyticScale {
    pub fn new(numbers: &NondimNumbers, nu: f64, horizon: f64) -> Option<Self> {
        let (lt, ut) = (numbers.lambda_tilde?, numbers.u_tilde?);
        let r = (nu * horizon).sqrt() * (1.0 - STRIP_FRACTION) * lt;
        Some(Self { r, r1: (1.0 - STRIP_FRACTION) * r, u_r: (nu / horizon).sqrt() * ut })
    }
}

/// `K_∞ = ν⁻² ∫|u₀|² + √(νT)` with the universal constant set to 1.
pub fn k_infinity(k0: f64, nu: f64, horizon: f64) -> f64 {
    2.0 * k0 / (nu * nu) + (nu * horizon).sqrt()
}

/// Trapezoid integral over the current reset window, restarted whenever `t₁` changes.
#[derive(Clone, Debug, Default)]
pub struct WindowIntegral {
    t1: f64,
    last: Option<(f64, f64)>,
    value: f64,
}

impl WindowIntegral {
    /// Adds the sample `y(t)`; the window opens at `(t₁, 0)`.
    pub fn push(&mut self, t: f64, t1: f64, y: f64) -> f64 {
        if self.last.is_none() || t1 != self.t1 {
            self.t1 = t1;
            self.value = 0.0;
            self.last = Some((t1, 0.0));
        }
        let (tl, yl) = self.last.unwrap_or((t1, 0.0));
        self.value += 0.5 * (t - tl) * (y + yl);
        self.last = Some((t, y));
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Measured/bound ratios for the displacement in one reset window.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DisplacementBounds {
    /// `‖ℓ‖_∞ / K_∞`.
    pub linf_ratio: f64,
    /// `∫|ℓ|² / (2K₀(t−t₁)²)`.
    pub ltwo_ratio: f64,
    /// `∫_{t₁}^t∫|∇ℓ|² / (K₀(t−t₁)²/ν)`.
    pub nablaeltwo_ratio: f64,
    /// `‖ℓ‖_{A,r,1} / ((t−t₁) U_r e^{(t−t₁)U_r²/ν})`.
    pub lbound_ratio: Option<f64>,
    /// `‖∇ℓ‖_{A,r₁,1} / (e⁻¹(r−r₁)⁻¹ (t−t₁) U_r e^{(t−t₁)U_r²/ν})`.
    pub grl_ratio: Option<f64>,
}

/// Inputs shared by every displacement ratio.
#[derive(Clone, Copy, Debug)]
pub struct BoundParams {
    pub k0: f64,
    pub k_inf: f64,
    pub nu: f64,
    pub scale: Option<AnalyticScale>,
}

fn ratio(measured: f64, bound: f64) -> f64 {
    if measured == 0.0 {
        0.0
    } else {
        measured / bound
    }
}

impl DisplacementBounds {
    /// Ratios at time `t` given the window integral `∫_{t₁}^t∫|∇ℓ|²`.
    pub fn measure(grid: &Grid, ell: &Field, t: f64, t1: f64, grad_integral: f64, p: &BoundParams) -> Result<Self> {
        let dt = t - t1;
        if dt <= 0.0 {
            return Ok(Self::default());
        }
        let linf = grid.to_physical(ell)?.max_norm();
        let mut out = Self {
            linf_ratio: ratio(linf, p.k_inf),
            ltwo_ratio: ratio(2.0 * kinetic_energy(grid, ell), 2.0 * p.k0 * dt * dt),
            nablaeltwo_ratio: ratio(grad_integral, p.k0 * dt * dt / p.nu),
            ..Self::default()
        };
        if let Some(s) = p.scale {
            let growth = dt * s.u_r * (dt * s.u_r * s.u_r / p.nu).exp();
            out.lbound_ratio = analytic_norm(grid, ell, s.r, 1).ok().map(|a| ratio(a, growth));
            let grad = grid.gradient(ell)?;
            out.grl_ratio = analytic_norm(grid, &grad, s.r1, 1).ok().map(|a| ratio(a, growth / (E * (s.r - s.r1))));
        }
        Ok(out)
    }

    pub fn max(self, other: Self) -> Self {
        let om = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Self {
            linf_ratio: self.linf_ratio.max(other.linf_ratio),
            ltwo_ratio: self.ltwo_ratio.max(other.ltwo_ratio),
            nablaeltwo_ratio: self.nablaeltwo_ratio.max(other.nablaeltwo_ratio),
            lbound_ratio: om(self.lbound_ratio, other.lbound_ratio),
            grl_ratio: om(self.grl_ratio, other.grl_ratio),
        }
    }
}

/// Ratios along a series of states; windows are delimited by `t₁`.
pub fn displacement_bound_report(grid: &Grid, states: &[ElState], p: &BoundParams) -> Result<Vec<DisplacementBounds>> {
    let mut window = WindowIntegral::default();
    states
        .iter()
        .map(|s| {
            let integral = window.push(s.t, s.t1, dissipation_rate(grid, &s.ell, 1.0));
            DisplacementBounds::measure(grid, &s.ell, s.t, s.t1, integral, p)
        })
        .collect()
}
