//! Monitored norms, budgets and non-dimensional numbers.
//!
//! Energies and dissipation carry the box volume so they match physical
//! quadrature; analytic norms and `y(t)` are bare spectral sums.

mod energy;
mod norms;
mod numbers;
mod record;
mod vorticity;

pub use energy::{
    dissipation_rate, energy_budget_residual, enstrophy, kinetic_energy, kinetic_energy_physical, trapezoid,
    vortex_energy_pair, PairedEnergy,
};
pub use norms::{analytic_norm, gevrey_y, ANALYTIC_GUARD};
pub use numbers::{
    displacement_bound_report, k_infinity, nondim_numbers, r0_threshold, reynolds_r0, AnalyticScale, BoundParams,
    DisplacementBounds, NondimNumbers, WindowIntegral, STRIP_FRACTION,
};
pub use record::{DiagnosticsConfig, DiagnosticsRecord, ElRecord, PairedRecord, Tracker, CSV_COLUMNS};
pub use vorticity::{
    alpha_max, direction_dissipation, interpolation_ratio, mode_bound_excess, stretching_alpha, vorticity_direction,
    vorticity_l1, DirectionField, DIRECTION_THRESHOLD,
};
