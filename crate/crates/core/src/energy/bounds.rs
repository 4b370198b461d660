//! Lower bounds, the BV estimate and interaction energies.

use serde::Serialize;
use std::f64::consts::LN_2;

use super::{energy_of_config_with, energy_radial, EnergyReport};
use crate::autocorr::{AutocorrelationGrid, RadialAutocorrelation, RadialOptions, TorusConfig};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::specfun::sphere_area;

/// Outcome of an inequality `lhs <= rhs` (or `lhs >= rhs` for lower bounds) with the energy it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub energy: EnergyReport,
}

/// `ℰ_ε(u) >= -σ_{d-1} λ ∫_1^∞ K_ε r^{d-2} dr`; `lhs` is the energy, `rhs` the bound.
pub fn lower_bound_check(rad: &RadialAutocorrelation, kernel: &Kernel) -> Result<BoundCheck> {
    let energy = energy_radial(rad, kernel)?;
    let d = kernel.dimension;
    let bound = -sphere_area(d) * rad.value_at_zero * kernel.moment(1.0, f64::INFINITY, d as f64 - 2.0)?;
    let ok = energy.value >= bound - energy.quadrature_error - 1e-12 * bound.abs().max(1.0);
    Ok(BoundCheck { lhs: energy.value, rhs: bound, ok, energy })
}

/// BV estimate with `A = (1/2, 1)`: `C₀ (-c_u'(0)) <= ℰ_ε(u)/σ_{d-1} + C₁ λ` where
/// `C₀ = ∫_A K r^{d-1} = ln 2` and `C₁ = ∫_{1/2}^∞ K r^{d-2} = 2` for the power-cutoff family.
pub fn bv_bound_check_radial(rad: &RadialAutocorrelation, kernel: &Kernel) -> Result<BoundCheck> {
    if kernel.family != KernelFamily::PowerCutoff {
        return Err(Error::Precondition("the BV estimate is stated for the power-cutoff family".into()));
    }
    if !(kernel.epsilon < 0.5) {
        return Err(Error::Precondition(format!("the BV estimate needs epsilon < 1/2, got {}", kernel.epsilon)));
    }
    let energy = energy_radial(rad, kernel)?;
    let sigma = sphere_area(kernel.dimension);
    let lhs = LN_2 * (-rad.slope_at_zero);
    let rhs = energy.value / sigma + 2.0 * rad.value_at_zero;
    let ok = lhs <= rhs + energy.quadrature_error / sigma + 1e-12;
    Ok(BoundCheck { lhs, rhs, ok, energy })
}

/// [`bv_bound_check_radial`] on the FFT profile of a configuration.
pub fn bv_bound_check(cfg: &TorusConfig, kernel: &Kernel) -> Result<BoundCheck> {
    let grid = AutocorrelationGrid::compute(cfg);
    let rad = RadialAutocorrelation::from_grid(&grid, &RadialOptions::default())?;
    bv_bound_check_radial(&rad, kernel)
}

/// `ℰ(u₁ + u₂) - ℰ(u₁) - ℰ(u₂)` for disjoint configurations on the same torus.
pub fn interaction_energy(u1: &TorusConfig, u2: &TorusConfig, kernel: &Kernel) -> Result<f64> {
    if !u1.is_disjoint(u2)? {
        return Err(Error::Precondition("interaction energy needs disjoint supports".into()));
    }
    if u2.occupied_count() == 0 || u1.occupied_count() == 0 {
        return Ok(0.0);
    }
    // one slope window for all three, so the fit bias cancels
    let options = RadialOptions::innermost();
    let both = energy_of_config_with(&u1.union(u2)?, kernel, &options)?;
    let e1 = energy_of_config_with(u1, kernel, &options)?;
    let e2 = energy_of_config_with(u2, kernel, &options)?;
    Ok(both.value - e1.value - e2.value)
}
