//! Periodic lamellae: slabs of width `d₀` separated by gaps `d₁`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{harmonic_number, unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripePattern {
    pub dimension: usize,
    pub width: f64,
    pub gap: f64,
}

impl StripePattern {
    pub fn new(dimension: usize, width: f64, gap: f64) -> Result<Self> {
        Self { dimension, width, gap }.validated()
    }

    /// Pattern with volume fraction `fraction` and slab width `width`.
    pub fn with_fraction(dimension: usize, fraction: f64, width: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Degenerate(format!("stripe fraction must lie in (0, 1), got {fraction}")));
        }
        Self::new(dimension, width, width * (1.0 - fraction) / fraction)
    }

    pub fn validated(self) -> Result<Self> {
        if self.dimension == 0 {
            return Err(Error::Parameter("stripe dimension must be at least 1".into()));
        }
        if !self.width.is_finite() || !self.gap.is_finite() || self.width < 0.0 || self.gap < 0.0 {
            return Err(Error::Parameter(format!("stripe widths must be finite and nonnegative, got {} and {}", self.width, self.gap)));
        }
        if self.width == 0.0 || self.gap == 0.0 {
            return Err(Error::Degenerate(format!("volume fraction {} is 0 or 1", self.width / (self.width + self.gap))));
        }
        Ok(self)
    }

    pub fn period(&self) -> f64 {
        self.width + self.gap
    }

    pub fn fraction(&self) -> f64 {
        self.width / self.period()
    }

    /// Swap the roles of slab and gap.
    pub fn complement(&self) -> Self {
        Self { width: self.gap, gap: self.width, ..*self }
    }

    /// One-dimensional periodic autocorrelation of the slab indicator.
    pub fn profile(&self, s: f64) -> f64 {
        let a = self.period();
        let t = s.abs().rem_euclid(a);
        ((self.width - t).max(0.0) + (t - self.gap).max(0.0)) / a
    }

    /// Kinks of the profile within one period, including both ends.
    pub fn kinks(&self) -> Vec<f64> {
        let a = self.period();
        let (lo, hi) = if self.width <= self.gap { (self.width, self.gap) } else { (self.gap, self.width) };
        let mut k = vec![0.0, lo];
        if hi > lo {
            k.push(hi);
        }
        k.push(a);
        k
    }

    /// `∫₀^r profile(s) ds` in closed form.
    pub fn profile_integral(&self, r: f64) -> f64 {
        let a = self.period();
        let periods = (r / a).floor();
        let t = r - periods * a;
        let d0 = self.width;
        let first = if t < d0 { d0 * t - 0.5 * t * t } else { 0.5 * d0 * d0 };
        let second = if t > self.gap { 0.5 * (t - self.gap) * (t - self.gap) } else { 0.0 };
        periods * d0 * d0 / a + (first + second) / a
    }

    /// `c_u'(0) = -(ω_{d-1}/σ_{d-1}) (2/a)`.
    pub fn slope_at_zero(&self) -> f64 {
        let d = self.dimension;
        -(unit_ball_volume(d - 1) / (d as f64 * unit_ball_volume(d))) * 2.0 / self.period()
    }

    fn half_harmonic(&self) -> Result<f64> {
        Ok(0.5 * harmonic_number((self.dimension as f64 - 1.0) / 2.0)?)
    }
}

/// Closed-form energy per unit volume of the lamellar pattern with `K₀ = r^{-d}`.
pub fn stripe_energy(p: &StripePattern) -> Result<f64> {
    let p = p.validated()?;
    let a = p.period();
    let lambda = p.fraction();
    let omega = unit_ball_volume(p.dimension - 1);
    // written in terms of the period so that swapping slab and gap is an exact symmetry
    Ok(-(2.0 * omega / a) * (1.0 + p.half_harmonic()? + (a * (PI * lambda).sin() / PI).ln()))
}

/// Energy assembled from pairwise slab interactions, truncated after `k_terms` periods.
pub fn stripe_energy_via_slices(p: &StripePattern, k_terms: usize) -> Result<f64> {
    let p = p.validated()?;
    let a = p.period();
    let lambda = p.fraction();
    let omega = unit_ball_volume(p.dimension - 1);
    let half_h = p.half_harmonic()?;
    let slab = |rho: f64| -(omega / a) * (rho.ln() + half_h);
    // I(ka+d₀) - 2I(ka) + I(ka-d₀) = -(ω/a) ln(1 - λ²/k²), summed smallest first
    let pairs: f64 = (1..=k_terms).rev().map(|k| -(omega / a) * (-(lambda * lambda) / (k * k) as f64).ln_1p()).sum();
    Ok(-2.0 * omega / a + 2.0 * (slab(p.width) + pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalStripe {
    pub d_opt: f64,
    pub e_s: f64,
}

/// Optimal slab width and energy at volume fraction `lambda`.
pub fn optimal_stripe(lambda: f64, dimension: usize) -> Result<OptimalStripe> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("volume fraction must lie in (0, 1), got {lambda}")));
    }
    if dimension == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    let half_h = 0.5 * harmonic_number((dimension as f64 - 1.0) / 2.0)?;
    let s = (PI * lambda).sin();
    Ok(OptimalStripe {
        d_opt: PI * lambda / s * (-half_h).exp(),
        e_s: -2.0 * unit_ball_volume(dimension - 1) * half_h.exp() * s / PI,
    })
}
