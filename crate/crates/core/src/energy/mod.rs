//! Energies `ℰ_ε(u) = σ_{d-1} ∫₀^∞ (c_u(r) - c_u(0) - r c_u'(0) χ_{(0,r₀)}) K_ε(r) r^{d-2} dr`
//! (plus the truncation correction when `r₀ ≠ 1`).

mod bounds;
mod experiments;

pub use bounds::{bv_bound_check, bv_bound_check_radial, interaction_energy, lower_bound_check, BoundCheck};
pub use experiments::{
    davila_limit, divergence_partial_sums, epsilon_sweep, DavilaPoint, DavilaReport, DivergencePartialSums, SweepPoint, SweepReport,
};

use serde::Serialize;

use crate::autocorr::{fit_small_radius, AutocorrelationGrid, RadialAutocorrelation, RadialOptions, RadialSource, TorusConfig};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::patterns::StripePattern;
use crate::quad::{self, Tolerance};
use crate::specfun::sphere_area;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    /// Contribution of `r ∈ (0, 1)`.
    pub near_field: f64,
    /// Contribution of `r ∈ (1, ∞)`.
    pub far_field: f64,
    /// `σ_{d-1} c_u'(0) ∫_1^{r₀} K r^{d-1} dr`.
    pub truncation_correction: f64,
    pub quadrature_error: f64,
    pub kernel: Kernel,
    pub truncation_radius: f64,
}

/// Energy with the default truncation radius 1.
pub fn energy_radial(rad: &RadialAutocorrelation, kernel: &Kernel) -> Result<EnergyReport> {
    energy_radial_truncated(rad, kernel, 1.0)
}

/// Energy computed with the linear correction cut at `r0` instead of 1.
pub fn energy_radial_truncated(rad: &RadialAutocorrelation, kernel: &Kernel, r0: f64) -> Result<EnergyReport> {
    let kernel = kernel.validated()?;
    if kernel.dimension != rad.dimension {
        return Err(Error::Parameter(format!("kernel dimension {} does not match profile dimension {}", kernel.dimension, rad.dimension)));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Parameter(format!("truncation radius must be positive, got {r0}")));
    }
    let mut acc = Accumulator::new(&kernel, rad.value_at_zero, rad.slope_at_zero, r0);
    match &rad.source {
        RadialSource::Fft(p) => {
            fft_integral(&mut acc, &rad.radii, &rad.values, p.remainder_coefficient, p.far_value, p.tail_oscillation)?;
        }
        RadialSource::AnalyticBall { radius, .. } => ball_integral(&mut acc, rad, *radius)?,
        RadialSource::AnalyticStripe { pattern } => stripe_integral(&mut acc, rad, pattern)?,
    }
    acc.finish()
}

/// Re-evaluates with truncation radius `r0`; the total is unchanged up to quadrature error.
pub fn truncation_shift(report: &EnergyReport, r0: f64, kernel: &Kernel, rad: &RadialAutocorrelation) -> Result<EnergyReport> {
    if r0 == report.truncation_radius && *kernel == report.kernel {
        return Ok(report.clone());
    }
    energy_radial_truncated(rad, kernel, r0)
}

/// FFT pipeline: configuration → grid autocorrelation → radial profile → energy.
pub fn energy_of_config(cfg: &TorusConfig, kernel: &Kernel) -> Result<EnergyReport> {
    energy_of_config_with(cfg, kernel, &RadialOptions::default())
}

/// [`energy_of_config`] with explicit profile options, e.g. a slope window shared by several sets.
pub fn energy_of_config_with(cfg: &TorusConfig, kernel: &Kernel, options: &RadialOptions) -> Result<EnergyReport> {
    let grid = AutocorrelationGrid::compute(cfg);
    let rad = RadialAutocorrelation::from_grid(&grid, options)?;
    energy_radial(&rad, kernel)
}

/// The FFT energy is affine in the shell means `m_k` (`k >= 1`) once `c(0)` and the mean are
/// fixed: `ℰ = base + Σ_k weights[k] m_k`, with `weights[0] = 0`.
pub(crate) fn fft_shell_weights(
    radii: &[f64],
    counts: &[u64],
    window: [usize; 2],
    c0: f64,
    far_value: f64,
    kernel: &Kernel,
) -> Result<(f64, Vec<f64>)> {
    let kernel = kernel.validated()?;
    let eval = |values: &[f64]| -> Result<f64> {
        let fit = fit_small_radius(radii, values, counts, window);
        let mut acc = Accumulator::new(&kernel, c0, fit.slope, 1.0);
        fft_integral(&mut acc, radii, values, fit.cubic, far_value, 0.0)?;
        Ok(acc.near + acc.far)
    };
    let mut probe = vec![0.0; radii.len()];
    probe[0] = c0;
    let base = eval(&probe)?;
    let mut weights = vec![0.0; radii.len()];
    for k in 1..radii.len() {
        probe[k] = 1.0;
        weights[k] = eval(&probe)? - base;
        probe[k] = 0.0;
    }
    Ok((base, weights))
}

struct Accumulator<'k> {
    kernel: &'k Kernel,
    dim: f64,
    sigma: f64,
    c0: f64,
    slope: f64,
    r0: f64,
    near: f64,
    far: f64,
    error: f64,
}

impl<'k> Accumulator<'k> {
    fn new(kernel: &'k Kernel, c0: f64, slope: f64, r0: f64) -> Self {
        Self {
            kernel,
            dim: kernel.dimension as f64,
            sigma: sphere_area(kernel.dimension),
            c0,
            slope,
            r0,
            near: 0.0,
            far: 0.0,
            error: 0.0,
        }
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        for p in [self.kernel.cutoff(), 1.0, self.r0] {
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn add(&mut self, lo: f64, v: f64) {
        if lo < 1.0 {
            self.near += v;
        } else {
            self.far += v;
        }
    }

    /// Adds `σ ∫ (c - c₀ - r c₀' χ) K r^{d-2}` where `c = a0 + a1 r + a3 r³` on `[lo, hi]`.
    fn polynomial(&mut self, lo: f64, hi: f64, a0: f64, a1: f64, a3: f64) -> Result<f64> {
        let mut total = 0.0;
        let pts = self.breakpoints(lo, hi);
        for w in pts.windows(2) {
            let (l, h) = (w[0], w[1]);
            let b0 = a0 - self.c0;
            let b1 = if l < self.r0 { a1 - self.slope } else { a1 };
            let mut v = 0.0;
            for (coef, m) in [(b0, 0.0), (b1, 1.0), (a3, 3.0)] {
                if coef != 0.0 {
                    v += coef * self.kernel.moment(l, h, self.dim - 2.0 + m).map_err(|e| divergent(self.kernel, e))?;
                }
            }
            v *= self.sigma;
            self.add(l, v);
            total += v;
        }
        Ok(total)
    }

    /// Adds `σ ∫ f(r) K r^{d-2}` by adaptive quadrature, `f = c - c₀ - r c₀' χ`.
    fn quadrature<F: Fn(f64) -> f64>(&mut self, lo: f64, hi: f64, f: F, tol: Tolerance) {
        let pts = self.breakpoints(lo, hi);
        for w in pts.windows(2) {
            let (l, h) = (w[0], w[1]);
            let kernel = self.kernel;
            let dim = self.dim;
            let r = quad::integrate(|r| f(r) * kernel.value_unchecked(r) * r.powf(dim - 2.0), l, h, tol);
            self.add(l, self.sigma * r.value);
            self.error += self.sigma * r.error;
        }
    }

    fn finish(self) -> Result<EnergyReport> {
        let d = self.dim;
        let correction = if self.r0 == 1.0 {
            0.0
        } else {
            let (lo, hi, sign) = if self.r0 > 1.0 { (1.0, self.r0, 1.0) } else { (self.r0, 1.0, -1.0) };
            sign * self.sigma * self.slope * self.kernel.moment(lo, hi, d - 1.0).map_err(|e| divergent(self.kernel, e))?
        };
        let value = self.near + self.far + correction;
        let scale = self.far.abs().max(1e-300);
        if !value.is_finite() || self.near.abs() > 1e6 * scale && self.far != 0.0 {
            return Err(Error::Divergent(format!(
                "near field {} dwarfs far field {} for {:?} at epsilon = {}",
                self.near, self.far, self.kernel.family, self.kernel.epsilon
            )));
        }
        Ok(EnergyReport {
            value,
            near_field: self.near,
            far_field: self.far,
            truncation_correction: correction,
            quadrature_error: self.error,
            kernel: *self.kernel,
            truncation_radius: self.r0,
        })
    }
}

fn divergent(kernel: &Kernel, e: Error) -> Error {
    match e {
        Error::Divergent(msg) => Error::Divergent(format!(
            "energy integral diverges for {:?} (p = {}, epsilon = {}): {msg}",
            kernel.family,
            kernel.exponent(),
            kernel.epsilon
        )),
        other => other,
    }
}

/// Exact integral of the piecewise-linear interpolant of the shell means, with the cubic
/// small-radius model on the first shell and the mean value beyond the last one.
fn fft_integral(acc: &mut Accumulator, radii: &[f64], values: &[f64], cubic: f64, far_value: f64, tail_oscillation: f64) -> Result<()> {
    let k_last = radii.len() - 1;
    if k_last == 0 {
        acc.polynomial(0.0, f64::INFINITY, far_value, 0.0, 0.0)?;
        return Ok(());
    }
    let first = acc.polynomial(0.0, radii[1], acc.c0, acc.slope, cubic)?;
    acc.error += first.abs();
    let d = acc.dim;
    for k in 1..k_last {
        let (r_a, r_b) = (radii[k], radii[k + 1]);
        let beta = (values[k + 1] - values[k]) / (r_b - r_a);
        let alpha = values[k] - beta * r_a;
        acc.polynomial(r_a, r_b, alpha, beta, 0.0)?;
        // linear interpolation error ~ h²/8 |c''|
        let curvature = |j: usize| {
            if j == 0 || j >= k_last {
                return 0.0;
            }
            let left = (values[j] - values[j - 1]) / (radii[j] - radii[j - 1]);
            let right = (values[j + 1] - values[j]) / (radii[j + 1] - radii[j]);
            2.0 * (right - left).abs() / (radii[j + 1] - radii[j - 1])
        };
        let c2 = curvature(k).max(curvature(k + 1));
        if c2 > 0.0 {
            let mass = acc.kernel.moment(r_a, r_b, d - 2.0).unwrap_or(0.0);
            acc.error += acc.sigma * (r_b - r_a).powi(2) / 8.0 * c2 * mass;
        }
    }
    let r_max = radii[k_last];
    acc.polynomial(r_max, f64::INFINITY, far_value, 0.0, 0.0)?;
    acc.error += acc.sigma * tail_oscillation * acc.kernel.moment(r_max, f64::INFINITY, d - 2.0).unwrap_or(0.0);
    Ok(())
}

fn quadrature_tolerance() -> Tolerance {
    Tolerance { abs: 1e-13, rel: 1e-11, max_segments: 2000 }
}

fn ball_integral(acc: &mut Accumulator, rad: &RadialAutocorrelation, radius: f64) -> Result<()> {
    let d = rad.dimension;
    let p = acc.kernel.exponent();
    // c - c₀ - r c₀' ~ r³ at the origin for d >= 2
    if d >= 2 && acc.kernel.cutoff() == 0.0 && p >= d as f64 + 2.0 {
        return Err(Error::Divergent(format!("ball energy diverges at the origin for kernel exponent {p} >= d + 2")));
    }
    let diameter = 2.0 * radius;
    let slope = acc.slope;
    let r0 = acc.r0;
    acc.quadrature(0.0, diameter, |r| rad.remainder(r) + if r >= r0 { r * slope } else { 0.0 }, quadrature_tolerance());
    acc.polynomial(diameter, f64::INFINITY, 0.0, 0.0, 0.0)?;
    Ok(())
}

/// Radius, in periods, up to which the lamellar profile is integrated before switching to its mean.
const STRIPE_PERIODS: f64 = 48.0;

fn stripe_integral(acc: &mut Accumulator, rad: &RadialAutocorrelation, pattern: &StripePattern) -> Result<()> {
    let a = pattern.period();
    let lambda = pattern.fraction();
    let affine_end = pattern.width.min(pattern.gap);
    acc.polynomial(0.0, affine_end, acc.c0, acc.slope, 0.0)?;

    let reach = (STRIPE_PERIODS * a).max(24.0);
    let mut pts = vec![affine_end];
    let mut base = 0.0;
    'outer: loop {
        for &s in &pattern.kinks()[1..] {
            let r = base + s;
            if r >= reach {
                break 'outer;
            }
            if r > affine_end + 1e-15 {
                pts.push(r);
            }
        }
        base += a;
    }
    pts.push(reach);
    let c0 = acc.c0;
    let slope = acc.slope;
    let r0 = acc.r0;
    let tol = Tolerance { abs: 1e-12, rel: 1e-10, max_segments: 400 };
    for w in pts.windows(2) {
        acc.quadrature(w[0], w[1], |r| rad.eval(r) - c0 - if r < r0 { r * slope } else { 0.0 }, tol);
    }
    acc.polynomial(reach, f64::INFINITY, lambda * lambda, 0.0, 0.0)?;
    // oscillation about λ² past `reach`, bounded via the second mean value theorem
    let osc = (0..64)
        .map(|j| (rad.eval(reach - a * j as f64 / 64.0) - lambda * lambda).abs())
        .fold(0.0, f64::max);
    let d = acc.dim;
    acc.error += acc.sigma * 2.0 * a * osc * acc.kernel.value_unchecked(reach) * reach.powf(d - 2.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_torus_has_zero_energy() {
        let cfg = TorusConfig::full(2, 4.0, 16).unwrap();
        let k = Kernel::power_cutoff(0.1, 2).unwrap();
        let rep = energy_of_config(&cfg, &k).unwrap();
        assert!(rep.value.abs() < 1e-15);
    }

    #[test]
    fn supercritical_ball_diverges() {
        let rad = RadialAutocorrelation::ball(0.5, 8.0, 2, &[]).unwrap();
        let k = Kernel::supercritical(4.0, 0.0, 2).unwrap();
        assert!(matches!(energy_radial(&rad, &k), Err(Error::Divergent(_))));
        let k = Kernel::supercritical(3.5, 0.0, 2).unwrap();
        assert!(energy_radial(&rad, &k).is_ok());
    }
}
