//! Autocorrelation functions of binary sets: FFT on torus grids, radial averages and the
//! exact profiles of balls and lamellae.

mod fft;
mod properties;
mod shells;
mod torus;

pub use fft::{autocorrelation_fft, overlap_counts, overlap_counts_direct, AutocorrelationGrid};
pub(crate) use fft::correlate;
pub use properties::{verify_autocorr_properties, AutocorrCheck, AutocorrReport};
pub use shells::ShellMap;
pub use torus::{periodic_distance2, Pattern, TorusConfig, TorusFile};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::patterns::StripePattern;
use crate::quad::{self, Tolerance};
use crate::specfun::{ball_cap_defect, ball_cap_integral, sphere_area, unit_ball_volume};

/// Everything the energy evaluator needs to know about an FFT-derived profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FftProfile {
    pub cell_size: f64,
    pub torus_volume: f64,
    /// Offsets per shell.
    pub counts: Vec<u64>,
    /// `B` in the small-radius model `c(r) ≈ c(0) + c'(0) r + B r³`.
    pub remainder_coefficient: f64,
    /// First and last shell of the small-radius fit.
    pub slope_window: [usize; 2],
    /// Mean of `C_u` over the cell, the large-radius limit of `c_u`.
    pub far_value: f64,
    /// Largest `|c_u - far_value|` over the outer quarter of the sampled radii.
    pub tail_oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialSource {
    Fft(FftProfile),
    /// A single ball of radius `radius` in a cell of volume `torus_volume`, without periodic images.
    AnalyticBall { radius: f64, torus_volume: f64 },
    AnalyticStripe { pattern: StripePattern },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialOptions {
    /// Largest radius to sample, in units of the side length. `None` picks 2 for d ≤ 2 and 1 for d = 3.
    pub extent: Option<f64>,
    /// Shells `[first, last]` of the small-radius fit. `None` sizes the window from the profile.
    pub slope_window: Option<[usize; 2]>,
}

impl RadialOptions {
    /// The innermost [`SLOPE_SHELLS`] shells; used where two profiles must share one fit.
    pub fn innermost() -> Self {
        Self { slope_window: Some([1, SLOPE_SHELLS]), ..Self::default() }
    }
}

/// Radially symmetrized autocorrelation `c_u` with its value and slope at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialAutocorrelation {
    pub dimension: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub value_at_zero: f64,
    pub slope_at_zero: f64,
    pub source: RadialSource,
    pub warnings: Vec<String>,
}

/// Smallest number of shells in the slope fit.
pub const SLOPE_SHELLS: usize = 4;

/// The slope fit never reaches past this shell.
pub const MAX_SLOPE_SHELLS: usize = 32;

impl RadialAutocorrelation {
    /// Shell averages of a grid autocorrelation, including periodic images out to the requested extent.
    pub fn from_grid(grid: &AutocorrelationGrid, options: &RadialOptions) -> Result<Self> {
        let map = shell_map_for(grid.dimension(), grid.cells_per_side(), options);
        Ok(Self::from_shell_means(grid, &map, map.shell_means(grid.values()), options.slope_window))
    }

    pub(crate) fn from_shell_means(grid: &AutocorrelationGrid, map: &ShellMap, means: Vec<f64>, window: Option<[usize; 2]>) -> Self {
        let d = grid.dimension();
        let h = grid.side_length() / grid.cells_per_side() as f64;
        let radii: Vec<f64> = map.mean_norms().iter().map(|&m| m * h).collect();
        let window = window.unwrap_or_else(|| slope_window(&radii, &means, map.counts()));
        let fit = fit_small_radius(&radii, &means, map.counts(), window);
        let far_value = grid.mean();
        let outer = radii.last().copied().unwrap_or(0.0) * 0.75;
        let tail_oscillation = radii
            .iter()
            .zip(&means)
            .filter(|(r, _)| **r >= outer)
            .map(|(_, v)| (v - far_value).abs())
            .fold(0.0, f64::max);
        let mut warnings = Vec::new();
        if !fit.monotone {
            warnings.push("unreliable slope estimate: small-radius samples are not monotone".to_string());
        }
        Self {
            dimension: d,
            value_at_zero: means[0],
            slope_at_zero: fit.slope,
            radii,
            values: means,
            source: RadialSource::Fft(FftProfile {
                cell_size: h,
                torus_volume: grid.side_length().powi(d as i32),
                counts: map.counts().to_vec(),
                remainder_coefficient: fit.cubic,
                slope_window: window,
                far_value,
                tail_oscillation,
            }),
            warnings,
        }
    }

    /// Exact `c_u` of a single ball of radius `radius` in a cell of side `side_length`.
    pub fn ball(radius: f64, side_length: f64, dimension: usize, radii: &[f64]) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Parameter(format!("ball radius must be positive, got {radius}")));
        }
        if !(radius < side_length / 4.0) {
            return Err(Error::Precondition(format!("ball radius {radius} must be below a quarter of the side {side_length}")));
        }
        let torus_volume = side_length.powi(dimension as i32);
        let mut out = Self {
            dimension,
            radii: Vec::new(),
            values: Vec::new(),
            value_at_zero: unit_ball_volume(dimension) * radius.powi(dimension as i32) / torus_volume,
            slope_at_zero: -unit_ball_volume(dimension - 1) * radius.powi(dimension as i32 - 1) / torus_volume,
            source: RadialSource::AnalyticBall { radius, torus_volume },
            warnings: Vec::new(),
        };
        out.sample(radii)?;
        Ok(out)
    }

    /// Exact `c_u` of a lamellar pattern (per period cell).
    pub fn stripes(pattern: &StripePattern, radii: &[f64]) -> Result<Self> {
        let pattern = pattern.validated()?;
        let mut out = Self {
            dimension: pattern.dimension,
            radii: Vec::new(),
            values: Vec::new(),
            value_at_zero: pattern.fraction(),
            slope_at_zero: pattern.slope_at_zero(),
            source: RadialSource::AnalyticStripe { pattern },
            warnings: Vec::new(),
        };
        out.sample(radii)?;
        Ok(out)
    }

    fn sample(&mut self, radii: &[f64]) -> Result<()> {
        if radii.iter().any(|r| !(*r >= 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("radial mesh must be nonnegative and strictly increasing".into()));
        }
        self.values = radii.iter().map(|&r| self.eval(r)).collect();
        self.radii = radii.to_vec();
        Ok(())
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.source, RadialSource::Fft(_))
    }

    /// `c_u(r)`; FFT profiles are interpolated linearly between shells.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.source {
            RadialSource::AnalyticBall { radius, torus_volume } => {
                if r >= 2.0 * radius {
                    return 0.0;
                }
                let d = self.dimension;
                2.0 * unit_ball_volume(d - 1) * radius.powi(d as i32) / torus_volume * ball_cap_integral(d - 1, r / (2.0 * radius))
            }
            RadialSource::AnalyticStripe { pattern } => stripe_spherical_average(pattern, r),
            RadialSource::Fft(p) => {
                if r <= 0.0 {
                    return self.value_at_zero;
                }
                let last = self.radii.len() - 1;
                if self.radii.len() < 2 || r > self.radii[last] {
                    return p.far_value;
                }
                if r < self.radii[1] {
                    return self.value_at_zero + self.slope_at_zero * r + p.remainder_coefficient * r.powi(3);
                }
                let k = self.radii.partition_point(|&x| x <= r).min(last).max(1);
                let (r0, r1) = (self.radii[k - 1], self.radii[k]);
                let t = (r - r0) / (r1 - r0);
                self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
            }
        }
    }

    /// `c_u(r) - c_u(0) - r c_u'(0)`, evaluated without cancellation for analytic sources.
    pub fn remainder(&self, r: f64) -> f64 {
        match &self.source {
            RadialSource::AnalyticBall { radius, torus_volume } if r < 2.0 * radius => {
                let d = self.dimension;
                2.0 * unit_ball_volume(d - 1) * radius.powi(d as i32) / torus_volume * ball_cap_defect(d - 1, r / (2.0 * radius))
            }
            RadialSource::AnalyticStripe { pattern } if r <= pattern.width.min(pattern.gap) => 0.0,
            RadialSource::Fft(p) if self.radii.len() < 2 || r < self.radii[1] => p.remainder_coefficient * r.powi(3),
            _ => self.eval(r) - self.value_at_zero - r * self.slope_at_zero,
        }
    }

    /// `‖∇u‖ = -c_u'(0) σ_{d-1} |T| / ω_{d-1}`.
    pub fn perimeter_estimate(&self, torus_volume: f64) -> f64 {
        let d = self.dimension;
        (-self.slope_at_zero * sphere_area(d) * torus_volume / unit_ball_volume(d - 1)).max(0.0)
    }
}

/// `c_u` of a single ball on the given mesh.
pub fn ball_autocorrelation(radius: f64, side_length: f64, dimension: usize, radii: &[f64]) -> Result<RadialAutocorrelation> {
    RadialAutocorrelation::ball(radius, side_length, dimension, radii)
}

/// `c_u` of a lamellar pattern on the given mesh.
pub fn stripe_autocorrelation(pattern: &StripePattern, radii: &[f64]) -> Result<RadialAutocorrelation> {
    RadialAutocorrelation::stripes(pattern, radii)
}

/// Slope-based perimeter of a radial profile.
pub fn perimeter_estimate(rad: &RadialAutocorrelation, torus_volume: f64) -> f64 {
    rad.perimeter_estimate(torus_volume)
}

pub(crate) fn shell_map_for(dimension: usize, cells_per_side: usize, options: &RadialOptions) -> ShellMap {
    let factor = options.extent.unwrap_or(if dimension <= 2 { 2.0 } else { 1.0 });
    let extent = ((factor * cells_per_side as f64).round() as usize).max(SLOPE_SHELLS + 1);
    ShellMap::new(dimension, cells_per_side, extent)
}

pub(crate) struct SmallRadiusFit {
    pub slope: f64,
    pub cubic: f64,
    pub monotone: bool,
}

/// Weighted least-squares fit of `(c(0) - c(r))/r ≈ A + B' r²` over shells `window[0]..=window[1]`,
/// each shell weighted by its number of offsets.
pub(crate) fn fit_small_radius(radii: &[f64], values: &[f64], counts: &[u64], window: [usize; 2]) -> SmallRadiusFit {
    let last = window[1].min(radii.len().saturating_sub(1));
    let first = window[0].max(1);
    if last < first + 1 {
        return SmallRadiusFit { slope: 0.0, cubic: 0.0, monotone: true };
    }
    let c0 = values[0];
    let (mut s1, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in first..=last {
        let w = counts[k] as f64;
        let x = radii[k] * radii[k];
        let y = (c0 - values[k]) / radii[k];
        s1 += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * y;
        sxy += w * x * y;
    }
    let det = s1 * sxx - sx * sx;
    let (a, b) = if det.abs() > 1e-12 * s1 * sxx { ((sxx * sy - sx * sxy) / det, (s1 * sxy - sx * sy) / det) } else { (sy / s1, 0.0) };
    let monotone = values[..=last].windows(2).all(|w| w[1] <= w[0]);
    SmallRadiusFit { slope: -a, cubic: -b, monotone }
}

/// Fit window sized to the profile. The smallest shells hold few offsets, so their means see the
/// lattice directions and underestimate the slope of axis-aligned interfaces by several percent;
/// wider windows average that out but must stay well inside the scale `λ(1-λ)/|c'(0)|` on which
/// `c` bends. That scale is the same for a set and its complement.
pub(crate) fn slope_window(radii: &[f64], values: &[f64], counts: &[u64]) -> [usize; 2] {
    let last = radii.len().saturating_sub(1);
    let pilot_window = [1, SLOPE_SHELLS.min(last)];
    let pilot = fit_small_radius(radii, values, counts, pilot_window);
    let c0 = values[0];
    if !(pilot.slope < 0.0) {
        return pilot_window;
    }
    let reach = 0.75 * c0 * (1.0 - c0) / -pilot.slope;
    let hi = radii.partition_point(|&r| r <= reach).saturating_sub(1).clamp(SLOPE_SHELLS, MAX_SLOPE_SHELLS).min(last);
    [(hi / 4).max(1), hi]
}

/// Spherical average of the 1-d lamellar profile over the sphere of radius `r`.
fn stripe_spherical_average(p: &StripePattern, r: f64) -> f64 {
    if r == 0.0 {
        return p.fraction();
    }
    match p.dimension {
        1 => p.profile(r),
        2 => stripe_average_2d(p, r),
        3 => p.profile_integral(r) / r,
        d => {
            // density of the first coordinate on S^{d-1}: (1 - t²)^{(d-3)/2}
            let alpha = (d as f64 - 3.0) / 2.0;
            let weight = |t: f64| (1.0 - t * t).max(0.0).powf(alpha);
            let mut pts = vec![0.0];
            let a = p.period();
            let kinks = p.kinks();
            let mut k = 0.0;
            'outer: loop {
                for &s in &kinks[1..] {
                    let t = (k * a + s) / r;
                    if t >= 1.0 {
                        break 'outer;
                    }
                    pts.push(t);
                }
                k += 1.0;
            }
            pts.push(1.0);
            let tol = Tolerance::new(1e-14, 1e-12);
            let num = quad::integrate_pieces(|t| p.profile(r * t) * weight(t), &pts, tol).value;
            let den = quad::integrate(weight, 0.0, 1.0, tol).value;
            num / den
        }
    }
}

/// `(2/π) ∫₀^r C(s)/√(r² - s²) ds` exactly, one linear piece of `C` at a time.
fn stripe_average_2d(p: &StripePattern, r: f64) -> f64 {
    let a = p.period();
    let kinks = p.kinks();
    let mut total = 0.0;
    let mut base = 0.0;
    'outer: loop {
        for w in kinks.windows(2) {
            let s0 = base + w[0];
            if s0 >= r {
                break 'outer;
            }
            let s1 = (base + w[1]).min(r);
            let v0 = p.profile(base + w[0]);
            let v1 = p.profile(base + w[1]);
            let beta = (v1 - v0) / (w[1] - w[0]);
            let alpha = v0 - beta * s0;
            let asin = |s: f64| (s / r).min(1.0).asin();
            let root = |s: f64| (r * r - s * s).max(0.0).sqrt();
            total += alpha * (asin(s1) - asin(s0)) - beta * (root(s1) - root(s0));
        }
        base += a;
    }
    2.0 / std::f64::consts::PI * total
}
