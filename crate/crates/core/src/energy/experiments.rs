//! ε-sweeps towards the limit energy, the first-order (perimeter) limit, and the partial
//! sums of a BV set with infinite limit energy.

use serde::Serialize;

use super::{energy_radial, EnergyReport};
use crate::autocorr::RadialAutocorrelation;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::par;
use crate::specfun::{sphere_area, unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub value: f64,
    pub near: f64,
    pub far: f64,
    pub err: f64,
}

impl From<&EnergyReport> for SweepPoint {
    fn from(r: &EnergyReport) -> Self {
        Self { epsilon: r.kernel.epsilon, value: r.value, near: r.near_field, far: r.far_field, err: r.quadrature_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// The `ε = 0` energy, absent when it diverges.
    pub limit: Option<SweepPoint>,
    /// Least-squares slope of `ln(ℰ₀ - ℰ_ε)` against `ln ε`, when at least two gaps are resolved.
    pub fitted_rate: Option<f64>,
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("epsilon list must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// `ℰ_ε` for each `ε` in `eps` (same family as `kernel`) and the limit `ℰ₀`.
pub fn epsilon_sweep(rad: &RadialAutocorrelation, kernel: &Kernel, eps: &[f64]) -> Result<SweepReport> {
    check_epsilons(eps)?;
    let reports: Vec<Result<EnergyReport>> = par::map_slice(eps, |&e| energy_radial(rad, &kernel.with_epsilon(e)?));
    let points: Vec<SweepPoint> = reports.into_iter().map(|r| r.map(|r| SweepPoint::from(&r))).collect::<Result<_>>()?;
    let limit = match energy_radial(rad, &kernel.limit()) {
        Ok(r) => Some(SweepPoint::from(&r)),
        Err(Error::Divergent(_)) => None,
        Err(e) => return Err(e),
    };
    let fitted_rate = limit.and_then(|l| {
        let samples: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| {
                let gap = l.value - p.value;
                gap > 10.0 * (p.err + l.err) && gap > 1e-14 * l.value.abs()
            })
            .map(|p| (p.epsilon.ln(), (l.value - p.value).ln()))
            .collect();
        fit_slope(&samples)
    });
    Ok(SweepReport { points, limit, fitted_rate })
}

fn fit_slope(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DavilaPoint {
    pub epsilon: f64,
    pub ratio: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DavilaReport {
    pub points: Vec<DavilaPoint>,
    /// `-c_u'(0) σ_{d-1}/ω_{d-1} = ‖∇u‖/|T|`.
    pub limit: f64,
}

/// `(σ_{d-1}/M_ε) ∫₀^∞ (c_u(0) - c_u(r)) K_ε r^{d-2} dr`, which tends to `‖∇u‖/|T|`.
pub fn davila_limit(rad: &RadialAutocorrelation, kernel: &Kernel, eps: &[f64]) -> Result<DavilaReport> {
    check_epsilons(eps)?;
    let d = rad.dimension;
    let limit = -rad.slope_at_zero * sphere_area(d) / unit_ball_volume(d - 1);
    let points = par::map_slice(eps, |&e| -> Result<DavilaPoint> {
        let k = kernel.with_epsilon(e)?;
        let mass = k.mollifier_mass()?;
        let energy = energy_radial(rad, &k)?;
        // ∫(c₀ - c)K r^{d-2} = -ℰ/σ - c₀' M_ε/ω_{d-1}
        let ratio = limit - energy.value / mass;
        let relative_error = if limit != 0.0 { (ratio - limit).abs() / limit.abs() } else { ratio.abs() };
        Ok(DavilaPoint { epsilon: e, ratio, relative_error })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DavilaReport { points, limit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergencePartialSums {
    pub n: Vec<u64>,
    /// `S(N) = Σ_{k=2}^N (-ln r_k) r_k`.
    pub energy_sums: Vec<f64>,
    /// `Σ_{k=2}^N r_k`.
    pub radius_sums: Vec<f64>,
}

/// Partial sums for the radii `r_k = 1/(k ln² k)`.
pub fn divergence_partial_sums(n_list: &[u64]) -> Result<DivergencePartialSums> {
    if n_list.is_empty() || n_list[0] < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("N list must be strictly increasing and start at 2 or more".into()));
    }
    let mut energy_sums = Vec::with_capacity(n_list.len());
    let mut radius_sums = Vec::with_capacity(n_list.len());
    let (mut s, mut b) = (0.0f64, 0.0f64);
    let mut k = 2u64;
    for &n in n_list {
        while k <= n {
            let kf = k as f64;
            let lk = kf.ln();
            let r = 1.0 / (kf * lk * lk);
            s += -r.ln() * r;
            b += r;
            k += 1;
        }
        energy_sums.push(s);
        radius_sums.push(b);
    }
    Ok(DivergencePartialSums { n: n_list.to_vec(), energy_sums, radius_sums })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sums_grow() {
        let p = divergence_partial_sums(&[10, 100, 1000]).unwrap();
        assert!(p.energy_sums.windows(2).all(|w| w[1] > w[0]));
        assert!(divergence_partial_sums(&[1, 10]).is_err());
    }

    #[test]
    fn slope_fit_recovers_power() {
        let s: Vec<(f64, f64)> = [0.1f64, 0.05, 0.02].iter().map(|e| (e.ln(), (3.0 * e * e).ln())).collect();
        assert!((fit_slope(&s).unwrap() - 2.0).abs() < 1e-12);
    }
}
