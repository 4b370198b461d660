//! Radial kernel families `K_ε`, their mass near the origin, and the `F`/`G` transforms.
//!
//! Every supported family is a truncated power law `K(r) = r^{-p}` for `r > cutoff`
//! and `0` otherwise, so all radial moments have closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{sphere_area, unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `r^{-d}` on `(ε, ∞)`.
    PowerCutoff,
    /// `r^{-d+ε}` on `(0, ∞)`.
    FractionalShift,
    /// `r^{-q}` on `(ε, ∞)` with `q >= d`.
    #[serde(rename = "supercritical")]
    SuperCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    pub family: KernelFamily,
    pub epsilon: f64,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl Kernel {
    pub fn power_cutoff(epsilon: f64, dimension: usize) -> Result<Self> {
        Self { family: KernelFamily::PowerCutoff, epsilon, dimension, q: None }.validated()
    }

    pub fn fractional_shift(epsilon: f64, dimension: usize) -> Result<Self> {
        Self { family: KernelFamily::FractionalShift, epsilon, dimension, q: None }.validated()
    }

    pub fn supercritical(q: f64, epsilon: f64, dimension: usize) -> Result<Self> {
        Self { family: KernelFamily::SuperCritical, epsilon, dimension, q: Some(q) }.validated()
    }

    /// The same family at a different `ε`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self { epsilon, ..*self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.dimension == 0 {
            return Err(Error::Parameter("kernel dimension must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Parameter(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        match (self.family, self.q) {
            (KernelFamily::SuperCritical, Some(q)) => {
                if !(q >= self.dimension as f64) || !q.is_finite() {
                    return Err(Error::Parameter(format!(
                        "supercritical exponent q = {q} must satisfy q >= d = {}",
                        self.dimension
                    )));
                }
            }
            (KernelFamily::SuperCritical, None) => {
                return Err(Error::Parameter("supercritical kernel needs an exponent q".into()))
            }
            (_, Some(_)) => return Err(Error::Parameter("exponent q only applies to the supercritical family".into())),
            (_, None) => {}
        }
        Ok(self)
    }

    /// Power `p` in `K(r) = r^{-p}`.
    pub fn exponent(&self) -> f64 {
        let d = self.dimension as f64;
        match self.family {
            KernelFamily::PowerCutoff => d,
            KernelFamily::FractionalShift => d - self.epsilon,
            KernelFamily::SuperCritical => self.q.unwrap_or(d),
        }
    }

    /// Radius at or below which the kernel vanishes.
    pub fn cutoff(&self) -> f64 {
        match self.family {
            KernelFamily::FractionalShift => 0.0,
            _ => self.epsilon,
        }
    }

    /// The `ε = 0` member of the family.
    pub fn limit(&self) -> Self {
        Self { epsilon: 0.0, ..*self }
    }

    pub fn is_limit(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Pointwise value; zero on `(0, cutoff]`.
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("kernel evaluated at r = {r}, needs r > 0")));
        }
        Ok(self.value_unchecked(r))
    }

    pub(crate) fn value_unchecked(&self, r: f64) -> f64 {
        if r <= self.cutoff() {
            0.0
        } else {
            r.powf(-self.exponent())
        }
    }

    /// `∫_lo^hi K(r) r^m dr` in closed form; `hi` may be infinite.
    pub fn moment(&self, lo: f64, hi: f64, m: f64) -> Result<f64> {
        let lo = lo.max(self.cutoff());
        if hi <= lo {
            return Ok(0.0);
        }
        power_moment(lo, hi, m - self.exponent())
    }

    /// `M_ε = ω_{d-1} ∫₀¹ K_ε(t) t^{d-1} dt`.
    pub fn mollifier_mass(&self) -> Result<f64> {
        let d = self.dimension;
        self.moment(0.0, 1.0, d as f64 - 1.0)
            .map(|v| unit_ball_volume(d - 1) * v)
            .map_err(|_| Error::Divergent(format!("mollifier mass of {:?} at epsilon = {} is infinite", self.family, self.epsilon)))
    }

    fn require_limit(&self) -> Result<()> {
        if self.is_limit() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("transform needs the epsilon = 0 kernel, got epsilon = {}", self.epsilon)))
        }
    }

    /// `F(r) = σ_{d-1} ∫_r^∞ K₀(t) t^{d-2} dt`.
    pub fn f_transform(&self, r: f64) -> Result<f64> {
        self.require_limit()?;
        if !(r > 0.0) {
            return Err(Error::Domain(format!("F evaluated at r = {r}, needs r > 0")));
        }
        let d = self.dimension;
        self.moment(r, f64::INFINITY, d as f64 - 2.0)
            .map(|v| sphere_area(d) * v)
            .map_err(|_| Error::Divergent(format!("F diverges: tail of t^(d-2-p) with p = {}", self.exponent())))
    }

    /// `G(r) = |∫_1^r F(t) dt|`.
    pub fn g_transform(&self, r: f64) -> Result<f64> {
        self.f_transform(1.0)?;
        if !(r > 0.0) {
            return Err(Error::Domain(format!("G evaluated at r = {r}, needs r > 0")));
        }
        let d = self.dimension as f64;
        let p = self.exponent();
        // F(t) = σ t^{d-1-p} / (p - d + 1)
        let scale = sphere_area(self.dimension) / (p - d + 1.0);
        let (lo, hi) = if r < 1.0 { (r, 1.0) } else { (1.0, r) };
        Ok(scale * power_moment(lo, hi, d - 1.0 - p)?)
    }

    /// Checks `∫_η^1 K₀ r^{d-1} >= M max{η^{-2} ∫_0^η K₀ r^{d+1}, η ∫_η^1 K₀ r^{d-2}}` at every sample.
    pub fn check_ball_condition(&self, big_m: f64, etas: &[f64]) -> Result<bool> {
        self.require_limit()?;
        if !(big_m >= 0.0) {
            return Err(Error::Domain(format!("M must be nonnegative, got {big_m}")));
        }
        let d = self.dimension as f64;
        for &eta in etas {
            if !(eta > 0.0 && eta < 0.5) {
                return Err(Error::Domain(format!("eta samples must lie in (0, 1/2), got {eta}")));
            }
            if big_m == 0.0 {
                continue;
            }
            let lhs = self.moment(eta, 1.0, d - 1.0)?;
            let inner = match self.moment(0.0, eta, d + 1.0) {
                Ok(v) => v / (eta * eta),
                Err(_) => return Ok(false),
            };
            let outer = eta * self.moment(eta, 1.0, d - 2.0)?;
            if lhs < big_m * inner.max(outer) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Symbolic and numerical admissibility of the `ε = 0` member.
    pub fn admissibility(&self, growth_bound: f64) -> Admissibility {
        let k0 = self.limit();
        let d = self.dimension as f64;
        let p = k0.exponent();
        let deltas = [1e-2, 1e-4, 1e-6];
        let partial_masses: Vec<(f64, f64)> =
            deltas.iter().map(|&delta| (delta, power_moment(delta, 1.0, d - 1.0 - p).unwrap_or(f64::INFINITY))).collect();
        let growing = partial_masses.windows(2).all(|w| w[1].1 > w[0].1);
        let last = partial_masses.last().map(|x| x.1).unwrap_or(0.0);
        Admissibility {
            mass_diverges: true,
            mass_growth_observed: growing && last > growth_bound,
            partial_masses,
            tail_finite: p > d - 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    /// `∫₀^∞ K₀ r^{d-1}` is infinite (always true for pure power laws).
    pub mass_diverges: bool,
    /// Partial masses `∫_δ^1 K₀ r^{d-1}` grow monotonically past the requested bound.
    pub mass_growth_observed: bool,
    pub partial_masses: Vec<(f64, f64)>,
    /// `∫_δ^∞ K₀ min{r^{d-2}, r^{d-1}}` is finite.
    pub tail_finite: bool,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.mass_diverges && self.mass_growth_observed && self.tail_finite
    }
}

/// `∫_lo^hi t^k dt` for `0 <= lo <= hi <= ∞`.
pub fn power_moment(lo: f64, hi: f64, k: f64) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let e = k + 1.0;
    if hi.is_infinite() {
        if e >= 0.0 {
            return Err(Error::Divergent(format!("∫ t^{k} to infinity")));
        }
        return Ok(-lo.powf(e) / e);
    }
    if lo == 0.0 {
        if e <= 0.0 {
            return Err(Error::Divergent(format!("∫ t^{k} from zero")));
        }
        return Ok(hi.powf(e) / e);
    }
    let l = (hi / lo).ln();
    if e == 0.0 {
        return Ok(l);
    }
    Ok(lo.powf(e) * (e * l).exp_m1() / e)
}
