//! Special functions: ball/sphere measures, generalized harmonic numbers, Pochhammer
//! symbols, the equal-argument Appell series used for two-ball interactions, and the
//! incomplete integrals that describe ball autocorrelations.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Volume of the unit ball in `R^d` (ω_d).
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Surface area of the unit sphere in `R^d` (σ_{d-1} = d ω_d).
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `H_q = ∫₀¹ (1 - t^q)/(1 - t) dt`, accurate to about 1e-14 absolute.
pub fn harmonic_number(q: f64) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("harmonic number needs q >= 0, got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    // s = 1 - t turns the removable singularity at t = 1 into a smooth start at s = 0
    let integrand = |s: f64| -(q * (-s).ln_1p()).exp_m1() / s;
    let r = quad::integrate(integrand, 0.0, 1.0, Tolerance { abs: 1e-15, rel: 1e-15, max_segments: 10_000 });
    Ok(r.value)
}

/// Rising factorial `(a)_n`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppellSeriesResult {
    pub value: f64,
    /// Number of anti-diagonals `m + n = s` summed.
    pub terms_used: usize,
    pub tail_bound: f64,
}

const APPELL_MAX_DIAGONALS: usize = 20_000;

/// `ℋ_d(t) = F4(3/2, (d+1)/2; (d+2)/2, (d+2)/2; t, t)` for `0 <= t < 1/4`.
///
/// Summed along anti-diagonals. The remainder after diagonal `S` is bounded by
/// `B_{S+1} / (1 - 4t)` where `B_s = t^s (3/2)_s (c)_s 2^s Γ(b)² / (s! Γ(b + s/2)²)`
/// dominates the diagonal sum (log-convexity of Γ) and `B_{s+1}/B_s < 4t` (Kershaw).
pub fn appell_h(d: usize, t: f64, tol: f64) -> Result<AppellSeriesResult> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("Appell series needs t >= 0, got {t}")));
    }
    if t >= 0.25 {
        return Err(Error::Convergence(format!("Appell series diverges for t >= 1/4, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if t == 0.0 {
        return Ok(AppellSeriesResult { value: 1.0, terms_used: 1, tail_bound: 0.0 });
    }
    let a1 = 1.5;
    let c = (d as f64 + 1.0) / 2.0;
    let b = (d as f64 + 2.0) / 2.0;
    let ln_t = t.ln();
    let lg_b = ln_gamma(b);
    let ln_bound = |s: f64| {
        s * ln_t + ln_gamma(a1 + s) - ln_gamma(a1) + ln_gamma(c + s) - ln_gamma(c)
            + s * std::f64::consts::LN_2
            + 2.0 * lg_b
            - ln_gamma(s + 1.0)
            - 2.0 * ln_gamma(b + s / 2.0)
    };
    let geometric = 1.0 / (1.0 - 4.0 * t);

    // ln of u_{0,s} = (3/2)_s (c)_s t^s / ((b)_s s!)
    let mut ln_lead = 0.0;
    let mut value = 0.0;
    for s in 0..APPELL_MAX_DIAGONALS {
        if s > 0 {
            let sf = s as f64;
            ln_lead += ((a1 + sf - 1.0) * (c + sf - 1.0) * t / ((b + sf - 1.0) * sf)).ln();
        }
        value += (ln_lead + ln_diagonal_ratio_sum(s, b)).exp();
        let tail = ln_bound((s + 1) as f64).exp() * geometric;
        if tail <= tol {
            return Ok(AppellSeriesResult { value, terms_used: s + 1, tail_bound: tail });
        }
    }
    Err(Error::Convergence(format!(
        "Appell series at t = {t} needs more than {APPELL_MAX_DIAGONALS} diagonals"
    )))
}

/// `ln Σ_m u_{m,s-m} / u_{0,s}` for the diagonal `s`. The sum grows like `4^s`, so it is
/// kept rescaled and combined with the leading term in log space.
fn ln_diagonal_ratio_sum(s: usize, b: f64) -> f64 {
    // ratio u_{m+1,n-1}/u_{m,n} = (b+n-1) n / ((b+m)(m+1)), n = s - m
    let mut v = 1.0f64;
    let mut sum = 1.0f64;
    let mut scale = 0.0f64;
    for m in 0..s {
        let n = (s - m) as f64;
        let mf = m as f64;
        v *= (b + n - 1.0) * n / ((b + mf) * (mf + 1.0));
        sum += v;
        if v > 1e200 {
            v *= 1e-200;
            sum *= 1e-200;
            scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    sum.ln() + scale
}

/// `I_k(x) = ∫_x^1 (1 - t²)^{k/2} dt` for `x ∈ [0, 1]`.
pub fn ball_cap_integral(k: usize, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let w = (1.0 - x * x).max(0.0);
    let mut even = 1.0 - x;
    let mut odd = 0.5 * (x.acos() - x * w.sqrt());
    if k == 0 {
        return even;
    }
    if k == 1 {
        return odd;
    }
    let mut j = 2;
    loop {
        let kf = j as f64;
        even = (kf * even - x * w.powf(kf / 2.0)) / (kf + 1.0);
        if j == k {
            return even;
        }
        let kf = kf + 1.0;
        odd = (kf * odd - x * w.powf(kf / 2.0)) / (kf + 1.0);
        if j + 1 == k {
            return odd;
        }
        j += 2;
    }
}

/// `∫_0^x [1 - (1 - t²)^{k/2}] dt` without cancellation at small `x`.
pub fn ball_cap_defect(k: usize, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if k == 0 || x == 0.0 {
        return 0.0;
    }
    if x > 0.5 {
        return x - (ball_cap_integral(k, 0.0) - ball_cap_integral(k, x));
    }
    let alpha = k as f64 / 2.0;
    let y = x * x;
    let mut g = 1.0;
    let mut power = x;
    let mut sum = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        g *= (jf - 1.0 - alpha) / jf;
        power *= y;
        let term = -g * power / (2.0 * jf + 1.0);
        sum += term;
        if g == 0.0 || term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_of_low_dimensions() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn cap_integral_closed_forms() {
        // k = 1: half the area of a unit disk segment
        assert!((ball_cap_integral(1, 0.0) - PI / 4.0).abs() < 1e-15);
        // k = 2: ∫_x^1 (1 - t²) dt
        let x: f64 = 0.3;
        let exact = (1.0 - x) - (1.0 - x.powi(3)) / 3.0;
        assert!((ball_cap_integral(2, x) - exact).abs() < 1e-15);
        for k in 0..8 {
            let total = unit_ball_volume(k + 1) / (2.0 * unit_ball_volume(k));
            assert!((ball_cap_integral(k, 0.0) - total).abs() < 1e-14, "k={k}");
            assert!(ball_cap_integral(k, 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cap_defect_matches_quadrature() {
        for k in 0..7 {
            for &x in &[1e-6, 0.01, 0.3, 0.5, 0.51, 0.9, 1.0] {
                let alpha = k as f64 / 2.0;
                let oracle = quad::integrate(
                    |t: f64| -(alpha * (-t * t).ln_1p()).exp_m1(),
                    0.0,
                    x,
                    Tolerance::new(1e-30, 1e-14),
                )
                .value;
                let got = ball_cap_defect(k, x);
                assert!((got - oracle).abs() <= 1e-13 * oracle.abs().max(1e-300) + 1e-16, "k={k} x={x} {got} {oracle}");
            }
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(1.5, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(0.5, 2), 0.75);
    }
}
