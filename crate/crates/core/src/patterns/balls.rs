//! Balls centred on a Bravais lattice: pair interaction, lattice energy and the optimal scale.

use serde::{Deserialize, Serialize};

use super::lattice::{lattice_zeta, BravaisLattice, ZetaResult};
use crate::error::{Error, Result};
use crate::par;
use crate::specfun::{appell_h, harmonic_number, pochhammer, sphere_area, unit_ball_volume};

const APPELL_TOL: f64 = 1e-15;

/// Relative accuracy requested from the slowly converging lattice sums.
fn zeta_tolerance(d: usize) -> f64 {
    match d {
        1 | 2 => 1e-6,
        3 => 2e-3,
        _ => 1e-3,
    }
}

fn appell(d: usize, t: f64) -> Result<f64> {
    Ok(appell_h(d, t, APPELL_TOL)?.value)
}


/// Mean of `|x - y|^{-(d+1)}` over `x ∈ B_ρ(0)`, `y ∈ B_ρ(q)` with `|q| = distance`.
pub fn two_ball_interaction(radius: f64, distance: f64, dimension: usize) -> Result<f64> {
    if !(radius > 0.0 && distance.is_finite()) {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    if !(radius < distance / 2.0) {
        return Err(Error::Precondition(format!("balls of radius {radius} at distance {distance} are not separated")));
    }
    let t = (radius / distance).powi(2);
    Ok(appell(dimension, t)? / distance.powi(dimension as i32 + 1))
}

/// `(1 + 3(d+1)/(d+2) t)/q^{d+1}`, a lower bound for [`two_ball_interaction`].
pub fn two_ball_lower_bound(radius: f64, distance: f64, dimension: usize) -> f64 {
    let t = (radius / distance).powi(2);
    (1.0 + appell_coefficient(dimension, 1) * t) / distance.powi(dimension as i32 + 1)
}

/// `ω_{d-1}(ln(1/(2ρ)) - 1 + H_{(d-1)/2}/2)|∂B_ρ|`, the energy of one isolated ball.
pub fn ball_self_energy(radius: f64, dimension: usize) -> Result<f64> {
    let half_h = 0.5 * harmonic_number((dimension as f64 - 1.0) / 2.0)?;
    let area = sphere_area(dimension) * radius.powi(dimension as i32 - 1);
    Ok(-unit_ball_volume(dimension - 1) * ((2.0 * radius).ln() + 1.0 - half_h) * area)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallLattice {
    pub lattice: BravaisLattice,
    pub radius: f64,
}

impl BallLattice {
    /// Balls must be strictly separated: `ρ < |e_min|/2`.
    pub fn new(lattice: BravaisLattice, radius: f64) -> Result<Self> {
        Self { lattice, radius }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Parameter(format!("ball radius must be positive, got {}", self.radius)));
        }
        let lmin = self.lattice.shortest_vector();
        if !(self.radius < 0.5 * lmin) {
            return Err(Error::Precondition(format!("ball radius {} is not below half the shortest lattice vector {lmin}", self.radius)));
        }
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.lattice.dimension()
    }

    pub fn fraction(&self) -> f64 {
        unit_ball_volume(self.dimension()) * self.radius.powi(self.dimension() as i32) / self.lattice.cell_volume()
    }
}

/// Energy per unit volume of a ball lattice, split into self and interaction parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallLatticeEnergy {
    pub value: f64,
    pub self_energy: f64,
    pub interaction: f64,
    /// `I_Λ = |Λ|^{-1} Σ_{q≠0} ℋ_d(ρ²/|q|²)/|q|^{d+1}`.
    pub interaction_sum: f64,
    pub fraction: f64,
    /// Certified bound on the error of `value` from truncated lattice sums.
    pub error: f64,
}

/// Taylor coefficients of `ℋ_d` at 0 that are split off analytically in lattice sums.
const SPLIT_ORDER: usize = 2;

/// Coefficient of `t^s` in `ℋ_d(t)`: `Σ_{m+n=s} (3/2)_s (c)_s / ((b)_m (b)_n m! n!)`.
fn appell_coefficient(d: usize, s: usize) -> f64 {
    let c = (d as f64 + 1.0) / 2.0;
    let b = (d as f64 + 2.0) / 2.0;
    let lead = pochhammer(1.5, s as u32) * pochhammer(c, s as u32);
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    (0..=s).map(|m| lead / (pochhammer(b, m as u32) * pochhammer(b, (s - m) as u32) * fact(m) * fact(s - m))).sum()
}

/// `ζ(Λ, d+1+2j)` for `j = 0..=SPLIT_ORDER`, which do not depend on the radius.
#[derive(Debug, Clone)]
struct LatticeSums {
    lattice: BravaisLattice,
    shortest: f64,
    coefficients: Vec<f64>,
    zetas: Vec<ZetaResult>,
}

impl LatticeSums {
    fn new(lattice: &BravaisLattice) -> Result<Self> {
        let d = lattice.dimension();
        let shortest = lattice.shortest_vector();
        let coefficients = (0..=SPLIT_ORDER).map(|j| appell_coefficient(d, j)).collect();
        let zetas = (0..=SPLIT_ORDER)
            .map(|j| {
                let s = (d + 1 + 2 * j) as f64;
                lattice_zeta(lattice, s, zeta_tolerance(d) * 0.1f64.powi(j as i32) * shortest.powf(-s))
            })
            .collect::<Result<_>>()?;
        Ok(Self { lattice: lattice.clone(), shortest, coefficients, zetas })
    }

    fn remainder(&self, h: f64, t: f64) -> f64 {
        h - self.coefficients.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    /// `Σ_{q≠0} ℋ_d(ρ²/|q|²)/|q|^{d+1}` and its error bound.
    ///
    /// The Taylor part of `ℋ` is summed through lattice zeta values. The remainder
    /// `ℋ(t) - Σ_{j≤J} a_j t^j` has nonnegative coefficients, so divided by `t^{J+1}`
    /// it increases in `t`; outside radius `R` the terms are then bounded by
    /// `k(t_R) ρ^{2J+2} |q|^{-(d+3+2J)}`.
    fn interaction_sum(&self, radius: f64) -> Result<(f64, f64)> {
        let d = self.lattice.dimension();
        let s1 = d as f64 + 1.0;
        let rho2 = radius * radius;
        let order = SPLIT_ORDER as i32 + 1;
        let tol = 1e-12 * self.shortest.powf(-s1);
        let step = 2f64.powf(0.25);
        let mut big_r = self.shortest;
        let tail = loop {
            let t = rho2 / (big_r * big_r);
            let k = self.remainder(appell(d, t)?, t).max(0.0) / t.powi(order);
            let bound = rho2.powi(order) * k * self.lattice.zeta_tail_upper(s1 + 2.0 * order as f64, big_r);
            if bound <= tol || big_r > 1e4 * self.shortest {
                break bound;
            }
            big_r *= step;
        };
        let near = self.lattice.lattice_sum(big_r, |q| {
            let t = rho2 / (q * q);
            // ℋ is evaluated for t < 1/4 only; radius < |q|/2 was checked by the caller
            let h = appell(d, t).unwrap_or(f64::NAN);
            self.remainder(h, t) / q.powf(s1)
        });
        if near.sum.is_nan() {
            return Err(Error::Precondition("balls overlap a lattice neighbour".into()));
        }
        let mut value = near.sum + 0.5 * tail;
        let mut err = 0.5 * tail;
        for (j, (a, z)) in self.coefficients.iter().zip(&self.zetas).enumerate() {
            let w = a * rho2.powi(j as i32);
            value += w * z.value;
            err += w * z.tail_bound;
        }
        Ok((value, err))
    }

    fn energy(&self, radius: f64) -> Result<BallLatticeEnergy> {
        let d = self.lattice.dimension();
        let vol = self.lattice.cell_volume();
        let (sum, err) = self.interaction_sum(radius)?;
        let ball = unit_ball_volume(d) * radius.powi(d as i32);
        let self_energy = ball_self_energy(radius, d)? / vol;
        let interaction = sum / vol * ball * ball;
        Ok(BallLatticeEnergy {
            value: self_energy + interaction,
            self_energy,
            interaction,
            interaction_sum: sum / vol,
            fraction: ball / vol,
            error: err / vol * ball * ball,
        })
    }
}

/// Energy per unit volume of the ball lattice `b` with `K₀ = r^{-d}`.
pub fn ball_lattice_energy(b: &BallLattice) -> Result<BallLatticeEnergy> {
    let b = b.clone().validated()?;
    LatticeSums::new(&b.lattice)?.energy(b.radius)
}

/// Largest volume fraction with separated balls: `ω_d (|e_min|/2)^d / |Λ|`.
pub fn max_fraction(lattice: &BravaisLattice) -> f64 {
    let d = lattice.dimension();
    unit_ball_volume(d) * (0.5 * lattice.shortest_vector()).powi(d as i32) / lattice.cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBallLattice {
    pub rho_opt: f64,
    pub e_b: f64,
    /// Scale `a` of the optimal lattice `aΛ₀`.
    pub scale: f64,
    pub error: f64,
}

pub(crate) struct BallOptimizer {
    sums: LatticeSums,
    max_fraction: f64,
}

impl BallOptimizer {
    /// `lattice` is rescaled to unit cell volume first.
    pub(crate) fn new(lattice: &BravaisLattice, dimension: usize) -> Result<Self> {
        if lattice.dimension() != dimension {
            return Err(Error::Parameter(format!("lattice has dimension {}, expected {dimension}", lattice.dimension())));
        }
        let unit = lattice.normalized();
        let max_fraction = max_fraction(&unit);
        Ok(Self { sums: LatticeSums::new(&unit)?, max_fraction })
    }

    /// On `aΛ₀` with fixed fraction the radius is `aρ̃`, and the energy is
    /// `E(a) = (C - P ln a)/a` with `P = ω_{d-1}|∂B_ρ̃|`. Its only critical point
    /// `ln a = 1 + C/P` is the global minimum, with value `-P/a`.
    pub(crate) fn optimal(&self, lambda: f64) -> Result<OptimalBallLattice> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Domain(format!("volume fraction must lie in (0, 1), got {lambda}")));
        }
        if !(lambda < self.max_fraction) {
            return Err(Error::Infeasible(format!("volume fraction {lambda} exceeds the separated-ball limit {}", self.max_fraction)));
        }
        let d = self.sums.lattice.dimension();
        let rho = (lambda / unit_ball_volume(d)).powf(1.0 / d as f64);
        let (sum, err) = self.sums.interaction_sum(rho)?;
        let half_h = 0.5 * harmonic_number((d as f64 - 1.0) / 2.0)?;
        let p = unit_ball_volume(d - 1) * sphere_area(d) * rho.powi(d as i32 - 1);
        let c = -p * ((2.0 * rho).ln() + 1.0 - half_h) + lambda * lambda * sum;
        let scale = (1.0 + c / p).exp();
        Ok(OptimalBallLattice { rho_opt: rho * scale, e_b: -p / scale, scale, error: lambda * lambda * err / scale })
    }
}

/// Optimal radius and energy of balls on scaled copies of `lattice` at volume fraction `lambda`.
pub fn optimal_ball_lattice(lambda: f64, lattice: &BravaisLattice, dimension: usize) -> Result<OptimalBallLattice> {
    BallOptimizer::new(lattice, dimension)?.optimal(lambda)
}

/// Energies of several fractions on one lattice, sharing the lattice sums.
pub(crate) fn optimal_ball_lattices(lambdas: &[f64], lattice: &BravaisLattice, dimension: usize) -> Result<Vec<Result<OptimalBallLattice>>> {
    let opt = BallOptimizer::new(lattice, dimension)?;
    Ok(par::map_slice(lambdas, |&l| opt.optimal(l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_limit() {
        let v = two_ball_interaction(1e-6, 3.0, 2).unwrap();
        assert!((v * 27.0 - 1.0).abs() < 1e-10);
        assert!(two_ball_interaction(1.5, 3.0, 2).is_err());
    }

    #[test]
    fn taylor_coefficients() {
        assert_eq!(appell_coefficient(2, 0), 1.0);
        assert!((appell_coefficient(3, 1) - 12.0 / 5.0).abs() < 1e-15);
        let t = 1e-3;
        let h = appell(2, t).unwrap();
        let series = 1.0 + appell_coefficient(2, 1) * t + appell_coefficient(2, 2) * t * t;
        assert!((h - series).abs() < 10.0 * appell_coefficient(2, 3) * t.powi(3));
    }

    #[test]
    fn self_energy_of_half_ball() {
        let e = ball_self_energy(0.5, 2).unwrap();
        assert!((e + 2.0 * std::f64::consts::PI * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn infeasible_fraction() {
        let t = BravaisLattice::triangular();
        assert!(matches!(optimal_ball_lattice(0.95, &t, 2), Err(Error::Infeasible(_))));
        assert!((max_fraction(&t) - std::f64::consts::PI / 12f64.sqrt()).abs() < 1e-12);
    }
}
