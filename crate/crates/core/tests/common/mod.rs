//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nlperim::autocorr::TorusConfig;
use nlperim::energy::energy_of_config_with;
use nlperim::kernels::Kernel;
use nlperim::minimize::{annealing_radial_options, Schedule};

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Composite midpoint rule; never evaluates `f` at the endpoints.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Volume of the intersection of two balls of radius `rho` whose centres are `s` apart.
pub fn lens_volume(rho: f64, s: f64, d: usize) -> f64 {
    if s >= 2.0 * rho {
        return 0.0;
    }
    match d {
        2 => 2.0 * rho * rho * (s / (2.0 * rho)).acos() - 0.5 * s * (4.0 * rho * rho - s * s).sqrt(),
        3 => PI * (4.0 * rho + s) * (2.0 * rho - s).powi(2) / 12.0,
        _ => panic!("lens volume only for d = 2, 3"),
    }
}

/// `s^{d-1} ∫_{S^{d-1}} |q e - s θ|^{-(d+1)} dθ`.
fn weighted_sphere_mean(q: f64, s: f64, d: usize) -> f64 {
    match d {
        2 => {
            // periodic and smooth in φ, so the trapezoid rule converges geometrically
            let m = 4096;
            let h = 2.0 * PI / m as f64;
            let sum: f64 = (0..m).map(|k| (q * q + s * s - 2.0 * q * s * (k as f64 * h).cos()).powf(-1.5)).sum();
            s * sum * h
        }
        3 => PI * s / q * ((q - s).powi(-2) - (q + s).powi(-2)),
        _ => panic!("only d = 2, 3"),
    }
}

/// Mean of `|x - y|^{-(d+1)}` over two balls of radius `rho` at distance `q`, by writing the
/// double integral against the lens volume `|B ∩ (B + v)|`.
pub fn two_ball_oracle(rho: f64, q: f64, d: usize) -> f64 {
    let ball = match d {
        2 => PI * rho * rho,
        _ => 4.0 * PI * rho.powi(3) / 3.0,
    };
    let integral = simpson(|s| lens_volume(rho, s, d) * weighted_sphere_mean(q, s, d), 0.0, 2.0 * rho, 20_000);
    integral / (ball * ball)
}

/// Annealing setup used for the ball-minimality check: 120 cells (λ ≈ 0.03) on a 64² grid of side 8.
pub struct DeskScale {
    pub side: f64,
    pub cells_per_side: usize,
    pub count: usize,
    pub epsilon: f64,
    pub steps: u64,
    pub t0: f64,
    pub t_final: f64,
}

impl Default for DeskScale {
    fn default() -> Self {
        Self { side: 8.0, cells_per_side: 64, count: 120, epsilon: 0.05, steps: 1_000_000, t0: 1e-2, t_final: 1e-6 }
    }
}

impl DeskScale {
    pub fn kernel(&self) -> Kernel {
        Kernel::power_cutoff(self.epsilon, 2).unwrap()
    }

    pub fn schedule(&self) -> Schedule {
        let cooling = (self.t_final / self.t0).powf(1.0 / self.steps as f64);
        Schedule { t0: self.t0, cooling_factor: cooling, steps: self.steps }
    }

    pub fn ball(&self) -> TorusConfig {
        let c = self.side / 2.0;
        TorusConfig::ball_with_count(2, self.side, self.cells_per_side, self.count, &[c, c]).unwrap()
    }

    pub fn ball_energy(&self) -> f64 {
        let ball = self.ball();
        energy_of_config_with(&ball, &self.kernel(), &annealing_radial_options(&ball).unwrap()).unwrap().value
    }

    pub fn random_start(&self, seed: u64) -> TorusConfig {
        TorusConfig::random_with_count(2, self.side, self.cells_per_side, self.count, seed ^ 0x9e37_79b9).unwrap()
    }
}
