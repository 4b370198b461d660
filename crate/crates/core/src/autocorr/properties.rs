//! Structural checks on a grid autocorrelation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fft::AutocorrelationGrid;
use super::torus::TorusConfig;
use super::{RadialAutocorrelation, RadialOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocorrCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Bound minus measured quantity; negative on failure.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocorrReport {
    pub checks: Vec<AutocorrCheck>,
}

impl AutocorrReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AutocorrCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, slack: f64) -> AutocorrCheck {
    AutocorrCheck { name, passed: slack >= 0.0, slack }
}

/// Runs the standard battery of autocorrelation inequalities and identities on `grid = C_u`.
pub fn verify_autocorr_properties(grid: &AutocorrelationGrid, cfg: &TorusConfig) -> AutocorrReport {
    let n_cells = cfg.len() as f64;
    let lambda = cfg.volume_fraction();
    let values = grid.values();
    let c0 = values[0];
    let d = cfg.dimension();
    let n = cfg.cells_per_side() as isize;
    let mut checks = Vec::new();

    let max = values.iter().copied().fold(f64::MIN, f64::max);
    checks.push(check("maximum_at_origin", c0 - max));
    checks.push(check("value_at_origin", 1e-15 - (c0 - lambda).abs()));

    let mut symmetric = true;
    for (i, &v) in values.iter().enumerate() {
        let z = cfg.coords(i);
        let neg: Vec<isize> = (0..d).map(|a| -(z[a] as isize)).collect();
        symmetric &= grid.at(&neg) == v;
    }
    checks.push(check("point_symmetry", if symmetric { 0.0 } else { -1.0 }));

    checks.push(check("mean_equals_fraction_squared", 1e-10 - (grid.mean() - lambda * lambda).abs()));

    // perturbing u changes C by at most 2‖u - ũ‖₁/|T|
    let mut perturbed = cfg.clone();
    let mut flips = 0usize;
    for i in (0..cfg.len()).step_by(97) {
        perturbed.set(i, !cfg.get(i));
        flips += 1;
    }
    let other = AutocorrelationGrid::compute(&perturbed);
    let diff = values.iter().zip(other.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(check("perturbation_bound", 2.0 * flips as f64 / n_cells - diff));

    // |C(z + e_i) - C(z)| is at most the share of interfaces normal to axis i
    let mut lipschitz_slack = f64::INFINITY;
    for axis in 0..d {
        let bound = cfg.interface_faces(axis) as f64 / n_cells;
        let worst = (0..cfg.len())
            .map(|i| (values[i] - values[cfg.neighbor(i, axis, true)]).abs())
            .fold(0.0, f64::max);
        lipschitz_slack = lipschitz_slack.min(bound - worst);
    }
    checks.push(check("axis_lipschitz", lipschitz_slack));

    let complement = AutocorrelationGrid::compute(&cfg.complement());
    let worst = values
        .iter()
        .zip(complement.values())
        .map(|(a, b)| (b - (a + 1.0 - 2.0 * lambda)).abs())
        .fold(0.0, f64::max);
    checks.push(check("complement_identity", 1e-12 - worst));

    // |C(z) - C(w)| <= C(0) - C(z - w) on sampled pairs
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pair_slack = f64::INFINITY;
    for _ in 0..4000 {
        let z: Vec<isize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
        let w: Vec<isize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
        let zw: Vec<isize> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
        pair_slack = pair_slack.min(c0 - grid.at(&zw) - (grid.at(&z) - grid.at(&w)).abs());
    }
    checks.push(check("pairwise_modulus", pair_slack + 1e-15));

    let radial = RadialAutocorrelation::from_grid(grid, &RadialOptions::default());
    match radial {
        Ok(rad) => {
            let lo = rad.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rad.values.iter().copied().fold(f64::MIN, f64::max);
            checks.push(check("radial_range", (lo + 1e-15).min(c0 + 1e-15 - hi)));
            let osc = match &rad.source {
                super::RadialSource::Fft(p) => p.tail_oscillation,
                _ => 0.0,
            };
            // c_u stays in [0, λ], so its distance from λ² can never exceed max(λ², λ - λ²)
            checks.push(check("far_field_bounded", (lambda * lambda).max(lambda - lambda * lambda) + 1e-15 - osc));
        }
        Err(_) => checks.push(check("radial_range", -1.0)),
    }

    AutocorrReport { checks }
}
