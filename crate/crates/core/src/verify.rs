//! Seeded property suite over random torus configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autocorr::{verify_autocorr_properties, AutocorrelationGrid, RadialAutocorrelation, RadialOptions, TorusConfig};
use crate::energy::{bv_bound_check_radial, interaction_energy, lower_bound_check};
use crate::error::Result;
use crate::kernels::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub configurations: usize,
    pub pairs: usize,
    pub epsilon: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 2024, configurations: 20, pairs: 50, epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub suite: &'static str,
    pub case: String,
    pub passed: bool,
    /// Distance to the bound in the direction of safety; negative on failure.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn summaries(&self) -> Vec<SuiteSummary> {
        let mut out: Vec<SuiteSummary> = Vec::new();
        for c in &self.checks {
            let entry = match out.iter_mut().find(|s| s.suite == c.suite) {
                Some(s) => s,
                None => {
                    out.push(SuiteSummary { suite: c.suite, cases: 0, failures: 0, worst_slack: f64::INFINITY });
                    out.last_mut().unwrap()
                }
            };
            entry.cases += 1;
            entry.failures += usize::from(!c.passed);
            entry.worst_slack = entry.worst_slack.min(c.slack);
        }
        out
    }
}

pub const AUTOCORRELATION: &str = "autocorrelation";
pub const COMPLEMENT_SYMMETRY: &str = "complement_symmetry";
pub const INTERACTION_SIGN: &str = "interaction_nonnegative";
pub const BV_BOUND: &str = "bv_bound";
pub const LOWER_BOUND: &str = "lower_bound";

struct Recorder {
    checks: Vec<PropertyCheck>,
}

impl Recorder {
    fn push(&mut self, suite: &'static str, case: String, slack: f64) {
        self.checks.push(PropertyCheck { suite, case, passed: slack >= 0.0, slack });
    }

    /// Energy of a profile, recording the lower bound on the way.
    fn energy(&mut self, rad: &RadialAutocorrelation, kernel: &Kernel, case: &str) -> Result<(f64, f64)> {
        let lb = lower_bound_check(rad, kernel)?;
        let tol = lb.energy.quadrature_error + 1e-12 * lb.rhs.abs().max(1.0);
        self.push(LOWER_BOUND, case.to_string(), lb.lhs - lb.rhs + tol);
        Ok((lb.lhs, lb.energy.quadrature_error))
    }
}

fn profile(cfg: &TorusConfig) -> Result<RadialAutocorrelation> {
    RadialAutocorrelation::from_grid(&AutocorrelationGrid::compute(cfg), &RadialOptions::default())
}

fn random_config(rng: &mut ChaCha8Rng, dimension: usize) -> Result<TorusConfig> {
    let n = match dimension {
        1 => 256,
        2 => 32,
        _ => 16,
    };
    let side = rng.gen_range(2.0..6.0);
    let fraction = rng.gen_range(0.05..0.95);
    TorusConfig::random(dimension, side, n, fraction, rng.gen())
}

/// Gap, in cells, between the two halves of a pair. The cross-correlation then vanishes on every
/// shell used by the slope fit, so the grid perimeters add up.
pub const PAIR_GAP: usize = crate::autocorr::SLOPE_SHELLS + 1;

/// Splits `cfg` into two slabs along the first axis separated by [`PAIR_GAP`] empty layers on both sides.
fn separated_pair(cfg: &TorusConfig) -> Result<(TorusConfig, TorusConfig)> {
    let n = cfg.cells_per_side();
    let half = n / 2;
    let mut u1 = TorusConfig::empty(cfg.dimension(), cfg.side_length(), n)?;
    let mut u2 = u1.clone();
    for idx in (0..cfg.len()).filter(|&j| cfg.get(j)) {
        let x = cfg.coords(idx)[0];
        if x + PAIR_GAP <= half {
            u1.set(idx, true);
        } else if x >= half && x + PAIR_GAP <= n {
            u2.set(idx, true);
        }
    }
    Ok((u1, u2))
}

/// Runs every suite and collects one check per case.
pub fn run_property_suite(options: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut rec = Recorder { checks: Vec::new() };

    for i in 0..options.configurations {
        let d = 1 + i % 3;
        let cfg = random_config(&mut rng, d)?;
        let grid = AutocorrelationGrid::compute(&cfg);
        for c in verify_autocorr_properties(&grid, &cfg).checks {
            rec.push(AUTOCORRELATION, format!("config {i} (d = {d}): {}", c.name), c.slack);
        }

        let kernel = Kernel::power_cutoff(options.epsilon, d)?;
        let rad = RadialAutocorrelation::from_grid(&grid, &RadialOptions::default())?;
        let case = format!("config {i} (d = {d})");
        let (e, err) = rec.energy(&rad, &kernel, &case)?;
        let (ec, errc) = rec.energy(&profile(&cfg.complement())?, &kernel, &format!("{case} complement"))?;
        let tol = err + errc + 1e-10 * e.abs().max(1.0);
        rec.push(COMPLEMENT_SYMMETRY, case.clone(), tol - (e - ec).abs());

        let bv = bv_bound_check_radial(&rad, &kernel)?;
        let tol = bv.energy.quadrature_error / crate::specfun::sphere_area(d) + 1e-12;
        rec.push(BV_BOUND, case, bv.rhs + tol - bv.lhs);
    }

    for i in 0..options.pairs {
        let d = 1 + i % 3;
        let cfg = random_config(&mut rng, d)?;
        let (u1, u2) = separated_pair(&cfg)?;
        let kernel = Kernel::power_cutoff(options.epsilon, d)?;
        let case = format!("pair {i} (d = {d})");
        let mut err = 0.0;
        let union = u1.union(&u2)?;
        for (part, name) in [(&u1, "first"), (&u2, "second"), (&union, "union")] {
            err += rec.energy(&profile(part)?, &kernel, &format!("{case} {name}"))?.1;
        }
        let value = interaction_energy(&u1, &u2, &kernel)?;
        rec.push(INTERACTION_SIGN, case, value + err + 1e-12);
    }

    Ok(VerifyReport { checks: rec.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_property_suite(&VerifyOptions { configurations: 3, pairs: 3, ..Default::default() }).unwrap();
        assert!(report.all_passed(), "{:#?}", report.failures().collect::<Vec<_>>());
        let suites: Vec<_> = report.summaries().iter().map(|s| s.suite).collect();
        for s in [AUTOCORRELATION, COMPLEMENT_SYMMETRY, INTERACTION_SIGN, BV_BOUND, LOWER_BOUND] {
            assert!(suites.contains(&s), "{s}");
        }
    }
}
