//! Volume-preserving simulated annealing on torus grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shape::fraenkel_asymmetry;
use crate::autocorr::{correlate, shell_map_for, AutocorrelationGrid, RadialAutocorrelation, RadialOptions, RadialSource, TorusConfig};
use crate::energy::{energy_of_config_with, fft_shell_weights};
use crate::error::{Error, Result};
use crate::kernels::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub t0: f64,
    /// Temperature after step `k` is `t0 * cooling_factor^k`.
    pub cooling_factor: f64,
    pub steps: u64,
}

impl Schedule {
    pub fn validated(self) -> Result<Self> {
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return Err(Error::Parameter(format!("cooling factor must lie in (0, 1), got {}", self.cooling_factor)));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Parameter(format!("initial temperature must be positive, got {}", self.t0)));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// Move an occupied cell with an empty neighbour to an empty cell with an occupied neighbour.
    #[default]
    Boundary,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealOptions {
    /// Steps between full FFT re-evaluations of the energy.
    pub refresh_interval: u64,
    pub proposal: Proposal,
    /// Steps between trajectory records; 0 disables the log.
    pub log_interval: u64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { refresh_interval: 1000, proposal: Proposal::Boundary, log_interval: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealState {
    pub config: TorusConfig,
    pub energy: f64,
    pub best_config: TorusConfig,
    pub best_energy: f64,
    pub temperature: f64,
    pub rng_seed: u64,
    pub step_count: u64,
    pub accepted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub step: u64,
    pub temperature: f64,
    pub energy: f64,
    pub best_energy: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub state: AnnealState,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Largest relative gap between the running and the recomputed energy at a refresh.
    pub max_drift: f64,
}

/// Energy as `base + Q/N` with `Q = Σ_{x,y} u(x) u(y) W(y - x)` and `φ(x) = Σ_y u(y) W(y - x)`.
struct Incremental {
    d: usize,
    n: usize,
    base: f64,
    w: Vec<f64>,
    phi: Vec<f64>,
    coords: Vec<[usize; 3]>,
}

/// Profile options used for every energy of a fixed-volume run: the slope window is the one a
/// rasterised ball of the same volume gets, so all sets with that volume share one estimator.
pub fn annealing_radial_options(cfg: &TorusConfig) -> Result<RadialOptions> {
    let count = cfg.occupied_count();
    let smaller = count.min(cfg.len() - count);
    if smaller == 0 {
        return Ok(RadialOptions::innermost());
    }
    let centre = vec![0.5 * cfg.side_length(); cfg.dimension()];
    let ball = TorusConfig::ball_with_count(cfg.dimension(), cfg.side_length(), cfg.cells_per_side(), smaller, &centre)?;
    let rad = RadialAutocorrelation::from_grid(&AutocorrelationGrid::compute(&ball), &RadialOptions::default())?;
    let window = match &rad.source {
        RadialSource::Fft(p) => p.slope_window,
        _ => unreachable!("grid profiles come from the FFT"),
    };
    Ok(RadialOptions { slope_window: Some(window), ..RadialOptions::default() })
}

impl Incremental {
    fn new(cfg: &TorusConfig, kernel: &Kernel, options: &RadialOptions) -> Result<Self> {
        let (d, n) = (cfg.dimension(), cfg.cells_per_side());
        let map = shell_map_for(d, n, options);
        let h = cfg.cell_size();
        let radii: Vec<f64> = map.mean_norms().iter().map(|m| m * h).collect();
        let lambda = cfg.volume_fraction();
        let window = options.slope_window.expect("annealing fixes the slope window");
        let (base, weights) = fft_shell_weights(&radii, map.counts(), window, lambda, lambda * lambda, kernel)?;
        let w = map.scatter(&weights);
        let coords = (0..cfg.len()).map(|i| cfg.coords(i)).collect();
        let mut out = Self { d, n, base, w, phi: Vec::new(), coords };
        out.refresh_phi(cfg);
        Ok(out)
    }

    fn refresh_phi(&mut self, cfg: &TorusConfig) {
        let u: Vec<f64> = cfg.occupancy().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        self.phi = correlate(self.d, self.n, &self.w, &u);
    }

    /// Index of `a - b` on the torus.
    fn diff(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (&self.coords[a], &self.coords[b]);
        (0..self.d).fold(0, |acc, k| acc * self.n + (ca[k] + self.n - cb[k]) % self.n)
    }

    fn energy(&self, cfg: &TorusConfig) -> f64 {
        let q: f64 = cfg.occupancy().iter().zip(&self.phi).filter(|(b, _)| **b).map(|(_, p)| p).sum();
        self.base + q / cfg.len() as f64
    }

    /// Change of energy when the occupied cell `p` moves to the empty cell `q`.
    fn delta(&self, p: usize, q: usize) -> f64 {
        let dq = 2.0 * (self.phi[q] - self.phi[p]) + 2.0 * self.w[0] - 2.0 * self.w[self.diff(q, p)];
        dq / self.phi.len() as f64
    }

    fn apply(&mut self, p: usize, q: usize) {
        for x in 0..self.phi.len() {
            let gain = self.w[self.diff(q, x)] - self.w[self.diff(p, x)];
            self.phi[x] += gain;
        }
    }
}

/// Occupied and empty cells as swappable index lists.
struct Cells {
    occupied: Vec<usize>,
    empty: Vec<usize>,
    slot: Vec<usize>,
}

impl Cells {
    fn new(cfg: &TorusConfig) -> Self {
        let mut occupied = Vec::new();
        let mut empty = Vec::new();
        let mut slot = vec![0; cfg.len()];
        for (i, s) in slot.iter_mut().enumerate() {
            let list = if cfg.get(i) { &mut occupied } else { &mut empty };
            *s = list.len();
            list.push(i);
        }
        Self { occupied, empty, slot }
    }

    fn swap(&mut self, p: usize, q: usize) {
        let (sp, sq) = (self.slot[p], self.slot[q]);
        self.occupied[sp] = q;
        self.empty[sq] = p;
        self.slot[q] = sp;
        self.slot[p] = sq;
    }
}

fn on_boundary(cfg: &TorusConfig, idx: usize) -> bool {
    let v = cfg.get(idx);
    (0..cfg.dimension()).any(|a| cfg.get(cfg.neighbor(idx, a, true)) != v || cfg.get(cfg.neighbor(idx, a, false)) != v)
}

fn pick(list: &[usize], cfg: &TorusConfig, rng: &mut ChaCha8Rng, proposal: Proposal) -> usize {
    if proposal == Proposal::Boundary {
        for _ in 0..64 {
            let c = list[rng.gen_range(0..list.len())];
            if on_boundary(cfg, c) {
                return c;
            }
        }
    }
    list[rng.gen_range(0..list.len())]
}

/// [`anneal_with`] using the default options.
pub fn anneal(initial: &TorusConfig, kernel: &Kernel, schedule: &Schedule, seed: u64) -> Result<AnnealState> {
    Ok(anneal_with(initial, kernel, schedule, seed, &AnnealOptions::default())?.state)
}

/// Metropolis dynamics with single-cell swaps at fixed occupied count; returns the best state seen.
pub fn anneal_with(initial: &TorusConfig, kernel: &Kernel, schedule: &Schedule, seed: u64, options: &AnnealOptions) -> Result<AnnealOutcome> {
    let schedule = schedule.validated()?;
    let kernel = kernel.validated()?;
    if kernel.dimension != initial.dimension() {
        return Err(Error::Parameter(format!("kernel dimension {} does not match grid dimension {}", kernel.dimension, initial.dimension())));
    }
    if !(kernel.epsilon > 0.0) {
        return Err(Error::Precondition("annealing needs a kernel with epsilon > 0".into()));
    }
    let refresh = options.refresh_interval.max(1);
    let mut cfg = initial.clone();
    let radial = annealing_radial_options(&cfg)?;
    let mut inc = Incremental::new(&cfg, &kernel, &radial)?;
    let mut energy = energy_of_config_with(&cfg, &kernel, &radial)?.value;
    let mut cells = Cells::new(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state_best = (cfg.clone(), energy);
    let mut trajectory = Vec::new();
    let mut max_drift = ((inc.energy(&cfg) - energy) / energy.abs().max(1e-300)).abs();
    let mut accepted = 0u64;
    let mut temperature = schedule.t0;
    let movable = !cells.occupied.is_empty() && !cells.empty.is_empty();

    for step in 1..=schedule.steps {
        if movable {
            let p = pick(&cells.occupied, &cfg, &mut rng, options.proposal);
            let q = pick(&cells.empty, &cfg, &mut rng, options.proposal);
            let de = inc.delta(p, q);
            let accept = de <= 0.0 || rng.gen::<f64>() < (-de / temperature).exp();
            if accept {
                inc.apply(p, q);
                cfg.set(p, false);
                cfg.set(q, true);
                cells.swap(p, q);
                energy += de;
                accepted += 1;
            }
            if step % refresh == 0 {
                let full = energy_of_config_with(&cfg, &kernel, &radial)?.value;
                max_drift = max_drift.max(((energy - full) / full.abs().max(1e-300)).abs());
                energy = full;
                inc.refresh_phi(&cfg);
            }
            if energy < state_best.1 {
                state_best = (cfg.clone(), energy);
            }
        }
        temperature *= schedule.cooling_factor;
        if options.log_interval > 0 && step % options.log_interval == 0 {
            trajectory.push(TrajectoryPoint {
                step,
                temperature,
                energy,
                best_energy: state_best.1,
                asymmetry: fraenkel_asymmetry(&cfg).unwrap_or(f64::NAN),
            });
        }
    }

    let (best_config, best_energy) = state_best;
    Ok(AnnealOutcome {
        state: AnnealState {
            config: cfg,
            energy,
            best_config,
            best_energy,
            temperature,
            rng_seed: seed,
            step_count: schedule.steps,
            accepted,
        },
        trajectory,
        max_drift,
    })
}
