//! Parameter schemas, shared between command-line flags and JSON run specs.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nlperim::kernels::Kernel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[value(alias = "power_cutoff")]
    PowerCutoff,
    #[value(alias = "fractional_shift")]
    FractionalShift,
    Supercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct KernelArgs {
    /// Kernel family
    #[arg(long, value_enum, default_value_t = Family::PowerCutoff)]
    pub family: Family,
    /// Regularisation parameter; 0 selects the limit kernel
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Decay exponent of the supercritical family
    #[arg(long)]
    pub q: Option<f64>,
}

impl Default for KernelArgs {
    fn default() -> Self {
        Self { family: Family::PowerCutoff, epsilon: None, q: None }
    }
}

impl KernelArgs {
    pub fn build(&self, dimension: usize, default_epsilon: f64) -> Result<Kernel> {
        let eps = self.epsilon.unwrap_or(default_epsilon);
        let kernel = match self.family {
            Family::PowerCutoff => Kernel::power_cutoff(eps, dimension)?,
            Family::FractionalShift => Kernel::fractional_shift(eps, dimension)?,
            Family::Supercritical => {
                let q = self.q.ok_or_else(|| CliError::usage("the supercritical family needs --q"))?;
                Kernel::supercritical(q, eps, dimension)?
            }
        };
        if self.q.is_some() && self.family != Family::Supercritical {
            return Err(CliError::usage("--q only applies to the supercritical family"));
        }
        Ok(kernel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Ball,
    Stripes,
    #[value(alias = "two_balls")]
    TwoBalls,
    Random,
    File,
}

/// Which periodic set to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryArgs {
    /// Space dimension
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Side length of the periodic cell
    #[arg(long, default_value_t = 8.0)]
    pub ell: f64,
    /// Grid cells per side (power of two)
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = PatternKind::Ball)]
    pub pattern: PatternKind,
    /// Ball radius
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Stripe width
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Gap between stripes
    #[arg(long, default_value_t = 1.0)]
    pub gap: f64,
    /// Centre distance for two balls
    #[arg(long, default_value_t = 3.0)]
    pub distance: f64,
    /// Occupied fraction of a random configuration
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Seed of a random configuration
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file (JSON with d, ell, n, occupancy_rle)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use the exact autocorrelation instead of the grid (ball and stripes only)
    #[arg(long)]
    pub analytic: bool,
}

impl Default for GeometryArgs {
    fn default() -> Self {
        Self {
            d: 2,
            ell: 8.0,
            n: 256,
            pattern: PatternKind::Ball,
            radius: 1.0,
            width: 1.0,
            gap: 1.0,
            distance: 3.0,
            fraction: 0.5,
            seed: None,
            config: None,
            analytic: false,
        }
    }
}

impl GeometryArgs {
    pub fn check(&self) -> Result<()> {
        match self.pattern {
            PatternKind::Random if self.seed.is_none() => Err(CliError::usage("random patterns need an explicit --seed")),
            PatternKind::File if self.config.is_none() => Err(CliError::usage("--pattern file needs --config")),
            PatternKind::TwoBalls | PatternKind::Random | PatternKind::File if self.analytic => {
                Err(CliError::usage("--analytic is only available for ball and stripes"))
            }
            _ => Ok(()),
        }
    }
}

fn default_sweep() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_davila() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyParams {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct StripesParams {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Volume fraction
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Report the optimal width and energy
    #[arg(long)]
    pub optimal: bool,
    /// Evaluate a given stripe width instead
    #[arg(long)]
    pub width: Option<f64>,
}

impl Default for StripesParams {
    fn default() -> Self {
        Self { d: 2, lambda: 0.5, optimal: false, width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct BallsParams {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// square, triangular, cubic, bcc or fcc
    #[arg(long, default_value = "triangular")]
    pub lattice: String,
    /// Volume fraction
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    /// Evaluate the unit-volume lattice scaled by this factor instead of optimising
    #[arg(long)]
    pub scale: Option<f64>,
}

impl Default for BallsParams {
    fn default() -> Self {
        Self { d: 2, lattice: "triangular".into(), lambda: 0.05, scale: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseParams {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Comma-separated lattice names
    #[arg(long, value_delimiter = ',', default_value = "square,triangular")]
    pub lattices: Vec<String>,
    /// Volume fractions as start:stop:count, endpoints included
    #[arg(long, default_value = "0.01:0.5:50")]
    pub lambda_grid: String,
}

impl Default for PhaseParams {
    fn default() -> Self {
        Self { d: 2, lattices: vec!["square".into(), "triangular".into()], lambda_grid: "0.01:0.5:50".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct GammaParams {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Strictly decreasing list of epsilons
    #[arg(long, value_delimiter = ',', default_values_t = default_sweep())]
    pub epsilons: Vec<f64>,
}

impl Default for GammaParams {
    fn default() -> Self {
        Self { geometry: GeometryArgs::default(), kernel: KernelArgs::default(), epsilons: default_sweep() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct DavilaParams {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Strictly decreasing list of epsilons
    #[arg(long, value_delimiter = ',', default_values_t = default_davila())]
    pub epsilons: Vec<f64>,
}

impl Default for DavilaParams {
    fn default() -> Self {
        Self { geometry: GeometryArgs::default(), kernel: KernelArgs::default(), epsilons: default_davila() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Ball,
    Random,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProposalKind {
    Boundary,
    Uniform,
}

/// Annealing run. The same schema is accepted as a manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealParams {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 4.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Initial configuration
    #[arg(long, value_enum, default_value_t = InitKind::Random)]
    pub init: InitKind,
    /// Number of occupied cells (defaults to round(fraction * n^d))
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0.03)]
    pub fraction: f64,
    /// Initial configuration file for --init file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Initial temperature
    #[arg(long, default_value_t = 1e-2)]
    pub t0: f64,
    /// Final temperature, used to derive the cooling factor
    #[arg(long, default_value_t = 1e-6)]
    pub t_final: f64,
    /// Geometric cooling factor; overrides --t-final
    #[arg(long)]
    pub cooling: Option<f64>,
    #[arg(long, default_value_t = 200_000)]
    pub steps: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ProposalKind::Boundary)]
    pub proposal: ProposalKind,
    /// Steps between full energy re-evaluations
    #[arg(long, default_value_t = 1000)]
    pub refresh_interval: u64,
    /// Steps between trajectory records
    #[arg(long, default_value_t = 1000)]
    pub log_interval: u64,
    /// Where to write the trajectory CSV
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            d: 2,
            ell: 4.0,
            n: 64,
            init: InitKind::Random,
            count: None,
            fraction: 0.03,
            config: None,
            kernel: KernelArgs::default(),
            t0: 1e-2,
            t_final: 1e-6,
            cooling: None,
            steps: 200_000,
            seed: None,
            proposal: ProposalKind::Boundary,
            refresh_interval: 1000,
            log_interval: 1000,
            trajectory: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Random configurations for the single-set suites
    #[arg(long, default_value_t = 20)]
    pub configurations: usize,
    /// Disjoint pairs for the interaction suite
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { seed: 2024, configurations: 20, pairs: 50, epsilon: 0.1 }
    }
}

/// Parses `start:stop:count` into `count` evenly spaced values including both ends.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::usage(format!("bad grid {spec:?}, expected start:stop:count"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = start.parse().map_err(|_| bad())?;
    let stop: f64 = stop.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        if start != stop {
            return Err(CliError::usage(format!("grid {spec:?} has one point but distinct endpoints")));
        }
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i == count - 1 { stop } else { start + i as f64 * step }).collect())
}
