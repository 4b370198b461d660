//! Analytic competitor phases for `K₀ = r^{-d}`: lamellae and lattices of balls.

mod balls;
mod lattice;
mod phase;
mod stripes;

pub use balls::{ball_lattice_energy, ball_self_energy, max_fraction, optimal_ball_lattice, two_ball_interaction, two_ball_lower_bound, BallLattice, BallLatticeEnergy, OptimalBallLattice};
pub use lattice::{lattice_zeta, BravaisLattice, LatticeSum, ZetaResult};
pub use phase::{compare_phases, phase_sweep, Phase, PhaseComparison};
pub use stripes::{optimal_stripe, stripe_energy, stripe_energy_via_slices, OptimalStripe, StripePattern};
