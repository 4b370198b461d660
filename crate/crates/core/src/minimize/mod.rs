//! Fixed-volume energy minimization on torus grids and shape diagnostics.

mod anneal;
mod shape;

pub use anneal::{anneal, anneal_with, annealing_radial_options, AnnealOptions, AnnealOutcome, AnnealState, Proposal, Schedule, TrajectoryPoint};
pub use shape::{fraenkel_asymmetry, isoperimetric_deficit};
