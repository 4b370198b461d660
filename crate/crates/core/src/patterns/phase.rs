//! Stripes against lattices of balls at fixed volume fraction.

use serde::Serialize;

use super::balls::{optimal_ball_lattices, OptimalBallLattice};
use super::lattice::BravaisLattice;
use super::stripes::optimal_stripe;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Stripes,
    /// Balls on the lattice with this index in the input list.
    Balls { lattice: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseComparison {
    pub lambda: f64,
    pub e_s: f64,
    pub d_opt: f64,
    /// Optimal ball energy per lattice; `None` where the fraction is infeasible.
    pub e_b: Vec<Option<f64>>,
    pub rho_opt: Vec<Option<f64>>,
    pub verdict: Phase,
    /// Energy gap between the winner and the best competitor of the other phase.
    pub margin: Option<f64>,
}

fn assemble(lambda: f64, dimension: usize, balls: Vec<Option<OptimalBallLattice>>) -> Result<PhaseComparison> {
    let stripe = optimal_stripe(lambda, dimension)?;
    let best = balls
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.map(|b| (i, b.e_b)))
        .fold(None, |acc: Option<(usize, f64)>, (i, e)| match acc {
            Some((_, e0)) if e0 <= e => acc,
            _ => Some((i, e)),
        });
    let (verdict, margin) = match best {
        Some((i, e)) if e < stripe.e_s => (Phase::Balls { lattice: i }, Some(stripe.e_s - e)),
        Some((_, e)) => (Phase::Stripes, Some(e - stripe.e_s)),
        None => (Phase::Stripes, None),
    };
    Ok(PhaseComparison {
        lambda,
        e_s: stripe.e_s,
        d_opt: stripe.d_opt,
        e_b: balls.iter().map(|b| b.map(|b| b.e_b)).collect(),
        rho_opt: balls.iter().map(|b| b.map(|b| b.rho_opt)).collect(),
        verdict,
        margin,
    })
}

fn feasible(r: Result<OptimalBallLattice>) -> Result<Option<OptimalBallLattice>> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Lowest-energy phase at volume fraction `lambda`; lattices are rescaled to unit cell volume.
pub fn compare_phases(lambda: f64, lattices: &[BravaisLattice], dimension: usize) -> Result<PhaseComparison> {
    Ok(phase_sweep(&[lambda], lattices, dimension)?.remove(0))
}

/// [`compare_phases`] over a list of fractions, reusing the lattice sums.
pub fn phase_sweep(lambdas: &[f64], lattices: &[BravaisLattice], dimension: usize) -> Result<Vec<PhaseComparison>> {
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::Domain(format!("volume fraction must lie in (0, 1), got {bad}")));
    }
    let per_lattice: Vec<Vec<Result<OptimalBallLattice>>> = lattices
        .iter()
        .map(|l| optimal_ball_lattices(lambdas, l, dimension))
        .collect::<Result<_>>()?;
    let rows: Vec<Result<PhaseComparison>> = par::map_range(lambdas.len(), |i| {
        let balls = per_lattice.iter().map(|col| feasible(col[i].clone())).collect::<Result<Vec<_>>>()?;
        assemble(lambdas[i], dimension, balls)
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_lattices_means_stripes() {
        let c = compare_phases(0.3, &[], 2).unwrap();
        assert_eq!(c.verdict, Phase::Stripes);
        assert!(c.margin.is_none());
    }
}
