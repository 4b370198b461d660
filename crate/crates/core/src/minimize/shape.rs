//! How far a configuration is from a ball: Fraenkel asymmetry and isoperimetric deficit.

use crate::autocorr::{correlate, AutocorrelationGrid, RadialAutocorrelation, RadialOptions, TorusConfig};
use crate::error::{Error, Result};
use crate::specfun::{sphere_area, unit_ball_volume};

fn supersampling(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 16,
        _ => 8,
    }
}

/// Fraction of each cell covered by the periodic ball of radius `r` (cell units) centred at `center`.
fn ball_weights(cfg: &TorusConfig, r: f64, center: &[f64]) -> Vec<f64> {
    let d = cfg.dimension();
    let n = cfg.cells_per_side() as f64;
    let s = supersampling(d);
    let wrap = |x: f64| x - n * (x / n).round();
    let r2 = r * r;
    (0..cfg.len())
        .map(|i| {
            let c = cfg.coords(i);
            let delta: Vec<f64> = (0..d).map(|a| wrap(c[a] as f64 + 0.5 - center[a])).collect();
            let far: f64 = delta.iter().map(|x| (x.abs() + 0.5).powi(2)).sum();
            if far < r2 {
                return 1.0;
            }
            let near: f64 = delta.iter().map(|x| (x.abs() - 0.5).max(0.0).powi(2)).sum();
            let wraps = delta.iter().any(|x| x.abs() > n / 2.0 - 1.0);
            if near > r2 && !wraps {
                return 0.0;
            }
            let total = s.pow(d as u32);
            let mut inside = 0usize;
            for k in 0..total {
                let mut rem = k;
                let mut dist2 = 0.0;
                for x in &delta {
                    let j = rem % s;
                    rem /= s;
                    dist2 += wrap(x + (j as f64 + 0.5) / s as f64 - 0.5).powi(2);
                }
                if dist2 < r2 {
                    inside += 1;
                }
            }
            inside as f64 / total as f64
        })
        .collect()
}

/// `min |Ω Δ B|/|B|` over balls with `|B| = |Ω|` centred at cell centres, corners and
/// face midpoints; cell–ball overlaps are computed by supersampling.
pub fn fraenkel_asymmetry(cfg: &TorusConfig) -> Result<f64> {
    let m = cfg.occupied_count();
    if m == 0 {
        return Err(Error::Domain("Fraenkel asymmetry of an empty set".into()));
    }
    let d = cfg.dimension();
    let n = cfg.cells_per_side();
    let r = (m as f64 / unit_ball_volume(d)).powf(1.0 / d as f64);
    let u: Vec<f64> = cfg.occupancy().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut best = f64::INFINITY;
    for tau in 0..(1usize << d) {
        let center: Vec<f64> = (0..d).map(|a| if tau >> a & 1 == 1 { 0.5 } else { 0.0 }).collect();
        let w = ball_weights(cfg, r, &center);
        let ball: f64 = w.iter().sum();
        let overlap = correlate(d, n, &w, &u);
        let top = overlap.iter().copied().fold(f64::MIN, f64::max);
        best = best.min((m as f64 + ball - 2.0 * top) / m as f64);
    }
    Ok(best.clamp(0.0, 2.0))
}

/// `P/|∂B| - 1` with `P` the slope-based perimeter estimate and `B` the ball of equal volume.
pub fn isoperimetric_deficit(cfg: &TorusConfig) -> Result<f64> {
    let m = cfg.occupied_count();
    if m == 0 {
        return Err(Error::Domain("isoperimetric deficit of an empty set".into()));
    }
    let d = cfg.dimension();
    let grid = AutocorrelationGrid::compute(cfg);
    let rad = RadialAutocorrelation::from_grid(&grid, &RadialOptions::default())?;
    let perimeter = rad.perimeter_estimate(cfg.torus_volume());
    let volume = m as f64 * cfg.cell_size().powi(d as i32);
    let r = (volume / unit_ball_volume(d)).powf(1.0 / d as f64);
    Ok(perimeter / (sphere_area(d) * r.powi(d as i32 - 1)) - 1.0)
}
