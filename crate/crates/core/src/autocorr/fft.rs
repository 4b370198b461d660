//! Grid autocorrelation `C_u(z) = ⨍ u(x + z) u(x) dx` through FFT-based circular correlation.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::torus::TorusConfig;
use crate::error::Result;
use crate::par;

/// Autocorrelation sampled at every grid offset.
///
/// Values are `k / N` with `k` the exact integer overlap count, so the grid is bitwise
/// symmetric and translation invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationGrid {
    dimension: usize,
    cells_per_side: usize,
    side_length: f64,
    values: Vec<f64>,
}

impl AutocorrelationGrid {
    pub fn compute(cfg: &TorusConfig) -> Self {
        let counts = overlap_counts(cfg);
        let total = cfg.len() as f64;
        Self {
            dimension: cfg.dimension(),
            cells_per_side: cfg.cells_per_side(),
            side_length: cfg.side_length(),
            values: counts.into_iter().map(|k| k as f64 / total).collect(),
        }
    }

    /// Assemble from precomputed values (row-major, last axis fastest).
    pub fn from_values(dimension: usize, cells_per_side: usize, side_length: f64, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), cells_per_side.pow(dimension as u32));
        Self { dimension, cells_per_side, side_length, values }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the offset with integer components `z` (taken modulo n).
    pub fn at(&self, z: &[isize]) -> f64 {
        let n = self.cells_per_side as isize;
        let idx = z.iter().take(self.dimension).fold(0usize, |acc, &c| acc * self.cells_per_side + c.rem_euclid(n) as usize);
        self.values[idx]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// The same grid with every value passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }
}

/// `C_u` on the grid together with its radial profile.
pub fn autocorrelation_fft(cfg: &TorusConfig) -> Result<(AutocorrelationGrid, super::RadialAutocorrelation)> {
    let grid = AutocorrelationGrid::compute(cfg);
    let radial = super::RadialAutocorrelation::from_grid(&grid, &super::RadialOptions::default())?;
    Ok((grid, radial))
}

/// `Σ_x u(x) u(x + z)` for every offset `z`.
pub fn overlap_counts(cfg: &TorusConfig) -> Vec<u64> {
    let n = cfg.cells_per_side();
    let d = cfg.dimension();
    let mut data: Vec<Complex<f64>> =
        cfg.occupancy().iter().map(|&b| Complex::new(if b { 1.0 } else { 0.0 }, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    for axis in 0..d {
        transform_axis(&mut data, d, n, axis, &forward);
    }
    for v in data.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    for axis in 0..d {
        transform_axis(&mut data, d, n, axis, &inverse);
    }
    let scale = 1.0 / data.len() as f64;
    data.iter().map(|v| (v.re * scale).round().max(0.0) as u64).collect()
}

/// `Σ_y a(y) b(y + c)` for every `c`, for real fields on the same grid.
pub(crate) fn correlate(d: usize, n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let spectrum = |field: &[f64]| {
        let mut data: Vec<Complex<f64>> = field.iter().map(|&x| Complex::new(x, 0.0)).collect();
        for axis in 0..d {
            transform_axis(&mut data, d, n, axis, &forward);
        }
        data
    };
    let fa = spectrum(a);
    let mut data = spectrum(b);
    for (x, y) in data.iter_mut().zip(&fa) {
        *x *= y.conj();
    }
    for axis in 0..d {
        transform_axis(&mut data, d, n, axis, &inverse);
    }
    let scale = 1.0 / data.len() as f64;
    data.iter().map(|v| v.re * scale).collect()
}

fn transform_axis(data: &mut [Complex<f64>], d: usize, n: usize, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let stride = n.pow((d - 1 - axis) as u32);
    if stride == 1 {
        par::for_each_chunk_mut(data, n, |_, line| {
            let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(line, &mut scratch);
        });
        return;
    }
    // lines along `axis` start at indices whose `axis` coordinate is zero
    let block = n * stride;
    let lines = data.len() / n;
    let starts: Vec<usize> = (0..lines).map(|l| (l / stride) * block + l % stride).collect();
    let source: &[Complex<f64>] = data;
    let transformed = par::map_slice(&starts, |&s| {
        let mut line: Vec<Complex<f64>> = (0..n).map(|k| source[s + k * stride]).collect();
        let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut line, &mut scratch);
        line
    });
    for (&s, line) in starts.iter().zip(transformed) {
        for (k, v) in line.into_iter().enumerate() {
            data[s + k * stride] = v;
        }
    }
}

/// Direct `O(N²)` correlation, used as a test oracle.
pub fn overlap_counts_direct(cfg: &TorusConfig) -> Vec<u64> {
    let n = cfg.cells_per_side() as isize;
    let d = cfg.dimension();
    let len = cfg.len();
    let mut out = vec![0u64; len];
    for (zi, slot) in out.iter_mut().enumerate() {
        let z = cfg.coords(zi);
        let mut count = 0u64;
        for xi in 0..len {
            if !cfg.get(xi) {
                continue;
            }
            let x = cfg.coords(xi);
            let mut y = [0usize; 3];
            for a in 0..d {
                y[a] = ((x[a] + z[a]) as isize).rem_euclid(n) as usize;
            }
            if cfg.get(cfg.index(&y)) {
                count += 1;
            }
        }
        *slot = count;
    }
    out
}
