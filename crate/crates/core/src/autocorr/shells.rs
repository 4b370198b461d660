//! Radial binning of grid offsets, including periodic images beyond half the cell.

use crate::par;

/// Offsets `m ∈ Z^d` with `|m| < extent + 1/2` (in cell units) grouped into shells of unit width.
///
/// Shell `k` holds the offsets with `round(|m|) = k`; shell 0 is the origin alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellMap {
    dimension: usize,
    cells_per_side: usize,
    extent: usize,
    counts: Vec<u64>,
    mean_norms: Vec<f64>,
}

const ROW_CHUNKS: usize = 64;

impl ShellMap {
    pub fn new(dimension: usize, cells_per_side: usize, extent: usize) -> Self {
        let bins = extent + 1;
        let partials = par::map_range(ROW_CHUNKS, |chunk| {
            let mut counts = vec![0u64; bins];
            let mut norms = vec![0.0f64; bins];
            visit_chunk(dimension, cells_per_side, extent, chunk, |_, k, norm| {
                counts[k] += 1;
                norms[k] += norm;
            });
            (counts, norms)
        });
        let mut counts = vec![0u64; bins];
        let mut sums = vec![0.0f64; bins];
        for (c, s) in partials {
            for k in 0..bins {
                counts[k] += c[k];
                sums[k] += s[k];
            }
        }
        let mean_norms = counts.iter().zip(&sums).map(|(&c, &s)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
        Self { dimension, cells_per_side, extent, counts, mean_norms }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Mean `|m|` over each shell, in cell units.
    pub fn mean_norms(&self) -> &[f64] {
        &self.mean_norms
    }

    /// Shell means of a grid field (row-major, last axis fastest).
    pub fn shell_means(&self, field: &[f64]) -> Vec<f64> {
        let bins = self.bins();
        let partials = par::map_range(ROW_CHUNKS, |chunk| {
            let mut sums = vec![0.0f64; bins];
            visit_chunk(self.dimension, self.cells_per_side, self.extent, chunk, |idx, k, _| sums[k] += field[idx]);
            sums
        });
        let mut sums = vec![0.0f64; bins];
        for p in partials {
            for k in 0..bins {
                sums[k] += p[k];
            }
        }
        sums.iter().zip(&self.counts).map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
    }

    /// Spread per-shell weights back onto the grid: `W(z) = Σ_{m ≡ z} w_{k(m)} / count_{k(m)}`.
    pub fn scatter(&self, shell_weights: &[f64]) -> Vec<f64> {
        let len = self.cells_per_side.pow(self.dimension as u32);
        let per_offset: Vec<f64> =
            shell_weights.iter().zip(&self.counts).map(|(&w, &c)| if c > 0 { w / c as f64 } else { 0.0 }).collect();
        let partials = par::map_range(ROW_CHUNKS, |chunk| {
            let mut out: Vec<(usize, f64)> = Vec::new();
            visit_chunk(self.dimension, self.cells_per_side, self.extent, chunk, |idx, k, _| out.push((idx, per_offset[k])));
            out
        });
        let mut grid = vec![0.0; len];
        for p in partials {
            for (idx, w) in p {
                grid[idx] += w;
            }
        }
        grid
    }
}

/// Calls `f(torus_index, shell, norm)` for every offset whose first coordinate falls in `chunk`.
fn visit_chunk<F: FnMut(usize, usize, f64)>(d: usize, n: usize, extent: usize, chunk: usize, mut f: F) {
    let reach = extent as i64;
    let limit = extent as f64 + 0.5;
    let limit2 = limit * limit;
    let n_i = n as i64;
    let wrap = |c: i64| c.rem_euclid(n_i) as usize;
    let rows = 2 * reach + 1;
    let lo = -reach + rows * chunk as i64 / ROW_CHUNKS as i64;
    let hi = -reach + rows * (chunk as i64 + 1) / ROW_CHUNKS as i64;
    for m0 in lo..hi {
        let r0 = (m0 * m0) as f64;
        if r0 >= limit2 {
            continue;
        }
        match d {
            1 => {
                let norm = r0.sqrt();
                f(wrap(m0), norm.round() as usize, norm);
            }
            2 => {
                let span = (limit2 - r0).sqrt().floor() as i64;
                for m1 in -span..=span {
                    let r2 = r0 + (m1 * m1) as f64;
                    if r2 >= limit2 {
                        continue;
                    }
                    let norm = r2.sqrt();
                    f(wrap(m0) * n + wrap(m1), norm.round() as usize, norm);
                }
            }
            _ => {
                let span1 = (limit2 - r0).sqrt().floor() as i64;
                for m1 in -span1..=span1 {
                    let r01 = r0 + (m1 * m1) as f64;
                    if r01 >= limit2 {
                        continue;
                    }
                    let span2 = (limit2 - r01).sqrt().floor() as i64;
                    let base = (wrap(m0) * n + wrap(m1)) * n;
                    for m2 in -span2..=span2 {
                        let r2 = r01 + (m2 * m2) as f64;
                        if r2 >= limit2 {
                            continue;
                        }
                        let norm = r2.sqrt();
                        f(base + wrap(m2), norm.round() as usize, norm);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_alone_and_first_shell_has_axis_neighbours() {
        let map = ShellMap::new(2, 16, 10);
        assert_eq!(map.counts()[0], 1);
        // |m| in [0.5, 1.5): (±1,0), (0,±1), (±1,±1)
        assert_eq!(map.counts()[1], 8);
        let map3 = ShellMap::new(3, 8, 4);
        assert_eq!(map3.counts()[0], 1);
    }

    #[test]
    fn scatter_is_adjoint_of_shell_means() {
        let map = ShellMap::new(2, 8, 12);
        let field: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let weights: Vec<f64> = (0..map.bins()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let lhs: f64 = map.shell_means(&field).iter().zip(&weights).map(|(a, b)| a * b).sum();
        let rhs: f64 = map.scatter(&weights).iter().zip(&field).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs());
    }
}
