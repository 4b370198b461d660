//! Binary occupancy on a uniform periodic grid.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusConfig {
    dimension: usize,
    side_length_bits: u64,
    cells_per_side: usize,
    occupancy: Vec<bool>,
}

impl TorusConfig {
    pub fn new(dimension: usize, side_length: f64, cells_per_side: usize, occupancy: Vec<bool>) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::Config(format!("torus dimension must be 1, 2 or 3, got {dimension}")));
        }
        if !(side_length > 0.0) || !side_length.is_finite() {
            return Err(Error::Config(format!("side length must be positive, got {side_length}")));
        }
        if cells_per_side < 2 || !cells_per_side.is_power_of_two() {
            return Err(Error::Config(format!("cells per side must be a power of two >= 2, got {cells_per_side}")));
        }
        let len = cells_per_side.checked_pow(dimension as u32).ok_or_else(|| Error::Config("grid too large".into()))?;
        if occupancy.len() != len {
            return Err(Error::Config(format!("occupancy has {} cells, expected {len}", occupancy.len())));
        }
        Ok(Self { dimension, side_length_bits: side_length.to_bits(), cells_per_side, occupancy })
    }

    pub fn empty(dimension: usize, side_length: f64, cells_per_side: usize) -> Result<Self> {
        Self::from_fn(dimension, side_length, cells_per_side, |_| false)
    }

    pub fn full(dimension: usize, side_length: f64, cells_per_side: usize) -> Result<Self> {
        Self::from_fn(dimension, side_length, cells_per_side, |_| true)
    }

    /// Occupancy decided by a predicate on cell-centre coordinates.
    pub fn from_fn<F: Fn(&[f64]) -> bool>(dimension: usize, side_length: f64, cells_per_side: usize, f: F) -> Result<Self> {
        let mut cfg = Self::new(dimension, side_length, cells_per_side, vec![false; checked_len(dimension, cells_per_side)?])?;
        let h = cfg.cell_size();
        let mut x = vec![0.0; dimension];
        for idx in 0..cfg.len() {
            let c = cfg.coords(idx);
            for a in 0..dimension {
                x[a] = (c[a] as f64 + 0.5) * h;
            }
            cfg.occupancy[idx] = f(&x);
        }
        Ok(cfg)
    }

    /// Cells whose centres lie within `radius` of `center` in the periodic metric.
    pub fn ball(dimension: usize, side_length: f64, cells_per_side: usize, radius: f64, center: &[f64]) -> Result<Self> {
        Self::balls(dimension, side_length, cells_per_side, &[(center.to_vec(), radius)])
    }

    pub fn balls(dimension: usize, side_length: f64, cells_per_side: usize, balls: &[(Vec<f64>, f64)]) -> Result<Self> {
        for (c, r) in balls {
            if c.len() != dimension {
                return Err(Error::Config(format!("ball centre has {} coordinates, expected {dimension}", c.len())));
            }
            if !(*r > 0.0) {
                return Err(Error::Config(format!("ball radius must be positive, got {r}")));
            }
        }
        Self::from_fn(dimension, side_length, cells_per_side, |x| {
            balls.iter().any(|(c, r)| periodic_distance2(x, c, side_length) <= r * r)
        })
    }

    /// The `count` cells closest to `center`, i.e. a rasterized ball of prescribed volume.
    pub fn ball_with_count(dimension: usize, side_length: f64, cells_per_side: usize, count: usize, center: &[f64]) -> Result<Self> {
        let mut cfg = Self::empty(dimension, side_length, cells_per_side)?;
        if count > cfg.len() {
            return Err(Error::Config(format!("cannot place {count} cells on a grid of {}", cfg.len())));
        }
        if center.len() != dimension {
            return Err(Error::Config(format!("ball centre has {} coordinates, expected {dimension}", center.len())));
        }
        let mut order: Vec<(f64, usize)> =
            (0..cfg.len()).map(|i| (periodic_distance2(&cfg.cell_center(i), center, side_length), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in order.iter().take(count) {
            cfg.occupancy[i] = true;
        }
        Ok(cfg)
    }

    /// Slabs of thickness `width` separated by `gap`, normal to the first axis, starting at 0.
    pub fn stripes(dimension: usize, side_length: f64, cells_per_side: usize, width: f64, gap: f64) -> Result<Self> {
        if !(width > 0.0 && gap >= 0.0) {
            return Err(Error::Config(format!("stripe width must be positive and gap nonnegative, got {width}, {gap}")));
        }
        let period = width + gap;
        Self::from_fn(dimension, side_length, cells_per_side, |x| x[0].rem_euclid(period) < width)
    }

    /// Independent Bernoulli occupancy.
    pub fn random(dimension: usize, side_length: f64, cells_per_side: usize, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Config(format!("fraction must lie in [0, 1], got {fraction}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = checked_len(dimension, cells_per_side)?;
        let occ = (0..len).map(|_| rng.gen::<f64>() < fraction).collect();
        Self::new(dimension, side_length, cells_per_side, occ)
    }

    /// Exactly `count` cells chosen uniformly at random.
    pub fn random_with_count(dimension: usize, side_length: f64, cells_per_side: usize, count: usize, seed: u64) -> Result<Self> {
        let len = checked_len(dimension, cells_per_side)?;
        if count > len {
            return Err(Error::Config(format!("cannot place {count} cells on a grid of {len}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..len).collect();
        let (chosen, _) = idx.partial_shuffle(&mut rng, count);
        let mut occ = vec![false; len];
        for &i in chosen.iter() {
            occ[i] = true;
        }
        Self::new(dimension, side_length, cells_per_side, occ)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn side_length(&self) -> f64 {
        f64::from_bits(self.side_length_bits)
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.side_length() / self.cells_per_side as f64
    }

    pub fn torus_volume(&self) -> f64 {
        self.side_length().powi(self.dimension as i32)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn volume_fraction(&self) -> f64 {
        self.occupied_count() as f64 / self.len() as f64
    }

    pub fn get(&self, idx: usize) -> bool {
        self.occupancy[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.occupancy[idx] = value;
    }

    /// Row-major coordinates of a cell, last axis fastest.
    pub fn coords(&self, mut idx: usize) -> [usize; 3] {
        let n = self.cells_per_side;
        let mut c = [0usize; 3];
        for a in (0..self.dimension).rev() {
            c[a] = idx % n;
            idx /= n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().take(self.dimension).fold(0, |acc, &c| acc * self.cells_per_side + c)
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        let h = self.cell_size();
        let c = self.coords(idx);
        (0..self.dimension).map(|a| (c[a] as f64 + 0.5) * h).collect()
    }

    /// Index of the neighbour one step along `axis` in direction `forward`.
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let n = self.cells_per_side;
        let stride = n.pow((self.dimension - 1 - axis) as u32);
        let c = (idx / stride) % n;
        let c2 = if forward { (c + 1) % n } else { (c + n - 1) % n };
        idx - c * stride + c2 * stride
    }

    /// Number of occupied/empty interfaces normal to `axis`.
    pub fn interface_faces(&self, axis: usize) -> usize {
        (0..self.len()).filter(|&i| self.occupancy[i] != self.occupancy[self.neighbor(i, axis, true)]).count()
    }

    /// Face-counting perimeter; only faithful for grid-aligned sets.
    pub fn grid_perimeter(&self) -> f64 {
        let faces: usize = (0..self.dimension).map(|a| self.interface_faces(a)).sum();
        faces as f64 * self.cell_size().powi(self.dimension as i32 - 1)
    }

    pub fn complement(&self) -> Self {
        Self { occupancy: self.occupancy.iter().map(|b| !b).collect(), ..self.clone() }
    }

    /// Periodic translation by a grid vector.
    pub fn translated(&self, shift: &[isize]) -> Self {
        let n = self.cells_per_side as isize;
        let mut out = vec![false; self.len()];
        let mut c2 = [0usize; 3];
        for (i, &b) in self.occupancy.iter().enumerate() {
            let c = self.coords(i);
            for a in 0..self.dimension {
                c2[a] = (c[a] as isize + shift.get(a).copied().unwrap_or(0)).rem_euclid(n) as usize;
            }
            out[self.index(&c2)] = b;
        }
        Self { occupancy: out, ..self.clone() }
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.dimension != other.dimension || self.cells_per_side != other.cells_per_side || self.side_length_bits != other.side_length_bits {
            return Err(Error::Config("configurations live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        self.same_grid(other)?;
        Ok(!self.occupancy.iter().zip(&other.occupancy).any(|(a, b)| *a && *b))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self { occupancy: self.occupancy.iter().zip(&other.occupancy).map(|(a, b)| *a || *b).collect(), ..self.clone() })
    }

    /// Run-length encoding `"<count>*<bit>,..."`.
    pub fn occupancy_rle(&self) -> String {
        let mut runs: Vec<String> = Vec::new();
        let mut iter = self.occupancy.iter().peekable();
        while let Some(&b) = iter.next() {
            let mut count = 1usize;
            while iter.peek() == Some(&&b) {
                iter.next();
                count += 1;
            }
            runs.push(format!("{count}*{}", b as u8));
        }
        runs.join(",")
    }

    pub fn from_rle(dimension: usize, side_length: f64, cells_per_side: usize, rle: &str) -> Result<Self> {
        let mut occ = Vec::new();
        for token in rle.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (count, bit) = token
                .split_once('*')
                .ok_or_else(|| Error::Config(format!("bad run-length token {token:?}, expected <count>*<bit>")))?;
            let count: usize = count.trim().parse().map_err(|_| Error::Config(format!("bad run length in {token:?}")))?;
            let bit = match bit.trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::Config(format!("bad bit {other:?} in run-length token"))),
            };
            occ.extend(std::iter::repeat(bit).take(count));
        }
        Self::new(dimension, side_length, cells_per_side, occ)
    }

    pub fn to_file(&self) -> TorusFile {
        TorusFile { d: self.dimension, ell: self.side_length(), n: self.cells_per_side, occupancy_rle: self.occupancy_rle() }
    }
}

/// On-disk form of a [`TorusConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusFile {
    pub d: usize,
    pub ell: f64,
    pub n: usize,
    pub occupancy_rle: String,
}

impl TryFrom<TorusFile> for TorusConfig {
    type Error = Error;

    fn try_from(f: TorusFile) -> Result<Self> {
        TorusConfig::from_rle(f.d, f.ell, f.n, &f.occupancy_rle)
    }
}

/// Named generators for common configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pattern {
    /// One ball centred in the cell.
    Ball { radius: f64 },
    Stripes { width: f64, gap: f64 },
    /// Two equal balls on the first axis, symmetric about the cell centre.
    TwoBalls { radius: f64, distance: f64 },
    Random { fraction: f64, seed: u64 },
}

impl Pattern {
    pub fn build(&self, dimension: usize, side_length: f64, cells_per_side: usize) -> Result<TorusConfig> {
        let mid = vec![0.5 * side_length; dimension];
        match *self {
            Pattern::Ball { radius } => TorusConfig::ball(dimension, side_length, cells_per_side, radius, &mid),
            Pattern::Stripes { width, gap } => TorusConfig::stripes(dimension, side_length, cells_per_side, width, gap),
            Pattern::TwoBalls { radius, distance } => {
                let mut a = mid.clone();
                let mut b = mid;
                a[0] -= 0.5 * distance;
                b[0] += 0.5 * distance;
                TorusConfig::balls(dimension, side_length, cells_per_side, &[(a, radius), (b, radius)])
            }
            Pattern::Random { fraction, seed } => TorusConfig::random(dimension, side_length, cells_per_side, fraction, seed),
        }
    }
}

fn checked_len(dimension: usize, n: usize) -> Result<usize> {
    n.checked_pow(dimension as u32).ok_or_else(|| Error::Config("grid too large".into()))
}

/// Squared minimal-image distance on the torus of side `ell`.
pub fn periodic_distance2(x: &[f64], y: &[f64], ell: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let mut t = (a - b).rem_euclid(ell);
            if t > 0.5 * ell {
                t = ell - t;
            }
            t * t
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusConfig::empty(2, 8.0, 100).is_err());
        assert!(TorusConfig::empty(4, 8.0, 4).is_err());
        assert!(TorusConfig::new(2, 8.0, 4, vec![true; 15]).is_err());
    }

    #[test]
    fn rle_round_trip() {
        let cfg = TorusConfig::random(2, 4.0, 16, 0.3, 7).unwrap();
        let back = TorusConfig::try_from(cfg.to_file()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(TorusConfig::full(1, 1.0, 4).unwrap().occupancy_rle(), "4*1");
    }

    #[test]
    fn neighbours_wrap() {
        let cfg = TorusConfig::empty(2, 1.0, 4).unwrap();
        let i = cfg.index(&[0, 3]);
        assert_eq!(cfg.coords(cfg.neighbor(i, 1, true))[..2], [0, 0]);
        assert_eq!(cfg.coords(cfg.neighbor(i, 0, false))[..2], [3, 3]);
    }

    #[test]
    fn exact_count_ball() {
        let cfg = TorusConfig::ball_with_count(2, 8.0, 64, 120, &[4.0, 4.0]).unwrap();
        assert_eq!(cfg.occupied_count(), 120);
    }

    #[test]
    fn grid_perimeter_of_square_block() {
        let cfg = TorusConfig::from_fn(2, 8.0, 8, |x| x[0] < 2.0 && x[1] < 3.0).unwrap();
        assert!((cfg.grid_perimeter() - 10.0).abs() < 1e-12);
    }
}
