//! Bravais lattices, short-vector enumeration and Epstein-type lattice sums.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::par;
use crate::specfun::unit_ball_volume;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeBasis {
    basis: Vec<Vec<f64>>,
}

/// Integer span of `d` linearly independent vectors (the rows of `basis`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeBasis", into = "LatticeBasis")]
pub struct BravaisLattice {
    basis: Vec<Vec<f64>>,
    reduced: Vec<Vec<f64>>,
    gs_norm2: Vec<f64>,
    mu: Vec<Vec<f64>>,
    volume: f64,
}

impl TryFrom<LatticeBasis> for BravaisLattice {
    type Error = Error;

    fn try_from(b: LatticeBasis) -> Result<Self> {
        Self::new(b.basis)
    }
}

impl From<BravaisLattice> for LatticeBasis {
    fn from(l: BravaisLattice) -> Self {
        LatticeBasis { basis: l.basis }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt squared norms and coefficients `mu[i][j] = <b_i, b*_j>/|b*_j|²` for `j < i`.
fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut norm2 = vec![0.0; d];
    let mut mu = vec![vec![0.0; d]; d];
    for i in 0..d {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j]) / norm2[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        norm2[i] = dot(&v, &v);
        star.push(v);
    }
    (norm2, mu)
}

/// LLL reduction with parameter 0.99.
fn lll(mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let d = b.len();
    let mut k = 1;
    let mut guard = 0;
    while k < d && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&b);
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (n2, mu) = gram_schmidt(&b);
        if n2[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * n2[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    b
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
        }
    }
    det
}

/// Sum of `f(|e|)` over nonzero lattice vectors with `|e| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSum {
    pub sum: f64,
    /// Number of nonzero vectors visited.
    pub count: u64,
}

/// Certified value of `Σ_{e ≠ 0} |e|^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaResult {
    pub value: f64,
    /// The exact sum lies in `value ± tail_bound`.
    pub tail_bound: f64,
    /// Radius of the explicitly summed ball.
    pub radius: f64,
}

impl BravaisLattice {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 || basis.iter().any(|v| v.len() != d) {
            return Err(Error::Parameter("lattice basis must be a nonempty square matrix".into()));
        }
        if basis.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("lattice basis entries must be finite".into()));
        }
        let volume = determinant(&basis).abs();
        let scale = basis.iter().map(|v| dot(v, v).sqrt()).product::<f64>();
        if !(volume > 1e-12 * scale) {
            return Err(Error::Parameter("lattice basis vectors are linearly dependent".into()));
        }
        let reduced = lll(basis.clone());
        let (gs_norm2, mu) = gram_schmidt(&reduced);
        Ok(Self { basis, reduced, gs_norm2, mu, volume })
    }

    pub fn square() -> Self {
        Self::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    /// Triangular lattice with unit cell area.
    pub fn triangular() -> Self {
        let s = (2.0 / 3f64.sqrt()).sqrt();
        Self::new(vec![vec![s, 0.0], vec![0.5 * s, 0.5 * 3f64.sqrt() * s]]).unwrap()
    }

    pub fn cubic() -> Self {
        Self::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap()
    }

    /// Body-centred cubic lattice with unit cell volume.
    pub fn bcc() -> Self {
        Self::new(vec![vec![-0.5, 0.5, 0.5], vec![0.5, -0.5, 0.5], vec![0.5, 0.5, -0.5]]).unwrap().normalized()
    }

    /// Face-centred cubic lattice with unit cell volume.
    pub fn fcc() -> Self {
        Self::new(vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]]).unwrap().normalized()
    }

    /// Named lattice: `square`, `triangular` (alias `hexagonal`, `tri`), `cubic`, `bcc`, `fcc`.
    pub fn named(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(Self::square()),
            "triangular" | "tri" | "hexagonal" => Ok(Self::triangular()),
            "cubic" => Ok(Self::cubic()),
            "bcc" => Ok(Self::bcc()),
            "fcc" => Ok(Self::fcc()),
            other => Err(Error::Parameter(format!("unknown lattice '{other}'"))),
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("lattice scale must be positive, got {a}")));
        }
        Self::new(self.basis.iter().map(|v| v.iter().map(|x| x * a).collect()).collect())
    }

    /// Rescaled copy with unit cell volume.
    pub fn normalized(&self) -> Self {
        self.scaled(self.volume.powf(-1.0 / self.dimension() as f64)).expect("positive volume")
    }

    /// Half the root sum of squared Gram–Schmidt lengths; every point lies this close to the lattice.
    pub fn covering_bound(&self) -> f64 {
        0.5 * self.gs_norm2.iter().sum::<f64>().sqrt()
    }

    pub fn shortest_vector(&self) -> f64 {
        let r = self.reduced.iter().map(|v| dot(v, v).sqrt()).fold(f64::INFINITY, f64::min);
        let mut best = f64::INFINITY;
        self.visit(r * (1.0 + 1e-9), &mut |n2| best = best.min(n2));
        best.sqrt()
    }

    /// Sequentially visit `|e|²` of every nonzero vector with `|e| <= radius`.
    fn visit<F: FnMut(f64)>(&self, radius: f64, f: &mut F) {
        let d = self.dimension();
        let top = d - 1;
        let (lo, hi) = self.row_range(radius);
        let mut x = vec![0i64; d];
        for xt in lo..=hi {
            x[top] = xt;
            self.visit_below(top, &mut x, radius * radius, f);
        }
    }

    fn row_range(&self, radius: f64) -> (i64, i64) {
        let span = (radius / self.gs_norm2[self.dimension() - 1].sqrt()).floor() as i64;
        (-span, span)
    }

    /// Enumerate the coefficients below `level`, given those at and above it.
    fn visit_below<F: FnMut(f64)>(&self, level: usize, x: &mut [i64], r2: f64, f: &mut F) {
        let d = self.dimension();
        // squared length of the projection onto the span of b*_level..b*_{d-1}
        let mut partial = 0.0;
        for i in level..d {
            let c: f64 = (i + 1..d).map(|j| self.mu[j][i] * x[j] as f64).sum();
            partial += (x[i] as f64 + c).powi(2) * self.gs_norm2[i];
        }
        if partial > r2 * (1.0 + 1e-12) {
            return;
        }
        if level == 0 {
            let v = self.combine(x);
            let n2 = dot(&v, &v);
            if n2 > 0.0 && n2 <= r2 {
                f(n2);
            }
            return;
        }
        let l = level - 1;
        let c: f64 = -(level..d).map(|j| self.mu[j][l] * x[j] as f64).sum::<f64>();
        let w = ((r2 - partial).max(0.0) / self.gs_norm2[l]).sqrt() * (1.0 + 1e-12) + 1e-12;
        let (lo, hi) = ((c - w).ceil() as i64, (c + w).floor() as i64);
        if l == 0 {
            // innermost row: |v + k b₀|² is a quadratic in k
            x[0] = 0;
            let base = self.combine(x);
            let b0 = &self.reduced[0];
            let (bb, wb, ww) = (dot(b0, b0), dot(&base, b0), dot(&base, &base));
            for k in lo..=hi {
                let kf = k as f64;
                let n2 = ww + kf * (2.0 * wb + kf * bb);
                if n2 > 0.0 && n2 <= r2 {
                    f(n2);
                }
            }
            return;
        }
        for xl in lo..=hi {
            x[l] = xl;
            self.visit_below(l, x, r2, f);
        }
        x[l] = 0;
    }

    fn combine(&self, x: &[i64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension()];
        for (xi, b) in x.iter().zip(&self.reduced) {
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk += *xi as f64 * bk;
            }
        }
        v
    }

    /// `Σ f(|e|)` over nonzero vectors with `|e| <= radius`; rows are summed in parallel
    /// and combined in a fixed order.
    pub fn lattice_sum<F>(&self, radius: f64, f: F) -> LatticeSum
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let (lo, hi) = self.row_range(radius);
        let top = self.dimension() - 1;
        let rows = par::map_range((hi - lo + 1) as usize, |k| {
            let mut x = vec![0i64; self.dimension()];
            x[top] = lo + k as i64;
            let mut sum = 0.0;
            let mut count = 0u64;
            self.visit_below(top, &mut x, radius * radius, &mut |n2| {
                sum += f(n2.sqrt());
                count += 1;
            });
            (sum, count)
        });
        rows.into_iter().fold(LatticeSum { sum: 0.0, count: 0 }, |acc, (s, c)| LatticeSum { sum: acc.sum + s, count: acc.count + c })
    }

    /// Bracket of `Σ_{|e|>R} |e|^{-s}` from the lattice-point count `N(R)` (origin included),
    /// using `ω_d (r-δ)^d <= N(r)|Λ| <= ω_d (r+δ)^d`. Returns `(estimate, error)`.
    fn zeta_tail(&self, s: f64, radius: f64, count: u64) -> (f64, f64) {
        let d = self.dimension();
        let delta = self.covering_bound();
        let c = s * unit_ball_volume(d) / self.volume;
        let moment = |shift: f64| -> f64 {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for j in 0..=d {
                if j > 0 {
                    binom *= (d - j + 1) as f64 / j as f64;
                }
                acc += binom * shift.powi((d - j) as i32) * radius.powf(j as f64 - s) / (s - j as f64);
            }
            acc
        };
        let boundary = -(count as f64) * radius.powf(-s);
        let est = boundary + c * radius.powf(d as f64 - s) / (s - d as f64);
        let upper = boundary + c * moment(delta);
        let lower = if radius > delta { (boundary + c * moment(-delta)).max(0.0) } else { 0.0 };
        (est, (upper - est).max(est - lower))
    }

    /// Smallest radius on a fixed geometric grid whose tail bracket is within `tol`.
    fn zeta_radius(&self, s: f64, tol: f64) -> Result<f64> {
        let d = self.dimension() as f64;
        let unit = self.volume.powf(1.0 / d);
        let step = 2f64.powf(0.25);
        let mut r = unit * step.powf(((4.0 * self.covering_bound() / unit).max(1.0)).log(step).ceil());
        loop {
            // with N(R) = 0 the bracket is widest, so this error holds for the true count
            let (_, err) = self.zeta_tail(s, r, 0);
            if err <= tol {
                return Ok(r);
            }
            r *= step;
            if r > 1e7 * unit {
                return Err(Error::Convergence(format!("lattice sum at s = {s} cannot reach tolerance {tol}")));
            }
        }
    }

    /// Upper bound for `Σ_{|e|>R} |e|^{-s}` that does not need `N(R)`.
    pub(crate) fn zeta_tail_upper(&self, s: f64, radius: f64) -> f64 {
        let (est, err) = self.zeta_tail(s, radius, 0);
        est + err
    }
}

impl FromStr for BravaisLattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('[') || t.starts_with('{') {
            let basis: Vec<Vec<f64>> = if t.starts_with('[') {
                serde_json::from_str(t).map_err(|e| Error::Parameter(format!("bad lattice matrix: {e}")))?
            } else {
                serde_json::from_str::<LatticeBasis>(t).map_err(|e| Error::Parameter(format!("bad lattice matrix: {e}")))?.basis
            };
            Self::new(basis)
        } else {
            Self::named(t)
        }
    }
}

/// `Σ_{e ∈ Λ∖{0}} |e|^{-s}` with the remainder outside the summed ball certified to `tol`.
pub fn lattice_zeta(lattice: &BravaisLattice, s: f64, tol: f64) -> Result<ZetaResult> {
    let d = lattice.dimension() as f64;
    if !(s > d) {
        return Err(Error::Divergent(format!("lattice sum of |e|^-s diverges for s = {s} <= d = {d}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let radius = lattice.zeta_radius(s, tol)?;
    let inner = lattice.lattice_sum(radius, |r| r.powf(-s));
    let (tail, err) = lattice.zeta_tail(s, radius, inner.count + 1);
    Ok(ZetaResult { value: inner.sum + tail, tail_bound: err, radius })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_lattices_have_unit_volume() {
        for name in ["square", "triangular", "cubic", "bcc", "fcc"] {
            let l = BravaisLattice::named(name).unwrap();
            assert!((l.cell_volume() - 1.0).abs() < 1e-12, "{name}");
        }
        let t = BravaisLattice::triangular();
        assert!((t.shortest_vector() - (2.0 / 3f64.sqrt()).sqrt()).abs() < 1e-12);
        let f = BravaisLattice::fcc();
        assert!((f.shortest_vector() - 4f64.cbrt() / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn enumeration_counts_square_lattice_points() {
        let l = BravaisLattice::new(vec![vec![1.0, 0.0], vec![3.0, 1.0]]).unwrap();
        let count = l.lattice_sum(10.5, |_| 0.0).count;
        let brute = (-11i64..=11).flat_map(|i| (-11i64..=11).map(move |j| i * i + j * j)).filter(|&n| n > 0 && n as f64 <= 110.25).count();
        assert_eq!(count, brute as u64);
    }

    #[test]
    fn zeta_rejects_small_exponent() {
        assert!(lattice_zeta(&BravaisLattice::square(), 2.0, 1e-6).unwrap_err().is_divergent());
    }

    #[test]
    fn serde_round_trip() {
        let l = BravaisLattice::triangular();
        let s = serde_json::to_string(&l).unwrap();
        let back: BravaisLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<BravaisLattice>(r#"{"basis":[[1,0],[2,0]]}"#).is_err());
        assert!(serde_json::from_str::<BravaisLattice>(r#"{"basis":[[1,0],[0,1]],"x":1}"#).is_err());
    }
}
