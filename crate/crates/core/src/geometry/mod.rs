//! Points, norms, dyadic cubes, balls and the finitely described sets.

mod builtin;
mod cover;
mod grid;
mod ifs;
mod set;

pub use builtin::{cantor_middle_thirds, cantor_pair, cantor_pair_levels, harmonic_closure};
pub use grid::{Block, DigitSet, GridScheme, Tail};
pub use ifs::{HomothetyIfs, Separation, Similarity};
pub use set::{SetFile, SetSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{pow_i128, Q};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;
/// Largest number of cubes a single cover may hold.
pub const MAX_CUBES: usize = 1 << 24;
/// Largest number of pieces used for outer approximations.
pub const MAX_PIECES: usize = 1 << 22;

pub type Point = Vec<f64>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Chebyshev,
    Euclidean,
}

impl Norm {
    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Chebyshev => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            Norm::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }

    /// Norm of a vector of per-axis gaps.
    fn of_gaps(self, gaps: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::Chebyshev => gaps.fold(0.0, f64::max),
            Norm::Euclidean => gaps.map(|g| g * g).sum::<f64>().sqrt(),
        }
    }
}

/// Index vector of a grid cube; unused trailing axes are zero.
pub type CubeIndex = [i64; MAX_DIM];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: u32,
    pub index: CubeIndex,
}

impl DyadicCube {
    pub fn side(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Closed bounds `[lower, upper]` of the half-open cube.
    pub fn bounds(&self, dim: usize) -> (Point, Point) {
        let h = self.side();
        let lo: Point = self.index[..dim].iter().map(|&k| k as f64 * h).collect();
        let hi = lo.iter().map(|x| x + h).collect();
        (lo, hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = self.side();
        x.iter().zip(&self.index).all(|(&xi, &k)| (xi / h).floor() as i64 == k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Outer,
}

/// The grid cubes of side `base^-level` that meet a set.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeCover {
    pub level: u32,
    pub base: u32,
    pub dim: usize,
    /// Sorted, without duplicates.
    pub cubes: Vec<CubeIndex>,
    pub exactness: Exactness,
}

impl CubeCover {
    pub fn new(level: u32, base: u32, dim: usize, mut cubes: Vec<CubeIndex>, exactness: Exactness) -> Self {
        cubes.sort_unstable();
        cubes.dedup();
        CubeCover { level, base, dim, cubes, exactness }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    pub fn side(&self) -> f64 {
        (self.base as f64).powi(-(self.level as i32))
    }

    pub fn position(&self, idx: &CubeIndex) -> Option<usize> {
        self.cubes.binary_search(idx).ok()
    }

    /// Exact bounds of a cube of this cover.
    pub fn exact_bounds(&self, idx: &CubeIndex) -> Result<(Vec<Q>, Vec<Q>)> {
        cube_bounds_q(self.base, self.level, idx, self.dim)
    }

    pub fn float_bounds(&self, idx: &CubeIndex) -> (Point, Point) {
        let h = self.side();
        let lo: Point = idx[..self.dim].iter().map(|&k| k as f64 * h).collect();
        let hi = lo.iter().map(|x| x + h).collect();
        (lo, hi)
    }
}

pub(crate) fn cube_bounds_q(base: u32, level: u32, idx: &CubeIndex, dim: usize) -> Result<(Vec<Q>, Vec<Q>)> {
    let den = pow_i128(base, level)?;
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for &k in &idx[..dim] {
        lo.push(Q::new(k as i128, den)?);
        hi.push(Q::new(k as i128 + 1, den)?);
    }
    Ok((lo, hi))
}

/// Open ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    pub norm: Norm,
}

impl Ball {
    pub fn contains(&self, y: &[f64]) -> bool {
        self.norm.dist(&self.center, y) < self.radius
    }
}

pub fn ball_indicator(x: &[f64], r: f64, norm: Norm) -> Result<Ball> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("ball radius must be positive, got {r}")));
    }
    check_point(x)?;
    Ok(Ball { center: x.to_vec(), radius: r, norm })
}

/// Base sets that can be fattened.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Points(Vec<Point>),
    Cubes(CubeCover),
}

/// Open `alpha`-neighbourhood of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct Fattening {
    pub region: Region,
    pub alpha: f64,
    pub norm: Norm,
}

impl Fattening {
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.region {
            Region::Points(ps) => ps.iter().any(|p| self.norm.dist(p, x) < self.alpha),
            Region::Cubes(c) => c.cubes.iter().any(|idx| {
                let (lo, hi) = c.float_bounds(idx);
                let gaps = x.iter().zip(lo.iter().zip(&hi)).map(|(&xi, (&a, &b))| (a - xi).max(xi - b).max(0.0));
                self.norm.of_gaps(gaps) < self.alpha
            }),
        }
    }
}

pub fn fatten(region: Region, alpha: f64, norm: Norm) -> Result<Fattening> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!("fattening radius must be positive, got {alpha}")));
    }
    Ok(Fattening { region, alpha, norm })
}

pub fn check_point(x: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() > MAX_DIM {
        return Err(Error::input(format!("points must have 1 to {MAX_DIM} coordinates, got {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite coordinate"));
    }
    Ok(())
}

pub(crate) fn pad(v: &[i64]) -> CubeIndex {
    let mut out = [0; MAX_DIM];
    out[..v.len()].copy_from_slice(v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_balls() {
        let b = ball_indicator(&[0.0], 0.5, Norm::Chebyshev).unwrap();
        assert!(b.contains(&[0.3]));
        assert!(!b.contains(&[0.5]));
        let e = ball_indicator(&[0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        assert!(!e.contains(&[0.8, 0.8]));
        assert!(ball_indicator(&[0.0, 0.0], 1.0, Norm::Chebyshev).unwrap().contains(&[0.8, 0.8]));
        assert!(ball_indicator(&[0.0], 0.0, Norm::Chebyshev).is_err());
    }

    #[test]
    fn fattened_cubes() {
        let c = CubeCover::new(1, 2, 1, vec![[0, 0, 0]], Exactness::Exact);
        let f = fatten(Region::Cubes(c), 0.25, Norm::Chebyshev).unwrap();
        assert!(f.contains(&[0.7]));
        assert!(!f.contains(&[0.75]));
        assert!(f.contains(&[-0.2]));
    }

    #[test]
    fn cube_membership() {
        let c = DyadicCube { level: 2, index: [1, 0, 0] };
        assert!(c.contains(&[0.25]));
        assert!(!c.contains(&[0.5]));
        assert_eq!(c.bounds(1), (vec![0.25], vec![0.5]));
    }
}
