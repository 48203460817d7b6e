//! Base-b digit schemes: at level n every kept cube of side b^-(n-1) keeps the
//! children whose digit vector lies in the digit set `D_n`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{check_point, pad, CubeIndex, Point, MAX_CUBES};
use crate::error::{Error, Result};
use crate::exact::{pow_i128, Q};

/// Longest single-path descent tried before giving up on an exact answer.
const MAX_WALK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitSet(pub Vec<Vec<u32>>);

impl DigitSet {
    pub fn from_1d(digits: &[u32]) -> Self {
        DigitSet(digits.iter().map(|&d| vec![d]).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn contains_1d(&self, d: i128) -> bool {
        d >= 0 && d <= u32::MAX as i128 && self.0.binary_search(&vec![d as u32]).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// First level governed by this block.
    pub start: u32,
    pub digits: DigitSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Constant(DigitSet),
    /// The last block continues forever.
    Blocks(Vec<Block>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridScheme {
    pub base: u32,
    pub lower: Point,
    pub upper: Point,
    #[serde(default)]
    pub prefix: Vec<DigitSet>,
    pub tail: Tail,
}

impl GridScheme {
    pub fn new(base: u32, lower: Point, upper: Point, prefix: Vec<DigitSet>, tail: Tail) -> Result<Self> {
        let g = GridScheme { base, lower, upper, prefix, tail };
        g.validate()?;
        Ok(g)
    }

    /// Unit-interval scheme with one constant digit set.
    pub fn constant_1d(base: u32, lower: f64, upper: f64, digits: &[u32]) -> Result<Self> {
        GridScheme::new(base, vec![lower], vec![upper], vec![], Tail::Constant(DigitSet::from_1d(digits)))
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::input("grid base must be at least 2"));
        }
        check_point(&self.lower)?;
        check_point(&self.upper)?;
        let d = self.dim();
        if self.upper.len() != d {
            return Err(Error::input("grid box corners differ in dimension"));
        }
        if self.lower.iter().zip(&self.upper).any(|(a, b)| !(a < b)) {
            return Err(Error::input("grid box must have positive side lengths"));
        }
        let sets: Vec<&DigitSet> = match &self.tail {
            Tail::Constant(s) => self.prefix.iter().chain(std::iter::once(s)).collect(),
            Tail::Blocks(bs) => {
                if bs.is_empty() {
                    return Err(Error::input("block tail needs at least one block"));
                }
                if bs[0].start as usize != self.prefix.len() + 1 {
                    return Err(Error::input("first block must start right after the prefix"));
                }
                if bs.windows(2).any(|w| w[0].start >= w[1].start) {
                    return Err(Error::input("block starts must increase"));
                }
                self.prefix.iter().chain(bs.iter().map(|b| &b.digits)).collect()
            }
        };
        for s in sets {
            if s.is_empty() {
                return Err(Error::input("empty digit set"));
            }
            for v in &s.0 {
                if v.len() != d || v.iter().any(|&x| x >= self.base) {
                    return Err(Error::input(format!("digit vector {v:?} invalid for base {} in dimension {d}", self.base)));
                }
            }
            if s.0.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input("digit vectors must be listed in increasing order without repeats"));
            }
        }
        Ok(())
    }

    /// Digit set applied when passing from level `n - 1` to level `n`.
    pub fn digits_at(&self, n: u32) -> &DigitSet {
        assert!(n >= 1);
        if (n as usize) <= self.prefix.len() {
            return &self.prefix[n as usize - 1];
        }
        match &self.tail {
            Tail::Constant(s) => s,
            Tail::Blocks(bs) => {
                let i = bs.partition_point(|b| b.start <= n);
                &bs[i - 1].digits
            }
        }
    }

    /// From this level on all digit sets coincide.
    pub fn stable_level(&self) -> u32 {
        match &self.tail {
            Tail::Constant(_) => self.prefix.len() as u32 + 1,
            Tail::Blocks(bs) => bs.last().map(|b| b.start).unwrap_or(1),
        }
    }

    /// `ln prod_{i<=n} |D_i|`, the log of the number of level-n cylinders.
    pub fn ln_cylinder_count(&self, n: u32) -> f64 {
        let mut total = 0.0;
        let mut level = 1;
        // walk runs of equal digit sets instead of single levels
        let mut cuts: Vec<u32> = (1..=self.prefix.len() as u32 + 1).collect();
        if let Tail::Blocks(bs) = &self.tail {
            cuts.extend(bs.iter().map(|b| b.start));
        }
        cuts.sort_unstable();
        cuts.dedup();
        cuts.push(u32::MAX);
        for w in cuts.windows(2) {
            if level > n {
                break;
            }
            let end = (w[1] - 1).min(n);
            if end >= level {
                total += (end - level + 1) as f64 * (self.digits_at(level).len() as f64).ln();
                level = end + 1;
            }
        }
        total
    }

    pub fn cylinder_count(&self, n: u32) -> Option<u128> {
        let mut c: u128 = 1;
        for i in 1..=n {
            c = c.checked_mul(self.digits_at(i).len() as u128)?;
        }
        Some(c)
    }

    /// Relative position in `[0,1]^d` of the anchor point of a level-`j`
    /// cylinder: the point reached by always taking the smallest digit vector.
    pub(crate) fn anchor_rel(&self, j: u32) -> Vec<f64> {
        let b = self.base as f64;
        let stable = self.stable_level();
        let mut acc: Vec<f64> = self.digits_at(stable.max(j + 1)).0[0].iter().map(|&d| d as f64 / (b - 1.0)).collect();
        let mut level = stable.max(j + 1) - 1;
        while level > j {
            let dv = &self.digits_at(level).0[0];
            for (a, &d) in acc.iter_mut().zip(dv) {
                *a = (d as f64 + *a) / b;
            }
            level -= 1;
        }
        acc
    }

    /// Cylinders are grid cubes exactly when the box has unit sides and a
    /// corner on the level-`n` grid.
    pub(crate) fn cylinders_are_cells(&self, base: u32, n: u32) -> bool {
        if base != self.base {
            return false;
        }
        let Ok(scale) = pow_i128(base, n) else { return false };
        self.lower.iter().zip(&self.upper).all(|(&a, &b)| {
            b - a == 1.0 && Q::from_f64(a).and_then(|q| q.mul_int(scale)).map(|q| q.is_integer()).unwrap_or(false)
        })
    }

    /// Indices of all level-`n` cylinders, as cells of the base-b grid.
    pub(crate) fn cylinder_cells(&self, n: u32) -> Result<Vec<CubeIndex>> {
        match self.cylinder_count(n) {
            Some(c) if c as usize <= MAX_CUBES => {}
            _ => return Err(Error::RefinementLimit { required_depth: n, budget: MAX_CUBES }),
        }
        let d = self.dim();
        let scale = pow_i128(self.base, n)?;
        let origin: Vec<i64> = self
            .lower
            .iter()
            .map(|&a| Q::from_f64(a).and_then(|q| q.mul_int(scale)).map(|q| q.floor() as i64))
            .collect::<Result<_>>()?;
        let mut cur: Vec<Vec<i64>> = vec![vec![0; d]];
        for level in 1..=n {
            let ds = self.digits_at(level);
            let mut next = Vec::with_capacity(cur.len() * ds.len());
            for k in &cur {
                for dv in &ds.0 {
                    next.push(k.iter().zip(dv).map(|(&k, &x)| k * self.base as i64 + x as i64).collect());
                }
            }
            cur = next;
        }
        Ok(cur
            .into_iter()
            .map(|k| pad(&k.iter().zip(&origin).map(|(a, b)| a + b).collect::<Vec<_>>()))
            .collect())
    }

    /// Level-`m` cylinders as closed boxes with their anchor points.
    pub(crate) fn cylinder_pieces(&self, m: u32, budget: usize) -> Result<Vec<(Point, Point, Point)>> {
        match self.cylinder_count(m) {
            Some(c) if c as usize <= budget => {}
            _ => return Err(Error::RefinementLimit { required_depth: m, budget }),
        }
        let d = self.dim();
        let b = self.base as f64;
        let side: Vec<f64> = self.lower.iter().zip(&self.upper).map(|(a, c)| c - a).collect();
        let anchor = self.anchor_rel(m);
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; d]];
        let mut scale = 1.0;
        for level in 1..=m {
            scale /= b;
            let ds = self.digits_at(level);
            let mut next = Vec::with_capacity(cur.len() * ds.len());
            for o in &cur {
                for dv in &ds.0 {
                    next.push(o.iter().zip(dv).map(|(&o, &x)| o + x as f64 * scale).collect());
                }
            }
            cur = next;
        }
        Ok(cur
            .into_iter()
            .map(|o| {
                let lo: Point = (0..d).map(|i| self.lower[i] + side[i] * o[i]).collect();
                let hi: Point = (0..d).map(|i| self.lower[i] + side[i] * (o[i] + scale)).collect();
                let an: Point = (0..d).map(|i| self.lower[i] + side[i] * (o[i] + scale * anchor[i])).collect();
                (lo, hi, an)
            })
            .collect())
    }

    /// Smallest level whose cylinders have all sides at most `diam`.
    pub(crate) fn depth_for(&self, diam: f64) -> u32 {
        let side = self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).fold(0.0, f64::max);
        let mut m = 0;
        let mut s = side;
        while s > diam {
            s /= self.base as f64;
            m += 1;
        }
        m
    }

    /// Exact test whether the one-dimensional scheme meets `[a, b)`; returns a
    /// point of the set in that interval.
    pub(crate) fn meets_1d(&self, a: Q, b: Q) -> Result<Option<f64>> {
        debug_assert_eq!(self.dim(), 1);
        let lo = Q::from_f64(self.lower[0])?;
        let len = Q::from_f64(self.upper[0])?.sub(lo)?;
        let ra = a.sub(lo)?.div(len)?;
        let rb = b.sub(lo)?.div(len)?;
        let s = Search { g: self, lo, len };
        s.search(0, Cyl { off: Q::ZERO, scale: Q::ONE }, ra, rb)
    }
}

#[derive(Clone, Copy)]
struct Cyl {
    off: Q,
    scale: Q,
}

impl Cyl {
    fn child(self, d: u32, base: u32) -> Result<Cyl> {
        let scale = self.scale.div(Q::int(base as i128))?;
        Ok(Cyl { off: self.off.add(scale.mul_int(d as i128)?)?, scale })
    }
}

struct Search<'a> {
    g: &'a GridScheme,
    lo: Q,
    len: Q,
}

impl Search<'_> {
    fn base(&self) -> i128 {
        self.g.base as i128
    }

    fn abs(&self, cyl: Cyl, x: Q) -> Result<Q> {
        self.lo.add(self.len.mul(cyl.off.add(cyl.scale.mul(x)?)?)?)
    }

    fn anchor(&self, j: u32, cyl: Cyl) -> Result<f64> {
        let left = self.abs(cyl, Q::ZERO)?.to_f64();
        Ok(left + self.len.mul(cyl.scale)?.to_f64() * self.g.anchor_rel(j)[0])
    }

    fn digits(&self, level: u32) -> impl Iterator<Item = u32> + '_ {
        self.g.digits_at(level).0.iter().map(|v| v[0])
    }

    /// Set inside the level-`j` cylinder `cyl`, intersected with `[a, b)` in
    /// coordinates relative to the cylinder.
    fn search(&self, j: u32, cyl: Cyl, a: Q, b: Q) -> Result<Option<f64>> {
        if b <= Q::ZERO || a > Q::ONE || a >= b {
            return Ok(None);
        }
        if a <= Q::ZERO && b > Q::ONE {
            return self.anchor(j, cyl).map(Some);
        }
        if a <= Q::ZERO {
            return self.left_walk(j, cyl, b);
        }
        if b > Q::ONE {
            return self.right_walk(j, cyl, a);
        }
        let digits: Vec<u32> = self.digits(j + 1).collect();
        for d in digits {
            let ca = a.mul_int(self.base())?.sub_int(d as i128)?;
            let cb = b.mul_int(self.base())?.sub_int(d as i128)?;
            if let Some(w) = self.search(j + 1, cyl.child(d, self.g.base)?, ca, cb)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    /// Set inside the cylinder intersected with `[0, u)`, `0 < u <= 1`.
    fn left_walk(&self, mut j: u32, mut cyl: Cyl, mut u: Q) -> Result<Option<f64>> {
        let mut seen = HashSet::new();
        for _ in 0..MAX_WALK {
            let bu = u.mul_int(self.base())?;
            let ds = self.g.digits_at(j + 1);
            if let Some(d) = self.digits(j + 1).find(|&d| Q::int(d as i128 + 1) < bu) {
                return self.anchor(j + 1, cyl.child(d, self.g.base)?).map(Some);
            }
            let d = bu.ceil() - 1;
            if !ds.contains_1d(d) {
                return Ok(None);
            }
            cyl = cyl.child(d as u32, self.g.base)?;
            u = bu.sub_int(d)?;
            j += 1;
            if !seen.insert((j.min(self.g.stable_level()), u)) {
                return Ok(None);
            }
        }
        Err(Error::RefinementLimit { required_depth: j, budget: MAX_WALK })
    }

    /// Set inside the cylinder intersected with `[u, 1]`, `0 < u <= 1`.
    fn right_walk(&self, mut j: u32, mut cyl: Cyl, mut u: Q) -> Result<Option<f64>> {
        let start = self.abs(cyl, u)?.to_f64();
        let mut seen = HashSet::new();
        for _ in 0..MAX_WALK {
            let bu = u.mul_int(self.base())?;
            let ds = self.g.digits_at(j + 1);
            let mut above: Vec<u32> = self.digits(j + 1).filter(|&d| Q::int(d as i128) >= bu).collect();
            above.sort_unstable();
            if let Some(&d) = above.first() {
                return self.anchor(j + 1, cyl.child(d, self.g.base)?).map(Some);
            }
            let d = bu.ceil() - 1;
            if !ds.contains_1d(d) {
                return Ok(None);
            }
            cyl = cyl.child(d as u32, self.g.base)?;
            u = bu.sub_int(d)?;
            j += 1;
            if !seen.insert((j.min(self.g.stable_level()), u)) {
                // the digit expansion of the start point repeats inside the set
                return Ok(Some(start));
            }
        }
        Err(Error::RefinementLimit { required_depth: j, budget: MAX_WALK })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor() -> GridScheme {
        GridScheme::constant_1d(3, 0.0, 1.0, &[0, 2]).unwrap()
    }

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d).unwrap()
    }

    #[test]
    fn cantor_membership() {
        let c = cantor();
        // 1/4 lies in the Cantor set (0.020202... in base 3)
        assert!(c.meets_1d(q(1, 4), q(1, 4).add(q(1, 1 << 40)).unwrap()).unwrap().is_some());
        let w = c.meets_1d(q(1, 4), q(1, 2)).unwrap().unwrap();
        assert!((0.25..0.5).contains(&w));
        // middle third is empty
        assert!(c.meets_1d(q(3, 8), q(5, 8)).unwrap().is_none());
        // 1/3 is in, (1/3, 2/3) is not
        assert!(c.meets_1d(q(1, 3), q(1, 2)).unwrap().is_some());
        assert!(c.meets_1d(q(1, 3).add(q(1, 1000)).unwrap(), q(2, 3)).unwrap().is_none());
        assert!(c.meets_1d(q(1, 2), q(3, 4)).unwrap().is_some());
        let w = c.meets_1d(q(1, 2), q(3, 4)).unwrap().unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn digit_schedule() {
        let g = GridScheme::new(
            10,
            vec![0.0],
            vec![1.0],
            vec![DigitSet::from_1d(&[1])],
            Tail::Blocks(vec![
                Block { start: 2, digits: DigitSet::from_1d(&[0, 1]) },
                Block { start: 4, digits: DigitSet::from_1d(&[0, 1, 2]) },
            ]),
        )
        .unwrap();
        assert_eq!(g.digits_at(1).len(), 1);
        assert_eq!(g.digits_at(3).len(), 2);
        assert_eq!(g.digits_at(9).len(), 3);
        assert_eq!(g.cylinder_count(5), Some(2 * 2 * 3 * 3));
        assert!((g.ln_cylinder_count(5) - 36f64.ln()).abs() < 1e-12);
        assert_eq!(g.stable_level(), 4);
    }

    #[test]
    fn cylinder_cells_match_digits() {
        let c = cantor();
        let cells: Vec<i64> = c.cylinder_cells(2).unwrap().iter().map(|k| k[0]).collect();
        assert_eq!(cells, vec![0, 2, 6, 8]);
        assert!((c.anchor_rel(0)[0]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(GridScheme::constant_1d(3, 0.0, 1.0, &[0, 3]).is_err());
        assert!(GridScheme::constant_1d(3, 0.0, 1.0, &[]).is_err());
        assert!(GridScheme::constant_1d(1, 0.0, 1.0, &[0]).is_err());
    }
}
