//! Cube covers of the set descriptions.
//!
//! Points, boxes and the harmonic closure are enumerated directly. Digit
//! schemes whose cylinders coincide with grid cells use the cylinders.
//! Everything with an exact membership test for rational boxes is refined
//! level by level. What remains falls back to an outer cover built from small
//! pieces of the set.

use super::{pad, CubeCover, CubeIndex, Exactness, GridScheme, Point, SetSpec, MAX_CUBES, MAX_PIECES};
use crate::error::{Error, Result};
use crate::exact::{pow_i128, Q};

/// Exact-arithmetic view of a set, built once per query.
enum Prepared {
    Points(Vec<(Vec<Q>, Point)>),
    Box(Vec<Q>, Vec<Q>),
    Harmonic,
    Grid(GridScheme),
    Union(Vec<Prepared>),
    Affine(Box<Prepared>, Q, Vec<Q>),
    Opaque,
}

fn qs(x: &[f64]) -> Result<Vec<Q>> {
    x.iter().map(|&v| Q::from_f64(v)).collect()
}

fn lex_lt(a: &[f64], b: &[f64]) -> bool {
    a.partial_cmp(b) == Some(std::cmp::Ordering::Less)
}

impl Prepared {
    fn new(set: &SetSpec) -> Result<Prepared> {
        Ok(match set {
            SetSpec::Points { points } => {
                let mut v: Vec<(Vec<Q>, Point)> = points.iter().map(|p| Ok((qs(p)?, p.clone()))).collect::<Result<_>>()?;
                v.sort_by(|a, b| a.0.cmp(&b.0));
                Prepared::Points(v)
            }
            SetSpec::Box { lower, upper } => Prepared::Box(qs(lower)?, qs(upper)?),
            SetSpec::HarmonicClosure => Prepared::Harmonic,
            SetSpec::GridScheme(g) if g.dim() == 1 => Prepared::Grid(g.clone()),
            SetSpec::HomothetyIfs(s) => match s.to_grid() {
                Some(g) if g.dim() == 1 => Prepared::Grid(g),
                _ => Prepared::Opaque,
            },
            SetSpec::GridScheme(_) => Prepared::Opaque,
            SetSpec::Union { members } => Prepared::Union(members.iter().map(Prepared::new).collect::<Result<_>>()?),
            SetSpec::Affine { child, scale, translation } => {
                Prepared::Affine(Box::new(Prepared::new(child)?), Q::from_f64(*scale)?, qs(translation)?)
            }
        })
    }

    fn exact(&self) -> bool {
        match self {
            Prepared::Opaque => false,
            Prepared::Union(ms) => ms.iter().all(|m| m.exact()),
            Prepared::Affine(c, _, _) => c.exact(),
            _ => true,
        }
    }

    /// A point of the set in the half-open box `[lo, hi)`, if there is one.
    fn meets(&self, lo: &[Q], hi: &[Q]) -> Result<Option<Point>> {
        match self {
            Prepared::Points(ps) => {
                let start = ps.partition_point(|(q, _)| q[0] < lo[0]);
                for (q, p) in &ps[start..] {
                    if q[0] >= hi[0] {
                        break;
                    }
                    if q.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| a <= x && x < b) {
                        return Ok(Some(p.clone()));
                    }
                }
                Ok(None)
            }
            Prepared::Box(a, b) => {
                if (0..a.len()).all(|i| lo[i] <= b[i] && hi[i] > a[i]) {
                    Ok(Some((0..a.len()).map(|i| lo[i].max(a[i]).to_f64()).collect()))
                } else {
                    Ok(None)
                }
            }
            Prepared::Harmonic => {
                let (a, b) = (lo[0], hi[0]);
                if b <= Q::ZERO || a > Q::ONE {
                    return Ok(None);
                }
                if a <= Q::ZERO {
                    return Ok(Some(vec![0.0]));
                }
                // largest m with 1/m >= a
                let m = Q::ONE.div(a)?.floor();
                let x = Q::new(1, m)?;
                Ok(if x < b { Some(vec![x.to_f64()]) } else { None })
            }
            Prepared::Grid(g) => Ok(g.meets_1d(lo[0], hi[0])?.map(|x| vec![x])),
            Prepared::Union(ms) => {
                let mut best: Option<Point> = None;
                for m in ms {
                    if let Some(w) = m.meets(lo, hi)? {
                        if best.as_ref().is_none_or(|b| lex_lt(&w, b)) {
                            best = Some(w);
                        }
                    }
                }
                Ok(best)
            }
            Prepared::Affine(c, s, t) => {
                let pre = |x: &[Q]| -> Result<Vec<Q>> { x.iter().zip(t).map(|(x, t)| x.sub(*t)?.div(*s)).collect() };
                let w = c.meets(&pre(lo)?, &pre(hi)?)?;
                let (sf, tf): (f64, Vec<f64>) = (s.to_f64(), t.iter().map(|q| q.to_f64()).collect());
                Ok(w.map(|w| w.iter().zip(&tf).map(|(x, t)| sf * x + t).collect()))
            }
            Prepared::Opaque => Err(Error::Invariant("exact membership requested for an opaque set".into())),
        }
    }
}

impl SetSpec {
    /// Dyadic cover at level `n`.
    pub fn cubes_at(&self, n: u32) -> Result<CubeCover> {
        self.cubes_at_base(2, n)
    }

    /// Cover by the cubes of side `base^-n`.
    pub fn cubes_at_base(&self, base: u32, n: u32) -> Result<CubeCover> {
        if base < 2 {
            return Err(Error::input("base must be at least 2"));
        }
        let d = self.dim();
        if self.is_empty() {
            return Ok(CubeCover::new(n, base, d, vec![], Exactness::Exact));
        }
        match self {
            SetSpec::Points { points } => {
                let scale = pow_i128(base, n)?;
                let cubes = points
                    .iter()
                    .map(|p| Ok(pad(&p.iter().map(|&x| cell(x, scale)).collect::<Result<Vec<_>>>()?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CubeCover::new(n, base, d, cubes, Exactness::Exact))
            }
            SetSpec::Box { lower, upper } => {
                let scale = pow_i128(base, n)?;
                let ranges: Vec<(i64, i64)> =
                    lower.iter().zip(upper).map(|(&a, &b)| Ok((cell(a, scale)?, cell(b, scale)?))).collect::<Result<_>>()?;
                Ok(CubeCover::new(n, base, d, product(&ranges)?, Exactness::Exact))
            }
            SetSpec::HarmonicClosure => {
                let big = pow_i128(base, n)?;
                if big > (1i128 << 62) || (2.0 * (big as f64).sqrt()) as usize > MAX_CUBES {
                    return Err(Error::RefinementLimit { required_depth: n, budget: MAX_CUBES });
                }
                let mut cubes = vec![pad(&[0])];
                let mut m = 1;
                while m <= big {
                    let q = big / m;
                    cubes.push(pad(&[q as i64]));
                    m = big / q + 1;
                }
                Ok(CubeCover::new(n, base, 1, cubes, Exactness::Exact))
            }
            SetSpec::GridScheme(g) => self.grid_cover(g, base, n),
            SetSpec::HomothetyIfs(s) => match s.to_grid() {
                Some(g) => self.grid_cover(&g, base, n),
                None => self.outer_cover(base, n),
            },
            SetSpec::Union { members } => {
                let mut cubes = Vec::new();
                let mut exact = true;
                for m in members {
                    let c = m.cubes_at_base(base, n)?;
                    exact &= c.is_exact();
                    cubes.extend(c.cubes);
                }
                let ex = if exact { Exactness::Exact } else { Exactness::Outer };
                Ok(CubeCover::new(n, base, d, cubes, ex))
            }
            SetSpec::Affine { .. } => {
                let p = Prepared::new(self)?;
                if p.exact() {
                    self.refine(&p, base, n)
                } else {
                    self.outer_cover(base, n)
                }
            }
        }
    }

    /// Covers for every level in `n_min..=n_max`, sharing refinement work.
    pub fn covers(&self, base: u32, n_min: u32, n_max: u32) -> Result<Vec<CubeCover>> {
        let p = Prepared::new(self)?;
        let refined = matches!(self, SetSpec::Affine { .. })
            || matches!(self, SetSpec::GridScheme(g) if g.dim() == 1 && !g.cylinders_are_cells(base, n_max))
            || matches!(self, SetSpec::HomothetyIfs(s) if s.to_grid().is_some_and(|g| g.dim() == 1 && !g.cylinders_are_cells(base, n_max)));
        if refined && p.exact() {
            let mut out = Vec::new();
            self.refine_with(&p, base, n_max, |c| {
                if c.level >= n_min {
                    out.push(c.clone());
                }
            })?;
            return Ok(out);
        }
        (n_min..=n_max).map(|n| self.cubes_at_base(base, n)).collect()
    }

    /// True when covers are computed exactly and cubes have witnesses.
    pub fn has_exact_membership(&self) -> bool {
        Prepared::new(self).map(|p| p.exact()).unwrap_or(false)
    }

    /// A point of the set in the half-open box `[lo, hi)`.
    pub fn meets_box(&self, lo: &[f64], hi: &[f64]) -> Result<Option<Point>> {
        let p = Prepared::new(self)?;
        if !p.exact() {
            return Err(Error::NotExact { level: 0 });
        }
        p.meets(&qs(lo)?, &qs(hi)?)
    }

    /// One point of the set inside each cube of the cover, listed in cube
    /// order. Cubes without a known point are skipped.
    pub fn representatives(&self, cover: &CubeCover) -> Result<Vec<(CubeIndex, Point)>> {
        let p = Prepared::new(self)?;
        if p.exact() {
            let mut out = Vec::with_capacity(cover.len());
            for idx in &cover.cubes {
                let (lo, hi) = cover.exact_bounds(idx)?;
                if let Some(w) = p.meets(&lo, &hi)? {
                    out.push((*idx, w));
                }
            }
            return Ok(out);
        }
        let h = cover.side();
        let mut anchors: Vec<(CubeIndex, Point)> = self
            .outer_pieces(h / 8.0)?
            .into_iter()
            .map(|(_, _, a)| (pad(&a.iter().map(|x| (x / h).floor() as i64).collect::<Vec<_>>()), a))
            .filter(|(k, _)| cover.position(k).is_some())
            .collect();
        anchors.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)));
        anchors.dedup_by(|a, b| a.0 == b.0);
        Ok(anchors)
    }

    fn grid_cover(&self, g: &GridScheme, base: u32, n: u32) -> Result<CubeCover> {
        if g.cylinders_are_cells(base, n) {
            return Ok(CubeCover::new(n, base, g.dim(), g.cylinder_cells(n)?, Exactness::Exact));
        }
        if g.dim() == 1 {
            let p = Prepared::Grid(g.clone());
            return self.refine(&p, base, n);
        }
        self.outer_cover(base, n)
    }

    fn refine(&self, p: &Prepared, base: u32, n: u32) -> Result<CubeCover> {
        let mut last = None;
        self.refine_with(p, base, n, |c| {
            if c.level == n {
                last = Some(c.clone());
            }
        })?;
        Ok(last.expect("refinement reaches the final level"))
    }

    /// Keeps the cubes meeting the set, level by level from 0 to `n`.
    fn refine_with(&self, p: &Prepared, base: u32, n: u32, mut visit: impl FnMut(&CubeCover)) -> Result<()> {
        let d = self.dim();
        let (lo, hi) = self.bounding_box();
        let ranges: Vec<(i64, i64)> = lo.iter().zip(&hi).map(|(&a, &b)| Ok((cell(a, 1)?, cell(b, 1)?))).collect::<Result<_>>()?;
        let mut cur = CubeCover::new(0, base, d, self.filter_meets(p, base, 0, product(&ranges)?)?, Exactness::Exact);
        visit(&cur);
        for level in 1..=n {
            let per = (base as usize).pow(d as u32);
            if cur.len().saturating_mul(per) > MAX_CUBES {
                return Err(Error::RefinementLimit { required_depth: n, budget: MAX_CUBES });
            }
            let mut kids = Vec::with_capacity(cur.len() * per);
            for k in &cur.cubes {
                let r: Vec<(i64, i64)> = (0..d).map(|i| (k[i] * base as i64, k[i] * base as i64 + base as i64 - 1)).collect();
                kids.extend(product(&r)?);
            }
            cur = CubeCover::new(level, base, d, self.filter_meets(p, base, level, kids)?, Exactness::Exact);
            visit(&cur);
        }
        Ok(())
    }

    fn filter_meets(&self, p: &Prepared, base: u32, level: u32, cands: Vec<CubeIndex>) -> Result<Vec<CubeIndex>> {
        let d = self.dim();
        let mut out = Vec::new();
        for k in cands {
            let (lo, hi) = super::cube_bounds_q(base, level, &k, d)?;
            if p.meets(&lo, &hi)?.is_some() {
                out.push(k);
            }
        }
        Ok(out)
    }

    fn outer_cover(&self, base: u32, n: u32) -> Result<CubeCover> {
        let h = (base as f64).powi(-(n as i32));
        let mut cubes = Vec::new();
        for (lo, hi, _) in self.outer_pieces(h / 8.0)? {
            let ranges: Vec<(i64, i64)> = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| (((a - 1e-12 * h) / h).floor() as i64, ((b + 1e-12 * h) / h).floor() as i64))
                .collect();
            cubes.extend(product(&ranges)?);
            if cubes.len() > MAX_CUBES {
                return Err(Error::RefinementLimit { required_depth: n, budget: MAX_CUBES });
            }
        }
        Ok(CubeCover::new(n, base, self.dim(), cubes, Exactness::Outer))
    }

    /// Closed boxes of side at most `diam` covering the set, each meeting it,
    /// with a point of the set in each.
    pub(crate) fn outer_pieces(&self, diam: f64) -> Result<Vec<(Point, Point, Point)>> {
        Ok(match self {
            SetSpec::Points { points } => points.iter().map(|p| (p.clone(), p.clone(), p.clone())).collect(),
            SetSpec::Box { lower, upper } => {
                let counts: Vec<usize> = lower.iter().zip(upper).map(|(a, b)| (((b - a) / diam).ceil() as usize).max(1)).collect();
                let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).unwrap_or(usize::MAX);
                if total > MAX_PIECES {
                    return Err(Error::RefinementLimit { required_depth: 0, budget: MAX_PIECES });
                }
                let ranges: Vec<(i64, i64)> = counts.iter().map(|&c| (0, c as i64 - 1)).collect();
                product(&ranges)?
                    .into_iter()
                    .map(|k| {
                        let lo: Point = (0..lower.len())
                            .map(|i| lower[i] + (upper[i] - lower[i]) * k[i] as f64 / counts[i] as f64)
                            .collect();
                        let hi: Point = (0..lower.len())
                            .map(|i| lower[i] + (upper[i] - lower[i]) * (k[i] + 1) as f64 / counts[i] as f64)
                            .collect();
                        (lo.clone(), hi, lo)
                    })
                    .collect()
            }
            SetSpec::HarmonicClosure => {
                let m = (1.0 / diam).ceil().max(1.0) as usize;
                if m > MAX_PIECES {
                    return Err(Error::RefinementLimit { required_depth: 0, budget: MAX_PIECES });
                }
                let mut v: Vec<(Point, Point, Point)> = (1..m).map(|k| vec![1.0 / k as f64]).map(|p| (p.clone(), p.clone(), p)).collect();
                v.push((vec![0.0], vec![1.0 / m as f64], vec![0.0]));
                v
            }
            SetSpec::GridScheme(g) => g.cylinder_pieces(g.depth_for(diam), MAX_PIECES)?,
            SetSpec::HomothetyIfs(s) => match s.to_grid() {
                Some(g) => g.cylinder_pieces(g.depth_for(diam), MAX_PIECES)?,
                None => s.pieces(diam, MAX_PIECES)?,
            },
            SetSpec::Union { members } => {
                let mut v = Vec::new();
                for m in members {
                    v.extend(m.outer_pieces(diam)?);
                    if v.len() > MAX_PIECES {
                        return Err(Error::RefinementLimit { required_depth: 0, budget: MAX_PIECES });
                    }
                }
                v
            }
            SetSpec::Affine { child, scale, translation } => {
                let f = |x: Point| -> Point { x.iter().zip(translation).map(|(x, t)| scale * x + t).collect() };
                child.outer_pieces(diam / scale)?.into_iter().map(|(a, b, c)| (f(a), f(b), f(c))).collect()
            }
        })
    }
}

/// Index of the grid cell of side `1/scale` containing `x`.
fn cell(x: f64, scale: i128) -> Result<i64> {
    let k = Q::from_f64(x)?.mul_int(scale)?.floor();
    i64::try_from(k).map_err(|_| Error::Overflow)
}

fn product(ranges: &[(i64, i64)]) -> Result<Vec<CubeIndex>> {
    let mut total: u128 = 1;
    for &(a, b) in ranges {
        if b < a {
            return Ok(vec![]);
        }
        total = total.saturating_mul((b - a + 1) as u128);
    }
    if total > MAX_CUBES as u128 {
        return Err(Error::RefinementLimit { required_depth: 0, budget: MAX_CUBES });
    }
    let mut out = vec![[0i64; super::MAX_DIM]];
    for (axis, &(a, b)) in ranges.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (b - a + 1) as usize);
        for k in &out {
            for v in a..=b {
                let mut c = *k;
                c[axis] = v;
                next.push(c);
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cantor_middle_thirds, HomothetyIfs, Separation, Similarity};

    fn idx1(c: &CubeCover) -> Vec<i64> {
        c.cubes.iter().map(|k| k[0]).collect()
    }

    #[test]
    fn box_and_points() {
        assert_eq!(idx1(&SetSpec::unit_box(1).cubes_at(1).unwrap()), vec![0, 1, 2]);
        let p = SetSpec::points(vec![vec![0.0], vec![0.75]]).unwrap();
        assert_eq!(idx1(&p.cubes_at(2).unwrap()), vec![0, 3]);
        assert_eq!(SetSpec::unit_box(2).cubes_at(3).unwrap().len(), 81);
    }

    #[test]
    fn cantor_cylinders_in_base_three() {
        let c = cantor_middle_thirds().cubes_at_base(3, 2).unwrap();
        assert_eq!(idx1(&c), vec![0, 2, 6, 8]);
        assert!(c.is_exact());
    }

    #[test]
    fn harmonic_cover_matches_brute_force() {
        for n in 0..12u32 {
            let c = SetSpec::HarmonicClosure.cubes_at(n).unwrap();
            let big = 1i64 << n;
            let mut want: Vec<i64> = (1..=big + 1).map(|m| big / m).collect();
            want.push(0);
            want.sort();
            want.dedup();
            assert_eq!(idx1(&c), want, "level {n}");
        }
        assert_eq!(idx1(&SetSpec::HarmonicClosure.cubes_at(4).unwrap()), vec![0, 1, 2, 3, 4, 5, 8, 16]);
    }

    /// Smallest point of the middle-thirds Cantor set that is `>= a`.
    fn cantor_successor(a: Q, seen: &mut Vec<Q>) -> Option<Q> {
        let third = Q::new(1, 3).unwrap();
        if a <= Q::ZERO {
            return Some(Q::ZERO);
        }
        if a > Q::ONE {
            return None;
        }
        if seen.contains(&a) {
            return Some(a);
        }
        seen.push(a);
        let two_thirds = Q::new(2, 3).unwrap();
        if a <= third {
            Some(cantor_successor(a.mul_int(3).unwrap(), seen)?.mul(third).unwrap())
        } else if a <= two_thirds {
            Some(two_thirds)
        } else {
            let inner = cantor_successor(a.mul_int(3).unwrap().sub_int(2).unwrap(), seen)?;
            Some(two_thirds.add(inner.mul(third).unwrap()).unwrap())
        }
    }

    #[test]
    fn cantor_dyadic_cover_matches_successor_oracle() {
        for n in 0..11u32 {
            let big = 1i128 << n;
            let want: Vec<i64> = (0..=big)
                .filter(|&k| {
                    let a = Q::new(k, big).unwrap();
                    let b = Q::new(k + 1, big).unwrap();
                    cantor_successor(a, &mut Vec::new()).is_some_and(|c| c < b)
                })
                .map(|k| k as i64)
                .collect();
            assert_eq!(idx1(&cantor_middle_thirds().cubes_at(n).unwrap()), want, "level {n}");
        }
    }

    #[test]
    fn affine_image_and_union() {
        let s = SetSpec::affine(SetSpec::points(vec![vec![0.0], vec![1.0]]).unwrap(), 0.5, vec![0.25]).unwrap();
        assert_eq!(idx1(&s.cubes_at(2).unwrap()), vec![1, 3]);
        let u = SetSpec::union(vec![SetSpec::unit_box(1), s]).unwrap();
        assert_eq!(u.cubes_at(2).unwrap().len(), 5);
        let a = SetSpec::affine(SetSpec::unit_box(1), 0.5, vec![0.5]).unwrap();
        assert_eq!(idx1(&a.cubes_at(2).unwrap()), vec![2, 3, 4]);
    }

    #[test]
    fn covers_share_work() {
        let c = cantor_middle_thirds();
        let all = c.covers(2, 3, 7).unwrap();
        for (i, n) in (3..=7).enumerate() {
            assert_eq!(all[i], c.cubes_at(n).unwrap());
        }
    }

    #[test]
    fn non_grid_ifs_is_outer() {
        let s = SetSpec::HomothetyIfs(
            HomothetyIfs::new(
                vec![Similarity { ratio: 0.3, translation: vec![0.0] }, Similarity { ratio: 0.3, translation: vec![0.7] }],
                Separation::Strong,
            )
            .unwrap(),
        );
        let c = s.cubes_at(6).unwrap();
        assert!(!c.is_exact());
        assert!(c.len() >= 4);
        let reps = s.representatives(&c).unwrap();
        assert!(!reps.is_empty());
    }

    #[test]
    fn witnesses_lie_in_their_cubes() {
        for s in [SetSpec::HarmonicClosure, cantor_middle_thirds(), SetSpec::unit_box(2)] {
            let c = s.cubes_at(5).unwrap();
            let reps = s.representatives(&c).unwrap();
            assert_eq!(reps.len(), c.len());
            for (k, p) in reps {
                let (lo, hi) = c.float_bounds(&k);
                assert!(p.iter().zip(lo.iter().zip(&hi)).all(|(x, (a, b))| a <= x && x < b), "{k:?} {p:?}");
            }
        }
    }
}
