//! Cube counts, greedy packings and box-dimension estimates.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ball, CubeCover, Exactness, Norm, Point, SetSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub n: u32,
    pub r: f64,
    pub log_count: f64,
    pub ratio: f64,
}

/// Per-level counts on the scales `base^-n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSeries {
    pub base: u32,
    pub rows: Vec<ScaleRow>,
}

impl ScaleSeries {
    pub fn from_log_counts(base: u32, levels: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let lb = (base as f64).ln();
        let rows = levels
            .into_iter()
            .map(|(n, lc)| ScaleRow { n, r: (base as f64).powi(-(n as i32)), log_count: lc, ratio: lc / (n as f64 * lb) })
            .collect();
        ScaleSeries { base, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,r,log_count,ratio\n");
        for row in &self.rows {
            writeln!(s, "{},{},{},{}", row.n, row.r, row.log_count, row.ratio).unwrap();
        }
        s
    }

    /// Window statistics over the upper half of the levels and the least
    /// squares slope of `log_count` against `n log base`.
    pub fn estimate(&self) -> DimEstimate {
        let (first, last) = match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => (a.n, b.n),
            _ => return DimEstimate::degenerate((0, 0)),
        };
        let cut = first + (last - first) / 2;
        let tail: Vec<f64> = self.rows.iter().filter(|r| r.n >= cut).map(|r| r.ratio).collect();
        let lb = (self.base as f64).ln();
        let xs: Vec<f64> = self.rows.iter().map(|r| r.n as f64 * lb).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.log_count).collect();
        DimEstimate {
            lower_window: tail.iter().copied().fold(f64::INFINITY, f64::min),
            upper_window: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            slope_fit: least_squares_slope(&xs, &ys),
            scale_range: (first, last),
            degenerate: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub lower_window: f64,
    pub upper_window: f64,
    pub slope_fit: f64,
    pub scale_range: (u32, u32),
    pub degenerate: bool,
}

impl DimEstimate {
    fn degenerate(scale_range: (u32, u32)) -> Self {
        DimEstimate { lower_window: 0.0, upper_window: 0.0, slope_fit: 0.0, scale_range, degenerate: true }
    }

    /// Key/value rows appended after a series in CSV output.
    pub fn csv_rows(&self) -> String {
        format!(
            "lower_window,,,{}\nupper_window,,,{}\nslope,,,{}\n",
            self.lower_window, self.upper_window, self.slope_fit
        )
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Number of dyadic cubes of side `2^-n` meeting the set.
pub fn cube_count(set: &SetSpec, n: u32) -> Result<(usize, Exactness)> {
    let c = set.cubes_at(n)?;
    Ok((c.len(), c.exactness))
}

/// `ln` of the number of base-`base` cubes at level `n`. Digit schemes in
/// their own base are counted from the digit sets without enumeration.
pub fn log_cube_count(set: &SetSpec, base: u32, n: u32) -> Result<(f64, Exactness)> {
    if let Some(g) = grid_of(set) {
        if counted_by_digits(&g, base) {
            return Ok((g.ln_cylinder_count(n), Exactness::Exact));
        }
    }
    let c = set.cubes_at_base(base, n)?;
    Ok(((c.len() as f64).ln(), c.exactness))
}

fn grid_of(set: &SetSpec) -> Option<crate::geometry::GridScheme> {
    match set {
        SetSpec::GridScheme(g) => Some(g.clone()),
        SetSpec::HomothetyIfs(s) => s.to_grid(),
        _ => None,
    }
}

fn counted_by_digits(g: &crate::geometry::GridScheme, base: u32) -> bool {
    g.base == base && g.lower.iter().zip(&g.upper).all(|(a, b)| b - a == 1.0 && a.fract() == 0.0)
}

/// Series of cube counts over `n_min..=n_max` with window and slope
/// estimates of the box dimension.
pub fn box_dim_estimate(set: &SetSpec, base: u32, n_min: u32, n_max: u32) -> Result<(ScaleSeries, DimEstimate)> {
    check_range(n_min, n_max)?;
    let counts: Vec<(u32, f64)> = match grid_of(set).filter(|g| counted_by_digits(g, base)) {
        Some(g) => (n_min..=n_max).map(|n| (n, g.ln_cylinder_count(n))).collect(),
        None => set.covers(base, n_min, n_max)?.iter().map(|c| (c.level, (c.len() as f64).ln())).collect(),
    };
    let series = ScaleSeries::from_log_counts(base, counts);
    let est = if series.rows.last().is_none_or(|r| r.log_count <= 0.0) {
        DimEstimate::degenerate((n_min, n_max))
    } else {
        series.estimate()
    };
    Ok((series, est))
}

pub(crate) fn check_range(n_min: u32, n_max: u32) -> Result<()> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::input(format!("scale range {n_min}..{n_max} must satisfy 1 <= min <= max")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingCount {
    /// Centres of the greedy packing, pairwise at distance at least `2r`.
    pub centers: Vec<Point>,
    /// Bound on any packing of disjoint `r`-balls centred in the set.
    pub upper_bound: usize,
}

impl PackingCount {
    pub fn greedy(&self) -> usize {
        self.centers.len()
    }
}

/// Smallest `l` with `2^-l <= x`.
pub(crate) fn level_at_most(x: f64) -> u32 {
    let mut l = 0;
    while (-(l as f64)).exp2() > x {
        l += 1;
    }
    l
}

/// Greedy packing by open `r`-balls with centres in the set (and in
/// `region` when given), candidates taken in cube order at level
/// `ceil(log2(1/r)) + 2`, plus a cube-count upper bound.
pub fn packing_count(set: &SetSpec, region: Option<&Ball>, r: f64, norm: Norm) -> Result<PackingCount> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input("packing radius must be positive"));
    }
    let d = set.dim();
    let level = level_at_most(r) + 2;
    let cover = set.cubes_at(level)?;
    let reps = set.representatives(&cover)?;
    let mut centers: Vec<Point> = Vec::new();
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let cell = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / (2.0 * r)).floor() as i64).collect() };
    let mut any = false;
    for (_, p) in reps {
        if region.is_some_and(|b| !b.contains(&p)) {
            continue;
        }
        any = true;
        let c = cell(&p);
        let clash = neighbours(&c).any(|nb| grid.get(&nb).is_some_and(|v| v.iter().any(|&i| norm.dist(&centers[i], &p) < 2.0 * r)));
        if !clash {
            grid.entry(c).or_default().push(centers.len());
            centers.push(p);
        }
    }
    if !any {
        return Err(Error::input("region contains no point of the set"));
    }
    let side = match norm {
        Norm::Chebyshev => 2.0 * r,
        Norm::Euclidean => 2.0 * r / (d as f64).sqrt(),
    };
    let bound_cover = set.cubes_at(level_at_most(side))?;
    let upper_bound = match region {
        None => bound_cover.len(),
        Some(b) => count_meeting(&bound_cover, b),
    };
    Ok(PackingCount { centers, upper_bound })
}

fn count_meeting(c: &CubeCover, b: &Ball) -> usize {
    c.cubes
        .iter()
        .filter(|k| {
            let (lo, hi) = c.float_bounds(k);
            let nearest: Point = b.center.iter().zip(lo.iter().zip(&hi)).map(|(&x, (&a, &h))| x.clamp(a, h)).collect();
            b.norm.dist(&b.center, &nearest) < b.radius
        })
        .count()
}

fn neighbours(c: &[i64]) -> impl Iterator<Item = Vec<i64>> + '_ {
    let d = c.len();
    (0..3usize.pow(d as u32)).map(move |mut code| {
        c.iter()
            .map(|&x| {
                let off = (code % 3) as i64 - 1;
                code /= 3;
                x + off
            })
            .collect()
    })
}

/// Similarity dimension: the root `beta` of `sum r_i^beta = 1`, by
/// bisection to `1e-13`. Zero when there is at most one map.
pub fn moran_beta(ratios: &[f64]) -> Result<f64> {
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::input("ratios must lie in (0,1)"));
    }
    if ratios.len() <= 1 {
        return Ok(0.0);
    }
    let f = |b: f64| ratios.iter().map(|r| r.powf(b)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ball_indicator, cantor_middle_thirds};

    #[test]
    fn counts() {
        assert_eq!(cube_count(&SetSpec::unit_box(1), 3).unwrap(), (9, Exactness::Exact));
        assert_eq!(cube_count(&SetSpec::points(vec![vec![0.0]]).unwrap(), 7).unwrap().0, 1);
        let (lc, _) = log_cube_count(&cantor_middle_thirds(), 3, 12).unwrap();
        assert!((lc - 12.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn packings() {
        let p = packing_count(&SetSpec::unit_box(1), None, 1.0 / 16.0, Norm::Chebyshev).unwrap();
        assert_eq!(p.greedy(), 9);
        assert!(p.upper_bound >= 9 && p.upper_bound <= 27);
        let two = SetSpec::points(vec![vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(packing_count(&two, None, 0.4, Norm::Chebyshev).unwrap().greedy(), 2);
        let far = ball_indicator(&[5.0], 0.5, Norm::Chebyshev).unwrap();
        assert!(packing_count(&two, Some(&far), 0.4, Norm::Chebyshev).is_err());
    }

    #[test]
    fn moran_values() {
        assert!((moran_beta(&[1.0 / 3.0, 1.0 / 3.0]).unwrap() - 0.6309297535714574).abs() < 1e-12);
        assert!((moran_beta(&[0.25; 4]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(moran_beta(&[0.5]).unwrap(), 0.0);
        assert!(moran_beta(&[1.5]).is_err());
    }

    #[test]
    fn box_dimension_of_interval_and_cantor() {
        let (_, e) = box_dim_estimate(&SetSpec::unit_box(1), 2, 5, 15).unwrap();
        assert!((e.slope_fit - 1.0).abs() < 0.02);
        let (_, c) = box_dim_estimate(&cantor_middle_thirds(), 3, 5, 12).unwrap();
        assert!((c.slope_fit - 2f64.ln() / 3f64.ln()).abs() < 0.01);
        let (_, p) = box_dim_estimate(&SetSpec::points(vec![vec![0.0]]).unwrap(), 2, 1, 8).unwrap();
        assert!(p.degenerate && p.slope_fit == 0.0);
    }

    #[test]
    fn series_csv_header() {
        let s = ScaleSeries::from_log_counts(2, vec![(1, 0.0)]);
        assert!(s.to_csv().starts_with("n,r,log_count,ratio\n1,0.5,0,0\n"));
    }
}
