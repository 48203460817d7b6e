//! Connected components of cube covers (cubes touching at a face, edge or
//! corner are adjacent) and the resulting separation counts.

use std::fmt::Write;

use crate::counting::{check_range, moran_beta, DimEstimate, ScaleSeries};
use crate::error::{Error, Result};
use crate::geometry::{CubeCover, CubeIndex, SetSpec};

pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Offsets in `{-1,0,1}^d` other than zero.
pub(crate) fn neighbour_offsets(d: usize) -> Vec<CubeIndex> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(d as u32) {
        let mut off = [0i64; crate::geometry::MAX_DIM];
        let mut c = code;
        for o in off.iter_mut().take(d) {
            *o = (c % 3) as i64 - 1;
            c /= 3;
        }
        if off.iter().any(|&x| x != 0) {
            out.push(off);
        }
    }
    out
}

/// Positions (in `cover.cubes`) of the cubes adjacent to cube `i`.
pub(crate) fn adjacent(cover: &CubeCover, i: usize, offsets: &[CubeIndex]) -> Vec<usize> {
    let k = cover.cubes[i];
    offsets
        .iter()
        .filter_map(|off| {
            let mut nb = k;
            for a in 0..cover.dim {
                nb[a] += off[a];
            }
            cover.position(&nb)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    pub cover: CubeCover,
    /// Component of each cube, numbered by smallest member cube.
    pub labels: Vec<usize>,
    /// Cube positions of each component, ascending.
    pub members: Vec<Vec<usize>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn of_cover(cover: CubeCover) -> Self {
        let n = cover.len();
        let mut uf = UnionFind::new(n);
        if cover.dim == 1 {
            for i in 1..n {
                if cover.cubes[i][0] - cover.cubes[i - 1][0] <= 1 {
                    uf.union(i - 1, i);
                }
            }
        } else {
            let offsets = neighbour_offsets(cover.dim);
            for i in 0..n {
                for j in adjacent(&cover, i, &offsets) {
                    if j > i {
                        uf.union(i, j);
                    }
                }
            }
        }
        let mut id_of_root = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = members.len();
                members.push(Vec::new());
            }
            labels[i] = id_of_root[r];
            members[labels[i]].push(i);
        }
        Components { cover, labels, members }
    }

    /// One row `n,component_id,cube_index...` per component; multi-axis
    /// indices are written as `k1:k2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,component_id,cube_index...\n");
        for (id, m) in self.members.iter().enumerate() {
            write!(s, "{},{}", self.cover.level, id).unwrap();
            for &i in m {
                let k = &self.cover.cubes[i][..self.cover.dim];
                let txt: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                write!(s, ",{}", txt.join(":")).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Components of the level-`n` dyadic cover.
pub fn components(set: &SetSpec, n: u32) -> Result<Components> {
    Ok(Components::of_cover(set.cubes_at(n)?))
}

/// Separation counts `C_n` over `n_min..=n_max` with window and slope
/// estimates. Needs exact covers.
pub fn bsi_estimate(set: &SetSpec, n_min: u32, n_max: u32) -> Result<(ScaleSeries, DimEstimate)> {
    check_range(n_min, n_max)?;
    let covers = set.covers(2, n_min, n_max)?;
    let mut counts = Vec::with_capacity(covers.len());
    for c in covers {
        if !c.is_exact() {
            return Err(Error::NotExact { level: c.level });
        }
        let level = c.level;
        counts.push((level, (Components::of_cover(c).count() as f64).ln()));
    }
    let series = ScaleSeries::from_log_counts(2, counts);
    let est = series.estimate();
    Ok((series, est))
}

/// Separation index of a strongly separated self-similar set.
pub fn selfsimilar_bsi(ratios: &[f64]) -> Result<f64> {
    moran_beta(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cantor_middle_thirds, Exactness};

    #[test]
    fn simple_component_counts() {
        assert_eq!(components(&SetSpec::unit_box(2), 4).unwrap().count(), 1);
        let two = SetSpec::points(vec![vec![0.0], vec![10.0]]).unwrap();
        assert_eq!(components(&two, 0).unwrap().count(), 2);
        let h = components(&SetSpec::HarmonicClosure, 4).unwrap();
        assert_eq!(h.count(), 3);
        assert_eq!(h.members[0].len(), 6);
    }

    #[test]
    fn diagonal_cubes_touch() {
        let c = CubeCover::new(3, 2, 2, vec![[0, 0, 0], [1, 1, 0], [3, 3, 0]], Exactness::Exact);
        let comp = Components::of_cover(c);
        assert_eq!(comp.count(), 2);
        assert_eq!(comp.labels, vec![0, 0, 1]);
        assert!(comp.to_csv().contains("3,1,3:3"));
    }

    #[test]
    fn outer_covers_are_refused() {
        let s = SetSpec::HomothetyIfs(
            crate::geometry::HomothetyIfs::new(
                vec![
                    crate::geometry::Similarity { ratio: 0.3, translation: vec![0.0] },
                    crate::geometry::Similarity { ratio: 0.3, translation: vec![0.7] },
                ],
                crate::geometry::Separation::Strong,
            )
            .unwrap(),
        );
        assert!(matches!(bsi_estimate(&s, 3, 5), Err(Error::NotExact { .. })));
    }

    #[test]
    fn separation_index_values() {
        let (_, b) = bsi_estimate(&SetSpec::unit_box(1), 3, 20).unwrap();
        assert_eq!(b.slope_fit, 0.0);
        let (_, c) = bsi_estimate(&cantor_middle_thirds(), 8, 14).unwrap();
        assert!((c.slope_fit - 0.6309).abs() < 0.08);
    }
}
