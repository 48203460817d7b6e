//! Self-similar sets generated by homotheties `x -> r x + t`.

use serde::{Deserialize, Serialize};

use super::{check_point, DigitSet, GridScheme, Point, Tail};
use crate::error::{Error, Result};

/// Piece budget for verifying strong separation.
const STRONG_CHECK_PIECES: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub ratio: f64,
    pub translation: Point,
}

impl Similarity {
    pub fn apply(&self, x: &[f64]) -> Point {
        x.iter().zip(&self.translation).map(|(x, t)| self.ratio * x + t).collect()
    }

    fn fixed_point(&self) -> Point {
        self.translation.iter().map(|t| t / (1.0 - self.ratio)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    Strong,
    OpenSet,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomothetyIfs {
    pub maps: Vec<Similarity>,
    pub separation: Separation,
}

/// A word map `x -> ratio * x + shift` together with its first letter.
#[derive(Clone)]
struct Word {
    ratio: f64,
    shift: Point,
    first: usize,
}

impl HomothetyIfs {
    pub fn new(maps: Vec<Similarity>, separation: Separation) -> Result<Self> {
        let s = HomothetyIfs { maps, separation };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.maps.first().map(|m| m.translation.len()).unwrap_or(0)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::input("an iterated function system needs at least one map"));
        }
        let d = self.dim();
        for m in &self.maps {
            check_point(&m.translation)?;
            if m.translation.len() != d {
                return Err(Error::input("maps differ in dimension"));
            }
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::input(format!("contraction ratio {} outside (0,1)", m.ratio)));
            }
        }
        if self.separation == Separation::Strong {
            self.verify_strong()?;
        }
        Ok(())
    }

    /// Smallest box invariant under all maps: spanned by the fixed points.
    pub fn bounding_box(&self) -> (Point, Point) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for m in &self.maps {
            for (i, p) in m.fixed_point().into_iter().enumerate() {
                lo[i] = lo[i].min(p);
                hi[i] = hi[i].max(p);
            }
        }
        (lo, hi)
    }

    /// Equivalent digit scheme when all ratios are `1/b` and the translations
    /// sit on the base-b grid of the bounding box.
    pub fn to_grid(&self) -> Option<GridScheme> {
        let b = (1.0 / self.maps[0].ratio).round();
        if !(2.0..=1e6).contains(&b) {
            return None;
        }
        if self.maps.iter().any(|m| ((1.0 / m.ratio) - b).abs() > 1e-9 * b) {
            return None;
        }
        let (lo, hi) = self.bounding_box();
        let lo: Point = lo.into_iter().map(snap).collect();
        let hi: Point = hi.into_iter().map(snap).collect();
        if lo.iter().zip(&hi).any(|(a, c)| !(c > a)) {
            return None;
        }
        let mut digits = Vec::with_capacity(self.maps.len());
        for m in &self.maps {
            let mut dv = Vec::with_capacity(lo.len());
            for i in 0..lo.len() {
                let x = (m.translation[i] - lo[i] * (1.0 - 1.0 / b)) * b / (hi[i] - lo[i]);
                let r = x.round();
                if (x - r).abs() > 1e-9 || r < 0.0 || r >= b {
                    return None;
                }
                dv.push(r as u32);
            }
            digits.push(dv);
        }
        digits.sort();
        let n = digits.len();
        digits.dedup();
        if digits.len() != n {
            return None;
        }
        GridScheme::new(b as u32, lo, hi, vec![], Tail::Constant(DigitSet(digits))).ok()
    }

    fn root(&self) -> (Point, Point, Point) {
        let (lo, hi) = self.bounding_box();
        (lo, hi, self.maps[0].fixed_point())
    }

    /// Word-map images of the bounding box with side at most `diam`, each with
    /// an anchor point of the set inside it.
    pub(crate) fn pieces(&self, diam: f64, budget: usize) -> Result<Vec<(Point, Point, Point)>> {
        let (lo, hi, anchor) = self.root();
        let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let rmax = self.maps.iter().map(|m| m.ratio).fold(0.0, f64::max);
        let required = if side <= diam { 0 } else { ((diam / side).ln() / rmax.ln()).ceil() as u32 };
        let mut out = Vec::new();
        let mut stack = vec![Word { ratio: 1.0, shift: vec![0.0; lo.len()], first: 0 }];
        while let Some(w) = stack.pop() {
            if w.ratio * side <= diam {
                if out.len() == budget {
                    return Err(Error::RefinementLimit { required_depth: required, budget });
                }
                out.push(self.image(&w, &lo, &hi, &anchor));
                continue;
            }
            for m in &self.maps {
                stack.push(compose(&w, m));
            }
        }
        Ok(out)
    }

    fn image(&self, w: &Word, lo: &[f64], hi: &[f64], anchor: &[f64]) -> (Point, Point, Point) {
        let f = |x: &[f64]| -> Point { x.iter().zip(&w.shift).map(|(x, s)| w.ratio * x + s).collect() };
        (f(lo), f(hi), f(anchor))
    }

    /// Refines word images until those with different first letters are
    /// pairwise disjoint.
    fn verify_strong(&self) -> Result<()> {
        if self.maps.len() == 1 {
            return Ok(());
        }
        let (lo, hi, _) = self.root();
        let mut words: Vec<Word> = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| compose(&Word { ratio: 1.0, shift: vec![0.0; lo.len()], first: i }, m))
            .collect();
        loop {
            let mut boxes: Vec<(Point, Point, usize)> = words
                .iter()
                .map(|w| {
                    let (a, b, _) = self.image(w, &lo, &hi, &lo);
                    (a, b, w.first)
                })
                .collect();
            if boxes_separated(&mut boxes) {
                return Ok(());
            }
            if words.len() * self.maps.len() > STRONG_CHECK_PIECES {
                return Err(Error::input("strong separation could not be verified by refinement"));
            }
            words = words
                .iter()
                .flat_map(|w| self.maps.iter().map(move |m| (w, m)))
                .map(|(w, m)| compose(w, m))
                .collect();
        }
    }
}

/// `w ∘ m`.
fn compose(w: &Word, m: &Similarity) -> Word {
    let shift = w.shift.iter().zip(&m.translation).map(|(s, t)| w.ratio * t + s).collect();
    Word { ratio: w.ratio * m.ratio, shift, first: w.first }
}

/// Sweep over the first axis; true when no two closed boxes with different
/// tags intersect.
fn boxes_separated(boxes: &mut [(Point, Point, usize)]) -> bool {
    boxes.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let mut active: Vec<usize> = Vec::new();
    for i in 0..boxes.len() {
        let x = boxes[i].0[0];
        active.retain(|&j| boxes[j].1[0] >= x);
        for &j in &active {
            if boxes[j].2 != boxes[i].2 && (0..boxes[i].0.len()).all(|k| boxes[j].0[k] <= boxes[i].1[k] && boxes[i].0[k] <= boxes[j].1[k]) {
                return false;
            }
        }
        active.push(i);
    }
    true
}

fn snap(x: f64) -> f64 {
    let s = (x * 2f64.powi(40)).round() / 2f64.powi(40);
    if (s - x).abs() <= 1e-12 {
        s
    } else {
        x
    }
}
