use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_point, GridScheme, HomothetyIfs, Point, MAX_DIM};
use crate::error::{Error, Result};

/// A compact set described by finitely many parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetSpec {
    Points { points: Vec<Point> },
    Box { lower: Point, upper: Point },
    GridScheme(GridScheme),
    HomothetyIfs(HomothetyIfs),
    /// `{0} ∪ {1/k : k >= 1}` on the line.
    HarmonicClosure,
    Union { members: Vec<SetSpec> },
    /// `scale * child + translation`.
    Affine { child: Box<SetSpec>, scale: f64, translation: Point },
}

/// On-disk wrapper: `{"set": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub set: SetSpec,
}

impl SetSpec {
    pub fn points(points: Vec<Point>) -> Result<Self> {
        let s = SetSpec::Points { points };
        s.validate()?;
        Ok(s)
    }

    pub fn unit_box(dim: usize) -> Self {
        SetSpec::Box { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        let s = SetSpec::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    pub fn union(members: Vec<SetSpec>) -> Result<Self> {
        let s = SetSpec::Union { members };
        s.validate()?;
        Ok(s)
    }

    pub fn affine(child: SetSpec, scale: f64, translation: Point) -> Result<Self> {
        let s = SetSpec::Affine { child: Box::new(child), scale, translation };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::Points { points } => points.first().map(|p| p.len()).unwrap_or(0),
            SetSpec::Box { lower, .. } => lower.len(),
            SetSpec::GridScheme(g) => g.dim(),
            SetSpec::HomothetyIfs(s) => s.dim(),
            SetSpec::HarmonicClosure => 1,
            SetSpec::Union { members } => members.first().map(|m| m.dim()).unwrap_or(0),
            SetSpec::Affine { child, .. } => child.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_DIM {
            return Err(Error::input(format!("set dimension must be between 1 and {MAX_DIM}")));
        }
        match self {
            SetSpec::Points { points } => {
                for p in points {
                    check_point(p)?;
                    if p.len() != d {
                        return Err(Error::input("points differ in dimension"));
                    }
                }
            }
            SetSpec::Box { lower, upper } => {
                check_point(lower)?;
                check_point(upper)?;
                if upper.len() != d || lower.iter().zip(upper).any(|(a, b)| a > b) {
                    return Err(Error::input("box corners must satisfy lower <= upper"));
                }
            }
            SetSpec::GridScheme(g) => g.validate()?,
            SetSpec::HomothetyIfs(s) => s.validate()?,
            SetSpec::HarmonicClosure => {}
            SetSpec::Union { members } => {
                for m in members {
                    m.validate()?;
                    if m.dim() != d {
                        return Err(Error::input("union members differ in dimension"));
                    }
                }
            }
            SetSpec::Affine { child, scale, translation } => {
                child.validate()?;
                check_point(translation)?;
                if translation.len() != d {
                    return Err(Error::input("translation dimension mismatch"));
                }
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::input("affine scale must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Closed box containing the set.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            SetSpec::Points { points } => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in points {
                    for i in 0..d {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                (lo, hi)
            }
            SetSpec::Box { lower, upper } => (lower.clone(), upper.clone()),
            SetSpec::GridScheme(g) => (g.lower.clone(), g.upper.clone()),
            SetSpec::HomothetyIfs(s) => s.bounding_box(),
            SetSpec::HarmonicClosure => (vec![0.0], vec![1.0]),
            SetSpec::Union { members } => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for m in members {
                    let (a, b) = m.bounding_box();
                    for i in 0..d {
                        lo[i] = lo[i].min(a[i]);
                        hi[i] = hi[i].max(b[i]);
                    }
                }
                (lo, hi)
            }
            SetSpec::Affine { child, scale, translation } => {
                let (a, b) = child.bounding_box();
                let f = |x: Point| -> Point { x.iter().zip(translation).map(|(x, t)| scale * x + t).collect() };
                (f(a), f(b))
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetSpec::Points { points } => points.is_empty(),
            SetSpec::Union { members } => members.iter().all(|m| m.is_empty()),
            SetSpec::Affine { child, .. } => child.is_empty(),
            _ => false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SetFile = serde_json::from_str(text)?;
        f.set.validate()?;
        Ok(f.set)
    }

    /// Canonical file text; parsing it back and serializing again gives the
    /// same bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&SetFile { set: self.clone() }).expect("set specs serialize");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        SetSpec::from_json(&std::fs::read_to_string(path)?)
    }
}
