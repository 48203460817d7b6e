//! Rate profiles of finite unions and the quantities `s_u <= s_conv <=
//! s_conv_max` built from them.

use std::fmt::Write;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::counting::log_cube_count;
use crate::error::{Error, Result};
use crate::geometry::{SetSpec, MAX_DIM};
use crate::lp::{maximize, rational};

/// Largest profile solved with exact rational arithmetic.
const EXACT_LIMIT: usize = 8;
const DEDUP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    User,
    Estimated,
}

/// Limit rate vectors of an `m`-component union: entry `j` of a vector is a
/// limit of `log N_r(E_j) / log(1/r)` along a common sequence of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct RateProfile {
    pub m: usize,
    pub vectors: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    m: usize,
    vectors: Vec<Vec<f64>>,
}

impl RateProfile {
    pub fn new(m: usize, vectors: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if m == 0 || vectors.is_empty() {
            return Err(Error::input("a rate profile needs at least one component and one vector"));
        }
        for v in &vectors {
            if v.len() != m {
                return Err(Error::input(format!("rate vector {v:?} does not have {m} entries")));
            }
            if v.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > MAX_DIM as f64 + 1e-9) {
                return Err(Error::input(format!("rate vector {v:?} has entries outside [0, {MAX_DIM}]")));
            }
        }
        Ok(RateProfile { m, vectors, provenance })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ProfileFile = serde_json::from_str(text)?;
        RateProfile::new(f.m, f.vectors, Provenance::User)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&ProfileFile { m: self.m, vectors: self.vectors.clone() }).expect("profiles serialize");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RateProfile::from_json(&std::fs::read_to_string(path)?)
    }

    /// Profile of the single component `j`.
    pub fn localize(&self, j: usize) -> RateProfile {
        let vectors = pareto_front(self.vectors.iter().map(|v| vec![v[j]]).collect());
        RateProfile { m: 1, vectors, provenance: self.provenance }
    }
}

/// Drops vectors dominated entrywise by another one; near-equal vectors are
/// merged.
pub fn pareto_front(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    vs.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let dominated = out.iter().any(|w| v.iter().zip(w).all(|(a, b)| *a <= b + DEDUP_TOL));
        if !dominated {
            out.retain(|w| !w.iter().zip(&v).all(|(a, b)| *a <= b + DEDUP_TOL));
            out.push(v);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn grid_base(set: &SetSpec) -> Option<u32> {
    match set {
        SetSpec::GridScheme(g) => Some(g.base),
        SetSpec::HomothetyIfs(s) => s.to_grid().map(|g| g.base),
        _ => None,
    }
}

/// Rate vectors `(log N(E_j) / (n log base))_j` observed at the given levels,
/// reduced to the undominated ones.
pub fn profile_estimate_at(components: &[SetSpec], base: u32, levels: &[u32]) -> Result<RateProfile> {
    if components.is_empty() || levels.is_empty() {
        return Err(Error::input("profile estimation needs components and levels"));
    }
    if levels.contains(&0) {
        return Err(Error::input("levels must be positive"));
    }
    for c in components {
        if let Some(b) = grid_base(c) {
            if b != base {
                return Err(Error::input(format!("component uses base {b} but rates are requested in base {base}")));
            }
        }
    }
    let lb = (base as f64).ln();
    let mut vectors = Vec::with_capacity(levels.len());
    for &n in levels {
        let v = components
            .iter()
            .map(|c| Ok(log_cube_count(c, base, n)?.0 / (n as f64 * lb)))
            .collect::<Result<Vec<f64>>>()?;
        vectors.push(v);
    }
    RateProfile::new(components.len(), pareto_front(vectors), Provenance::Estimated)
}

/// Same as [`profile_estimate_at`] over the upper half of `n_min..=n_max`.
pub fn profile_estimate(components: &[SetSpec], base: u32, n_min: u32, n_max: u32) -> Result<RateProfile> {
    crate::counting::check_range(n_min, n_max)?;
    let levels: Vec<u32> = (n_min + (n_max - n_min) / 2..=n_max).collect();
    profile_estimate_at(components, base, &levels)
}

/// `max_v min_j v_j`.
pub fn s_u(p: &RateProfile) -> f64 {
    p.vectors.iter().map(|v| v.iter().copied().fold(f64::INFINITY, f64::min)).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRate {
    pub value: f64,
    /// A minimising probability vector.
    pub weights: Vec<f64>,
}

/// `min over probability vectors p of max_v <p, v>`, solved as a linear
/// program and checked against a dual certificate and, for up to three
/// components, a grid search over the simplex.
pub fn s_conv(p: &RateProfile) -> Result<ConvexRate> {
    let r = if p.m <= EXACT_LIMIT && p.vectors.len() <= EXACT_LIMIT { s_conv_exact(p)? } else { s_conv_float(p)? };
    if p.m <= 3 {
        let (g, _) = grid_search_s_conv(p, 1000);
        if (g - r.value).abs() > 5e-3 {
            return Err(Error::Invariant(format!("linear program value {} disagrees with grid search {g}", r.value)));
        }
    }
    Ok(r)
}

/// Shifting all rates by one makes the game matrix positive, so
/// `max 1·y, (v + 1)·y <= 1, y >= 0` has optimum `1 / (s_conv + 1)`.
fn s_conv_exact(p: &RateProfile) -> Result<ConvexRate> {
    let one = BigRational::from_integer(1.into());
    let a: Vec<Vec<BigRational>> = p.vectors.iter().map(|v| v.iter().map(|&x| rational(x) + &one).collect()).collect();
    let c = vec![one.clone(); p.m];
    let b = vec![one.clone(); a.len()];
    let sol = maximize(&c, &a, &b)?;
    if sol.value.is_zero() {
        return Err(Error::Invariant("degenerate rate game".into()));
    }
    let game = &one / &sol.value;
    let weights: Vec<BigRational> = sol.x.iter().map(|y| y / &sol.value).collect();
    let mixed: Vec<BigRational> = sol.duals.iter().map(|y| y / &sol.value).collect();
    // the minimiser's worst case and the maximiser's best reply must both
    // equal the game value exactly
    let worst = a.iter().map(|row| row.iter().zip(&weights).map(|(x, w)| x * w).sum::<BigRational>()).max().unwrap();
    let reply = (0..p.m).map(|j| a.iter().zip(&mixed).map(|(row, q)| &row[j] * q).sum::<BigRational>()).min().unwrap();
    if worst != game || reply != game {
        return Err(Error::Invariant("rate game certificate failed".into()));
    }
    Ok(ConvexRate {
        value: (game - one).to_f64().unwrap_or(f64::NAN),
        weights: weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect(),
    })
}

fn s_conv_float(p: &RateProfile) -> Result<ConvexRate> {
    let a: Vec<Vec<f64>> = p.vectors.iter().map(|v| v.iter().map(|x| x + 1.0).collect()).collect();
    let sol = maximize(&vec![1.0; p.m], &a, &vec![1.0; a.len()])?;
    Ok(ConvexRate { value: 1.0 / sol.value - 1.0, weights: sol.x.iter().map(|y| y / sol.value).collect() })
}

/// Brute-force minimum of `max_v <p, v>` over the simplex grid with
/// spacing `1 / steps`.
pub fn grid_search_s_conv(p: &RateProfile, steps: usize) -> (f64, Vec<f64>) {
    let mut best = (f64::INFINITY, vec![]);
    let mut comp = vec![0usize; p.m];
    fn rec(p: &RateProfile, steps: usize, j: usize, left: usize, comp: &mut Vec<usize>, best: &mut (f64, Vec<f64>)) {
        if j + 1 == p.m {
            comp[j] = left;
            let w: Vec<f64> = comp.iter().map(|&c| c as f64 / steps as f64).collect();
            let val = p.vectors.iter().map(|v| v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
            if val < best.0 {
                *best = (val, w);
            }
            return;
        }
        for c in 0..=left {
            comp[j] = c;
            rec(p, steps, j + 1, left - c, comp, best);
        }
    }
    rec(p, steps, 0, steps, &mut comp, &mut best);
    best
}

/// Largest `s_conv` over the given localizations.
pub fn s_conv_max(localizations: &[RateProfile]) -> Result<f64> {
    if localizations.is_empty() {
        return Err(Error::input("no localizations given"));
    }
    localizations.iter().map(|p| s_conv(p).map(|r| r.value)).try_fold(f64::NEG_INFINITY, |a, b| Ok(a.max(b?)))
}

/// Shortcut for unions where every localization is one of the components:
/// `max_j max_v v_j`.
pub fn s_conv_max_components(p: &RateProfile) -> f64 {
    p.vectors.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexSummary {
    pub s_u: f64,
    pub s_conv: ConvexRate,
    pub s_conv_max: f64,
}

pub fn summarize(p: &RateProfile) -> Result<ConvexSummary> {
    let locals: Vec<RateProfile> = (0..p.m).map(|j| p.localize(j)).collect();
    let scm = s_conv_max(&locals)?;
    debug_assert!((scm - s_conv_max_components(p)).abs() < 1e-12);
    Ok(ConvexSummary { s_u: s_u(p), s_conv: s_conv(p)?, s_conv_max: scm })
}

impl ConvexSummary {
    /// `quantity,value,argmin_weights` rows; weights are `;`-separated.
    pub fn to_csv(&self) -> String {
        let w: Vec<String> = self.s_conv.weights.iter().map(|x| x.to_string()).collect();
        let mut s = String::from("quantity,value,argmin_weights\n");
        writeln!(s, "s_u,{},", self.s_u).unwrap();
        writeln!(s, "s_conv,{},{}", self.s_conv.value, w.join(";")).unwrap();
        writeln!(s, "s_conv_max,{},", self.s_conv_max).unwrap();
        s
    }
}
