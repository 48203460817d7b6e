//! Finitely supported probability measures, ball masses and the Lq
//! spectrum `phi(mu, r, q)`.

mod fm;
mod ivt;
mod probe;

pub use fm::{fm_distance, FmDistance};
pub use ivt::{iv_root, IvRoot};
pub use probe::{stability_probe, ProbeConfig, ProbeReport};

use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_point, Norm, Point, MAX_DIM};

/// Atom masses are stored as logarithms: constructed measures carry weights
/// far below the smallest positive double.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub ln_mass: f64,
}

impl Atom {
    pub fn mass(&self) -> f64 {
        self.ln_mass.exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure {
    dim: usize,
    /// Distinct points in lexicographic order.
    atoms: Vec<Atom>,
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl FiniteMeasure {
    /// Masses must be positive and sum to one within `1e-12`.
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Self> {
        Self::with_tolerance(atoms, 1e-12)
    }

    /// Masses must sum to one within `tol`; they are then rescaled to sum
    /// to one. Repeated points are merged.
    pub fn with_tolerance(atoms: Vec<(Point, f64)>, tol: f64) -> Result<Self> {
        for (_, p) in &atoms {
            if !(*p > 0.0) || !p.is_finite() {
                return Err(Error::input(format!("atom mass {p} must be positive")));
            }
        }
        Self::from_ln_masses(atoms.into_iter().map(|(x, p)| (x, p.ln())).collect(), tol)
    }

    /// Same as [`FiniteMeasure::with_tolerance`] with log masses.
    pub fn from_ln_masses(atoms: Vec<(Point, f64)>, tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::input("a measure needs at least one atom"));
        }
        let dim = atoms[0].0.len();
        for (x, lp) in &atoms {
            check_point(x)?;
            if x.len() != dim {
                return Err(Error::input("atoms differ in dimension"));
            }
            if lp.is_nan() || *lp == f64::INFINITY || *lp == f64::NEG_INFINITY {
                return Err(Error::input("atom masses must be positive and finite"));
            }
        }
        let total = log_sum_exp(atoms.iter().map(|a| a.1));
        if total.exp_m1().abs() > tol {
            return Err(Error::input(format!("atom masses sum to {} instead of 1", total.exp())));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (x, lp) in atoms {
            match merged.last_mut() {
                Some(last) if last.point == x => last.ln_mass = log_add_exp(last.ln_mass, lp),
                _ => merged.push(Atom { point: x, ln_mass: lp }),
            }
        }
        if total.abs() > 1e-15 {
            for a in &mut merged {
                a.ln_mass -= total;
            }
        }
        Ok(FiniteMeasure { dim, atoms: merged })
    }

    pub fn dirac(x: Point) -> Result<Self> {
        Self::new(vec![(x, 1.0)])
    }

    /// Equal masses on the given points.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let n = points.len() as f64;
        Self::from_ln_masses(points.into_iter().map(|x| (x, -n.ln())).collect(), 1e-12)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.ln_mass).fold(f64::INFINITY, f64::min).exp()
    }

    /// `(1 - theta) self + theta other`.
    pub fn mix(&self, theta: f64, other: &FiniteMeasure) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::input("mixing weight must lie in [0,1]"));
        }
        if other.dim != self.dim {
            return Err(Error::input("measures differ in dimension"));
        }
        let mut atoms: Vec<(Point, f64)> = Vec::new();
        if theta < 1.0 {
            atoms.extend(self.atoms.iter().map(|a| (a.point.clone(), a.ln_mass + (-theta).ln_1p())));
        }
        if theta > 0.0 {
            atoms.extend(other.atoms.iter().map(|a| (a.point.clone(), a.ln_mass + theta.ln())));
        }
        Self::from_ln_masses(atoms, 1e-12)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for a in &self.atoms {
            for i in 0..self.dim {
                lo[i] = lo[i].min(a.point[i]);
                hi[i] = hi[i].max(a.point[i]);
            }
        }
        (lo, hi)
    }

    /// `ln mu(B(x, r))` for the open ball, or the closed one if `closed`.
    pub fn ln_ball_mass(&self, x: &[f64], r: f64, norm: Norm, closed: bool) -> f64 {
        log_sum_exp(self.atoms.iter().filter(|a| inside(norm.dist(&a.point, x), r, closed)).map(|a| a.ln_mass))
    }

    pub fn ball_mass(&self, x: &[f64], r: f64, norm: Norm) -> f64 {
        self.ln_ball_mass(x, r, norm, false).exp()
    }

    /// `ln mu(B(x_i, r))` for every atom `x_i`.
    pub fn ln_ball_masses_at_atoms(&self, r: f64, norm: Norm, closed: bool) -> Vec<f64> {
        if self.atoms.len() <= 64 {
            return self.atoms.iter().map(|a| self.ln_ball_mass(&a.point, r, norm, closed)).collect();
        }
        let key = |x: &[f64]| -> [i64; MAX_DIM] {
            let mut k = [0; MAX_DIM];
            for (i, v) in x.iter().enumerate() {
                k[i] = (v / r).floor() as i64;
            }
            k
        };
        let mut cells: HashMap<[i64; MAX_DIM], Vec<usize>> = HashMap::new();
        for (i, a) in self.atoms.iter().enumerate() {
            cells.entry(key(&a.point)).or_default().push(i);
        }
        let offsets = crate::separation::neighbour_offsets(self.dim);
        self.atoms
            .iter()
            .map(|a| {
                let k = key(&a.point);
                let mut terms = Vec::new();
                for off in offsets.iter().chain(std::iter::once(&[0; MAX_DIM])) {
                    let mut c = k;
                    for i in 0..self.dim {
                        c[i] += off[i];
                    }
                    if let Some(ids) = cells.get(&c) {
                        terms.extend(
                            ids.iter().filter(|&&j| inside(norm.dist(&self.atoms[j].point, &a.point), r, closed)).map(|&j| self.atoms[j].ln_mass),
                        );
                    }
                }
                log_sum_exp(terms)
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: MeasureFile = serde_json::from_str(text)?;
        let atoms = f
            .atoms
            .into_iter()
            .map(|a| match a.log_p {
                Some(lp) => Ok((a.x, lp)),
                None if a.p > 0.0 && a.p.is_finite() => Ok((a.x, a.p.ln())),
                None => Err(Error::input(format!("atom mass {} must be positive", a.p))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_ln_masses(atoms, 1e-9)
    }

    pub fn to_json(&self) -> String {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let p = a.mass();
                let log_p = if p < 1e-300 { Some(a.ln_mass) } else { None };
                AtomRecord { x: a.point.clone(), p, log_p }
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&MeasureFile { atoms }).expect("measures serialize");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// `x1,...,xd,p` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let head: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(s, "{},p", head.join(",")).unwrap();
        for a in &self.atoms {
            let xs: Vec<String> = a.point.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{},{}", xs.join(","), a.mass()).unwrap();
        }
        s
    }
}

fn inside(d: f64, r: f64, closed: bool) -> bool {
    if closed {
        d <= r
    } else {
        d < r
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<AtomRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    x: Point,
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_p: Option<f64>,
}

/// Exponent of the Lq spectrum; `Real(1.0)` selects the entropy form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QValue {
    Real(f64),
    PlusInf,
    MinusInf,
}

impl QValue {
    /// Position on the extended real line, for ordering.
    pub fn as_f64(self) -> f64 {
        match self {
            QValue::Real(q) => q,
            QValue::PlusInf => f64::INFINITY,
            QValue::MinusInf => f64::NEG_INFINITY,
        }
    }
}

impl std::str::FromStr for QValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(QValue::PlusInf),
            "-inf" => Ok(QValue::MinusInf),
            t => {
                let q = crate::parse_number(t)?;
                Ok(QValue::Real(q))
            }
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `I(mu, r, q)`: the sum of `p_i mu(B(x_i, r))^(q-1)`, the mass-weighted
/// mean log ball mass for `q = 1`, and the extreme ball mass for `q = ±inf`
/// (largest for `+inf`, smallest for `-inf`).
pub fn integral(mu: &FiniteMeasure, r: f64, q: QValue, norm: Norm) -> Result<f64> {
    check_radius(r)?;
    let m = mu.ln_ball_masses_at_atoms(r, norm, false);
    Ok(integral_from(mu, &m, q).1)
}

/// `(ln I, I)` from precomputed log ball masses; `ln I` is NaN for `q = 1`.
pub(crate) fn integral_from(mu: &FiniteMeasure, m: &[f64], q: QValue) -> (f64, f64) {
    match q {
        QValue::Real(q) if q == 1.0 => (f64::NAN, mu.atoms.iter().zip(m).map(|(a, &lm)| a.mass() * lm).sum()),
        QValue::Real(q) => {
            let li = log_sum_exp(mu.atoms.iter().zip(m).map(|(a, &lm)| a.ln_mass + (q - 1.0) * lm));
            (li, li.exp())
        }
        QValue::PlusInf => {
            let v = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (v, v.exp())
        }
        QValue::MinusInf => {
            let v = m.iter().copied().fold(f64::INFINITY, f64::min);
            (v, v.exp())
        }
    }
}

/// `phi(mu, r, q)`, defined for `0 < r < 1`.
pub fn phi(mu: &FiniteMeasure, r: f64, q: QValue, norm: Norm) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("phi needs 0 < r < 1, got {r}")));
    }
    let m = mu.ln_ball_masses_at_atoms(r, norm, false);
    Ok(phi_from(mu, &m, r, q))
}

pub(crate) fn phi_from(mu: &FiniteMeasure, m: &[f64], r: f64, q: QValue) -> f64 {
    let (li, i) = integral_from(mu, m, q);
    match q {
        QValue::Real(qq) if qq == 1.0 => i / r.ln(),
        QValue::Real(qq) => li / ((qq - 1.0) * r.ln()),
        _ => li / r.ln(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LqProfile {
    /// `(r, phi)` in the order the radii were given.
    pub rows: Vec<(f64, f64)>,
    /// Extremes of `phi` over the half of the radii closest to zero.
    pub lower_window: f64,
    pub upper_window: f64,
    /// Least squares slope of the numerator of `phi` against `ln r`.
    pub slope_fit: f64,
}

impl LqProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,phi\n");
        for (r, p) in &self.rows {
            writeln!(s, "{r},{p}").unwrap();
        }
        s
    }
}

pub fn lq_profile(mu: &FiniteMeasure, q: QValue, radii: &[f64], norm: Norm) -> Result<LqProfile> {
    if radii.is_empty() {
        return Err(Error::input("no radii given"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let p = phi(mu, r, q, norm)?;
        rows.push((r, p));
        xs.push(r.ln());
        ys.push(p * r.ln());
    }
    let mut by_size: Vec<(f64, f64)> = rows.clone();
    by_size.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tail = &by_size[..by_size.len().div_ceil(2)];
    Ok(LqProfile {
        lower_window: tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min),
        upper_window: tail.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max),
        slope_fit: crate::counting::least_squares_slope(&xs, &ys),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> FiniteMeasure {
        FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(FiniteMeasure::new(vec![(vec![0.0], 0.5)]).is_err());
        assert!(FiniteMeasure::new(vec![(vec![0.0], 1.5), (vec![1.0], -0.5)]).is_err());
        let m = FiniteMeasure::new(vec![(vec![1.0], 0.25), (vec![0.0], 0.5), (vec![1.0], 0.25)]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].point, vec![0.0]);
        assert!((m.atoms()[1].mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lq_values_for_two_atoms() {
        let p = lq_profile(&two(), QValue::Real(2.0), &[0.5, 0.25, 0.125], Norm::Chebyshev).unwrap();
        let want = [1.0, 0.5, 1.0 / 3.0];
        for ((_, got), w) in p.rows.iter().zip(want) {
            assert!((got - w).abs() < 1e-12);
        }
        assert!(phi(&two(), 1.0, QValue::Real(2.0), Norm::Chebyshev).is_err());
    }

    #[test]
    fn integral_forms() {
        let m = two();
        assert!((integral(&m, 0.5, QValue::Real(1.0), Norm::Chebyshev).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(integral(&m, 2.0, QValue::PlusInf, Norm::Chebyshev).unwrap(), 1.0);
        let skew = FiniteMeasure::new(vec![(vec![0.0], 0.25), (vec![1.0], 0.75)]).unwrap();
        assert_eq!(integral(&skew, 0.5, QValue::MinusInf, Norm::Chebyshev).unwrap(), 0.25);
        assert_eq!(integral(&skew, 0.5, QValue::PlusInf, Norm::Chebyshev).unwrap(), 0.75);
    }

    #[test]
    fn bucketed_ball_masses_agree_with_direct() {
        let pts: Vec<Point> = (0..200).map(|i| vec![(i as f64 * 0.37).fract(), (i as f64 * 0.61).fract()]).collect();
        let m = FiniteMeasure::uniform(pts).unwrap();
        for norm in [Norm::Chebyshev, Norm::Euclidean] {
            let fast = m.ln_ball_masses_at_atoms(0.07, norm, false);
            for (a, f) in m.atoms().iter().zip(fast) {
                assert!((m.ln_ball_mass(&a.point, 0.07, norm, false) - f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_keeps_tiny_masses() {
        let m = FiniteMeasure::from_ln_masses(vec![(vec![0.0], -1e6), (vec![1.0], 0.0)], 1e-12).unwrap();
        let back = FiniteMeasure::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(FiniteMeasure::from_json(r#"{"atoms":[{"x":[0.0],"p":0.6}]}"#).is_err());
        assert!(FiniteMeasure::from_json(r#"{"atoms":[{"x":[0.0],"p":0.9999999999}]}"#).is_ok());
    }

    #[test]
    fn mixtures() {
        let d0 = FiniteMeasure::dirac(vec![0.0]).unwrap();
        let mix = d0.mix(0.5, &two()).unwrap();
        assert!((mix.atoms()[0].mass() - 0.75).abs() < 1e-15);
    }
}
