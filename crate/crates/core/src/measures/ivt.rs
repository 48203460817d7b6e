//! Solving `phi(mu, r, q) = tau` for `r`. Between consecutive pairwise atom
//! distances all ball masses are constant, so `phi` is continuous there and
//! can only jump at those distances.

use super::{phi_from, FiniteMeasure, QValue};
use crate::error::{Error, Result};
use crate::geometry::Norm;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IvRoot {
    /// `|phi(r) - tau| <= 1e-9`.
    Root { r: f64, phi: f64 },
    /// `tau` lies strictly between the one-sided limits at a jump.
    Jump { radius: f64, left: f64, right: f64 },
}

fn phi_at(mu: &FiniteMeasure, r: f64, q: QValue, norm: Norm, closed: bool) -> f64 {
    let m = mu.ln_ball_masses_at_atoms(r, norm, closed);
    phi_from(mu, &m, r, q)
}

fn between(t: f64, a: f64, b: f64) -> bool {
    a.min(b) <= t && t <= a.max(b)
}

fn strictly_between(t: f64, a: f64, b: f64) -> bool {
    a.min(b) < t && t < a.max(b)
}

/// Needs `0 < r1 < r2 < 1` with `tau` between `phi(r1)` and `phi(r2)`.
pub fn iv_root(mu: &FiniteMeasure, q: QValue, tau: f64, r1: f64, r2: f64, norm: Norm) -> Result<IvRoot> {
    if !(0.0 < r1 && r1 < r2 && r2 < 1.0) {
        return Err(Error::Domain(format!("need 0 < r1 < r2 < 1, got {r1}, {r2}")));
    }
    let f1 = phi_at(mu, r1, q, norm, false);
    let f2 = phi_at(mu, r2, q, norm, false);
    if !between(tau, f1, f2) {
        return Err(Error::Precondition(format!("tau = {tau} is not between phi(r1) = {f1} and phi(r2) = {f2}")));
    }
    if (f1 - tau).abs() <= 1e-12 {
        return Ok(IvRoot::Root { r: r1, phi: f1 });
    }
    let mut cuts: Vec<f64> = Vec::new();
    let atoms = mu.atoms();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let d = norm.dist(&atoms[i].point, &atoms[j].point);
            if d > r1 && d < r2 {
                cuts.push(d);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(r2);

    let mut left_r = r1;
    let mut left_val = phi_at(mu, r1, q, norm, true);
    if strictly_between(tau, f1, left_val) {
        return Ok(IvRoot::Jump { radius: r1, left: f1, right: left_val });
    }
    for &b in &cuts {
        let end_val = phi_at(mu, b, q, norm, false);
        if between(tau, left_val, end_val) {
            return solve_piece(mu, q, tau, left_r, b, end_val, norm);
        }
        let right_val = phi_at(mu, b, q, norm, true);
        if b < r2 && strictly_between(tau, end_val, right_val) {
            return Ok(IvRoot::Jump { radius: b, left: end_val, right: right_val });
        }
        left_r = b;
        left_val = right_val;
    }
    Err(Error::SearchFailed(format!("no crossing of {tau} found in ({r1}, {r2})")))
}

/// On `(a, b]` the ball masses are fixed, so `phi(r) = c / ln r` with
/// `c = phi(b) ln b`; bisect that and confirm on the true `phi`.
fn solve_piece(mu: &FiniteMeasure, q: QValue, tau: f64, a: f64, b: f64, phi_b: f64, norm: Norm) -> Result<IvRoot> {
    let c = phi_b * b.ln();
    let g = |r: f64| c / r.ln() - tau;
    let (mut lo, mut hi) = (a, b);
    let rising = g(hi) > g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // stay inside the half-open piece
    let r = if hi > a { hi } else { b };
    let val = phi_at(mu, r, q, norm, false);
    if (val - tau).abs() > 1e-9 {
        return Err(Error::SearchFailed(format!("bisection ended at phi = {val}, target {tau}")));
    }
    Ok(IvRoot::Root { r, phi: val })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_at_quarter() {
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        match iv_root(&mu, QValue::Real(2.0), 0.5, 0.125, 0.5, Norm::Chebyshev).unwrap() {
            IvRoot::Root { r, .. } => assert!((r - 0.25).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jump_certificate() {
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![0.5], 0.5)]).unwrap();
        let got = iv_root(&mu, QValue::Real(2.0), 0.3, 0.3, 0.7, Norm::Chebyshev).unwrap();
        assert_eq!(got, IvRoot::Jump { radius: 0.5, left: 1.0, right: 0.0 });
    }

    #[test]
    fn bracket_must_contain_target() {
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        assert!(matches!(iv_root(&mu, QValue::Real(2.0), 5.0, 0.125, 0.5, Norm::Chebyshev), Err(Error::Precondition(_))));
        assert!(iv_root(&mu, QValue::Real(2.0), 0.5, 0.5, 0.125, Norm::Chebyshev).is_err());
    }
}
