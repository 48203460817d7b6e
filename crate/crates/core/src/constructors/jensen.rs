//! Two lower bounds on ball-mass integrals obtained from Jensen's
//! inequality and a cover of the region by `N` balls of radius `r`.

use std::collections::HashSet;

use super::CheckResult;
use crate::counting::level_at_most;
use crate::error::{Error, Result};
use crate::geometry::{Ball, Norm};
use crate::measures::{integral, FiniteMeasure, QValue};

fn in_region(region: Option<&[Ball]>, x: &[f64]) -> bool {
    region.is_none_or(|bs| bs.iter().any(|b| b.contains(x)))
}

/// Number of grid cubes holding the atoms in the region; each such cube
/// fits in an open `r`-ball around its centre, so this bounds `N_r`.
fn cover_bound(mu: &FiniteMeasure, region: Option<&[Ball]>, r: f64, norm: Norm) -> usize {
    let side_limit = match norm {
        Norm::Chebyshev => r,
        Norm::Euclidean => r / (mu.dim() as f64).sqrt(),
    };
    let h = (-(level_at_most(side_limit) as f64)).exp2();
    let cells: HashSet<Vec<i64>> = mu
        .atoms()
        .iter()
        .filter(|a| in_region(region, &a.point))
        .map(|a| a.point.iter().map(|x| (x / h).floor() as i64).collect())
        .collect();
    cells.len()
}

fn region_mass(mu: &FiniteMeasure, region: Option<&[Ball]>) -> f64 {
    mu.atoms().iter().filter(|a| in_region(region, &a.point)).map(|a| a.mass()).sum()
}

fn tol(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

/// `I(mu, 2r, q) >= mu(E)^q / N_r(E)^(q-1)` for `q > 1`, with `E` the union
/// of `region` (everything when `None`).
pub fn jensen_lq_check(mu: &FiniteMeasure, region: Option<&[Ball]>, r: f64, q: f64, norm: Norm) -> Result<CheckResult> {
    if !(q > 1.0) || !q.is_finite() || !(r > 0.0) {
        return Err(Error::InvalidInput(format!("need q > 1 and r > 0, got {q}, {r}")));
    }
    let mass = region_mass(mu, region);
    if mass <= 0.0 {
        return Err(Error::Precondition("region has zero mass".into()));
    }
    let n = cover_bound(mu, region, r, norm) as f64;
    let lhs = integral(mu, 2.0 * r, QValue::Real(q), norm)?;
    let rhs = mass.powf(q) / n.powf(q - 1.0);
    Ok(CheckResult { lhs, rhs, pass: lhs >= rhs - tol(rhs), params: format!("r={r};q={q};cover={n}") })
}

/// `∫_A log mu(B(x, 2r)) dmu >= -mu(A(r)) log N_r(A) - 1/e`, with `A(r)`
/// the open `r`-neighbourhood of `A`.
pub fn jensen_l1_check(mu: &FiniteMeasure, region: Option<&[Ball]>, r: f64, norm: Norm) -> Result<CheckResult> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("need r > 0, got {r}")));
    }
    let grown: Option<Vec<Ball>> =
        region.map(|bs| bs.iter().map(|b| Ball { center: b.center.clone(), radius: b.radius + r, norm: b.norm }).collect());
    let n = cover_bound(mu, region, r, norm);
    if n == 0 {
        return Err(Error::Precondition("region holds no atom".into()));
    }
    let masses = mu.ln_ball_masses_at_atoms(2.0 * r, norm, false);
    let lhs: f64 = mu.atoms().iter().zip(&masses).filter(|(a, _)| in_region(region, &a.point)).map(|(a, m)| a.mass() * m).sum();
    let rhs = -region_mass(mu, grown.as_deref()) * (n as f64).ln() - (-1f64).exp();
    Ok(CheckResult { lhs, rhs, pass: lhs >= rhs - tol(rhs), params: format!("r={r};cover={n}") })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> FiniteMeasure {
        FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap()
    }

    #[test]
    fn equality_case() {
        let c = jensen_lq_check(&two(), None, 0.1, 2.0, Norm::Chebyshev).unwrap();
        assert!((c.lhs - 0.5).abs() < 1e-15 && (c.rhs - 0.5).abs() < 1e-15 && c.pass);
    }

    #[test]
    fn entropy_bound() {
        let c = jensen_l1_check(&two(), None, 0.1, Norm::Chebyshev).unwrap();
        assert!(c.pass);
        assert!((c.lhs - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_region() {
        let far = [Ball { center: vec![5.0], radius: 0.1, norm: Norm::Chebyshev }];
        assert!(jensen_lq_check(&two(), Some(&far), 0.1, 2.0, Norm::Chebyshev).is_err());
    }
}
