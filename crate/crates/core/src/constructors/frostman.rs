//! Uniform measures on greedy packings with certified ball-mass bounds.

use crate::counting::{level_at_most, packing_count};
use crate::error::{Error, Result};
use crate::geometry::{Norm, Point, SetSpec};
use crate::measures::FiniteMeasure;

/// Largest number of radius halvings tried below `alpha`.
const MAX_HALVINGS: u32 = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct PackingMeasure {
    pub measure: FiniteMeasure,
    pub r: f64,
    pub centers: Vec<Point>,
    /// The certified bound: a floor on `mu(B(x, r))` for the lower
    /// construction, a ceiling for the upper one.
    pub bound: f64,
}

fn check_args(t: f64, alpha: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("need t >= 0 and 0 < alpha < 1, got {t}, {alpha}")));
    }
    Ok(())
}

/// Finds `r < alpha` whose greedy `r/2`-packing has at most `2^t r^-t`
/// balls and puts equal mass on the centres. Every point of the set within
/// the candidate grid then has `mu(B(x, r)) >= 2^-t r^t`, which is checked
/// at grid points no coarser than `r/4`.
pub fn packing_measure_lower(set: &SetSpec, t: f64, alpha: f64) -> Result<PackingMeasure> {
    check_args(t, alpha)?;
    let mut r = alpha / 2.0;
    for _ in 0..MAX_HALVINGS {
        let p = packing_count(set, None, r / 2.0, Norm::Chebyshev)?;
        if (p.greedy() as f64) <= 2f64.powf(t) * r.powf(-t) {
            let mu = FiniteMeasure::uniform(p.centers.clone())?;
            let bound = 2f64.powf(-t) * r.powf(t);
            // the candidate points of the packing sit on cubes of side r/8
            let cover = set.cubes_at(level_at_most(r / 2.0) + 2)?;
            for (_, x) in set.representatives(&cover)? {
                let m = mu.ball_mass(&x, r, Norm::Chebyshev);
                if m < bound * (1.0 - 1e-12) {
                    return Err(Error::Invariant(format!("mass {m} at {x:?} is below {bound}")));
                }
            }
            return Ok(PackingMeasure { measure: mu, r, centers: p.centers, bound });
        }
        r /= 2.0;
    }
    Err(Error::SearchFailed(format!("no radius below {alpha} has a small enough packing for t = {t}")))
}

/// Finds `r < alpha` whose greedy `r`-packing has at least `r^-t` balls and
/// puts equal mass on the centres. Centres are `2r` apart, so no open
/// `r`-ball holds two of them and `mu(B(x, r)) <= r^t`.
pub fn packing_measure_upper(set: &SetSpec, t: f64, alpha: f64) -> Result<PackingMeasure> {
    check_args(t, alpha)?;
    let mut r = alpha / 2.0;
    for _ in 0..MAX_HALVINGS {
        let p = packing_count(set, None, r, Norm::Chebyshev)?;
        if (p.greedy() as f64) >= r.powf(-t) {
            let c = &p.centers;
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if Norm::Chebyshev.dist(&c[i], &c[j]) < 2.0 * r {
                        return Err(Error::Invariant("packing centres closer than 2r".into()));
                    }
                }
            }
            let mu = FiniteMeasure::uniform(p.centers.clone())?;
            return Ok(PackingMeasure { measure: mu, r, centers: p.centers, bound: r.powf(t) });
        }
        r /= 2.0;
    }
    Err(Error::SearchFailed(format!("no radius below {alpha} has a large enough packing for t = {t}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_upper() {
        let p = packing_measure_upper(&SetSpec::unit_box(1), 0.5, 0.125).unwrap();
        assert_eq!(p.r, 1.0 / 16.0);
        assert_eq!(p.centers.len(), 9);
    }

    #[test]
    fn unit_interval_lower() {
        let p = packing_measure_lower(&SetSpec::unit_box(1), 1.0, 0.25).unwrap();
        assert!(p.r < 0.25);
        assert!(p.measure.min_mass() >= p.bound);
    }

    #[test]
    fn lower_fails_below_dimension() {
        assert!(packing_measure_lower(&SetSpec::unit_box(2), 1.0, 0.25).is_err());
    }
}
