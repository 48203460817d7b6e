//! Randomized check that `I(., r, q)` is stable under small perturbations
//! of the measure in the Fortet–Mourier distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fm_distance, integral, FiniteMeasure, QValue};
use crate::error::{Error, Result};
use crate::geometry::{Norm, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub trials: usize,
    pub seed: u64,
    /// The `epsilon` in the entropy bound `I(nu, r, 1) <= log 2 + (1 - epsilon) I(mu, 2r, 1)`.
    pub entropy_epsilon: f64,
    /// Smallest `delta` tried is `2^-max_halvings`.
    pub max_halvings: u32,
    pub norm: Norm,
}

impl ProbeConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        ProbeConfig { trials, seed, entropy_epsilon: 0.1, max_halvings: 20, norm: Norm::Chebyshev }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub q: f64,
    pub r: f64,
    /// Largest `delta` at which every trial passed.
    pub delta: Option<f64>,
    pub levels_tried: u32,
    pub trials: usize,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        format!(
            "q,r,delta,levels_tried,trials,pass\n{},{},{},{},{},{}\n",
            self.q,
            self.r,
            self.delta.map_or("none".to_string(), |d| d.to_string()),
            self.levels_tried,
            self.trials,
            self.delta.is_some()
        )
    }
}

/// Halves `delta` from `1/2` until `trials` random measures within
/// distance `delta` of `mu` all satisfy the stability bounds for `q`.
pub fn stability_probe(mu: &FiniteMeasure, r: f64, q: f64, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if !(r > 0.0) || !r.is_finite() || !q.is_finite() {
        return Err(Error::InvalidInput("probe needs a positive radius and a finite q".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("probe needs at least one trial".into()));
    }
    let qv = QValue::Real(q);
    if q < 1.0 {
        check_positive_on_grid(mu, r, cfg.norm)?;
    }
    let i_r = integral(mu, r, qv, cfg.norm)?;
    let i_2r = integral(mu, 2.0 * r, qv, cfg.norm)?;
    let tol = |x: f64| 1e-12 * x.abs().max(1e-300);
    let holds = |nu: &FiniteMeasure| -> Result<bool> {
        let n_r = integral(nu, r, qv, cfg.norm)?;
        let n_2r = integral(nu, 2.0 * r, qv, cfg.norm)?;
        Ok(if q > 1.0 {
            let c = 2f64.powf(q) + 1.0;
            n_r <= c * i_2r + tol(i_2r) && n_2r >= i_r / c - tol(i_r)
        } else if q < 1.0 {
            n_2r <= 2f64.powf(3.0 - q) * i_r + tol(i_r) && n_r >= 2f64.powf(q - 2.0) * i_2r - tol(i_2r)
        } else {
            n_r <= 2f64.ln() + (1.0 - cfg.entropy_epsilon) * i_2r + tol(i_2r)
        })
    };
    for k in 1..=cfg.max_halvings {
        let delta = (-(k as f64)).exp2();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut ok = true;
        for _ in 0..cfg.trials {
            let nu = perturb(mu, delta, cfg.norm, &mut rng)?;
            if !holds(&nu)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(ProbeReport { q, r, delta: Some(delta), levels_tried: k, trials: cfg.trials });
        }
    }
    Ok(ProbeReport { q, r, delta: None, levels_tried: cfg.max_halvings, trials: cfg.trials })
}

/// Moves each atom by at most `delta / 4` and rescales each mass by a
/// factor within `delta / 4` of one; retries until the result is within
/// distance `delta`.
fn perturb(mu: &FiniteMeasure, delta: f64, norm: Norm, rng: &mut ChaCha8Rng) -> Result<FiniteMeasure> {
    let d = mu.dim() as f64;
    let step = match norm {
        Norm::Chebyshev => delta / 4.0,
        Norm::Euclidean => delta / (4.0 * d.sqrt()),
    };
    for _ in 0..1000 {
        let raw: Vec<(Point, f64)> = mu
            .atoms()
            .iter()
            .map(|a| {
                let x = a.point.iter().map(|v| v + rng.gen_range(-step..=step)).collect();
                (x, a.ln_mass + rng.gen_range(-delta / 4.0..=delta / 4.0).ln_1p())
            })
            .collect();
        let total = super::log_sum_exp(raw.iter().map(|a| a.1));
        let nu = FiniteMeasure::from_ln_masses(raw.into_iter().map(|(x, l)| (x, l - total)).collect(), 1e-9)?;
        if fm_distance(mu, &nu, norm)?.value() <= delta {
            return Ok(nu);
        }
    }
    Err(Error::SearchFailed("could not draw a perturbation within the requested distance".into()))
}

/// For `q < 1` every point near the support must see positive mass at
/// radius `r`; checked on a grid of spacing `r / 2` over the bounding box.
fn check_positive_on_grid(mu: &FiniteMeasure, r: f64, norm: Norm) -> Result<()> {
    let (lo, hi) = mu.bounding_box();
    let counts: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / (r / 2.0)).floor() as usize + 1).collect();
    let total: usize = counts.iter().product();
    if total > 1_000_000 {
        return Err(Error::Precondition("positivity grid too fine; use a larger radius".into()));
    }
    for code in 0..total {
        let mut c = code;
        let x: Point = (0..lo.len())
            .map(|i| {
                let k = c % counts[i];
                c /= counts[i];
                (lo[i] + k as f64 * r / 2.0).min(hi[i])
            })
            .collect();
        if mu.ln_ball_mass(&x, r, norm, false) == f64::NEG_INFINITY {
            return Err(Error::Precondition(format!("mu(B(x, r)) = 0 at grid point {x:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_for_two_atoms() {
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        let cfg = ProbeConfig::new(20, 7);
        for q in [2.0, 1.0] {
            let rep = stability_probe(&mu, 0.25, q, &cfg).unwrap();
            assert!(rep.delta.is_some(), "{rep:?}");
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mu = FiniteMeasure::uniform(vec![vec![0.0], vec![0.3], vec![0.6]]).unwrap();
        let cfg = ProbeConfig::new(10, 3);
        assert_eq!(stability_probe(&mu, 0.2, 0.5, &cfg).unwrap(), stability_probe(&mu, 0.2, 0.5, &cfg).unwrap());
    }

    #[test]
    fn small_q_needs_positive_balls() {
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        assert!(matches!(stability_probe(&mu, 0.1, 0.5, &ProbeConfig::new(5, 1)), Err(Error::Precondition(_))));
    }
}
