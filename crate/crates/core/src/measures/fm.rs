//! Fortet–Mourier distance: the supremum of `∫f dmu - ∫f dnu` over functions
//! bounded by one with Lipschitz constant at most one.

use super::FiniteMeasure;
use crate::error::{Error, Result};
use crate::geometry::{Norm, Point};
use crate::lp::maximize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FmDistance {
    /// Optimal value of the test-function linear program.
    pub primal: f64,
    /// Optimal cost of transport with cost `min(d, 2)`.
    pub dual: f64,
}

impl FmDistance {
    pub fn value(&self) -> f64 {
        self.primal
    }
}

/// Computes the distance both ways and fails if they disagree by more
/// than `1e-9`. The pair is put in a fixed order first so that swapping the
/// arguments gives bit-identical results.
pub fn fm_distance(mu: &FiniteMeasure, nu: &FiniteMeasure, norm: Norm) -> Result<FmDistance> {
    if mu.dim() != nu.dim() {
        return Err(Error::input("measures differ in dimension"));
    }
    let (mu, nu) = if canonical_order(mu, nu) == std::cmp::Ordering::Greater { (nu, mu) } else { (mu, nu) };
    let primal = primal(mu, nu, norm)?;
    let dual = capped_transport(mu, nu, norm);
    if (primal - dual).abs() > 1e-9 {
        return Err(Error::Invariant(format!("distance primal {primal} and dual {dual} disagree")));
    }
    Ok(FmDistance { primal, dual })
}

fn canonical_order(a: &FiniteMeasure, b: &FiniteMeasure) -> std::cmp::Ordering {
    let key = |m: &FiniteMeasure| -> Vec<f64> {
        m.atoms().iter().flat_map(|t| t.point.iter().copied().chain(std::iter::once(t.ln_mass))).collect()
    };
    let (ka, kb) = (key(a), key(b));
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(ka.len().cmp(&kb.len()))
}

/// Test function values `f_i` on the union of supports, shifted to
/// `g_i = f_i + 1` so that the feasible region contains the origin.
fn primal(mu: &FiniteMeasure, nu: &FiniteMeasure, norm: Norm) -> Result<f64> {
    let mut pts: Vec<(Point, f64)> = mu.atoms().iter().map(|a| (a.point.clone(), a.mass())).collect();
    for a in nu.atoms() {
        match pts.iter_mut().find(|(x, _)| *x == a.point) {
            Some(slot) => slot.1 -= a.mass(),
            None => pts.push((a.point.clone(), -a.mass())),
        }
    }
    let k = pts.len();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..k {
        let mut row = vec![0.0; k];
        row[i] = 1.0;
        rows.push(row);
        rhs.push(2.0);
    }
    for i in 0..k {
        for j in 0..k {
            let d = norm.dist(&pts[i].0, &pts[j].0);
            if i != j && d < 2.0 {
                let mut row = vec![0.0; k];
                row[i] = 1.0;
                row[j] = -1.0;
                rows.push(row);
                rhs.push(d);
            }
        }
    }
    let c: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let sol = maximize(&c, &rows, &rhs)?;
    Ok(c.iter().zip(&sol.x).map(|(c, g)| c * (g - 1.0)).sum())
}

/// Minimum cost of moving `mu` onto `nu` at cost `min(d, 2)` per unit mass,
/// by successive shortest augmenting paths.
fn capped_transport(mu: &FiniteMeasure, nu: &FiniteMeasure, norm: Norm) -> f64 {
    const EPS: f64 = 1e-15;
    let a: Vec<f64> = mu.atoms().iter().map(|x| x.mass()).collect();
    let b: Vec<f64> = nu.atoms().iter().map(|x| x.mass()).collect();
    let (s, t) = (a.len(), b.len());
    let cost: Vec<Vec<f64>> =
        mu.atoms().iter().map(|x| nu.atoms().iter().map(|y| norm.dist(&x.point, &y.point).min(2.0)).collect()).collect();
    let mut supply = a.clone();
    let mut demand = b.clone();
    let mut flow = vec![vec![0.0; t]; s];
    loop {
        if supply.iter().sum::<f64>() <= 1e-14 || demand.iter().sum::<f64>() <= 1e-14 {
            break;
        }
        // nodes: sources 0..s, sinks s..s+t
        let n = s + t;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        for i in 0..s {
            if supply[i] > EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..n {
            let mut changed = false;
            for i in 0..s {
                for j in 0..t {
                    if dist[i] + cost[i][j] < dist[s + j] - 1e-15 {
                        dist[s + j] = dist[i] + cost[i][j];
                        prev[s + j] = i;
                        changed = true;
                    }
                    if flow[i][j] > EPS && dist[s + j] - cost[i][j] < dist[i] - 1e-15 {
                        dist[i] = dist[s + j] - cost[i][j];
                        prev[i] = s + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(end) = (0..t).filter(|&j| demand[j] > EPS && dist[s + j].is_finite()).min_by(|&x, &y| dist[s + x].total_cmp(&dist[s + y]))
        else {
            break;
        };
        // walk back to a source with spare supply
        let mut path = vec![s + end];
        let mut v = s + end;
        while prev[v] != usize::MAX {
            v = prev[v];
            path.push(v);
        }
        let start = v;
        let mut amount = supply[start].min(demand[end]);
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from >= s {
                // backward edge sink -> source cancels flow
                amount = amount.min(flow[to][from - s]);
            }
        }
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from < s {
                flow[from][to - s] += amount;
            } else {
                flow[to][from - s] -= amount;
            }
        }
        supply[start] -= amount;
        demand[end] -= amount;
    }
    flow.iter().zip(&cost).map(|(f, c)| f.iter().zip(c).map(|(f, c)| f * c).sum::<f64>()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(x: f64) -> FiniteMeasure {
        FiniteMeasure::dirac(vec![x]).unwrap()
    }

    #[test]
    fn dirac_distances() {
        assert!((fm_distance(&dirac(0.0), &dirac(1.0), Norm::Chebyshev).unwrap().value() - 1.0).abs() < 1e-12);
        assert!((fm_distance(&dirac(0.0), &dirac(5.0), Norm::Chebyshev).unwrap().value() - 2.0).abs() < 1e-12);
        assert!(fm_distance(&dirac(0.3), &dirac(0.3), Norm::Chebyshev).unwrap().value().abs() < 1e-12);
    }

    #[test]
    fn transport_needs_rerouting() {
        // greedy nearest matching is not optimal here
        let mu = FiniteMeasure::new(vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        let nu = FiniteMeasure::new(vec![(vec![0.9], 0.5), (vec![1.9], 0.5)]).unwrap();
        let d = fm_distance(&mu, &nu, Norm::Chebyshev).unwrap();
        assert!((d.dual - 0.9).abs() < 1e-12, "{d:?}");
    }
}
