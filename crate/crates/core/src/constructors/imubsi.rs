//! The measure `nu_n` spreading mass over the separated components of the
//! level-`n` cover, and the bound on `I((1 - theta) mu + theta nu_n, 3 2^-n, q)`.

use super::graph::{graph_weights, GraphWeights, WeightedGraph};
use super::CheckResult;
use crate::error::{Error, Result};
use crate::geometry::{CubeIndex, Norm, Point, SetSpec};
use crate::measures::{integral, FiniteMeasure, QValue};
use crate::separation::{adjacent, neighbour_offsets, Components};

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentWeights {
    pub cubes: Vec<CubeIndex>,
    pub graph: WeightedGraph,
    pub weights: GraphWeights,
    /// A point of the set in each cube, in cube order.
    pub representatives: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImubsiMeasure {
    pub n: u32,
    pub q: f64,
    pub epsilon: f64,
    pub rho: f64,
    /// Number of components `C_n`.
    pub components: Vec<ComponentWeights>,
    pub measure: FiniteMeasure,
}

impl ImubsiMeasure {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// For `q <= 0`: every component gets total mass `1 / C_n`, distributed by
/// graph weights with `rho = 1 - q` and `epsilon = C_n^q / (2 sum kappa_j)`
/// over the cube adjacency graph, placed on representative points.
pub fn imubsi_nu(set: &SetSpec, n: u32, q: f64) -> Result<ImubsiMeasure> {
    if !(q <= 0.0) || !q.is_finite() {
        return Err(Error::Precondition(format!("the construction needs q <= 0, got {q}")));
    }
    let cover = set.cubes_at(n)?;
    if !cover.is_exact() {
        return Err(Error::NotExact { level: n });
    }
    if cover.is_empty() {
        return Err(Error::InvalidInput("empty set".into()));
    }
    let reps = set.representatives(&cover)?;
    if reps.len() != cover.len() {
        return Err(Error::Invariant("some cube has no representative point".into()));
    }
    let comps = Components::of_cover(cover);
    let c_n = comps.count() as f64;
    let total_cubes = comps.cover.len() as f64;
    let ln_eps = q * c_n.ln() - 2f64.ln() - total_cubes.ln();
    let epsilon = ln_eps.exp();
    let rho = 1.0 - q;
    let offsets = neighbour_offsets(comps.cover.dim);
    let mut out = Vec::with_capacity(comps.count());
    let mut atoms = Vec::with_capacity(comps.cover.len());
    for members in &comps.members {
        let local: std::collections::HashMap<usize, usize> = members.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let adj: Vec<Vec<usize>> =
            members.iter().map(|&g| adjacent(&comps.cover, g, &offsets).into_iter().map(|h| local[&h]).collect()).collect();
        let graph = WeightedGraph::from_adjacency(adj);
        let weights = graph_weights(&graph, epsilon, rho)?;
        let representatives: Vec<Point> = members.iter().map(|&g| reps[g].1.clone()).collect();
        for (i, p) in representatives.iter().enumerate() {
            atoms.push((p.clone(), weights.ln_weights[i] - c_n.ln()));
        }
        out.push(ComponentWeights { cubes: members.iter().map(|&g| comps.cover.cubes[g]).collect(), graph, weights, representatives });
    }
    let measure = FiniteMeasure::from_ln_masses(atoms, 1e-12)?;
    Ok(ImubsiMeasure { n, q, epsilon, rho, components: out, measure })
}

/// `lhs = I(nu, 3 2^-n, q)` for `nu = (1 - theta) mu + theta nu_n` against
/// `rhs = N (1-theta)^q a^q + theta^q + theta^q 2^-q C_n^(1-q)`, where `mu`
/// has `N` atoms of smallest mass `a`.
pub fn imubsi_check(set: &SetSpec, n: u32, q: f64, mu: &FiniteMeasure, theta: f64) -> Result<CheckResult> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidInput(format!("theta must lie in (0, 1], got {theta}")));
    }
    if mu.dim() != set.dim() {
        return Err(Error::InvalidInput("measure and set differ in dimension".into()));
    }
    let nu_n = imubsi_nu(set, n, q)?;
    let h = (-(n as f64)).exp2();
    for a in mu.atoms() {
        let k: Vec<i64> = a.point.iter().map(|x| (x / h).floor() as i64).collect();
        if nu_n.components.iter().all(|c| c.cubes.iter().all(|cube| cube[..k.len()] != k[..])) {
            return Err(Error::Precondition(format!("atom {:?} is not in the set", a.point)));
        }
    }
    // every cube carries an atom of nu_n, so balls of radius 3 2^-n around
    // points of the set have positive mass
    let nu = mu.mix(theta, &nu_n.measure)?;
    let lhs = integral(&nu, 3.0 * h, QValue::Real(q), Norm::Chebyshev)?;
    let c_n = nu_n.component_count() as f64;
    let rhs = mu.len() as f64 * (1.0 - theta).powf(q) * mu.min_mass().powf(q) + theta.powf(q) + theta.powf(q) * 2f64.powf(-q) * c_n.powf(1.0 - q);
    Ok(CheckResult {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-12,
        params: format!("n={n};q={q};theta={theta};components={}", nu_n.component_count()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_at_level_zero() {
        let k = SetSpec::points(vec![vec![0.0], vec![10.0]]).unwrap();
        let nu = imubsi_nu(&k, 0, 0.0).unwrap();
        let m = &nu.measure;
        assert_eq!(m.len(), 2);
        assert!((m.atoms()[0].mass() - 0.5).abs() < 1e-15 && (m.atoms()[1].mass() - 0.5).abs() < 1e-15);
        let chk = imubsi_check(&k, 0, 0.0, &FiniteMeasure::dirac(vec![0.0]).unwrap(), 0.5).unwrap();
        assert!((chk.rhs - 4.0).abs() < 1e-12);
        assert!(chk.pass && (chk.lhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_validate_on_the_square() {
        let nu = imubsi_nu(&SetSpec::unit_box(2), 4, -2.0).unwrap();
        assert_eq!(nu.component_count(), 1);
        for c in &nu.components {
            assert!(c.weights.validate(&c.graph).is_ok());
        }
    }

    #[test]
    fn positive_q_is_refused() {
        assert!(imubsi_nu(&SetSpec::unit_box(1), 2, 0.5).is_err());
    }
}
