//! Weights on connected graphs that decay fast away from a root vertex.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    adj: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Undirected graph on vertices `0..n`.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInput(format!("bad edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(Self::from_adjacency(adj))
    }

    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        WeightedGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Breadth-first distances from `root`, ignoring `removed`.
    fn distances(&self, root: usize, removed: Option<usize>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if Some(u) != removed && dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.distances(0, None).iter().all(|&d| d != usize::MAX)
    }

    fn connected_without(&self, v: usize) -> bool {
        let Some(start) = (0..self.len()).find(|&u| u != v) else { return true };
        let d = self.distances(start, Some(v));
        (0..self.len()).all(|u| u == v || d[u] != usize::MAX)
    }

    /// Vertices in the order they are removed: farthest from vertex 0
    /// first, larger index first among equals. Removing a vertex of largest
    /// distance never disconnects the rest.
    fn peel_order(&self) -> Vec<usize> {
        let d = self.distances(0, None);
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| d[b].cmp(&d[a]).then(b.cmp(&a)));
        order
    }
}

/// A vertex whose removal keeps the graph connected.
pub fn graph_peel(g: &WeightedGraph) -> Result<usize> {
    if g.len() < 2 {
        return Err(Error::Precondition("peeling needs at least two vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Precondition("graph is not connected".into()));
    }
    let v = g.peel_order()[0];
    if !g.connected_without(v) {
        return Err(Error::Invariant(format!("vertex {v} disconnects the graph")));
    }
    Ok(v)
}

/// Weights `omega` (stored as logarithms) with root `v0` such that every
/// other vertex has a neighbour `u` with `omega_v <= epsilon omega_u^rho`,
/// `omega_v0 > 1/2` and the weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphWeights {
    pub root: usize,
    pub ln_weights: Vec<f64>,
    pub epsilon: f64,
    pub rho: f64,
}

impl GraphWeights {
    pub fn weight(&self, v: usize) -> f64 {
        self.ln_weights[v].exp()
    }

    /// Checks the three defining properties; returns the first violation.
    pub fn validate(&self, g: &WeightedGraph) -> std::result::Result<(), String> {
        if self.ln_weights.len() != g.len() {
            return Err("one weight per vertex expected".into());
        }
        if self.ln_weights.iter().any(|w| w.is_nan() || *w > 0.0) {
            return Err("weights must lie in (0, 1]".into());
        }
        let le = self.epsilon.ln();
        for v in 0..g.len() {
            if v == self.root {
                continue;
            }
            let ok = g.neighbours(v).iter().any(|&u| self.ln_weights[v] <= le + self.rho * self.ln_weights[u]);
            if !ok {
                return Err(format!("vertex {v} has no neighbour dominating it"));
            }
        }
        if !(self.ln_weights[self.root] > 0.5f64.ln()) {
            return Err(format!("root weight {} is not above 1/2", self.weight(self.root)));
        }
        let total = crate::measures::log_sum_exp(self.ln_weights.iter().copied());
        if total.exp_m1().abs() > 1e-12 {
            return Err(format!("weights sum to {}", total.exp()));
        }
        Ok(())
    }
}

fn margin(x: f64) -> f64 {
    1e-9 * x.abs() + 1e-12
}

/// Builds the weights by adding vertices in reverse peel order. When the
/// graph has `k` of its `n` vertices the new vertex gets weight `alpha` and
/// the earlier ones are scaled by `1 - alpha`, with `alpha` valid for
/// `epsilon / 2^(n-k)`. `alpha` starts at `1/4` and is lowered until the
/// conditions hold: straight to the admissible bound when the neighbour
/// condition fails, by halving otherwise.
pub fn graph_weights(g: &WeightedGraph, epsilon: f64, rho: f64) -> Result<GraphWeights> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(rho >= 1.0) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!("need 0 < epsilon < 1 and rho >= 1, got {epsilon}, {rho}")));
    }
    if g.is_empty() || !g.is_connected() {
        return Err(Error::Precondition("graph must be nonempty and connected".into()));
    }
    let n = g.len();
    let mut order = g.peel_order();
    order.reverse();
    let root = order[0];
    let mut stored = vec![f64::NAN; n];
    stored[root] = 0.0;
    let mut shift = 0.0;
    let ln2 = 2f64.ln();
    for (pos, &v) in order.iter().enumerate().skip(1) {
        let k = pos + 1;
        let ln_eps = epsilon.ln() - (n - k) as f64 * ln2;
        let best = g.neighbours(v).iter().filter(|&&u| !stored[u].is_nan()).map(|&u| stored[u]).fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return Err(Error::Invariant("peel order left a vertex without earlier neighbours".into()));
        }
        let mut ln_alpha = 0.25f64.ln();
        let mut accepted = None;
        for _ in 0..10_000 {
            let l1a = (-ln_alpha.exp()).ln_1p();
            let rhs = ln_eps + rho * (l1a + best + shift);
            let ok_nb = ln_alpha <= rhs - margin(rhs);
            let ok_scale = rho == 1.0 || (1.0 - rho) * l1a <= ln2;
            let ok_root = l1a + stored[root] + shift > 0.5f64.ln() + 1e-12;
            if ok_nb && ok_scale && ok_root {
                accepted = Some((ln_alpha, l1a));
                break;
            }
            ln_alpha = if ok_nb { ln_alpha - ln2 } else { (ln_alpha - ln2).min(rhs - margin(rhs)) };
        }
        let (ln_alpha, l1a) = accepted.ok_or_else(|| Error::SearchFailed(format!("no admissible weight for vertex {v}")))?;
        if !ln_alpha.is_finite() {
            return Err(Error::Precondition("weights fall outside the floating point log range".into()));
        }
        shift += l1a;
        stored[v] = ln_alpha - shift;
    }
    let w = GraphWeights { root, ln_weights: stored.iter().map(|s| s + shift).collect(), epsilon, rho };
    w.validate(g).map_err(Error::Invariant)?;
    Ok(w)
}
