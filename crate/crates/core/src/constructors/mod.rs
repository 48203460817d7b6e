//! Explicit measures with certified ball-mass bounds, and checkers for the
//! inequalities they satisfy.

mod frostman;
mod graph;
mod imubsi;
mod jensen;

pub use frostman::{packing_measure_lower, packing_measure_upper, PackingMeasure};
pub use graph::{graph_peel, graph_weights, GraphWeights, WeightedGraph};
pub use imubsi::{imubsi_check, imubsi_nu, ComponentWeights, ImubsiMeasure};
pub use jensen::{jensen_l1_check, jensen_lq_check};

/// Outcome of an inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `key=value` pairs separated by `;`.
    pub params: String,
}

impl CheckResult {
    pub fn to_csv(&self) -> String {
        format!("lhs,rhs,pass,params\n{},{},{},{}\n", self.lhs, self.rhs, self.pass, self.params)
    }
}
