//! Maximum flow and minimum cut.
//!
//! [`push_relabel_max_flow`] is the production solver. [`ford_fulkerson_oracle`]
//! is a deliberately simple shortest-augmenting-path solver kept for
//! cross-checking.

mod cut;
mod dimacs;
mod oracle;
mod push_relabel;

pub use cut::{min_cut_from_residual, CutSet};
pub use dimacs::parse_dimacs;
pub use oracle::ford_fulkerson_oracle;
pub use push_relabel::push_relabel_max_flow;

use thiserror::Error;

use crate::flownet::{FlowNetwork, FlownetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxflowError {
    #[error(transparent)]
    Network(#[from] FlownetError),
    #[error("flow is not maximal: sink reachable in the residual graph")]
    NotMaximal,
    #[error("residual does not belong to this network ({0} arcs, network has {1})")]
    ResidualMismatch(usize, usize),
    #[error("DIMACS parse error on line {line}: {reason}")]
    Dimacs { line: usize, reason: String },
}

/// A flow assignment in residual form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub flow_value: i64,
    /// Remaining capacity of every arc id, reverse arcs included.
    pub residual: Vec<i64>,
}

impl FlowResult {
    /// Flow carried by forward arc `2 * edge`.
    pub fn edge_flow(&self, net: &FlowNetwork, edge: usize) -> i64 {
        net.capacity(2 * edge) - self.residual[2 * edge]
    }

    /// Net outflow minus inflow at every node.
    pub fn imbalance(&self, net: &FlowNetwork) -> Vec<i64> {
        let mut bal = vec![0i64; net.node_count()];
        for e in 0..net.edge_count() {
            let f = self.edge_flow(net, e);
            bal[net.tail(2 * e)] += f;
            bal[net.head(2 * e)] -= f;
        }
        bal
    }
}
