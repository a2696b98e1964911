use std::collections::VecDeque;

use super::{FlowResult, MaxflowError};
use crate::flownet::FlowNetwork;

/// Source-side minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    /// `s_side[v]` is true when `v` is reachable from the source in the
    /// residual graph.
    pub s_side: Vec<bool>,
    /// Edge indices of original arcs leaving the source side.
    pub cut_edges: Vec<usize>,
    /// Total original capacity of `cut_edges`.
    pub capacity: i64,
}

impl CutSet {
    pub fn contains_node(&self, v: usize) -> bool {
        self.s_side[v]
    }
}

/// Recovers the canonical minimum cut from a maximum flow: the set of nodes
/// reachable from the source over arcs with positive residual capacity.
pub fn min_cut_from_residual(net: &FlowNetwork, res: &FlowResult) -> Result<CutSet, MaxflowError> {
    if res.residual.len() != net.arc_count() {
        return Err(MaxflowError::ResidualMismatch(res.residual.len(), net.arc_count()));
    }
    let mut s_side = vec![false; net.node_count()];
    s_side[net.source()] = true;
    let mut queue = VecDeque::from([net.source()]);
    while let Some(v) = queue.pop_front() {
        for &a in net.out_arcs(v) {
            let a = a as usize;
            let w = net.head(a);
            if res.residual[a] > 0 && !s_side[w] {
                s_side[w] = true;
                queue.push_back(w);
            }
        }
    }
    if s_side[net.sink()] {
        return Err(MaxflowError::NotMaximal);
    }
    let cut_edges: Vec<usize> =
        (0..net.edge_count()).filter(|&e| s_side[net.tail(2 * e)] && !s_side[net.head(2 * e)]).collect();
    let capacity = cut_edges.iter().map(|&e| net.capacity(2 * e)).sum();
    Ok(CutSet { s_side, cut_edges, capacity })
}
