//! Highest-label push-relabel with the gap heuristic and periodic global
//! relabeling.
//!
//! Runs in two phases. The first computes a maximum preflow: excess is pushed
//! toward the sink and nodes that can no longer reach it are set aside. The
//! second returns the stranded excess to the source, turning the preflow into
//! a proper flow with the same value.

use std::collections::VecDeque;

use super::{FlowResult, MaxflowError};
use crate::flownet::FlowNetwork;

/// Computes a maximum flow. Deterministic for a given network and arc order.
pub fn push_relabel_max_flow(net: &FlowNetwork) -> Result<FlowResult, MaxflowError> {
    net.validate()?;
    let mut solver = Solver::new(net);
    solver.saturate_source_arcs();
    solver.run(net.sink(), net.source());
    let flow_value = solver.excess[net.sink()];
    solver.run(net.source(), net.sink());
    Ok(FlowResult { flow_value, residual: solver.residual })
}

struct Solver<'a> {
    net: &'a FlowNetwork,
    n: usize,
    residual: Vec<i64>,
    excess: Vec<i64>,
    height: Vec<usize>,
    /// Position of the current arc in each node's adjacency.
    current: Vec<usize>,
    /// Active nodes bucketed by height.
    buckets: Vec<Vec<u32>>,
    /// Labeled nodes per height below `n`.
    count: Vec<usize>,
    highest: usize,
    relabels_since_global: usize,
    /// Node at height 0 that excess drains into during this phase.
    target: usize,
    /// Terminal that never becomes active during this phase.
    excluded: usize,
}

impl<'a> Solver<'a> {
    fn new(net: &'a FlowNetwork) -> Self {
        let n = net.node_count();
        Solver {
            net,
            n,
            residual: net.capacities().to_vec(),
            excess: vec![0; n],
            height: vec![0; n],
            current: vec![0; n],
            buckets: vec![Vec::new(); n + 1],
            count: vec![0; n + 1],
            highest: 0,
            relabels_since_global: 0,
            target: net.sink(),
            excluded: net.source(),
        }
    }

    fn saturate_source_arcs(&mut self) {
        let (net, s) = (self.net, self.net.source());
        for &a in net.out_arcs(s) {
            let a = a as usize;
            let w = net.head(a);
            let d = self.residual[a];
            if w == s || d == 0 {
                continue;
            }
            self.residual[a] = 0;
            self.residual[a ^ 1] += d;
            self.excess[w] += d;
        }
    }

    fn run(&mut self, target: usize, excluded: usize) {
        self.target = target;
        self.excluded = excluded;
        self.global_relabel();
        loop {
            if self.relabels_since_global >= self.n {
                self.global_relabel();
            }
            while self.highest > 0 && self.buckets[self.highest].is_empty() {
                self.highest -= 1;
            }
            let Some(v) = self.buckets[self.highest].pop() else {
                break;
            };
            let v = v as usize;
            if self.height[v] != self.highest || self.excess[v] == 0 {
                continue;
            }
            self.discharge(v);
        }
    }

    /// Exact distance labels to the target by reverse breadth-first search.
    fn global_relabel(&mut self) {
        let (net, n) = (self.net, self.n);
        self.height.fill(n);
        self.count.fill(0);
        self.buckets.iter_mut().for_each(Vec::clear);
        self.current.fill(0);
        self.relabels_since_global = 0;
        self.highest = 0;

        self.height[self.target] = 0;
        let mut queue = VecDeque::from([self.target]);
        while let Some(u) = queue.pop_front() {
            let hu = self.height[u];
            for &a in net.out_arcs(u) {
                let a = a as usize;
                let w = net.head(a);
                if self.residual[a ^ 1] > 0 && self.height[w] == n && w != self.target && w != self.excluded {
                    self.height[w] = hu + 1;
                    queue.push_back(w);
                }
            }
        }
        for v in 0..n {
            let h = self.height[v];
            if h >= n {
                continue;
            }
            self.count[h] += 1;
            if self.excess[v] > 0 && v != self.target && v != self.excluded {
                self.buckets[h].push(v as u32);
                self.highest = self.highest.max(h);
            }
        }
    }

    fn discharge(&mut self, v: usize) {
        let net = self.net;
        let arcs = net.out_arcs(v);
        while self.excess[v] > 0 {
            if self.current[v] == arcs.len() {
                self.relabel(v);
                if self.height[v] >= self.n {
                    return;
                }
                continue;
            }
            let a = arcs[self.current[v]] as usize;
            let w = net.head(a);
            if self.residual[a] > 0 && self.height[w] + 1 == self.height[v] {
                let d = self.excess[v].min(self.residual[a]);
                self.residual[a] -= d;
                self.residual[a ^ 1] += d;
                self.excess[v] -= d;
                if w == net.source() {
                    // the source has unlimited supply; its balance is not tracked
                    continue;
                }
                if self.excess[w] == 0 && w != self.target && w != self.excluded {
                    let hw = self.height[w];
                    self.buckets[hw].push(w as u32);
                    self.highest = self.highest.max(hw);
                }
                self.excess[w] += d;
            } else {
                self.current[v] += 1;
            }
        }
    }

    fn relabel(&mut self, v: usize) {
        let (net, n) = (self.net, self.n);
        self.relabels_since_global += 1;
        let old = self.height[v];
        let new = net
            .out_arcs(v)
            .iter()
            .map(|&a| a as usize)
            .filter(|&a| self.residual[a] > 0)
            .map(|a| self.height[net.head(a)] + 1)
            .min()
            .unwrap_or(n)
            .min(n);
        self.count[old] -= 1;
        if self.count[old] == 0 {
            // gap: nothing above `old` can reach the target any more
            for h in self.height.iter_mut() {
                if *h > old && *h < n {
                    self.count[*h] -= 1;
                    *h = n;
                }
            }
            self.height[v] = n;
            return;
        }
        self.height[v] = new;
        if new < n {
            self.count[new] += 1;
        }
        self.current[v] = 0;
    }
}
