use std::collections::VecDeque;

use super::MaxflowError;
use crate::flownet::FlowNetwork;

/// Maximum flow value by repeated breadth-first shortest augmenting paths.
/// Slow and simple; intended only as an independent check.
pub fn ford_fulkerson_oracle(net: &FlowNetwork) -> Result<i64, MaxflowError> {
    net.validate()?;
    let (s, t) = (net.source(), net.sink());
    let mut residual = net.capacities().to_vec();
    let mut total = 0i64;
    let mut parent_arc = vec![usize::MAX; net.node_count()];
    loop {
        parent_arc.fill(usize::MAX);
        let mut queue = VecDeque::from([s]);
        let mut found = false;
        while let Some(v) = queue.pop_front() {
            for &a in net.out_arcs(v) {
                let a = a as usize;
                let w = net.head(a);
                if residual[a] > 0 && w != s && parent_arc[w] == usize::MAX {
                    parent_arc[w] = a;
                    if w == t {
                        found = true;
                        break;
                    }
                    queue.push_back(w);
                }
            }
            if found {
                break;
            }
        }
        if !found {
            return Ok(total);
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            let a = parent_arc[v];
            bottleneck = bottleneck.min(residual[a]);
            v = net.tail(a);
        }
        let mut v = t;
        while v != s {
            let a = parent_arc[v];
            residual[a] -= bottleneck;
            residual[a ^ 1] += bottleneck;
            v = net.tail(a);
        }
        total += bottleneck;
    }
}
