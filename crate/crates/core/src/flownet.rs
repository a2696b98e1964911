//! Directed flow networks with integer capacities, and construction of the
//! 3D alignment mesh from a cost volume.
//!
//! Arcs are stored in residual form: forward arc `2e` and its reverse
//! `2e + 1` are always adjacent, so the reverse of arc `a` is `a ^ 1`.
//! Reverse arcs start with capacity 0.

use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::costvol::CostVolume;

/// Default multiplier converting real capacities to integers.
pub const DEFAULT_SCALE: i64 = 1_000_000;
/// Default occlusion smoothing factor.
pub const DEFAULT_ETA: f64 = 0.01;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlownetError {
    #[error("mesh index ({i}, {j}, {k}) out of range")]
    IndexOutOfRange { i: usize, j: usize, k: isize },
    #[error("nodes {0} and {1} are not adjacent along j or i")]
    NotAdjacent(MeshNode, MeshNode),
    #[error("eta must be finite and non-negative, got {0}")]
    InvalidEta(f64),
    #[error("scale must be positive, got {0}")]
    InvalidScale(i64),
    #[error("capacity overflow: {0}")]
    CapacityOverflow(String),
    #[error("malformed network: {0}")]
    Malformed(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FlownetError {
    fn from(e: std::io::Error) -> Self {
        FlownetError::Io(e.to_string())
    }
}

/// A node of the alignment mesh: reference `i`, test frame `j`, shift `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshNode {
    pub i: usize,
    pub j: usize,
    pub k: isize,
}

impl MeshNode {
    pub fn new(i: usize, j: usize, k: isize) -> Self {
        MeshNode { i, j, k }
    }
}

impl fmt::Display for MeshNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Source,
    Sink,
    Mesh(MeshNode),
}

/// Bijection between mesh coordinates and node ids.
///
/// Source is 0, sink is 1, and `(i, j, k)` maps to
/// `2 + i * m * K + j * K + (k + k_max)` with `K = 2 k_max + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshLayout {
    pub n_refs: usize,
    pub n_test: usize,
    pub k_max: usize,
}

impl MeshLayout {
    pub fn of(vol: &CostVolume) -> Self {
        MeshLayout { n_refs: vol.n_refs(), n_test: vol.n_test(), k_max: vol.k_max() }
    }

    pub fn k_span(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn mesh_len(&self) -> usize {
        self.n_refs * self.n_test * self.k_span()
    }

    pub fn node_count(&self) -> usize {
        2 + self.mesh_len()
    }

    pub fn contains(&self, n: MeshNode) -> bool {
        n.i < self.n_refs && n.j < self.n_test && n.k.unsigned_abs() <= self.k_max
    }

    pub fn node_id(&self, n: MeshNode) -> Result<usize, FlownetError> {
        if !self.contains(n) {
            return Err(FlownetError::IndexOutOfRange { i: n.i, j: n.j, k: n.k });
        }
        let ks = self.k_span();
        Ok(2 + n.i * self.n_test * ks + n.j * ks + (n.k + self.k_max as isize) as usize)
    }

    pub fn decode(&self, id: usize) -> Option<NodeKind> {
        match id {
            SOURCE => Some(NodeKind::Source),
            SINK => Some(NodeKind::Sink),
            _ if id < self.node_count() => {
                let ks = self.k_span();
                let rest = id - 2;
                let k = (rest % ks) as isize - self.k_max as isize;
                let j = (rest / ks) % self.n_test;
                let i = rest / (ks * self.n_test);
                Some(NodeKind::Mesh(MeshNode { i, j, k }))
            }
            _ => None,
        }
    }
}

/// Role of an arc in the alignment mesh; `Plain` for general networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Plain,
    /// `(i, j, k) -> (i, j, k + 1)`.
    Shift,
    /// `(i, j, k) -> (i, j + 1, k)`.
    OcclusionJ,
    /// `(i, j, k) -> (i + 1, j, k)`.
    OcclusionI,
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    head: Vec<u32>,
    cap: Vec<i64>,
    kind: Vec<ArcKind>,
    adj_start: Vec<usize>,
    adj: Vec<u32>,
    scale: i64,
    cap_inf: i64,
    layout: Option<MeshLayout>,
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Total number of arcs including reverse arcs.
    pub fn arc_count(&self) -> usize {
        self.head.len()
    }

    /// Number of original (forward) arcs.
    pub fn edge_count(&self) -> usize {
        self.head.len() / 2
    }

    #[inline]
    pub fn head(&self, arc: usize) -> usize {
        self.head[arc] as usize
    }

    #[inline]
    pub fn tail(&self, arc: usize) -> usize {
        self.head[arc ^ 1] as usize
    }

    #[inline]
    pub fn capacity(&self, arc: usize) -> i64 {
        self.cap[arc]
    }

    pub fn capacities(&self) -> &[i64] {
        &self.cap
    }

    /// Kind of the original arc `2 * edge`.
    pub fn edge_kind(&self, edge: usize) -> ArcKind {
        self.kind[edge]
    }

    /// Arc ids leaving `node`, both forward and reverse.
    #[inline]
    pub fn out_arcs(&self, node: usize) -> &[u32] {
        &self.adj[self.adj_start[node]..self.adj_start[node + 1]]
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn cap_inf(&self) -> i64 {
        self.cap_inf
    }

    pub fn layout(&self) -> Option<&MeshLayout> {
        self.layout.as_ref()
    }

    /// Checks the residual representation: reverse arcs start empty, forward
    /// capacities are non-negative, adjacency lists every arc exactly once at
    /// its tail, and the terminals are distinct.
    pub fn validate(&self) -> Result<(), FlownetError> {
        let bad = |m: String| Err(FlownetError::Malformed(m));
        if self.source == self.sink || self.source >= self.node_count || self.sink >= self.node_count {
            return bad(format!("terminals {} and {} invalid for {} nodes", self.source, self.sink, self.node_count));
        }
        if !self.head.len().is_multiple_of(2)
            || self.cap.len() != self.head.len()
            || self.kind.len() * 2 != self.head.len()
        {
            return bad("unpaired arcs".into());
        }
        if let Some(a) = self.head.iter().position(|&h| h as usize >= self.node_count) {
            return bad(format!("arc {a} points at missing node {}", self.head[a]));
        }
        for e in 0..self.edge_count() {
            if self.cap[2 * e] < 0 {
                return bad(format!("arc {} has negative capacity", 2 * e));
            }
            if self.cap[2 * e + 1] != 0 {
                return bad(format!("reverse arc {} has nonzero capacity", 2 * e + 1));
            }
        }
        if self.adj_start.len() != self.node_count + 1 || self.adj.len() != self.head.len() {
            return bad("adjacency does not cover every arc".into());
        }
        // excess at any inner node is bounded by its total inflow capacity,
        // and the flow value by the source's outflow or the sink's inflow
        let mut inflow = vec![0i128; self.node_count];
        let mut outflow = vec![0i128; self.node_count];
        for e in 0..self.edge_count() {
            inflow[self.head(2 * e)] += i128::from(self.cap[2 * e]);
            outflow[self.tail(2 * e)] += i128::from(self.cap[2 * e]);
        }
        let limit = i128::from(i64::MAX);
        if let Some(v) = (0..self.node_count).find(|&v| v != self.source && v != self.sink && inflow[v] > limit) {
            return bad(format!("total inflow capacity at node {v} overflows"));
        }
        let into_sink: i128 = (0..self.edge_count())
            .filter(|&e| self.head(2 * e) == self.sink)
            .map(|e| {
                let (tail, c) = (self.tail(2 * e), i128::from(self.cap[2 * e]));
                if tail == self.source {
                    c
                } else {
                    c.min(inflow[tail])
                }
            })
            .sum();
        if outflow[self.source].min(into_sink) > limit {
            return bad("total terminal capacity overflows".into());
        }
        let mut seen = vec![false; self.head.len()];
        for v in 0..self.node_count {
            for &a in self.out_arcs(v) {
                let a = a as usize;
                if a >= seen.len() || seen[a] || self.tail(a) != v {
                    return bad(format!("arc {a} misplaced in adjacency of node {v}"));
                }
                seen[a] = true;
            }
        }
        Ok(())
    }

    /// Emits the network in DIMACS max-flow format. Node ids are 1-based in
    /// the output; only forward arcs are listed.
    pub fn write_dimacs<W: Write>(&self, mut sink: W) -> Result<(), FlownetError> {
        writeln!(sink, "c flowmatch network, scale {}, cap_inf {}", self.scale, self.cap_inf)?;
        writeln!(sink, "p max {} {}", self.node_count, self.edge_count())?;
        writeln!(sink, "n {} s", self.source + 1)?;
        writeln!(sink, "n {} t", self.sink + 1)?;
        for e in 0..self.edge_count() {
            let a = 2 * e;
            writeln!(sink, "a {} {} {}", self.tail(a) + 1, self.head(a) + 1, self.cap[a])?;
        }
        sink.flush()?;
        Ok(())
    }
}

/// Incremental construction of a [`FlowNetwork`].
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    node_count: usize,
    source: usize,
    sink: usize,
    tails: Vec<u32>,
    heads: Vec<u32>,
    caps: Vec<i64>,
    kinds: Vec<ArcKind>,
    scale: i64,
    cap_inf: i64,
    layout: Option<MeshLayout>,
}

impl NetworkBuilder {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Self {
        NetworkBuilder {
            node_count,
            source,
            sink,
            tails: Vec::new(),
            heads: Vec::new(),
            caps: Vec::new(),
            kinds: Vec::new(),
            scale: 1,
            cap_inf: i64::MAX,
            layout: None,
        }
    }

    pub fn with_capacity(mut self, edges: usize) -> Self {
        self.tails.reserve(edges);
        self.heads.reserve(edges);
        self.caps.reserve(edges);
        self.kinds.reserve(edges);
        self
    }

    /// Adds arc `tail -> head` and returns its edge index (forward arc id is
    /// twice that).
    pub fn add_arc(&mut self, tail: usize, head: usize, cap: i64, kind: ArcKind) -> usize {
        self.tails.push(tail as u32);
        self.heads.push(head as u32);
        self.caps.push(cap);
        self.kinds.push(kind);
        self.kinds.len() - 1
    }

    pub fn build(self) -> Result<FlowNetwork, FlownetError> {
        let n = self.node_count;
        if n > u32::MAX as usize {
            return Err(FlownetError::Malformed(format!("{n} nodes exceed the id range")));
        }
        if let Some(e) = (0..self.tails.len()).find(|&e| self.tails[e] as usize >= n || self.heads[e] as usize >= n) {
            return Err(FlownetError::Malformed(format!(
                "arc {} -> {} references a node outside 0..{n}",
                self.tails[e], self.heads[e]
            )));
        }
        let m = self.tails.len();
        let mut head = Vec::with_capacity(2 * m);
        let mut cap = Vec::with_capacity(2 * m);
        let mut degree = vec![0usize; n + 1];
        for e in 0..m {
            head.push(self.heads[e]);
            head.push(self.tails[e]);
            cap.push(self.caps[e]);
            cap.push(0);
            degree[self.tails[e] as usize] += 1;
            degree[self.heads[e] as usize] += 1;
        }
        let mut adj_start = vec![0usize; n + 1];
        for v in 0..n {
            adj_start[v + 1] = adj_start[v] + degree[v];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![0u32; 2 * m];
        for e in 0..m {
            for (a, v) in [(2 * e, self.tails[e]), (2 * e + 1, self.heads[e])] {
                adj[fill[v as usize]] = a as u32;
                fill[v as usize] += 1;
            }
        }
        let net = FlowNetwork {
            node_count: n,
            source: self.source,
            sink: self.sink,
            head,
            cap,
            kind: self.kinds,
            adj_start,
            adj,
            scale: self.scale,
            cap_inf: self.cap_inf,
            layout: self.layout,
        };
        net.validate()?;
        Ok(net)
    }
}

/// Shift-arc capacity: mean cost of the two nodes `(i, j, k)` and
/// `(i, j, k + 1)`.
pub fn shift_capacity(vol: &CostVolume, i: usize, j: usize, k: isize) -> Result<f64, FlownetError> {
    if !vol.contains(i, j, k) || !vol.contains(i, j, k + 1) {
        return Err(FlownetError::IndexOutOfRange { i, j, k });
    }
    Ok((vol.cost(i, j, k) + vol.cost(i, j, k + 1)) / 2.0)
}

/// Occlusion-arc capacity between `u` and its successor `v` along `j` or
/// `i`: `eta` times the mean cost of the two nodes.
pub fn occlusion_capacity(vol: &CostVolume, u: MeshNode, v: MeshNode, eta: f64) -> Result<f64, FlownetError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(FlownetError::InvalidEta(eta));
    }
    for n in [u, v] {
        if !vol.contains(n.i, n.j, n.k) {
            return Err(FlownetError::IndexOutOfRange { i: n.i, j: n.j, k: n.k });
        }
    }
    let along_j = v.i == u.i && v.k == u.k && v.j == u.j + 1;
    let along_i = v.j == u.j && v.k == u.k && v.i == u.i + 1;
    if !(along_j || along_i) {
        return Err(FlownetError::NotAdjacent(u, v));
    }
    Ok(eta * (vol.cost(u.i, u.j, u.k) + vol.cost(v.i, v.j, v.k)) / 2.0)
}

fn scale_capacity(real: f64, scale: i64) -> Result<i64, FlownetError> {
    let scaled = (real * scale as f64).round();
    // stay well inside i64 so sums and the infinite sentinel cannot wrap
    if !scaled.is_finite() || !(0.0..=(1u64 << 61) as f64).contains(&scaled) {
        return Err(FlownetError::CapacityOverflow(format!("capacity {real} x scale {scale} is out of range")));
    }
    Ok(scaled as i64)
}

/// Builds the 3D alignment network from a cost volume.
///
/// Mesh arcs per node, where the neighbor exists: shift `k -> k + 1`,
/// occlusion `j -> j + 1` and `i -> i + 1`. The source feeds every
/// `k = -k_max` node and every `k = +k_max` node drains into the sink, both
/// with a capacity exceeding the sum of all finite capacities.
pub fn build_network(vol: &CostVolume, eta: f64, scale: i64) -> Result<FlowNetwork, FlownetError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(FlownetError::InvalidEta(eta));
    }
    if scale < 1 {
        return Err(FlownetError::InvalidScale(scale));
    }
    let layout = MeshLayout::of(vol);
    let (n_refs, n_test, k_max) = (layout.n_refs, layout.n_test, layout.k_max as isize);
    let id = |i: usize, j: usize, k: isize| layout.node_id(MeshNode::new(i, j, k)).expect("in range");

    let shift_arcs = layout.n_refs * layout.n_test * 2 * layout.k_max;
    let occ_arcs = (n_refs * n_test.saturating_sub(1) + n_refs.saturating_sub(1) * n_test) * layout.k_span();
    let terminal_arcs = 2 * n_refs * n_test;
    let mut builder =
        NetworkBuilder::new(layout.node_count(), SOURCE, SINK).with_capacity(shift_arcs + occ_arcs + terminal_arcs);
    let mut finite_sum: i64 = 0;
    let mut add = |b: &mut NetworkBuilder, tail, head, real: f64, kind| -> Result<(), FlownetError> {
        let c = scale_capacity(real, scale)?;
        finite_sum = finite_sum
            .checked_add(c)
            .filter(|s| *s <= i64::MAX / 4)
            .ok_or_else(|| FlownetError::CapacityOverflow("sum of finite capacities exceeds i64 range".into()))?;
        b.add_arc(tail, head, c, kind);
        Ok(())
    };

    for i in 0..n_refs {
        for j in 0..n_test {
            for k in -k_max..=k_max {
                let u = MeshNode::new(i, j, k);
                let from = id(i, j, k);
                if k < k_max {
                    add(&mut builder, from, id(i, j, k + 1), shift_capacity(vol, i, j, k)?, ArcKind::Shift)?;
                }
                if j + 1 < n_test {
                    let v = MeshNode::new(i, j + 1, k);
                    add(&mut builder, from, id(i, j + 1, k), occlusion_capacity(vol, u, v, eta)?, ArcKind::OcclusionJ)?;
                }
                if i + 1 < n_refs {
                    let v = MeshNode::new(i + 1, j, k);
                    add(&mut builder, from, id(i + 1, j, k), occlusion_capacity(vol, u, v, eta)?, ArcKind::OcclusionI)?;
                }
            }
        }
    }
    let cap_inf = finite_sum + 1;
    for i in 0..n_refs {
        for j in 0..n_test {
            builder.add_arc(SOURCE, id(i, j, -k_max), cap_inf, ArcKind::Source);
        }
    }
    for i in 0..n_refs {
        for j in 0..n_test {
            builder.add_arc(id(i, j, k_max), SINK, cap_inf, ArcKind::Sink);
        }
    }
    builder.scale = scale;
    builder.cap_inf = cap_inf;
    builder.layout = Some(layout);
    builder.build()
}
