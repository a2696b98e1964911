//! Test-only oracles. Nothing here calls the solver or the surface code.
#![allow(dead_code)]

use flowmatch::costvol::CostVolume;
use flowmatch::flownet::{ArcKind, FlowNetwork, MeshLayout, MeshNode, NetworkBuilder};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random volume with costs on a 1e-3 grid in [0, 2] and reference
/// lengths around `n_test`.
pub fn random_volume(rng: &mut ChaCha8Rng, n_refs: usize, n_test: usize, k_max: usize) -> CostVolume {
    let ref_lengths: Vec<usize> =
        (0..n_refs).map(|_| rng.random_range((n_test / 2).max(2)..=n_test + k_max + 1)).collect();
    let len = n_refs * n_test * (2 * k_max + 1);
    let costs: Vec<f64> = (0..len).map(|_| rng.random_range(0..=2000) as f64 / 1000.0).collect();
    CostVolume::from_raw(n_test, k_max, ref_lengths, costs, 2.0).unwrap()
}

/// Random directed graph on `n` nodes, source 0 and sink `n - 1`.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_arcs: usize, max_cap: i64) -> FlowNetwork {
    let n = rng.random_range(2..=max_nodes);
    let arcs = rng.random_range(0..=max_arcs);
    let mut b = NetworkBuilder::new(n, 0, n - 1);
    for _ in 0..arcs {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        b.add_arc(u, v, rng.random_range(0..=max_cap), ArcKind::Plain);
    }
    b.build().unwrap()
}

/// Capacity of the cut whose source side is `s_side`, summed over forward arcs.
pub fn cut_capacity(net: &FlowNetwork, s_side: &[bool]) -> i64 {
    (0..net.edge_count())
        .filter(|&e| s_side[net.tail(2 * e)] && !s_side[net.head(2 * e)])
        .map(|e| net.capacity(2 * e))
        .sum()
}

pub struct ExhaustiveCut {
    pub value: i64,
    /// Intersection of the source sides of every minimum cut: the unique
    /// smallest one.
    pub min_s_side: Vec<bool>,
}

/// Enumerates every s-t partition. Feasible up to about 20 free nodes.
pub fn exhaustive_min_cut(net: &FlowNetwork) -> ExhaustiveCut {
    let n = net.node_count();
    let (s, t) = (net.source(), net.sink());
    let free: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    assert!(free.len() <= 22, "too many nodes to enumerate");
    let mut bit = vec![usize::MAX; n];
    for (b, &v) in free.iter().enumerate() {
        bit[v] = b;
    }
    let in_s = |mask: u64, v: usize| v == s || (v != t && mask >> bit[v] & 1 == 1);
    let edges: Vec<(usize, usize, i64)> =
        (0..net.edge_count()).map(|e| (net.tail(2 * e), net.head(2 * e), net.capacity(2 * e))).collect();

    let mut best = i64::MAX;
    let mut inter: u64 = 0;
    for mask in 0..(1u64 << free.len()) {
        let c: i64 = edges.iter().filter(|&&(u, v, _)| in_s(mask, u) && !in_s(mask, v)).map(|e| e.2).sum();
        if c < best {
            best = c;
            inter = mask;
        } else if c == best {
            inter &= mask;
        }
    }
    let min_s_side = (0..n).map(|v| in_s(inter, v)).collect();
    ExhaustiveCut { value: best, min_s_side }
}

/// Scaled integer capacity of a shift arc, recomputed from the costs.
pub fn shift_int(vol: &CostVolume, i: usize, j: usize, k: isize, scale: i64) -> i64 {
    ((vol.cost(i, j, k) + vol.cost(i, j, k + 1)) / 2.0 * scale as f64).round() as i64
}

/// Per-chain argmin of shift capacities, ties to the smaller shift.
pub fn chain_argmin(vol: &CostVolume, i: usize, j: usize, scale: i64) -> isize {
    let km = vol.k_max() as isize;
    (-km..km).min_by_key(|&k| (shift_int(vol, i, j, k, scale), k)).unwrap()
}

/// Flat surface with the smallest total shift capacity, ties to the smaller shift.
pub fn flat_argmin(vol: &CostVolume, scale: i64) -> isize {
    let km = vol.k_max() as isize;
    (-km..km)
        .min_by_key(|&k| {
            let total: i64 = (0..vol.n_refs())
                .flat_map(|i| (0..vol.n_test()).map(move |j| (i, j)))
                .map(|(i, j)| shift_int(vol, i, j, k, scale))
                .sum();
            (total, k)
        })
        .unwrap()
}

/// Local match read off an arbitrary source side: the cheapest endpoint of
/// the chain's crossing shift arcs (ties: valid first, then smaller shift).
/// Returns `(cut_k, k_hat)` per chain, `k_hat = None` for padded entries.
pub fn surface_from_side(vol: &CostVolume, s_side: &[bool]) -> Vec<Option<(isize, Option<isize>)>> {
    let layout = MeshLayout::of(vol);
    let km = vol.k_max() as isize;
    let mut out = Vec::new();
    for i in 0..vol.n_refs() {
        for j in 0..vol.n_test() {
            let side = |k: isize| s_side[layout.node_id(MeshNode::new(i, j, k)).unwrap()];
            let mut best: Option<(f64, bool, isize, isize)> = None;
            for k in -km..km {
                if side(k) && !side(k + 1) {
                    for kk in [k, k + 1] {
                        let key = (vol.cost(i, j, kk), !vol.is_valid(i, j, kk), kk, k);
                        let better = match best {
                            None => true,
                            Some(b) => key.0.total_cmp(&b.0).then(key.1.cmp(&b.1)).then(key.2.cmp(&b.2)).is_lt(),
                        };
                        if better {
                            best = Some(key);
                        }
                    }
                }
            }
            out.push(best.map(|(_, invalid, kk, k)| (k, (!invalid).then_some(kk))));
        }
    }
    out
}
