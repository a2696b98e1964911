//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flowmatch::costvol::{CostVolume, SequenceSet};
use flowmatch::eval::{
    classify, generate_synthetic, haversine_m, pr_curve, write_pr_csv, GeoPoint, GroundTruth, SynthParams,
    SyntheticSet, Tolerance,
};
use flowmatch::features::{cosine_cost, Descriptor};
use flowmatch::flownet::{build_network, DEFAULT_ETA, DEFAULT_SCALE};
use flowmatch::maxflow::{ford_fulkerson_oracle, push_relabel_max_flow};
use flowmatch::surface::{BestMatch, GlobalMatch};
use flowmatch::{align, align_volume, AlignConfig, Alignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use common::*;

type Outcome = Result<String, String>;

/// Every alignment network built by the suite, checked for exact duality.
#[derive(Default)]
struct DualityLog {
    networks: usize,
    failures: Vec<String>,
}

impl DualityLog {
    fn check(&mut self, label: &str, a: &Alignment) {
        self.networks += 1;
        let recount = cut_capacity(&a.network, &a.cut.s_side);
        let unsaturated = (0..a.network.edge_count())
            .filter(|&e| a.cut.s_side[a.network.tail(2 * e)] && !a.cut.s_side[a.network.head(2 * e)])
            .filter(|&e| a.flow.residual[2 * e] != 0)
            .count();
        if recount != a.flow_value() || a.cut_capacity() != a.flow_value() || unsaturated > 0 {
            self.failures.push(format!(
                "{label}: flow {} cut {} recount {recount} unsaturated {unsaturated}",
                a.flow_value(),
                a.cut_capacity()
            ));
        }
    }

    fn align_volume(&mut self, label: &str, vol: CostVolume, eta: f64) -> Result<Alignment, String> {
        let a = align_volume(vol, eta, DEFAULT_SCALE).map_err(|e| format!("{label}: {e}"))?;
        self.check(label, &a);
        Ok(a)
    }

    fn align(&mut self, label: &str, seqs: &SequenceSet, cfg: &AlignConfig) -> Result<Alignment, String> {
        let a = align(seqs, cfg).map_err(|e| format!("{label}: {e}"))?;
        self.check(label, &a);
        Ok(a)
    }
}

fn solver_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF10);
    let graphs = 250;
    for g in 0..graphs {
        let net = random_graph(&mut rng, 12, 30, 20);
        let pr = push_relabel_max_flow(&net).map_err(|e| e.to_string())?.flow_value;
        let ff = ford_fulkerson_oracle(&net).map_err(|e| e.to_string())?;
        let ex = exhaustive_min_cut(&net).value;
        if pr != ff || pr != ex {
            return Err(format!("graph {g}: push-relabel {pr}, augmenting path {ff}, enumeration {ex}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("{graphs} graphs took {elapsed:?} (limit 5 s)"));
    }
    Ok(format!("{graphs} graphs agree, {elapsed:.2?}"))
}

fn surface_coverage(log: &mut DualityLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FE);
    let mut volumes = 0;
    for n_refs in [1, 2, 4] {
        for eta in [0.0, 0.01, 1.0, 1e6] {
            for _ in 0..10 {
                let m = rng.random_range(5..=30);
                let k_max = rng.random_range(1..=5);
                let vol = random_volume(&mut rng, n_refs, m, k_max);
                let label = format!("coverage N={n_refs} m={m} k_max={k_max} eta={eta}");
                let oracle_vol = vol.clone();
                let a = log.align_volume(&label, vol, eta)?;
                let sides = surface_from_side(&oracle_vol, &a.cut.s_side);
                if let Some(idx) = sides.iter().position(Option::is_none) {
                    return Err(format!("{label}: chain {idx} has no cut shift arc"));
                }
                volumes += 1;
            }
        }
    }
    Ok(format!("{volumes} volumes, zero empty chains"))
}

fn eta_limits(log: &mut DualityLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7A);
    for v in 0..50 {
        let n_refs = [1, 2, 3][v % 3];
        let m = rng.random_range(3..=20);
        let k_max = rng.random_range(1..=4);
        let vol = random_volume(&mut rng, n_refs, m, k_max);
        let a = log.align_volume(&format!("eta=0 volume {v}"), vol.clone(), 0.0)?;
        for i in 0..n_refs {
            for j in 0..m {
                let want = chain_argmin(&vol, i, j, DEFAULT_SCALE);
                let got = a.surface.cell(i, j).cut_k;
                if got != want {
                    return Err(format!("eta=0 volume {v} chain ({i},{j}): cut at {got}, per-chain argmin {want}"));
                }
            }
        }
    }
    let mut flat_failures = Vec::new();
    for v in 0..50 {
        let n_refs = [1, 2, 3][v % 3];
        let m = rng.random_range(3..=20);
        let k_max = rng.random_range(1..=4);
        let vol = random_volume(&mut rng, n_refs, m, k_max);
        let a = log.align_volume(&format!("eta=1e6 volume {v}"), vol.clone(), 1e6)?;
        let want = flat_argmin(&vol, DEFAULT_SCALE);
        let cut_ks: Vec<isize> =
            (0..n_refs).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| a.surface.cell(i, j).cut_k).collect();
        if cut_ks.iter().any(|&k| k != want) {
            let distinct: std::collections::BTreeSet<isize> = cut_ks.iter().copied().collect();
            flat_failures.push(format!("volume {v}: cut shifts {distinct:?}, flat argmin {want}"));
        }
    }
    if !flat_failures.is_empty() {
        return Err(format!(
            "eta=0 agrees on 50 volumes; eta=1e6 not flat on {}/50 volumes (first: {})",
            flat_failures.len(),
            flat_failures[0]
        ));
    }
    Ok("eta=0 per-chain argmin on 50 volumes; eta=1e6 flat argmin on 50 volumes".into())
}

fn single_reference_reduction(log: &mut DualityLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51);
    // (m, k_max) with m * (2 k_max + 1) <= 18
    let shapes = [(2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (2, 2), (3, 2), (2, 3), (2, 4)];
    let mut instances = 0;
    for round in 0..4 {
        for &(m, k_max) in &shapes {
            let eta = [0.0, 0.01, 1.0, 10.0][round];
            let vol = random_volume(&mut rng, 1, m, k_max);
            let label = format!("N=1 m={m} k_max={k_max} eta={eta}");
            let a = log.align_volume(&label, vol.clone(), eta)?;
            let net = build_network(&vol, eta, DEFAULT_SCALE).map_err(|e| e.to_string())?;
            let ex = exhaustive_min_cut(&net);
            if ex.value != a.flow_value() {
                return Err(format!("{label}: flow {} vs enumerated min cut {}", a.flow_value(), ex.value));
            }
            if ex.min_s_side != a.cut.s_side {
                return Err(format!("{label}: residual cut differs from the smallest enumerated min cut"));
            }
            let oracle = surface_from_side(&vol, &ex.min_s_side);
            for (j, cell) in oracle.iter().enumerate() {
                let (cut_k, k_hat) = cell.ok_or(format!("{label}: oracle chain {j} empty"))?;
                let got = a.surface.cell(0, j);
                if got.cut_k != cut_k || got.k_hat != k_hat {
                    return Err(format!(
                        "{label} j={j}: surface ({}, {:?}) vs oracle ({cut_k}, {k_hat:?})",
                        got.cut_k, got.k_hat
                    ));
                }
            }
            instances += 1;
        }
    }
    Ok(format!("{instances} instances match exhaustive enumeration"))
}

/// Test frame `j` is matched correctly when the matched reference frame
/// shows the same route place.
fn correct(set: &SyntheticSet, j: usize, m: &BestMatch) -> bool {
    set.ref_places[m.ref_index][m.ref_frame] == set.test_places[j]
}

fn noiseless_recovery(log: &mut DualityLog) -> Outcome {
    let params = SynthParams { desync: 3, speed_jitter: 0.1, max_stops: 2, ..Default::default() };
    let mut frames = 0;
    for seed in 0..5 {
        let set = generate_synthetic(&params, seed).map_err(|e| e.to_string())?;
        let a = log.align(&format!("noiseless seed {seed}"), &set.sequences, &AlignConfig::new(5))?;
        for j in 0..a.global.len() {
            match a.global.get(j) {
                Some(m) if correct(&set, j, m) => {}
                other => return Err(format!("seed {seed} frame {j}: {other:?}")),
            }
        }
        // a repeated reference frame shows the same place as its first
        // occurrence, at most `max_stops` frames later
        let tol = Tolerance::Frames(params.max_stops);
        let t = a.global.frames.iter().flatten().map(|m| m.cost).fold(0.0, f64::max);
        let c = classify(&a.global, t, &set.ground_truth, tol).map_err(|e| e.to_string())?;
        if c.precision() != 1.0 || c.recall() != 1.0 {
            return Err(format!("seed {seed}: precision {} recall {}", c.precision(), c.recall()));
        }
        frames += a.global.len();
    }
    Ok(format!("{frames} frames over 5 seeds recovered; precision 1 at recall 1"))
}

fn mean_frame_error(set: &SyntheticSet, g: &GlobalMatch) -> f64 {
    let GroundTruth::Frames(rows) = &set.ground_truth else { unreachable!() };
    let errs: Vec<f64> = g
        .frames
        .iter()
        .enumerate()
        .filter_map(|(j, m)| m.map(|m| (m.ref_frame as f64 - rows[&(j, m.ref_index)] as f64).abs()))
        .collect();
    errs.iter().sum::<f64>() / errs.len().max(1) as f64
}

fn k_max_trend(log: &mut DualityLog) -> Outcome {
    let params = SynthParams { desync: 4, noise_sigma: 0.1, n_refs: 1, ..Default::default() };
    let (mut e2, mut e5) = (0.0, 0.0);
    for seed in 0..10 {
        let set = generate_synthetic(&params, 100 + seed).map_err(|e| e.to_string())?;
        for (k_max, acc) in [(2, &mut e2), (5, &mut e5)] {
            let a = log.align(&format!("trend seed {seed} k_max={k_max}"), &set.sequences, &AlignConfig::new(k_max))?;
            *acc += mean_frame_error(&set, &a.global) / 10.0;
        }
    }
    let detail = format!("mean frame error k_max=5: {e5:.3}, k_max=2: {e2:.3}");
    if e5 < e2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn precision_at_full_recall(set: &SyntheticSet, g: &GlobalMatch) -> Result<f64, String> {
    let t = g.frames.iter().flatten().map(|m| m.cost).fold(0.0, f64::max);
    let c = classify(g, t, &set.ground_truth, Tolerance::Frames(0)).map_err(|e| e.to_string())?;
    if c.recall() != 1.0 {
        return Err(format!("recall {} at the largest match cost", c.recall()));
    }
    Ok(c.precision())
}

fn multi_reference_trend(log: &mut DualityLog) -> Outcome {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in 0..10 {
        let params = SynthParams { n_refs: 3, desync: 2, noise_sigma: 0.05, dropout_prob: 0.3, ..Default::default() };
        let set = generate_synthetic(&params, 200 + seed).map_err(|e| e.to_string())?;
        let three = log.align(&format!("multi seed {seed} N=3"), &set.sequences, &AlignConfig::new(3))?;
        let p3 = precision_at_full_recall(&set, &three.global)?;

        let one_seqs = SequenceSet::new(set.sequences.test().to_vec(), vec![set.sequences.refs()[0].clone()])
            .map_err(|e| e.to_string())?;
        let one = log.align(&format!("multi seed {seed} N=1"), &one_seqs, &AlignConfig::new(3))?;
        let p1 = precision_at_full_recall(&set, &one.global)?;
        if p3 > p1 {
            wins += 1;
        }
        lines.push(format!("{p1:.2}->{p3:.2}"));
    }
    let detail = format!("3 refs beat 1 ref in {wins}/10 seeds [{}]", lines.join(" "));
    if wins >= 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<Descriptor> {
    (0..len).map(|_| Descriptor::new((0..dim).map(|_| StandardNormal.sample(rng)).collect()).unwrap()).collect()
}

fn performance(log: &mut DualityLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E7F);
    let mut details = Vec::new();
    for (n_refs, m, limit) in [(1, 400, 2.0), (2, 600, 4.0)] {
        let test = random_sequence(&mut rng, m, 512);
        let refs = (0..n_refs).map(|_| random_sequence(&mut rng, m, 512)).collect();
        let seqs = SequenceSet::new(test, refs).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let a =
            log.align(&format!("performance N={n_refs} m={m}"), &seqs, &AlignConfig::new(5).with_eta(DEFAULT_ETA))?;
        let wall = start.elapsed().as_secs_f64();
        details.push(format!("N={n_refs} m={m}: {wall:.3} s (max-flow {:.3} s)", a.timings.maxflow.as_secs_f64()));
        if wall > limit {
            return Err(format!("{} exceeds {limit} s", details.join("; ")));
        }
    }
    Ok(details.join("; "))
}

fn metric_fixtures() -> Outcome {
    let d = |v: &[f64]| Descriptor::new(v.to_vec()).unwrap();
    let cases = [
        (d(&[1.0, 2.0, 3.0]), d(&[1.0, 2.0, 3.0]), 0.0),
        (d(&[1.0, 0.0]), d(&[0.0, 1.0]), 1.0),
        (d(&[1.0, 0.0]), d(&[1.0, 1.0]), 1.0 - 2f64.sqrt() / 2.0),
    ];
    for (a, b, want) in &cases {
        let got = cosine_cost(a, b).map_err(|e| e.to_string())?;
        if (got - want).abs() > 1e-12 {
            return Err(format!("cosine cost {got}, expected {want}"));
        }
    }

    // frames 0 and 2 are correct; frames 1 and 3 are not
    let matched = [(0, 0.1), (3, 0.2), (2, 0.6), (0, 0.9)];
    let global = GlobalMatch {
        frames: matched
            .iter()
            .map(|&(f, cost)| Some(BestMatch { ref_index: 0, shift: 0, ref_frame: f, cost }))
            .collect(),
    };
    let gt = GroundTruth::Frames((0..4).map(|j| ((j, 0), j)).collect::<BTreeMap<_, _>>());
    let thresholds = [0.05, 0.1, 0.15, 0.2, 0.5, 0.6, 0.9, 1.0];
    let curve = pr_curve(&global, &gt, Tolerance::Frames(0), &thresholds).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_pr_csv(&curve, &mut csv).map_err(|e| e.to_string())?;
    let golden = include_str!("fixtures/pr_four_frames.csv");
    if String::from_utf8(csv).unwrap() != golden {
        return Err("4-frame precision/recall curve differs from the golden file".into());
    }

    let dist =
        haversine_m(GeoPoint::new(0.0, 0.0).unwrap(), GeoPoint::new(0.0, 1.0).unwrap()).map_err(|e| e.to_string())?;
    if (dist - 111_195.0).abs() > 1.0 {
        return Err(format!("equator degree {dist} m"));
    }
    Ok(format!("cosine cases exact, golden P-R curve matches, equator degree {dist:.2} m"))
}

fn main() -> ExitCode {
    let mut log = DualityLog::default();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "solver oracle equivalence", solver_oracle_equivalence()),
        (3, "surface coverage", surface_coverage(&mut log)),
        (4, "eta limit behaviors", eta_limits(&mut log)),
        (5, "single-reference reduction", single_reference_reduction(&mut log)),
        (6, "noiseless end-to-end recovery", noiseless_recovery(&mut log)),
        (7, "k_max trend", k_max_trend(&mut log)),
        (8, "multi-reference trend", multi_reference_trend(&mut log)),
        (9, "performance", performance(&mut log)),
        (10, "metric fixtures", metric_fixtures()),
    ];
    let duality = if log.failures.is_empty() {
        Ok(format!("{} alignment networks, cut capacity == flow value, cut arcs saturated", log.networks))
    } else {
        Err(format!("{} of {} networks: {}", log.failures.len(), log.networks, log.failures[0]))
    };
    results.insert(1, (2, "duality", duality));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(reason) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({reason})");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
