//! Synthetic sequence sets with known correspondence.
//!
//! A route is a chain of `n_places` unit-norm place descriptors: independent
//! random directions, each averaged with its neighbors so adjacent places
//! look alike. Every sequence traverses the route once. The test sequence
//! starts at place `desync`, each reference at a random place in
//! `0..=desync`, so every test place is covered by every reference. While
//! traversing, a sequence may stop (repeat the current place) with
//! probability `speed_jitter` per frame, at most `max_stops` times.
//! Observations add Gaussian noise; reference frames are replaced by pure
//! noise with probability `dropout_prob`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{EvalError, GroundTruth};
use crate::costvol::SequenceSet;
use crate::features::Descriptor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_places: usize,
    pub n_refs: usize,
    pub dim: usize,
    /// Per-frame stop probability.
    pub speed_jitter: f64,
    /// Upper bound on stops per sequence; only used when `speed_jitter > 0`.
    pub max_stops: usize,
    /// Largest start offset of a reference relative to the test sequence.
    pub desync: usize,
    pub noise_sigma: f64,
    pub dropout_prob: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_places: 60,
            n_refs: 3,
            dim: 32,
            speed_jitter: 0.0,
            max_stops: 2,
            desync: 0,
            noise_sigma: 0.0,
            dropout_prob: 0.0,
        }
    }
}

impl SynthParams {
    fn stops(&self) -> usize {
        if self.speed_jitter > 0.0 {
            self.max_stops
        } else {
            0
        }
    }

    pub fn test_len(&self) -> usize {
        self.n_places.saturating_sub(2 * self.desync + self.stops())
    }

    pub fn ref_len(&self) -> usize {
        self.test_len() + self.desync + self.stops()
    }

    fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidParams(m));
        if self.n_places < 4 {
            return bad(format!("n_places must be >= 4, got {}", self.n_places));
        }
        if self.dim < 8 {
            return bad(format!("dim must be >= 8, got {}", self.dim));
        }
        if self.n_refs < 1 {
            return bad("n_refs must be >= 1".into());
        }
        for (name, p) in [("speed_jitter", self.speed_jitter), ("dropout_prob", self.dropout_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.test_len() < 2 {
            return bad(format!(
                "n_places = {} too small for desync {} and {} stops",
                self.n_places,
                self.desync,
                self.stops()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub sequences: SequenceSet,
    pub ground_truth: GroundTruth,
    /// Route place shown by each test frame.
    pub test_places: Vec<usize>,
    /// Route place shown by each frame of each reference.
    pub ref_places: Vec<Vec<usize>>,
    /// Frames of each reference replaced by noise.
    pub dropped: Vec<Vec<bool>>,
}

impl SyntheticSet {
    /// True shift `f - j` for test frame `j` in reference `i`.
    pub fn true_shift(&self, i: usize, j: usize) -> Option<isize> {
        match &self.ground_truth {
            GroundTruth::Frames(rows) => rows.get(&(j, i)).map(|&f| f as isize - j as isize),
            GroundTruth::Gps { .. } => None,
        }
    }
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn traverse(rng: &mut ChaCha8Rng, start: usize, len: usize, p_stop: f64, max_stops: usize) -> Vec<usize> {
    let mut places = Vec::with_capacity(len);
    let (mut place, mut stops) = (start, 0);
    for _ in 0..len {
        places.push(place);
        if stops < max_stops && p_stop > 0.0 && rng.random_bool(p_stop) {
            stops += 1;
        } else {
            place += 1;
        }
    }
    places
}

/// Generates a sequence set and its frame-mode ground truth. Identical
/// parameters and seed give bit-identical output.
pub fn generate_synthetic(params: &SynthParams, seed: u64) -> Result<SyntheticSet, EvalError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = params.dim;

    let raw: Vec<Vec<f64>> = (0..params.n_places).map(|_| unit_gaussian(&mut rng, dim)).collect();
    let places: Vec<Vec<f64>> = (0..params.n_places)
        .map(|p| {
            let lo = p.saturating_sub(1);
            let hi = (p + 1).min(params.n_places - 1);
            let mut v = vec![0.0; dim];
            for r in &raw[lo..=hi] {
                v.iter_mut().zip(r).for_each(|(a, b)| *a += b);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();

    let stops = params.stops();
    let test_places = traverse(&mut rng, params.desync, params.test_len(), params.speed_jitter, stops);
    let ref_places: Vec<Vec<usize>> = (0..params.n_refs)
        .map(|_| {
            let start = rng.random_range(0..=params.desync);
            traverse(&mut rng, start, params.ref_len(), params.speed_jitter, stops)
        })
        .collect();

    let noise = Normal::new(0.0, params.noise_sigma).map_err(|e| EvalError::InvalidParams(e.to_string()))?;
    let observe = |rng: &mut ChaCha8Rng, place: usize| -> Descriptor {
        let mut v = places[place].clone();
        if params.noise_sigma > 0.0 {
            v.iter_mut().for_each(|x| *x += noise.sample(rng));
        }
        Descriptor::new(v).expect("finite")
    };
    let test: Vec<Descriptor> = test_places.iter().map(|&p| observe(&mut rng, p)).collect();
    let mut dropped = Vec::with_capacity(params.n_refs);
    let refs: Vec<Vec<Descriptor>> = ref_places
        .iter()
        .map(|seq| {
            let mut drops = Vec::with_capacity(seq.len());
            let frames = seq
                .iter()
                .map(|&p| {
                    let d = observe(&mut rng, p);
                    let drop = params.dropout_prob > 0.0 && rng.random_bool(params.dropout_prob);
                    drops.push(drop);
                    if drop {
                        Descriptor::new(unit_gaussian(&mut rng, dim)).expect("finite")
                    } else {
                        d
                    }
                })
                .collect();
            dropped.push(drops);
            frames
        })
        .collect();

    let mut rows = BTreeMap::new();
    for (j, &p) in test_places.iter().enumerate() {
        for (i, seq) in ref_places.iter().enumerate() {
            if let Some(f) = seq.iter().position(|&q| q == p) {
                rows.insert((j, i), f);
            }
        }
    }
    let sequences = SequenceSet::new(test, refs).map_err(|e| EvalError::InvalidParams(e.to_string()))?;
    Ok(SyntheticSet { sequences, ground_truth: GroundTruth::Frames(rows), test_places, ref_places, dropped })
}
