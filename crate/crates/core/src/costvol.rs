//! Cost volume of candidate matches between the test sequence and every
//! reference sequence.
//!
//! Entry `(i, j, k)` holds the cost of matching test frame `j` with frame
//! `j + k` of reference `i`, for shifts `k` in `[-k_max, k_max]`. Entries
//! whose reference frame falls outside the reference sequence are invalid and
//! carry `pad_cost`.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::features::{cosine_cost, Descriptor, FeatureError};

/// Default cost for out-of-range candidates: the top of the cosine cost range.
pub const DEFAULT_PAD_COST: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostVolError {
    #[error("sequence set: {0}")]
    InvalidSequences(String),
    #[error("k_max must be at least 1")]
    InvalidKmax,
    #[error("pad cost {0} must be finite and >= 2.0")]
    InvalidPadCost(f64),
    #[error("cost at ({i}, {j}, {k}) is {value}, costs must be finite and non-negative")]
    InvalidCost { i: usize, j: usize, k: isize, value: f64 },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("CVOL format error on line {line}: {reason}")]
    Cvol { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CostVolError {
    fn from(e: std::io::Error) -> Self {
        CostVolError::Io(e.to_string())
    }
}

/// A test sequence together with `N` reference sequences, all sharing one
/// descriptor dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    test: Vec<Descriptor>,
    refs: Vec<Vec<Descriptor>>,
}

impl SequenceSet {
    pub fn new(test: Vec<Descriptor>, refs: Vec<Vec<Descriptor>>) -> Result<Self, CostVolError> {
        let bad = |msg: String| Err(CostVolError::InvalidSequences(msg));
        if test.len() < 2 {
            return bad(format!("test sequence needs at least 2 frames, has {}", test.len()));
        }
        if refs.is_empty() {
            return bad("at least one reference sequence is required".into());
        }
        if let Some((i, r)) = refs.iter().enumerate().find(|(_, r)| r.len() < 2) {
            return bad(format!("reference {i} needs at least 2 frames, has {}", r.len()));
        }
        let dim = test[0].dim();
        let all = test.iter().chain(refs.iter().flatten());
        if let Some(d) = all.into_iter().find(|d| d.dim() != dim) {
            return Err(FeatureError::DimensionMismatch(dim, d.dim()).into());
        }
        Ok(SequenceSet { test, refs })
    }

    pub fn test(&self) -> &[Descriptor] {
        &self.test
    }

    pub fn refs(&self) -> &[Vec<Descriptor>] {
        &self.refs
    }

    pub fn ref_lengths(&self) -> Vec<usize> {
        self.refs.iter().map(Vec::len).collect()
    }

    pub fn dim(&self) -> usize {
        self.test[0].dim()
    }
}

/// Default `k_max` when the caller does not pick one: half the length of the
/// shortest reference sequence (at least 1).
pub fn auto_k_max(ref_lengths: &[usize]) -> usize {
    (ref_lengths.iter().copied().min().unwrap_or(2) / 2).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    n_refs: usize,
    n_test: usize,
    k_max: usize,
    ref_lengths: Vec<usize>,
    costs: Vec<f64>,
    pad_cost: f64,
}

impl CostVolume {
    /// Assembles a volume from raw costs laid out `i`-major, then `j`, then
    /// `k` ascending. Invalid entries are overwritten with `pad_cost`.
    pub fn from_raw(
        n_test: usize,
        k_max: usize,
        ref_lengths: Vec<usize>,
        mut costs: Vec<f64>,
        pad_cost: f64,
    ) -> Result<Self, CostVolError> {
        if k_max == 0 {
            return Err(CostVolError::InvalidKmax);
        }
        if !(pad_cost.is_finite() && pad_cost >= DEFAULT_PAD_COST) {
            return Err(CostVolError::InvalidPadCost(pad_cost));
        }
        if n_test == 0 || ref_lengths.is_empty() {
            return Err(CostVolError::InvalidSequences("empty volume".into()));
        }
        let k_span = 2 * k_max + 1;
        let expected = ref_lengths.len() * n_test * k_span;
        if costs.len() != expected {
            return Err(CostVolError::InvalidSequences(format!(
                "{} costs for a {}x{}x{} volume",
                costs.len(),
                ref_lengths.len(),
                n_test,
                k_span
            )));
        }
        let mut vol = CostVolume { n_refs: ref_lengths.len(), n_test, k_max, ref_lengths, costs: Vec::new(), pad_cost };
        for i in 0..vol.n_refs {
            for j in 0..n_test {
                for k in vol.shifts() {
                    let idx = vol.index(i, j, k);
                    if !vol.is_valid(i, j, k) {
                        costs[idx] = pad_cost;
                    } else if !(costs[idx].is_finite() && costs[idx] >= 0.0) {
                        return Err(CostVolError::InvalidCost { i, j, k, value: costs[idx] });
                    }
                }
            }
        }
        vol.costs = costs;
        Ok(vol)
    }

    pub fn n_refs(&self) -> usize {
        self.n_refs
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Number of shifts per `(i, j)`: `2 k_max + 1`.
    pub fn k_span(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn pad_cost(&self) -> f64 {
        self.pad_cost
    }

    pub fn ref_lengths(&self) -> &[usize] {
        &self.ref_lengths
    }

    /// Shift range `-k_max..=k_max`.
    pub fn shifts(&self) -> std::ops::RangeInclusive<isize> {
        -(self.k_max as isize)..=self.k_max as isize
    }

    pub fn contains(&self, i: usize, j: usize, k: isize) -> bool {
        i < self.n_refs && j < self.n_test && k.unsigned_abs() <= self.k_max
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: isize) -> usize {
        debug_assert!(self.contains(i, j, k));
        (i * self.n_test + j) * self.k_span() + (k + self.k_max as isize) as usize
    }

    /// Whether reference frame `j + k` exists in reference `i`.
    pub fn is_valid(&self, i: usize, j: usize, k: isize) -> bool {
        let f = j as isize + k;
        f >= 0 && (f as usize) < self.ref_lengths[i]
    }

    /// # Panics
    /// If `(i, j, k)` lies outside the volume.
    #[inline]
    pub fn cost(&self, i: usize, j: usize, k: isize) -> f64 {
        assert!(self.contains(i, j, k), "({i}, {j}, {k}) outside the cost volume");
        self.costs[self.index(i, j, k)]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Returns a copy with every cost (and the pad cost) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, CostVolError> {
        let costs = self.costs.iter().map(|c| c * factor).collect();
        CostVolume::from_raw(self.n_test, self.k_max, self.ref_lengths.clone(), costs, self.pad_cost * factor)
    }

    /// Writes the `CVOL` text cache: a header line, then one line of
    /// `2 k_max + 1` costs per `(i, j)`, `i`-major.
    pub fn write_cvol<W: Write>(&self, mut sink: W) -> Result<(), CostVolError> {
        writeln!(sink, "CVOL {} {} {} {}", self.n_refs, self.n_test, self.k_max, self.pad_cost)?;
        let mut line = String::new();
        for row in self.costs.chunks(self.k_span()) {
            line.clear();
            for (idx, c) in row.iter().enumerate() {
                if idx > 0 {
                    line.push(' ');
                }
                line.push_str(&c.to_string());
            }
            line.push('\n');
            sink.write_all(line.as_bytes())?;
        }
        sink.flush()?;
        Ok(())
    }

    /// Reads a `CVOL` cache. The validity mask is not stored in the file, so
    /// the reference lengths must be supplied; invalid entries must hold the
    /// pad cost.
    pub fn read_cvol<R: BufRead>(source: R, ref_lengths: Vec<usize>) -> Result<Self, CostVolError> {
        let err = |line: usize, reason: String| CostVolError::Cvol { line, reason };
        let mut lines = source.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty input".into()))??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "CVOL" {
            return Err(err(1, format!("expected 'CVOL <N> <m> <k_max> <pad_cost>', got '{header}'")));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(1, format!("bad integer '{s}'")));
        let (n_refs, n_test, k_max) = (int(parts[1])?, int(parts[2])?, int(parts[3])?);
        let pad: f64 = parts[4].parse().map_err(|_| err(1, format!("bad pad cost '{}'", parts[4])))?;
        if ref_lengths.len() != n_refs {
            return Err(err(1, format!("{} reference lengths given for N = {n_refs}", ref_lengths.len())));
        }
        let k_span = 2 * k_max + 1;
        let mut costs = Vec::with_capacity(n_refs * n_test * k_span);
        let mut rows = 0;
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            rows += 1;
            let before = costs.len();
            for tok in line.split_whitespace() {
                costs.push(tok.parse::<f64>().map_err(|_| err(idx + 2, format!("non-numeric token '{tok}'")))?);
            }
            if costs.len() - before != k_span {
                return Err(err(idx + 2, format!("row has {} costs, expected {k_span}", costs.len() - before)));
            }
        }
        if rows != n_refs * n_test {
            return Err(err(rows + 2, format!("found {rows} rows, expected {}", n_refs * n_test)));
        }
        let raw = costs.clone();
        let vol = CostVolume::from_raw(n_test, k_max, ref_lengths, costs, pad)?;
        if let Some(pos) = raw.iter().zip(&vol.costs).position(|(a, b)| a != b) {
            return Err(err(pos / k_span + 2, "invalid entry does not hold the pad cost".into()));
        }
        Ok(vol)
    }
}

/// Computes `cost(i, j, k) = cosine_cost(test[j], refs[i][j + k])` for every
/// valid entry and `pad_cost` elsewhere.
pub fn build_cost_volume(seqs: &SequenceSet, k_max: usize, pad_cost: f64) -> Result<CostVolume, CostVolError> {
    if k_max == 0 {
        return Err(CostVolError::InvalidKmax);
    }
    let n_test = seqs.test.len();
    let k_span = 2 * k_max + 1;
    let mut costs = Vec::with_capacity(seqs.refs.len() * n_test * k_span);
    for reference in &seqs.refs {
        for (j, frame) in seqs.test.iter().enumerate() {
            for k in -(k_max as isize)..=k_max as isize {
                let f = j as isize + k;
                if f >= 0 && (f as usize) < reference.len() {
                    costs.push(cosine_cost(frame, &reference[f as usize])?);
                } else {
                    costs.push(pad_cost);
                }
            }
        }
    }
    CostVolume::from_raw(n_test, k_max, seqs.ref_lengths(), costs, pad_cost)
}
