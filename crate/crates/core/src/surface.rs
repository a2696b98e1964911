//! Matching surface extraction from the minimum cut, and global best match
//! selection.
//!
//! Every `(i, j)` chain of shift arcs runs from a source-fed node to a
//! sink-draining node, so any finite cut crosses it at least once. Among the
//! endpoints of the cut shift arcs of a chain, the node with the lowest
//! matching cost is the local match for test frame `j` in reference `i`;
//! ties go to the smaller shift.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::costvol::CostVolume;
use crate::flownet::{ArcKind, FlowNetwork, MeshLayout, NodeKind};
use crate::maxflow::CutSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("network was not built from this cost volume")]
    LayoutMismatch,
    #[error("no shift arc of chain (i = {i}, j = {j}) is in the cut")]
    EmptyCandidates { i: usize, j: usize },
    #[error("surface and cost volume shapes differ")]
    ShapeMismatch,
    #[error("match CSV error on line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SurfaceError {
    fn from(e: std::io::Error) -> Self {
        SurfaceError::Io(e.to_string())
    }
}

/// Local match of one `(i, j)` chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    /// Shift of the tail of the selected cut arc: where the cut surface
    /// crosses this chain.
    pub cut_k: isize,
    /// Matched shift, `None` when the chosen node lies outside the reference.
    pub k_hat: Option<isize>,
    /// `cost(i, j, k_hat)`, or the pad cost when there is no match.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSurface {
    n_refs: usize,
    n_test: usize,
    k_max: usize,
    pad_cost: f64,
    cells: Vec<SurfaceCell>,
}

impl MatchSurface {
    pub fn n_refs(&self) -> usize {
        self.n_refs
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn pad_cost(&self) -> f64 {
        self.pad_cost
    }

    pub fn cell(&self, i: usize, j: usize) -> &SurfaceCell {
        &self.cells[i * self.n_test + j]
    }

    pub fn k_hat(&self, i: usize, j: usize) -> Option<isize> {
        self.cell(i, j).k_hat
    }

    pub fn match_cost(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j).cost
    }

    /// Reference frame index matched to test frame `j` in reference `i`.
    pub fn ref_frame(&self, i: usize, j: usize) -> Option<usize> {
        self.k_hat(i, j).map(|k| (j as isize + k) as usize)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    cost: f64,
    invalid: bool,
    k: isize,
    cut_k: isize,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.cost.total_cmp(&other.cost).then(self.invalid.cmp(&other.invalid)).then(self.k.cmp(&other.k))
            == Ordering::Less
    }
}

/// Reads the matching surface off a minimum cut of a network built from `vol`.
pub fn extract_surface(net: &FlowNetwork, cut: &CutSet, vol: &CostVolume) -> Result<MatchSurface, SurfaceError> {
    let layout = *net.layout().ok_or(SurfaceError::LayoutMismatch)?;
    if layout != MeshLayout::of(vol) || cut.s_side.len() != net.node_count() {
        return Err(SurfaceError::LayoutMismatch);
    }
    let mut best: Vec<Option<Candidate>> = vec![None; layout.n_refs * layout.n_test];
    for &e in &cut.cut_edges {
        if net.edge_kind(e) != ArcKind::Shift {
            continue;
        }
        let Some(NodeKind::Mesh(u)) = layout.decode(net.tail(2 * e)) else {
            return Err(SurfaceError::LayoutMismatch);
        };
        let slot = &mut best[u.i * layout.n_test + u.j];
        for k in [u.k, u.k + 1] {
            let cand = Candidate { cost: vol.cost(u.i, u.j, k), invalid: !vol.is_valid(u.i, u.j, k), k, cut_k: u.k };
            if slot.as_ref().is_none_or(|b| cand.better_than(b)) {
                *slot = Some(cand);
            }
        }
    }
    let mut cells = Vec::with_capacity(best.len());
    for (idx, cand) in best.into_iter().enumerate() {
        let (i, j) = (idx / layout.n_test, idx % layout.n_test);
        let c = cand.ok_or(SurfaceError::EmptyCandidates { i, j })?;
        cells.push(if c.invalid {
            SurfaceCell { cut_k: c.cut_k, k_hat: None, cost: vol.pad_cost() }
        } else {
            SurfaceCell { cut_k: c.cut_k, k_hat: Some(c.k), cost: c.cost }
        });
    }
    Ok(MatchSurface {
        n_refs: layout.n_refs,
        n_test: layout.n_test,
        k_max: layout.k_max,
        pad_cost: vol.pad_cost(),
        cells,
    })
}

/// Best match for one test frame across all references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub ref_index: usize,
    pub shift: isize,
    pub ref_frame: usize,
    pub cost: f64,
}

/// Per test frame, the lowest-cost local match over all references.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMatch {
    pub frames: Vec<Option<BestMatch>>,
}

impl GlobalMatch {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<&BestMatch> {
        self.frames.get(j).and_then(Option::as_ref)
    }
}

/// Picks, for every test frame, the reference whose local match is cheapest
/// (ties to the smaller reference index). Frames where every reference is a
/// no-match stay unmatched.
pub fn global_best(surf: &MatchSurface) -> GlobalMatch {
    let frames = (0..surf.n_test)
        .map(|j| {
            let mut best: Option<BestMatch> = None;
            for i in 0..surf.n_refs {
                let cell = surf.cell(i, j);
                let Some(k) = cell.k_hat else { continue };
                if best.as_ref().is_none_or(|b| cell.cost < b.cost) {
                    best = Some(BestMatch {
                        ref_index: i,
                        shift: k,
                        ref_frame: (j as isize + k) as usize,
                        cost: cell.cost,
                    });
                }
            }
            best
        })
        .collect();
    GlobalMatch { frames }
}

/// Checks that a surface and a volume describe the same index ranges.
pub fn check_shape(surf: &MatchSurface, vol: &CostVolume) -> Result<(), SurfaceError> {
    if surf.n_refs != vol.n_refs() || surf.n_test != vol.n_test() || surf.k_max != vol.k_max() {
        return Err(SurfaceError::ShapeMismatch);
    }
    Ok(())
}

pub const MATCH_CSV_HEADER: &str = "j,i,k_hat,ref_frame,cost,is_global_best";

/// Writes one row per `(i, j)`, `j`-major, flagging the global best.
pub fn write_match_csv<W: Write>(surf: &MatchSurface, global: &GlobalMatch, mut sink: W) -> Result<(), SurfaceError> {
    writeln!(sink, "{MATCH_CSV_HEADER}")?;
    for j in 0..surf.n_test {
        for i in 0..surf.n_refs {
            let cell = surf.cell(i, j);
            let is_best = global.get(j).is_some_and(|b| b.ref_index == i);
            match cell.k_hat {
                Some(k) => writeln!(sink, "{j},{i},{k},{},{},{}", j as isize + k, cell.cost, u8::from(is_best))?,
                None => writeln!(sink, "{j},{i},,,{},0", surf.pad_cost)?,
            }
        }
    }
    sink.flush()?;
    Ok(())
}

/// One row of a match CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRow {
    pub j: usize,
    pub i: usize,
    pub k_hat: Option<isize>,
    pub ref_frame: Option<usize>,
    pub cost: f64,
    pub is_global_best: bool,
}

pub fn read_match_csv<R: BufRead>(source: R) -> Result<Vec<MatchRow>, SurfaceError> {
    let err = |line: usize, reason: String| SurfaceError::Csv { line, reason };
    let mut lines = source.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty input".into()))??;
    if header.trim() != MATCH_CSV_HEADER {
        return Err(err(1, format!("expected header '{MATCH_CSV_HEADER}'")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(err(no, format!("expected 6 fields, found {}", f.len())));
        }
        let uint = |s: &str, name: &str| s.parse::<usize>().map_err(|_| err(no, format!("bad {name} '{s}'")));
        let k_hat = Some(f[2])
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<isize>().map_err(|_| err(no, format!("bad k_hat '{s}'"))))
            .transpose()?;
        let ref_frame = Some(f[3]).filter(|s| !s.is_empty()).map(|s| uint(s, "ref_frame")).transpose()?;
        if k_hat.is_some() != ref_frame.is_some() {
            return Err(err(no, "k_hat and ref_frame must both be present or both empty".into()));
        }
        let cost: f64 = f[4].parse().map_err(|_| err(no, format!("bad cost '{}'", f[4])))?;
        let is_global_best = match f[5] {
            "1" => true,
            "0" => false,
            other => return Err(err(no, format!("bad is_global_best '{other}'"))),
        };
        rows.push(MatchRow { j: uint(f[0], "j")?, i: uint(f[1], "i")?, k_hat, ref_frame, cost, is_global_best });
    }
    Ok(rows)
}

/// Rebuilds the global matches from match CSV rows.
pub fn global_from_rows(rows: &[MatchRow]) -> Result<GlobalMatch, SurfaceError> {
    let n_test = rows.iter().map(|r| r.j + 1).max().unwrap_or(0);
    let mut frames: Vec<Option<BestMatch>> = vec![None; n_test];
    for r in rows.iter().filter(|r| r.is_global_best) {
        let (Some(shift), Some(ref_frame)) = (r.k_hat, r.ref_frame) else {
            return Err(SurfaceError::Csv { line: 0, reason: format!("global best for frame {} has no match", r.j) });
        };
        if frames[r.j].is_some() {
            return Err(SurfaceError::Csv { line: 0, reason: format!("frame {} has two global best rows", r.j) });
        }
        frames[r.j] = Some(BestMatch { ref_index: r.i, shift, ref_frame, cost: r.cost });
    }
    Ok(GlobalMatch { frames })
}
