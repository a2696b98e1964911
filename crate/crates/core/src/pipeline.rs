//! End-to-end alignment: cost volume, network, max-flow, cut, surface.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::costvol::{build_cost_volume, CostVolError, CostVolume, SequenceSet, DEFAULT_PAD_COST};
use crate::flownet::{build_network, FlowNetwork, FlownetError, DEFAULT_ETA, DEFAULT_SCALE};
use crate::maxflow::{min_cut_from_residual, push_relabel_max_flow, CutSet, FlowResult, MaxflowError};
use crate::surface::{extract_surface, global_best, GlobalMatch, MatchSurface, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error(transparent)]
    CostVolume(#[from] CostVolError),
    #[error(transparent)]
    Network(#[from] FlownetError),
    #[error(transparent)]
    Maxflow(#[from] MaxflowError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("cut capacity {cut} differs from flow value {flow}")]
    Duality { flow: i64, cut: i64 },
    #[error("cut arc {0} is not saturated")]
    Unsaturated(usize),
}

impl AlignError {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        !matches!(self, AlignError::CostVolume(_) | AlignError::Network(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub k_max: usize,
    pub eta: f64,
    pub scale: i64,
    pub pad_cost: f64,
}

impl AlignConfig {
    pub fn new(k_max: usize) -> Self {
        AlignConfig { k_max, eta: DEFAULT_ETA, scale: DEFAULT_SCALE, pad_cost: DEFAULT_PAD_COST }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_scale(mut self, scale: i64) -> Self {
        self.scale = scale;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub volume: Duration,
    pub network: Duration,
    pub maxflow: Duration,
    pub cut: Duration,
    pub surface: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.volume + self.network + self.maxflow + self.cut + self.surface
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    pub volume: CostVolume,
    pub network: FlowNetwork,
    pub flow: FlowResult,
    pub cut: CutSet,
    pub surface: MatchSurface,
    pub global: GlobalMatch,
    pub timings: StageTimings,
}

impl Alignment {
    pub fn flow_value(&self) -> i64 {
        self.flow.flow_value
    }

    pub fn cut_capacity(&self) -> i64 {
        self.cut.capacity
    }
}

/// Aligns the test sequence of `seqs` against every reference.
pub fn align(seqs: &SequenceSet, cfg: &AlignConfig) -> Result<Alignment, AlignError> {
    let t = Instant::now();
    let volume = build_cost_volume(seqs, cfg.k_max, cfg.pad_cost)?;
    let elapsed = t.elapsed();
    let mut out = align_volume(volume, cfg.eta, cfg.scale)?;
    out.timings.volume = elapsed;
    Ok(out)
}

/// Runs everything after cost volume construction.
pub fn align_volume(volume: CostVolume, eta: f64, scale: i64) -> Result<Alignment, AlignError> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let network = build_network(&volume, eta, scale)?;
    timings.network = t.elapsed();
    log::debug!("network: {} nodes, {} arcs", network.node_count(), network.edge_count());

    let t = Instant::now();
    let flow = push_relabel_max_flow(&network)?;
    timings.maxflow = t.elapsed();

    let t = Instant::now();
    let cut = min_cut_from_residual(&network, &flow)?;
    timings.cut = t.elapsed();
    check_duality(&flow, &cut)?;

    let t = Instant::now();
    let surface = extract_surface(&network, &cut, &volume)?;
    let global = global_best(&surface);
    timings.surface = t.elapsed();

    Ok(Alignment { volume, network, flow, cut, surface, global, timings })
}

/// Cut capacity must equal the flow value and every cut arc must be saturated.
pub fn check_duality(flow: &FlowResult, cut: &CutSet) -> Result<(), AlignError> {
    if cut.capacity != flow.flow_value {
        return Err(AlignError::Duality { flow: flow.flow_value, cut: cut.capacity });
    }
    if let Some(&e) = cut.cut_edges.iter().find(|&&e| flow.residual[2 * e] != 0) {
        return Err(AlignError::Unsaturated(e));
    }
    Ok(())
}
