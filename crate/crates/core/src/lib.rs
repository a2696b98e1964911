//! Alignment of a test image sequence against several reference sequences
//! by computing the minimum cut of a 3D flow network.
//!
//! The pipeline runs in stages, one module each:
//!
//! 1. [`features`]: grayscale images to HOG descriptors, cosine matching cost.
//! 2. [`costvol`]: the `N x m x (2 k_max + 1)` volume of candidate match costs.
//! 3. [`flownet`]: the directed mesh network with scaled integer capacities.
//! 4. [`maxflow`]: push-relabel maximum flow and residual min-cut recovery.
//! 5. [`surface`]: the matching surface and the global best match per frame.
//! 6. [`eval`]: precision/recall, GPS error statistics, synthetic data.
//!
//! [`pipeline::align`] wires stages 2 to 5 together.

pub mod costvol;
pub mod eval;
pub mod features;
pub mod flownet;
pub mod maxflow;
pub mod pipeline;
pub mod surface;

pub use costvol::{build_cost_volume, CostVolume, SequenceSet};
pub use features::{cosine_cost, Descriptor, Image};
pub use flownet::{build_network, FlowNetwork};
pub use maxflow::{min_cut_from_residual, push_relabel_max_flow, CutSet, FlowResult};
pub use pipeline::{align, align_volume, AlignConfig, AlignError, Alignment};
pub use surface::{extract_surface, global_best, GlobalMatch, MatchSurface};
