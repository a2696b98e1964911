//! Evaluation against ground truth and synthetic experiment data.

mod groundtruth;
mod metrics;
mod report;
mod synth;

pub use groundtruth::{GeoPoint, GroundTruth};
pub use metrics::{
    classify, gps_error_stats, haversine_m, pr_curve, Counts, GpsErrorStats, PrPoint, Tolerance, EARTH_RADIUS_M,
};
pub use report::{pr_svg, write_pr_csv, EvalReport};
pub use synth::{generate_synthetic, SynthParams, SyntheticSet};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("tolerance mode does not match the ground truth mode")]
    ModeMismatch,
    #[error("ground truth has no entry for test frame {0}")]
    MissingFrame(usize),
    #[error("no GPS coordinate for {0}")]
    MissingGps(String),
    #[error("coordinate ({lat}, {lon}) out of range")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("thresholds must be a non-empty ascending list")]
    BadThresholds,
    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),
    #[error("ground truth CSV error on line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Io(e.to_string())
    }
}
