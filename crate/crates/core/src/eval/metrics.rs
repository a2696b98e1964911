use super::{EvalError, GeoPoint, GroundTruth};
use crate::surface::{BestMatch, GlobalMatch};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// How close a positive match must be to the ground truth to count as a TP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Frames(usize),
    Meters(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    /// `TP / (TP + FP)`, defined as 1.0 when there are no positives.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// `TP / (TP + FN)`, defined as 1.0 when both are zero.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub counts: Counts,
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> Result<f64, EvalError> {
    let a = GeoPoint::new(a.lat, a.lon)?;
    let b = GeoPoint::new(b.lat, b.lon)?;
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin())
}

fn gps_point(gt: &GroundTruth, seq: Option<usize>, frame: usize) -> Result<GeoPoint, EvalError> {
    let GroundTruth::Gps { test, refs } = gt else {
        return Err(EvalError::ModeMismatch);
    };
    let found = match seq {
        None => test.get(&frame),
        Some(i) => refs.get(&i).and_then(|r| r.get(&frame)),
    };
    found.copied().ok_or_else(|| {
        EvalError::MissingGps(match seq {
            None => format!("test frame {frame}"),
            Some(i) => format!("reference {i} frame {frame}"),
        })
    })
}

/// Whether a matched frame agrees with the ground truth within `tol`.
fn is_correct(j: usize, m: &BestMatch, gt: &GroundTruth, tol: Tolerance) -> Result<bool, EvalError> {
    match (gt, tol) {
        (GroundTruth::Frames(rows), Tolerance::Frames(tol)) => {
            Ok(rows.get(&(j, m.ref_index)).is_some_and(|&truth| truth.abs_diff(m.ref_frame) <= tol))
        }
        (GroundTruth::Gps { .. }, Tolerance::Meters(tol)) => {
            let d = haversine_m(gps_point(gt, None, j)?, gps_point(gt, Some(m.ref_index), m.ref_frame)?)?;
            Ok(d <= tol)
        }
        _ => Err(EvalError::ModeMismatch),
    }
}

fn check_mode(gt: &GroundTruth, tol: Tolerance) -> Result<(), EvalError> {
    match (gt, tol) {
        (GroundTruth::Frames(_), Tolerance::Frames(_)) | (GroundTruth::Gps { .. }, Tolerance::Meters(_)) => Ok(()),
        _ => Err(EvalError::ModeMismatch),
    }
}

/// Per-frame correctness, `None` for unmatched frames.
fn correctness(matches: &GlobalMatch, gt: &GroundTruth, tol: Tolerance) -> Result<Vec<Option<bool>>, EvalError> {
    check_mode(gt, tol)?;
    let covered = gt.covered_frames();
    (0..matches.len())
        .map(|j| {
            if !covered.contains(&j) {
                return Err(match gt {
                    GroundTruth::Frames(_) => EvalError::MissingFrame(j),
                    GroundTruth::Gps { .. } => EvalError::MissingGps(format!("test frame {j}")),
                });
            }
            matches.get(j).map(|m| is_correct(j, m, gt, tol)).transpose()
        })
        .collect()
}

fn count_at(matches: &GlobalMatch, correct: &[Option<bool>], t: f64) -> Counts {
    let mut c = Counts::default();
    for (j, ok) in correct.iter().enumerate() {
        match (matches.get(j), ok) {
            (Some(m), Some(true)) if m.cost <= t => c.tp += 1,
            (Some(m), Some(false)) if m.cost <= t => c.fp += 1,
            _ => c.fn_ += 1,
        }
    }
    c
}

/// Splits frames into TP / FP / FN at threshold `t`.
///
/// A frame whose best cost is at most `t` is positive; a positive within
/// `tol` of the ground truth is a TP, otherwise an FP. Negatives and
/// unmatched frames are FNs.
pub fn classify(matches: &GlobalMatch, t: f64, gt: &GroundTruth, tol: Tolerance) -> Result<Counts, EvalError> {
    let correct = correctness(matches, gt, tol)?;
    Ok(count_at(matches, &correct, t))
}

pub fn pr_curve(
    matches: &GlobalMatch,
    gt: &GroundTruth,
    tol: Tolerance,
    thresholds: &[f64],
) -> Result<Vec<PrPoint>, EvalError> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[0] > w[1]) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(EvalError::BadThresholds);
    }
    let correct = correctness(matches, gt, tol)?;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let counts = count_at(matches, &correct, t);
            PrPoint { threshold: t, precision: counts.precision(), recall: counts.recall(), counts }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpsErrorStats {
    /// Mean error over matched frames (0 when nothing matched).
    pub mean_m: f64,
    /// Population variance over matched frames.
    pub variance_m: f64,
    /// `(distance, percent of all frames with error above it)`; unmatched
    /// frames count as exceeding every distance.
    pub percentage_error: Vec<(f64, f64)>,
    pub matched: usize,
    pub total: usize,
}

/// GPS localization error of the global matches, independent of any
/// positive/negative threshold.
pub fn gps_error_stats(matches: &GlobalMatch, gt: &GroundTruth, distances: &[f64]) -> Result<GpsErrorStats, EvalError> {
    if !matches!(gt, GroundTruth::Gps { .. }) {
        return Err(EvalError::ModeMismatch);
    }
    let mut errors = Vec::with_capacity(matches.len());
    for j in 0..matches.len() {
        if let Some(m) = matches.get(j) {
            errors.push(haversine_m(gps_point(gt, None, j)?, gps_point(gt, Some(m.ref_index), m.ref_frame)?)?);
        }
    }
    let total = matches.len();
    let matched = errors.len();
    let (mean_m, variance_m) = if matched == 0 {
        (0.0, 0.0)
    } else {
        let mean = errors.iter().sum::<f64>() / matched as f64;
        (mean, errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / matched as f64)
    };
    let percentage_error = distances
        .iter()
        .map(|&d| {
            let above = errors.iter().filter(|&&e| e > d).count() + (total - matched);
            let pct = if total == 0 { 0.0 } else { 100.0 * above as f64 / total as f64 };
            (d, pct)
        })
        .collect();
    Ok(GpsErrorStats { mean_m, variance_m, percentage_error, matched, total })
}
