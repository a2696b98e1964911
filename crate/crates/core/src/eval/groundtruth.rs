use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use super::EvalError;

/// Latitude and longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, EvalError> {
        if !((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)) {
            return Err(EvalError::InvalidCoordinate { lat, lon });
        }
        Ok(GeoPoint { lat, lon })
    }
}

/// Known correspondences for a test sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    /// True reference frame per `(test frame j, reference i)`. A frame may
    /// lack an entry for some references (no correspondence there).
    Frames(BTreeMap<(usize, usize), usize>),
    /// GPS position of every test frame and every reference frame.
    Gps { test: BTreeMap<usize, GeoPoint>, refs: BTreeMap<usize, BTreeMap<usize, GeoPoint>> },
}

pub(crate) const FRAME_HEADER: &str = "j,i,true_ref_frame";
pub(crate) const GPS_HEADER: &str = "seq,frame,lat,lon";

impl GroundTruth {
    /// Test frames with at least one frame-mode entry.
    pub(crate) fn covered_frames(&self) -> BTreeSet<usize> {
        match self {
            GroundTruth::Frames(rows) => rows.keys().map(|&(j, _)| j).collect(),
            GroundTruth::Gps { test, .. } => test.keys().copied().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<(), EvalError> {
        match self {
            GroundTruth::Frames(rows) => {
                writeln!(sink, "{FRAME_HEADER}")?;
                for (&(j, i), f) in rows {
                    writeln!(sink, "{j},{i},{f}")?;
                }
            }
            GroundTruth::Gps { test, refs } => {
                writeln!(sink, "{GPS_HEADER}")?;
                for (f, p) in test {
                    writeln!(sink, "test,{f},{},{}", p.lat, p.lon)?;
                }
                for (i, frames) in refs {
                    for (f, p) in frames {
                        writeln!(sink, "{i},{f},{},{}", p.lat, p.lon)?;
                    }
                }
            }
        }
        sink.flush()?;
        Ok(())
    }

    /// Reads either CSV flavor; the header decides the mode.
    pub fn read_csv<R: BufRead>(source: R) -> Result<Self, EvalError> {
        let err = |line: usize, reason: String| EvalError::Csv { line, reason };
        let mut lines = source.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty input".into()))??;
        let gps = match header.trim() {
            FRAME_HEADER => false,
            GPS_HEADER => true,
            other => return Err(err(1, format!("unknown header '{other}'"))),
        };
        let mut rows = BTreeMap::new();
        let mut test = BTreeMap::new();
        let mut refs: BTreeMap<usize, BTreeMap<usize, GeoPoint>> = BTreeMap::new();
        for (idx, line) in lines.enumerate() {
            let no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim().split(',').collect();
            let uint = |s: &str| s.parse::<usize>().map_err(|_| err(no, format!("bad index '{s}'")));
            if gps {
                if f.len() != 4 {
                    return Err(err(no, format!("expected 4 fields, found {}", f.len())));
                }
                let real = |s: &str| s.parse::<f64>().map_err(|_| err(no, format!("bad coordinate '{s}'")));
                let p = GeoPoint::new(real(f[2])?, real(f[3])?).map_err(|e| err(no, e.to_string()))?;
                let frame = uint(f[1])?;
                let prev = if f[0] == "test" {
                    test.insert(frame, p)
                } else {
                    refs.entry(uint(f[0])?).or_default().insert(frame, p)
                };
                if prev.is_some() {
                    return Err(err(no, format!("duplicate entry for {} frame {frame}", f[0])));
                }
            } else {
                if f.len() != 3 {
                    return Err(err(no, format!("expected 3 fields, found {}", f.len())));
                }
                if rows.insert((uint(f[0])?, uint(f[1])?), uint(f[2])?).is_some() {
                    return Err(err(no, format!("duplicate entry for j={}, i={}", f[0], f[1])));
                }
            }
        }
        Ok(if gps { GroundTruth::Gps { test, refs } } else { GroundTruth::Frames(rows) })
    }
}
