use std::io::{BufRead, Write};

use super::{Descriptor, FeatureError};

/// Writes descriptors in the `FVEC` text format: a `FVEC <count> <dim>`
/// header, then one space-separated row per descriptor. Values are written
/// with the shortest representation that round-trips exactly.
pub fn write_fvec<W: Write>(descs: &[Descriptor], mut sink: W) -> Result<(), FeatureError> {
    let dim = descs.first().map_or(0, Descriptor::dim);
    if let Some(bad) = descs.iter().find(|d| d.dim() != dim) {
        return Err(FeatureError::DimensionMismatch(dim, bad.dim()));
    }
    writeln!(sink, "FVEC {} {}", descs.len(), dim)?;
    let mut line = String::new();
    for d in descs {
        line.clear();
        for (idx, v) in d.values().iter().enumerate() {
            if idx > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_fvec<R: BufRead>(source: R) -> Result<Vec<Descriptor>, FeatureError> {
    let err = |line: usize, reason: String| FeatureError::Fvec { line, reason };
    let mut lines = source.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty input".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "FVEC" {
        return Err(err(1, format!("expected 'FVEC <count> <dim>', got '{header}'")));
    }
    let count: usize = parts[1].parse().map_err(|_| err(1, format!("bad count '{}'", parts[1])))?;
    let dim: usize = parts[2].parse().map_err(|_| err(1, format!("bad dim '{}'", parts[2])))?;

    let mut out = Vec::with_capacity(count);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if out.len() == count {
            return Err(err(line_no, format!("more rows than the declared count {count}")));
        }
        let values = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| err(line_no, format!("non-numeric token '{tok}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(err(line_no, format!("row has {} values, expected {dim}", values.len())));
        }
        out.push(Descriptor::new(values).map_err(|e| err(line_no, e.to_string()))?);
    }
    if out.len() != count {
        return Err(err(out.len() + 2, format!("found {} rows, header declares {count}", out.len())));
    }
    Ok(out)
}
