use std::fmt::Write as _;
use std::io::Write;

use super::{Counts, EvalError, GpsErrorStats, PrPoint};

/// Everything `eval` reports for one match file.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pr_points: Vec<PrPoint>,
    pub threshold: f64,
    pub counts: Counts,
    pub gps: Option<GpsErrorStats>,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let c = &self.counts;
        let _ = writeln!(s, "threshold: {}", self.threshold);
        let _ = writeln!(s, "frames: {}", c.total());
        let _ = writeln!(s, "TP: {}", c.tp);
        let _ = writeln!(s, "FP: {}", c.fp);
        let _ = writeln!(s, "FN: {}", c.fn_);
        let _ = writeln!(s, "precision: {}", c.precision());
        let _ = writeln!(s, "recall: {}", c.recall());
        if let Some(g) = &self.gps {
            let _ = writeln!(s, "matched frames: {}/{}", g.matched, g.total);
            let _ = writeln!(s, "mean error (m): {:.4}", g.mean_m);
            let _ = writeln!(s, "variance (m): {:.4}", g.variance_m);
            for (d, pct) in &g.percentage_error {
                let _ = writeln!(s, "percentage error > {d} m: {pct:.1}");
            }
        }
        s
    }
}

/// Writes `t,precision,recall` rows.
pub fn write_pr_csv<W: Write>(points: &[PrPoint], mut sink: W) -> Result<(), EvalError> {
    writeln!(sink, "t,precision,recall")?;
    for p in points {
        writeln!(sink, "{},{},{}", p.threshold, p.precision, p.recall)?;
    }
    sink.flush()?;
    Ok(())
}

/// Plain SVG line chart of precision (y) against recall (x).
pub fn pr_svg(points: &[PrPoint]) -> String {
    const W: f64 = 400.0;
    const H: f64 = 300.0;
    const PAD: f64 = 40.0;
    let (pw, ph) = (W - 2.0 * PAD, H - 2.0 * PAD);
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let coords: Vec<String> =
        pts.iter().map(|(r, p)| format!("{:.2},{:.2}", PAD + r * pw, PAD + (1.0 - p) * ph)).collect();

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polyline points="{PAD},{PAD} {PAD},{} {},{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">recall</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">precision</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, coords.join(" "));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(t: f64, tp: usize, fp: usize, fn_: usize) -> PrPoint {
        let counts = Counts { tp, fp, fn_ };
        PrPoint { threshold: t, precision: counts.precision(), recall: counts.recall(), counts }
    }

    #[test]
    fn csv_and_svg() {
        let pts = vec![point(0.1, 1, 0, 3), point(0.9, 2, 2, 0)];
        let mut buf = Vec::new();
        write_pr_csv(&pts, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,precision,recall\n0.1,1,0.25\n0.9,0.5,1\n");
        let svg = pr_svg(&pts);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline points=\"120.00,40.00 360.00,150.00\""));
    }

    #[test]
    fn summary_mentions_counts() {
        let r = EvalReport { pr_points: vec![], threshold: 0.5, counts: Counts { tp: 3, fp: 1, fn_: 0 }, gps: None };
        let s = r.summary();
        assert!(s.contains("TP: 3") && s.contains("precision: 0.75"));
    }
}
