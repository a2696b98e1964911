use super::{Descriptor, FeatureError, Image};

pub const DEFAULT_CELL_SIZE: usize = 30;
pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogParams {
    pub cell_size: usize,
    pub bins: usize,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams { cell_size: DEFAULT_CELL_SIZE, bins: DEFAULT_BINS }
    }
}

impl HogParams {
    /// Descriptor length for an image of the given size.
    pub fn descriptor_dim(&self, width: usize, height: usize) -> usize {
        (width / self.cell_size) * (height / self.cell_size) * self.bins
    }
}

/// Histogram of oriented gradients over a grid of non-overlapping square
/// cells anchored at the top-left corner.
///
/// Gradients are central differences with replicated borders. Orientation is
/// unsigned (`[0, 180)` degrees) and each pixel votes its gradient magnitude
/// into one of `bins` equal-width bins. Cells that do not fit entirely inside
/// the image are dropped. Histograms are concatenated cell-row by cell-row,
/// left to right. No block normalization.
pub fn compute_hog(img: &Image, params: HogParams) -> Result<Descriptor, FeatureError> {
    let HogParams { cell_size, bins } = params;
    if cell_size == 0 || bins == 0 {
        return Err(FeatureError::InvalidImage("cell size and bin count must be positive".into()));
    }
    let (w, h) = (img.width(), img.height());
    if w < cell_size || h < cell_size {
        return Err(FeatureError::ImageTooSmall { width: w, height: h, cell: cell_size });
    }
    let (cells_x, cells_y) = (w / cell_size, h / cell_size);
    let mut hist = vec![0.0f64; cells_x * cells_y * bins];
    let bin_width = 180.0 / bins as f64;

    for y in 0..cells_y * cell_size {
        let (ym, yp) = (y.saturating_sub(1), (y + 1).min(h - 1));
        let cell_row = (y / cell_size) * cells_x;
        for x in 0..cells_x * cell_size {
            let (xm, xp) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = 0.5 * (f64::from(img.get(xp, y)) - f64::from(img.get(xm, y)));
            let gy = 0.5 * (f64::from(img.get(x, yp)) - f64::from(img.get(x, ym)));
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            if angle >= 180.0 {
                angle -= 180.0;
            }
            let bin = ((angle / bin_width) as usize).min(bins - 1);
            hist[(cell_row + x / cell_size) * bins + bin] += mag;
        }
    }
    Descriptor::new(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Per-pixel reference: recomputes every gradient from scratch with
    /// explicit border clamping and signed-to-unsigned folding.
    fn reference_hog(img: &Image, cell: usize, bins: usize) -> Vec<f64> {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let px = |x: i64, y: i64| f64::from(img.get(x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize));
        let (cx, cy) = (w as usize / cell, h as usize / cell);
        let mut out = vec![0.0; cx * cy * bins];
        for cyi in 0..cy {
            for cxi in 0..cx {
                for dy in 0..cell {
                    for dx in 0..cell {
                        let (x, y) = ((cxi * cell + dx) as i64, (cyi * cell + dy) as i64);
                        let gx = (px(x + 1, y) - px(x - 1, y)) / 2.0;
                        let gy = (px(x, y + 1) - px(x, y - 1)) / 2.0;
                        let mag = (gx * gx + gy * gy).sqrt();
                        if mag == 0.0 {
                            continue;
                        }
                        let mut deg = gy.atan2(gx) * 180.0 / std::f64::consts::PI;
                        while deg < 0.0 {
                            deg += 180.0;
                        }
                        while deg >= 180.0 {
                            deg -= 180.0;
                        }
                        let b = ((deg * bins as f64 / 180.0).floor() as usize).min(bins - 1);
                        out[(cyi * cx + cxi) * bins + b] += mag;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn dimension_for_960x540() {
        let img = Image::new(960, 540, vec![0; 960 * 540]).unwrap();
        let d = compute_hog(&img, HogParams::default()).unwrap();
        assert_eq!(d.dim(), 32 * 18 * 50);
        assert_eq!(d.dim(), 28_800);
    }

    #[test]
    fn constant_image_is_zero() {
        let img = Image::new(30, 30, vec![77; 900]).unwrap();
        let d = compute_hog(&img, HogParams::default()).unwrap();
        assert_eq!(d.dim(), 50);
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn horizontal_ramp_lands_in_zero_degree_bin() {
        let pixels: Vec<u8> = (0..30).flat_map(|_| (0..30u8).map(|x| x * 7)).collect();
        let img = Image::new(30, 30, pixels).unwrap();
        let d = compute_hog(&img, HogParams::default()).unwrap();
        let reference = reference_hog(&img, 30, 50);
        assert_eq!(d.values(), reference.as_slice());
        assert!(d.values()[0] > 0.0);
        assert!(d.values()[1..].iter().all(|&v| v == 0.0));
        // interior pixels carry magnitude 7, the two border columns 3.5
        assert!((d.values()[0] - (28.0 * 7.0 + 2.0 * 3.5) * 30.0).abs() < 1e-9);
    }

    #[test]
    fn too_small() {
        let img = Image::new(29, 40, vec![0; 29 * 40]).unwrap();
        assert!(matches!(
            compute_hog(&img, HogParams::default()),
            Err(FeatureError::ImageTooSmall { width: 29, height: 40, cell: 30 })
        ));
    }

    fn image_strategy() -> impl Strategy<Value = (Image, usize, usize)> {
        (1usize..6, 1usize..12, 1usize..12).prop_flat_map(|(cell, bins, _)| {
            (cell..cell * 4 + 3, cell..cell * 4 + 3).prop_flat_map(move |(w, h)| {
                prop::collection::vec(any::<u8>(), w * h)
                    .prop_map(move |px| (Image::new(w, h, px).unwrap(), cell, bins))
            })
        })
    }

    proptest! {
        #[test]
        fn matches_reference((img, cell, bins) in image_strategy()) {
            let d = compute_hog(&img, HogParams { cell_size: cell, bins }).unwrap();
            let r = reference_hog(&img, cell, bins);
            prop_assert_eq!(d.dim(), (img.width() / cell) * (img.height() / cell) * bins);
            prop_assert!(d.values().iter().all(|v| v.is_finite() && *v >= 0.0));
            for (a, b) in d.values().iter().zip(&r) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
