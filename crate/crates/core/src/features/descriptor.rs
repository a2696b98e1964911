use super::FeatureError;

/// Fixed-length real feature vector describing one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(Vec<f64>);

impl Descriptor {
    pub fn new(values: Vec<f64>) -> Result<Self, FeatureError> {
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(idx));
        }
        Ok(Descriptor(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Angle-based matching cost `1 - cos(a, b)`, in `[0, 2]`.
///
/// Lower is a better match. Zero-norm inputs have no direction and get the
/// worst cost, 2.0.
pub fn cosine_cost(a: &Descriptor, b: &Descriptor) -> Result<f64, FeatureError> {
    if a.dim() != b.dim() {
        return Err(FeatureError::DimensionMismatch(a.dim(), b.dim()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.0.iter().zip(&b.0) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(2.0);
    }
    // sqrt(x * x) == x exactly, so a vector against itself costs exactly 0
    let cos = (dot / (na * nb).sqrt()).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}
