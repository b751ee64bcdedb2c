//! Shared attention: sum individual modulated heatmaps into one confidence
//! map; a shared-attention frame is one whose maximum exceeds the
//! threshold. One person's map peaks at 1, two aligned fixations reach 2;
//! the default threshold of 1.8 leaves room for slight misalignment.

use gaze_tensor::Tensor;

use crate::error::{Error, Result};

pub const SHARED_THRESHOLD: f64 = 1.8;

#[derive(Debug, Clone)]
pub struct SharedAttentionResult {
    pub map: Tensor<f32>,
    pub is_shared: bool,
    /// Argmax pixel (row, col), present exactly when shared.
    pub location: Option<(usize, usize)>,
    pub max_score: f64,
}

/// Elementwise sum of per-person heatmaps of identical shape.
pub fn aggregate_shared(heatmaps: &[&Tensor<f32>]) -> Result<Tensor<f32>> {
    let first = heatmaps
        .first()
        .ok_or_else(|| Error::Data("aggregate of zero heatmaps".into()))?;
    let mut map = (*first).clone();
    for hm in &heatmaps[1..] {
        if hm.shape() != map.shape() {
            return Err(Error::Data(format!(
                "heatmap shapes differ: {:?} vs {:?}",
                hm.shape(),
                map.shape()
            )));
        }
        for (a, b) in map.data_mut().iter_mut().zip(hm.data()) {
            *a += b;
        }
    }
    Ok(map)
}

/// Threshold an aggregate map. Location ties break to the first pixel in
/// row-major order.
pub fn detect_shared(map: &Tensor<f32>, threshold: f64) -> SharedAttentionResult {
    let flat = map.argmax();
    let w = map.shape()[map.shape().len() - 1];
    let max_score = f64::from(map.data()[flat]);
    let is_shared = max_score > threshold;
    SharedAttentionResult {
        map: map.clone(),
        is_shared,
        location: is_shared.then_some((flat / w, flat % w)),
        max_score,
    }
}
