//! Metric primitives. AUC uses the rank-sum (Mann-Whitney) form, which
//! equals P(score_pos > score_neg) + 0.5 P(equal) and matches a trapezoidal
//! ROC under ties. AP is the rank-based, interpolation-free sum.

use gaze_tensor::Tensor;

use crate::data::{gaze_pixel, gt_heatmap};

/// Label heatmap cells by thresholding a Gaussian confidence mask around
/// the target, pool (score, label) pairs across all frames, and return the
/// area under the pooled ROC. `None` when either class is empty.
pub fn auc_heatmap(
    preds: &[&Tensor<f32>],
    gts: &[(f64, f64)],
    mask_sigma: f64,
    mask_threshold: f64,
) -> Option<f64> {
    assert_eq!(preds.len(), gts.len());
    let mut scored: Vec<(f32, bool)> = Vec::new();
    for (pred, &gaze) in preds.iter().zip(gts) {
        let hm = pred.shape()[0];
        let mask: Tensor<f64> = gt_heatmap(gaze, hm, mask_sigma);
        for (s, m) in pred.data().iter().zip(mask.data()) {
            scored.push((*s, *m >= mask_threshold));
        }
    }
    ranked_auc(&mut scored)
}

/// Per-frame ROC AUC, averaged over frames where it is defined.
pub fn auc_heatmap_per_frame(
    preds: &[&Tensor<f32>],
    gts: &[(f64, f64)],
    mask_sigma: f64,
    mask_threshold: f64,
) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for (pred, &gaze) in preds.iter().zip(gts) {
        if let Some(a) = auc_heatmap(&[pred], &[gaze], mask_sigma, mask_threshold) {
            total += a;
            n += 1;
        }
    }
    (n > 0).then(|| total / n as f64)
}

/// Rank-sum AUC over (score, is_positive) pairs with average ranks on ties.
fn ranked_auc(scored: &mut [(f32, bool)]) -> Option<f64> {
    let pos = scored.iter().filter(|(_, y)| *y).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        // ranks are 1-based; tied values share the average rank
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for k in i..j {
            if scored[k].1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Some(u / (pos as f64 * neg as f64))
}

/// Euclidean distance between the heatmap argmax (first on ties, mapped to
/// its pixel center) and the normalized gaze point.
pub fn l2_distance(pred: &Tensor<f32>, gaze: (f64, f64)) -> f64 {
    let hm = pred.shape()[0];
    let flat = pred.argmax();
    let (row, col) = (flat / hm, flat % hm);
    let px = (col as f64 + 0.5) / hm as f64;
    let py = (row as f64 + 0.5) / hm as f64;
    ((px - gaze.0).powi(2) + (py - gaze.1).powi(2)).sqrt()
}

/// Average precision of the in-frame score against in-frame labels
/// (positive class: in frame). Ties break by descending score then original
/// index. `None` when labels are single-class.
pub fn out_of_frame_ap(alphas: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(alphas.len(), labels.len());
    let pos = labels.iter().filter(|&&y| y).count();
    if pos == 0 || pos == labels.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[b].total_cmp(&alphas[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut ap = 0.0f64;
    for (k, &idx) in order.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            ap += hits as f64 / (k + 1) as f64;
        }
    }
    Some(ap / pos as f64)
}

/// A prediction that concentrates all mass at one pixel.
pub fn delta_heatmap(gaze: (f64, f64), hm: usize) -> Tensor<f32> {
    let (cx, cy) = gaze_pixel(gaze, hm);
    let mut t = Tensor::zeros(&[hm, hm]);
    t.set(&[cy, cx], 1.0);
    t
}
