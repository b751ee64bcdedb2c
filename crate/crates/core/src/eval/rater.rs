//! Inter-rater scoring: treat each annotator as a predictor, score against
//! every other annotator as ground truth, and average over ordered pairs.
//!
//! The annotator-as-prediction heatmap is a Gaussian confidence bump at
//! their point (the same spread as the evaluation mask) rather than a bare
//! one-pixel delta: a flat-zero field elsewhere would tie every remaining
//! positive cell with the negatives and cap AUC near 0.5 even for
//! identical annotators. The argmax, and therefore the distance metric,
//! is unchanged.

use crate::data::gt_heatmap;
use crate::error::{Error, Result};
use crate::eval::metrics::{auc_heatmap, l2_distance, out_of_frame_ap};
use crate::eval::report::EvalReport;

/// One annotator's label for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaterFrame {
    /// Normalized gaze point; absent means out of frame.
    pub gaze: Option<(f64, f64)>,
}

/// Score all ordered annotator pairs and average the three metrics.
/// Spatial metrics use only frames where the ground-truth rater is in
/// frame and the predicting rater supplies a point.
pub fn inter_rater(
    annotators: &[Vec<RaterFrame>],
    hm: usize,
    mask_sigma: f64,
    mask_threshold: f64,
) -> Result<EvalReport> {
    if annotators.len() < 2 {
        return Err(Error::Data(format!(
            "inter-rater scoring needs at least 2 annotators, got {}",
            annotators.len()
        )));
    }
    let n_frames = annotators[0].len();
    if annotators.iter().any(|a| a.len() != n_frames) {
        return Err(Error::Data(
            "annotators must cover the same frames".into(),
        ));
    }

    let mut auc_terms = Vec::new();
    let mut auc_pf_terms = Vec::new();
    let mut l2_terms = Vec::new();
    let mut ap_terms = Vec::new();

    for (pi, pred) in annotators.iter().enumerate() {
        for (gi, gt) in annotators.iter().enumerate() {
            if pi == gi {
                continue;
            }
            let mut heatmaps = Vec::new();
            let mut points = Vec::new();
            let mut alphas = Vec::new();
            let mut labels = Vec::new();
            for (p, g) in pred.iter().zip(gt) {
                alphas.push(if p.gaze.is_some() { 1.0 } else { 0.0 });
                labels.push(g.gaze.is_some());
                if let (Some(pp), Some(gg)) = (p.gaze, g.gaze) {
                    heatmaps.push(gt_heatmap::<f32>(pp, hm, mask_sigma));
                    points.push(gg);
                }
            }
            let refs: Vec<_> = heatmaps.iter().collect();
            if let Some(a) = auc_heatmap(&refs, &points, mask_sigma, mask_threshold) {
                auc_terms.push(a);
            }
            if let Some(a) =
                crate::eval::metrics::auc_heatmap_per_frame(&refs, &points, mask_sigma, mask_threshold)
            {
                auc_pf_terms.push(a);
            }
            if !points.is_empty() {
                let mean = heatmaps
                    .iter()
                    .zip(&points)
                    .map(|(h, &p)| l2_distance(h, p))
                    .sum::<f64>()
                    / points.len() as f64;
                l2_terms.push(mean);
            }
            if let Some(ap) = out_of_frame_ap(&alphas, &labels) {
                ap_terms.push(ap);
            }
        }
    }

    let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let n_inframe = annotators
        .iter()
        .flat_map(|a| a.iter())
        .filter(|f| f.gaze.is_some())
        .count();
    Ok(EvalReport {
        auc: avg(&auc_terms),
        auc_per_frame: avg(&auc_pf_terms),
        l2_mean: avg(&l2_terms),
        out_of_frame_ap: avg(&ap_terms),
        n_inframe,
        n_total: annotators.len() * n_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(points: &[Option<(f64, f64)>]) -> Vec<RaterFrame> {
        points.iter().map(|&gaze| RaterFrame { gaze }).collect()
    }

    #[test]
    fn identical_annotators_score_perfectly() {
        let a = frames(&[Some((0.25, 0.25)), Some((0.75, 0.5)), None, Some((0.1, 0.9))]);
        let report = inter_rater(&[a.clone(), a], 32, 3.0, 0.5).unwrap();
        assert_eq!(report.out_of_frame_ap, Some(1.0));
        assert_eq!(report.auc, Some(1.0));
        assert!(report.l2_mean.unwrap() < 1.0 / 32.0);
    }

    #[test]
    fn inframe_disagreement_restricts_spatial_domain() {
        // raters agree on the point when both in frame; one extra frame is
        // in-frame for only one rater and must not affect l2
        let a = frames(&[Some((0.5, 0.5)), Some((0.2, 0.2))]);
        let b = frames(&[Some((0.5, 0.5)), None]);
        let report = inter_rater(&[a, b], 32, 3.0, 0.5).unwrap();
        assert!(report.l2_mean.unwrap() < 1.0 / 32.0);
    }

    #[test]
    fn pair_averaging_is_permutation_invariant() {
        let a = frames(&[Some((0.2, 0.3)), None, Some((0.9, 0.1))]);
        let b = frames(&[Some((0.25, 0.33)), Some((0.5, 0.5)), None]);
        let c = frames(&[None, Some((0.52, 0.48)), Some((0.88, 0.12))]);
        let r1 = inter_rater(&[a.clone(), b.clone(), c.clone()], 32, 3.0, 0.5).unwrap();
        let r2 = inter_rater(&[c, a, b], 32, 3.0, 0.5).unwrap();
        assert_eq!(r1.auc, r2.auc);
        assert_eq!(r1.l2_mean, r2.l2_mean);
        assert_eq!(r1.out_of_frame_ap, r2.out_of_frame_ap);
    }

    #[test]
    fn fewer_than_two_annotators_rejected() {
        let a = frames(&[Some((0.5, 0.5))]);
        assert!(inter_rater(&[a], 32, 3.0, 0.5).is_err());
    }
}
