//! Dataset-level evaluation: run the model over every track and pool the
//! metrics over frames.

use gaze_tensor::Tensor;
use serde::Serialize;

use crate::data::{preprocess, ClipData, DEFAULT_GT_SIGMA};
use crate::error::Result;
use crate::eval::metrics::{auc_heatmap, auc_heatmap_per_frame, l2_distance, out_of_frame_ap};
use crate::eval::report::EvalReport;
use crate::model::GazeModel;

#[derive(Debug, Clone, Copy)]
pub struct EvalSettings {
    pub mask_sigma: f64,
    /// Cells with mask value >= threshold (of the unit peak) are positives.
    pub mask_threshold: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            mask_sigma: DEFAULT_GT_SIGMA,
            mask_threshold: 0.5,
        }
    }
}

/// One scored frame, for the optional per-frame CSV.
#[derive(Debug, Clone, Serialize)]
pub struct FrameScore {
    pub clip_id: String,
    pub person_id: String,
    pub frame_index: usize,
    pub alpha: f64,
    pub inframe: bool,
    pub l2: Option<f64>,
}

pub fn evaluate_dataset(
    model: &GazeModel,
    clips: &[ClipData],
    settings: &EvalSettings,
) -> Result<(EvalReport, Vec<FrameScore>)> {
    let size = model.config().input_size;
    let norm = model.config().normalization;

    let mut heatmaps: Vec<Tensor<f32>> = Vec::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut alphas = Vec::new();
    let mut labels = Vec::new();
    let mut detail = Vec::new();

    for clip in clips {
        for track in &clip.tracks {
            let mut frames = Vec::with_capacity(track.len());
            let mut bboxes = Vec::with_capacity(track.len());
            for ann in &track.frames {
                frames.push(preprocess(clip.frame(ann.frame_index)?, size, &norm));
                bboxes.push(Some(ann.bbox));
            }
            let preds = model.forward_sequence(&frames, &bboxes)?;
            for (ann, pred) in track.frames.iter().zip(preds) {
                let pred = pred.expect("bbox was provided for every frame");
                alphas.push(f64::from(pred.alpha));
                labels.push(ann.inframe);
                let mut l2 = None;
                if let Some([gx, gy]) = ann.gaze {
                    l2 = Some(l2_distance(&pred.heatmap, (gx, gy)));
                    heatmaps.push(pred.heatmap.clone());
                    points.push((gx, gy));
                }
                detail.push(FrameScore {
                    clip_id: clip.clip_id.clone(),
                    person_id: track.person_id().to_string(),
                    frame_index: ann.frame_index,
                    alpha: f64::from(pred.alpha),
                    inframe: ann.inframe,
                    l2,
                });
            }
        }
    }

    let refs: Vec<&Tensor<f32>> = heatmaps.iter().collect();
    let l2_values: Vec<f64> = detail.iter().filter_map(|d| d.l2).collect();
    let report = EvalReport {
        auc: auc_heatmap(&refs, &points, settings.mask_sigma, settings.mask_threshold),
        auc_per_frame: auc_heatmap_per_frame(
            &refs,
            &points,
            settings.mask_sigma,
            settings.mask_threshold,
        ),
        l2_mean: (!l2_values.is_empty())
            .then(|| l2_values.iter().sum::<f64>() / l2_values.len() as f64),
        out_of_frame_ap: out_of_frame_ap(&alphas, &labels),
        n_inframe: labels.iter().filter(|&&y| y).count(),
        n_total: labels.len(),
    };
    Ok((report, detail))
}
