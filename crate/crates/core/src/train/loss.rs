//! Composite supervision: `L = w_h * L_h + w_f * L_f`, the heatmap MSE
//! applied only on frames with an in-frame ground-truth target and the
//! in-frame BCE applied on every frame.

use gaze_tensor::{Element, Graph, Tensor, Var};
use serde::{Deserialize, Serialize};

use crate::data::{gt_heatmap, FrameAnnotation};
use crate::error::Result;
use crate::model::{FrameVars, GazePrediction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w_h: f64,
    pub w_f: f64,
}

impl Default for LossWeights {
    /// The mean-reduced MSE over a mostly-zero map is orders of magnitude
    /// smaller than the BCE; the default weighting balances the two.
    fn default() -> Self {
        LossWeights { w_h: 100.0, w_f: 1.0 }
    }
}

/// Graph-level loss for one frame. Returns the loss node plus the raw
/// (unweighted) heatmap and in-frame terms for logging.
pub fn composite_loss_vars<T: Element>(
    g: &mut Graph<T>,
    out: &FrameVars,
    ann: &FrameAnnotation,
    hm_size: usize,
    sigma: f64,
    w: &LossWeights,
) -> Result<(Var, f64, f64)> {
    let label = g.leaf(Tensor::full(
        g.value(out.alpha_logit).shape(),
        if ann.inframe { T::ONE } else { T::ZERO },
    ));
    let bce = g.bce_with_logit_loss(out.alpha_logit, label)?;
    let l_f = g.value(bce).item()?.to_f64();
    let weighted_f = g.mul_scalar(bce, w.w_f);

    if let Some([gx, gy]) = ann.gaze {
        let gt = gt_heatmap::<T>((gx, gy), hm_size, sigma).reshaped(vec![1, 1, hm_size, hm_size])?;
        let gt = g.leaf(gt);
        let mse = g.mse_loss(out.raw_map, gt)?;
        let l_h = g.value(mse).item()?.to_f64();
        let weighted_h = g.mul_scalar(mse, w.w_h);
        let total = g.add(weighted_h, weighted_f)?;
        Ok((total, l_h, l_f))
    } else {
        Ok((weighted_f, 0.0, l_f))
    }
}

/// Tensor-level composite loss on a finished prediction. The in-frame term
/// is the binary cross entropy evaluated from alpha (equivalent to the
/// logit form for alpha strictly inside (0, 1)).
pub fn composite_loss(
    pred: &GazePrediction,
    ann: &FrameAnnotation,
    sigma: f64,
    w: &LossWeights,
) -> f64 {
    let hm = pred.raw_map.shape()[0];
    let l_h = match ann.gaze {
        Some([gx, gy]) => {
            let gt: Tensor<f32> = gt_heatmap((gx, gy), hm, sigma);
            let n = gt.numel() as f64;
            pred.raw_map
                .data()
                .iter()
                .zip(gt.data())
                .map(|(&p, &t)| {
                    let d = (p - t) as f64;
                    d * d
                })
                .sum::<f64>()
                / n
        }
        None => 0.0,
    };
    let y = if ann.inframe { 1.0 } else { 0.0 };
    let a = (pred.alpha as f64).clamp(1e-12, 1.0 - 1e-12);
    let l_f = -(y * a.ln() + (1.0 - y) * (1.0 - a).ln());
    w.w_h * l_h + w.w_f * l_f
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaze_tensor::Tensor;

    fn ann(gaze: Option<[f64; 2]>) -> FrameAnnotation {
        FrameAnnotation {
            clip_id: "c".into(),
            frame_index: 0,
            person_id: "p".into(),
            bbox: [0.4, 0.4, 0.6, 0.6],
            gaze,
            inframe: gaze.is_some(),
        }
    }

    fn pred(alpha: f32, raw: Tensor<f32>) -> GazePrediction {
        let hm = raw.shape()[0];
        let one_minus = 1.0 - alpha;
        let heatmap = raw.map(|v| (v - one_minus).max(0.0));
        let _ = hm;
        GazePrediction { heatmap, alpha, raw_map: raw }
    }

    #[test]
    fn out_of_frame_with_zero_inframe_weight_is_zero() {
        let p = pred(0.5, Tensor::zeros(&[8, 8]));
        let w = LossWeights { w_h: 100.0, w_f: 0.0 };
        assert_eq!(composite_loss(&p, &ann(None), 3.0, &w), 0.0);
    }

    #[test]
    fn perfect_heatmap_zeroes_the_spatial_term() {
        let gt: Tensor<f32> = gt_heatmap((0.5, 0.5), 16, 3.0);
        let p = pred(1.0 - 1e-6, gt);
        let w = LossWeights { w_h: 1.0, w_f: 0.0 };
        let l = composite_loss(&p, &ann(Some([0.5, 0.5])), 3.0, &w);
        assert!(l.abs() < 1e-12, "got {l}");
    }

    #[test]
    fn loss_is_linear_in_the_weights() {
        let mut raw = Tensor::zeros(&[8, 8]);
        raw.set(&[3, 4], 0.7);
        raw.set(&[5, 1], 0.2);
        let p = pred(0.4, raw);
        let a = ann(Some([0.3, 0.6]));
        let base_h = composite_loss(&p, &a, 3.0, &LossWeights { w_h: 1.0, w_f: 0.0 });
        let base_f = composite_loss(&p, &a, 3.0, &LossWeights { w_h: 0.0, w_f: 1.0 });
        for (wh, wf) in [(2.0, 3.0), (100.0, 1.0), (0.0, 0.0), (7.5, 0.25)] {
            let combined = composite_loss(&p, &a, 3.0, &LossWeights { w_h: wh, w_f: wf });
            assert!(
                (combined - (wh * base_h + wf * base_f)).abs() < 1e-9,
                "not linear at ({wh}, {wf})"
            );
        }
        assert!(base_h >= 0.0 && base_f >= 0.0);
    }
}
