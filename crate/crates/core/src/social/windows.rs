//! Input plumbing for downstream event classifiers: sliding windows of
//! 4-channel stacks (RGB plus a grayscale heatmap or head mask as the 4th
//! channel), or RGB-only.

use gaze_tensor::Tensor;

use crate::error::{Error, Result};
use crate::img;

pub const WINDOW_FRAMES: usize = 64;

/// Source of the auxiliary 4th channel.
pub enum FeatureAux<'a> {
    None,
    Heatmaps(&'a [Tensor<f32>]),
    HeadMasks(&'a [Tensor<f32>]),
}

/// One window of stacked frames, `[frames, channels, H, W]`.
#[derive(Debug, Clone)]
pub struct FeatureWindow {
    pub start_frame: usize,
    pub tensor: Tensor<f32>,
    /// True when the stream was shorter than the window and zero-padded.
    pub padded: bool,
}

/// Slide a window of `window` frames with the given stride. A stream
/// shorter than the window yields a single zero-padded window, flagged.
pub fn window_features(
    frames: &[Tensor<f32>],
    aux: FeatureAux<'_>,
    window: usize,
    stride: usize,
) -> Result<Vec<FeatureWindow>> {
    if frames.is_empty() || window == 0 || stride == 0 {
        return Err(Error::Data("empty stream or zero window/stride".into()));
    }
    let (h, w) = (frames[0].shape()[1], frames[0].shape()[2]);
    let aux_maps: Option<&[Tensor<f32>]> = match &aux {
        FeatureAux::None => None,
        FeatureAux::Heatmaps(m) | FeatureAux::HeadMasks(m) => {
            if m.len() != frames.len() {
                return Err(Error::Data(format!(
                    "{} frames but {} auxiliary maps",
                    frames.len(),
                    m.len()
                )));
            }
            Some(m)
        }
    };
    let channels = if aux_maps.is_some() { 4 } else { 3 };

    let stack = |start: usize, count: usize| -> Result<Tensor<f32>> {
        let mut out = Tensor::zeros(&[window, channels, h, w]);
        let plane = h * w;
        for i in 0..count {
            let frame = &frames[start + i];
            if frame.shape() != [3, h, w] {
                return Err(Error::Data(format!(
                    "frame {} has shape {:?}, expected [3,{h},{w}]",
                    start + i,
                    frame.shape()
                )));
            }
            let base = i * channels * plane;
            out.data_mut()[base..base + 3 * plane].copy_from_slice(frame.data());
            if let Some(maps) = aux_maps {
                // grayscale mapping: a single-channel map resized to the
                // frame grid; bit-identical when sizes already match
                let map = &maps[start + i];
                let side = map.shape()[map.shape().len() - 1];
                let map3 = map.clone().reshaped(vec![1, side, side])?;
                let sized = if side == h && h == w {
                    map3
                } else {
                    img::bilinear_resize(&map3, h, w)
                };
                out.data_mut()[base + 3 * plane..base + 4 * plane]
                    .copy_from_slice(sized.data());
            }
        }
        Ok(out)
    };

    let mut windows = Vec::new();
    if frames.len() < window {
        windows.push(FeatureWindow {
            start_frame: 0,
            tensor: stack(0, frames.len())?,
            padded: true,
        });
        return Ok(windows);
    }
    let mut start = 0;
    while start + window <= frames.len() {
        windows.push(FeatureWindow {
            start_frame: start,
            tensor: stack(start, window)?,
            padded: false,
        });
        start += stride;
    }
    Ok(windows)
}
