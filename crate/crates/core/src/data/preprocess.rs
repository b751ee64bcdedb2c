//! Frame preprocessing: bilinear resize to the model input size, then
//! per-channel standardization by the dataset mean/std recorded in config.

use gaze_tensor::Tensor;

use crate::img;

pub const DEFAULT_MEAN: [f32; 3] = [0.5, 0.5, 0.5];
pub const DEFAULT_STD: [f32; 3] = [0.5, 0.5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Normalization {
    pub mean: [f32; 3],
    pub std: [f32; 3],
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            mean: DEFAULT_MEAN,
            std: DEFAULT_STD,
        }
    }
}

/// Resize a `[3, H, W]` frame to `[3, size, size]` and standardize.
pub fn preprocess(frame: &Tensor<f32>, size: usize, norm: &Normalization) -> Tensor<f32> {
    let mut resized = img::bilinear_resize(frame, size, size);
    let plane = size * size;
    for c in 0..3 {
        let (mean, std) = (norm.mean[c], norm.std[c]);
        for v in &mut resized.data_mut()[c * plane..(c + 1) * plane] {
            *v = (*v - mean) / std;
        }
    }
    resized
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gray_standardizes_to_constant() {
        let frame = Tensor::full(&[3, 17, 29], 0.5f32);
        let out = preprocess(&frame, 8, &Normalization::default());
        assert_eq!(out.shape(), &[3, 8, 8]);
        for &v in out.data() {
            assert!(v.abs() < 1e-6);
        }
    }

    #[test]
    fn checkerboard_resize_preserves_mean() {
        let mut frame = Tensor::zeros(&[3, 16, 16]);
        for c in 0..3 {
            for y in 0..16 {
                for x in 0..16 {
                    frame.set(&[c, y, x], ((x + y) % 2) as f32);
                }
            }
        }
        let out = preprocess(
            &frame,
            8,
            &Normalization {
                mean: [0.0; 3],
                std: [1.0; 3],
            },
        );
        let mean = out.sum_f64() / out.numel() as f64;
        assert!((mean - 0.5).abs() < 1e-2, "mean drifted to {mean}");
    }

    #[test]
    fn output_shape_matches_config() {
        let frame = Tensor::zeros(&[3, 100, 60]);
        let out = preprocess(&frame, 64, &Normalization::default());
        assert_eq!(out.shape(), &[3, 64, 64]);
    }
}
