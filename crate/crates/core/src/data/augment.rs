//! Training-time augmentation: horizontal flip, random crop, color jitter,
//! and head-position noise. Every draw is revalidated; a draw that cannot
//! produce a valid annotation falls back to the input unchanged.

use gaze_tensor::Tensor;
use rand::Rng;

use super::annotations::FrameAnnotation;

const CROP_ATTEMPTS: usize = 20;
const HEAD_NOISE_FRAC: f64 = 0.02;

/// Flip frame and coordinates left-right: x -> 1 - x.
pub fn flip_horizontal(frame: &Tensor<f32>, ann: &FrameAnnotation) -> (Tensor<f32>, FrameAnnotation) {
    let (c, h, w) = (frame.shape()[0], frame.shape()[1], frame.shape()[2]);
    let mut out = Tensor::zeros(&[c, h, w]);
    for ci in 0..c {
        for y in 0..h {
            for x in 0..w {
                out.set(&[ci, y, x], frame.get(&[ci, y, w - 1 - x]));
            }
        }
    }
    let mut a = ann.clone();
    a.bbox = [1.0 - ann.bbox[2], ann.bbox[1], 1.0 - ann.bbox[0], ann.bbox[3]];
    a.gaze = ann.gaze.map(|[gx, gy]| [1.0 - gx, gy]);
    (out, a)
}

/// Flip annotation coordinates only (for tests and label-side checks).
pub fn flip_annotation(ann: &FrameAnnotation) -> FrameAnnotation {
    let mut a = ann.clone();
    a.bbox = [1.0 - ann.bbox[2], ann.bbox[1], 1.0 - ann.bbox[0], ann.bbox[3]];
    a.gaze = ann.gaze.map(|[gx, gy]| [1.0 - gx, gy]);
    a
}

fn crop_rect_valid(rect: [f64; 4], ann: &FrameAnnotation) -> bool {
    let [rx0, ry0, rx1, ry1] = rect;
    let [bx0, by0, bx1, by1] = ann.bbox;
    if bx0 < rx0 || by0 < ry0 || bx1 > rx1 || by1 > ry1 {
        return false;
    }
    if let Some([gx, gy]) = ann.gaze {
        if gx < rx0 || gx > rx1 || gy < ry0 || gy > ry1 {
            return false;
        }
    }
    true
}

fn remap(v: f64, lo: f64, extent: f64) -> f64 {
    ((v - lo) / extent).clamp(0.0, 1.0)
}

/// Crop to a random sub-rectangle that keeps the head box (and the gaze
/// point, when in frame) inside, remapping coordinates affinely. Gives up
/// after 20 attempts and returns the input unchanged.
pub fn random_crop<R: Rng>(
    frame: &Tensor<f32>,
    ann: &FrameAnnotation,
    rng: &mut R,
) -> (Tensor<f32>, FrameAnnotation) {
    let (c, h, w) = (frame.shape()[0], frame.shape()[1], frame.shape()[2]);
    for _ in 0..CROP_ATTEMPTS {
        let scale_x = rng.gen_range(0.6..1.0);
        let scale_y = rng.gen_range(0.6..1.0);
        let x0 = rng.gen_range(0.0..(1.0 - scale_x));
        let y0 = rng.gen_range(0.0..(1.0 - scale_y));

        // snap to pixels so the image crop and the coordinate remap agree
        let px0 = (x0 * w as f64).round() as usize;
        let py0 = (y0 * h as f64).round() as usize;
        let pw = ((scale_x * w as f64).round() as usize).clamp(1, w - px0);
        let ph = ((scale_y * h as f64).round() as usize).clamp(1, h - py0);
        let rect = [
            px0 as f64 / w as f64,
            py0 as f64 / h as f64,
            (px0 + pw) as f64 / w as f64,
            (py0 + ph) as f64 / h as f64,
        ];
        if !crop_rect_valid(rect, ann) {
            continue;
        }

        let mut out = Tensor::zeros(&[c, ph, pw]);
        for ci in 0..c {
            for y in 0..ph {
                for x in 0..pw {
                    out.set(&[ci, y, x], frame.get(&[ci, py0 + y, px0 + x]));
                }
            }
        }
        let ex = rect[2] - rect[0];
        let ey = rect[3] - rect[1];
        let mut a = ann.clone();
        a.bbox = [
            remap(ann.bbox[0], rect[0], ex),
            remap(ann.bbox[1], rect[1], ey),
            remap(ann.bbox[2], rect[0], ex),
            remap(ann.bbox[3], rect[1], ey),
        ];
        a.gaze = ann
            .gaze
            .map(|[gx, gy]| [remap(gx, rect[0], ex), remap(gy, rect[1], ey)]);
        if a.validate().is_ok() {
            return (out, a);
        }
    }
    (frame.clone(), ann.clone())
}

/// Scale each color channel by an independent uniform factor in [0.8, 1.2].
pub fn color_jitter<R: Rng>(frame: &Tensor<f32>, rng: &mut R) -> Tensor<f32> {
    let (c, h, w) = (frame.shape()[0], frame.shape()[1], frame.shape()[2]);
    let factors: Vec<f32> = (0..c).map(|_| rng.gen_range(0.8..1.2)).collect();
    let mut out = frame.clone();
    for ci in 0..c {
        for v in &mut out.data_mut()[ci * h * w..(ci + 1) * h * w] {
            *v *= factors[ci];
        }
    }
    out
}

/// Perturb head box corners by uniform +-2% of the frame side, clamped to
/// [0, 1]. Draws that would invert the box are retried, then skipped.
pub fn head_position_noise<R: Rng>(ann: &FrameAnnotation, rng: &mut R) -> FrameAnnotation {
    for _ in 0..10 {
        let mut a = ann.clone();
        for v in &mut a.bbox {
            *v = (*v + rng.gen_range(-HEAD_NOISE_FRAC..HEAD_NOISE_FRAC)).clamp(0.0, 1.0);
        }
        if a.validate().is_ok() {
            return a;
        }
    }
    ann.clone()
}

/// Full augmentation draw: flip (p = 0.5), crop, color jitter, head noise.
pub fn augment<R: Rng>(
    frame: &Tensor<f32>,
    ann: &FrameAnnotation,
    rng: &mut R,
) -> (Tensor<f32>, FrameAnnotation) {
    let (frame, ann) = if rng.gen_bool(0.5) {
        flip_horizontal(frame, ann)
    } else {
        (frame.clone(), ann.clone())
    };
    let (frame, ann) = random_crop(&frame, &ann, rng);
    let frame = color_jitter(&frame, rng);
    let ann = head_position_noise(&ann, rng);
    debug_assert!(ann.validate().is_ok());
    (frame, ann)
}
