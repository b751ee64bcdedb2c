//! Annotation schema, ground-truth heatmap synthesis, preprocessing, and
//! augmentation.

mod annotations;
mod dataset;
mod augment;
mod heatmap;
mod preprocess;

pub use annotations::{load_annotations, save_annotations, FrameAnnotation, Track};
pub use dataset::{load_clip, load_split, ClipData};
pub use augment::{
    augment, color_jitter, flip_annotation, flip_horizontal, head_position_noise, random_crop,
};
pub use heatmap::{gaze_pixel, gt_heatmap};
pub use preprocess::{preprocess, Normalization, DEFAULT_MEAN, DEFAULT_STD};

/// Default Gaussian spread (pixels on the heatmap grid) for supervision.
pub const DEFAULT_GT_SIGMA: f64 = 3.0;
