//! Evaluation: heatmap AUC against a thresholded Gaussian confidence mask,
//! argmax L2 distance, out-of-frame average precision from the in-frame
//! scalar, and pairwise inter-rater scoring.

mod metrics;
mod rater;
mod report;
mod runner;

pub use metrics::{auc_heatmap, auc_heatmap_per_frame, delta_heatmap, l2_distance, out_of_frame_ap};
pub use rater::{inter_rater, RaterFrame};
pub use report::EvalReport;
pub use runner::{evaluate_dataset, EvalSettings};
