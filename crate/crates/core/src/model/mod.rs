//! The spatiotemporal gaze-target network and its persistence.

mod checkpoint;
mod config;
mod net;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::ModelConfig;
pub use net::{
    head_position_feature, head_position_image, ConvLstmState, FrameVars, GazeModel,
    GazePrediction,
};
pub use params::{bind, BoundParams, ParamStore};

/// Parameter-name prefixes frozen by the temporal training stage: everything
/// up to and including the encoder.
pub const FREEZE_PREFIXES: [&str; 4] = [
    "head_backbone",
    "scene_backbone",
    "attention_fc",
    "encode",
];

/// True when `name` belongs to the frozen-by-temporal-stage region.
pub fn is_frozen_name(name: &str) -> bool {
    FREEZE_PREFIXES
        .iter()
        .any(|p| name.starts_with(p) && name[p.len()..].starts_with('.'))
}
