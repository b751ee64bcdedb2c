//! Downstream behavior recognition on predicted heatmaps: shared-attention
//! detection/localization and toy-to-eyes gaze-shift events.

mod events;
mod shared;
mod windows;

pub use events::{event_prf, infer_shift_events, EventStream, GazeLabel, PrfResult, ShiftEvent, DEFAULT_MAX_GAP_MS};
pub use shared::{aggregate_shared, detect_shared, SharedAttentionResult, SHARED_THRESHOLD};
pub use windows::{window_features, FeatureAux, FeatureWindow, WINDOW_FRAMES};
