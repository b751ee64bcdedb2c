//! Gaze-target estimation at desk scale: the spatiotemporal network, its
//! data pipeline and synthetic scene generator, the training schedule, the
//! evaluation metrics, and the downstream social-gaze procedures.

pub mod data;
mod error;
pub mod img;
pub mod eval;
pub mod model;
pub mod social;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
