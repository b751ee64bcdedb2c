//! Composite loss, optimizer, and the two-stage training schedule: a
//! spatial stage that treats frames independently (recurrent state reset
//! every frame), then a temporal stage over frame windows with everything
//! up to and including the encoder frozen.

mod adam;
mod loss;
mod trainer;

pub use adam::Adam;
pub use loss::{composite_loss, composite_loss_vars, LossWeights};
pub use trainer::{train_stage, Stage, StepLog, TrainConfig, TrainOutcome};
