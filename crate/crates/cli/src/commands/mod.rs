pub mod eval;
pub mod gradcheck;
pub mod infer;
pub mod shared;
pub mod shifts;
pub mod synth;
pub mod train;
