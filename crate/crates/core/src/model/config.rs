//! Size configuration for the network. The full-scale layout uses 224-pixel
//! inputs and a 7x7 attention grid; the desk-scale default works on 64-pixel
//! frames with a 4x4 grid and trains on a CPU.

use serde::{Deserialize, Serialize};

use crate::data::Normalization;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Pixels per side of the square model input.
    pub input_size: usize,
    /// Side of the attention map; must equal the scene feature side.
    pub attention_grid: usize,
    /// Side of the output heatmap.
    pub heatmap_size: usize,
    /// Channel width of each stride-2 backbone stage.
    pub backbone_channels: Vec<usize>,
    /// Encoder output width, also the recurrent hidden width.
    pub encode_channels: usize,
    pub convlstm_layers: usize,
    pub convlstm_kernel: usize,
    pub deconv_layers: usize,
    /// Ablation wiring: weight scene features uniformly instead of using
    /// the computed attention map.
    #[serde(default)]
    pub uniform_attention: bool,
    /// Preprocessing constants baked into checkpoints.
    #[serde(default)]
    pub normalization: Normalization,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_size: 64,
            attention_grid: 4,
            heatmap_size: 64,
            backbone_channels: vec![16, 32, 48, 64],
            encode_channels: 64,
            convlstm_layers: 2,
            convlstm_kernel: 3,
            deconv_layers: 4,
            uniform_attention: false,
            normalization: Normalization::default(),
        }
    }
}

impl ModelConfig {
    /// A deliberately tiny layout for gradient checks and fast tests.
    pub fn tiny() -> Self {
        ModelConfig {
            input_size: 16,
            attention_grid: 4,
            heatmap_size: 16,
            backbone_channels: vec![4, 6],
            encode_channels: 6,
            convlstm_layers: 2,
            convlstm_kernel: 3,
            deconv_layers: 2,
            uniform_attention: false,
            normalization: Normalization::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.backbone_channels.is_empty() {
            return fail("backbone needs at least one stage".into());
        }
        if self.input_size % 8 != 0 {
            return fail(format!(
                "input_size {} must be divisible by 8 for the head position feature",
                self.input_size
            ));
        }
        let stages = self.backbone_channels.len();
        if self.input_size % (1 << stages) != 0
            || self.input_size / (1 << stages) != self.attention_grid
        {
            return fail(format!(
                "attention_grid {} must equal input_size {} / 2^{stages}",
                self.attention_grid, self.input_size
            ));
        }
        if self.attention_grid << self.deconv_layers != self.heatmap_size {
            return fail(format!(
                "heatmap_size {} unreachable from grid {} with {} stride-2 steps",
                self.heatmap_size, self.attention_grid, self.deconv_layers
            ));
        }
        if self.convlstm_layers == 0 {
            return fail("convlstm_layers must be >= 1".into());
        }
        if self.convlstm_kernel % 2 == 0 {
            return fail(format!(
                "convlstm_kernel {} must be odd to preserve the grid",
                self.convlstm_kernel
            ));
        }
        if self.encode_channels < 2 {
            return fail("encode_channels must be >= 2".into());
        }
        Ok(())
    }

    /// Length of the flattened head-position feature: `(input_size / 8)^2`.
    pub fn position_feature_len(&self) -> usize {
        let side = self.input_size / 8;
        side * side
    }

    pub fn scene_channels(&self) -> usize {
        *self.backbone_channels.last().expect("validated non-empty")
    }
}
