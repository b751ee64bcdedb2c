//! The gaze-target network: a head conditioning branch regulating the main
//! scene branch through spatial attention, a two-layer recurrent ConvLSTM
//! core, a deconvolutional heatmap decoder, and a scalar in-frame head that
//! modulates the final map.

use gaze_tensor::{Element, Graph, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::img;
use crate::model::config::ModelConfig;
use crate::model::params::{bind, init_uniform, BoundParams, ParamStore, LINEAR_GAIN, RELU_GAIN};

/// Per-person per-frame output.
#[derive(Debug, Clone)]
pub struct GazePrediction {
    /// Final modulated heatmap, `[hm, hm]`, values in [0, 1].
    pub heatmap: Tensor<f32>,
    /// In-frame score in (0, 1); higher means the target is inside the frame.
    pub alpha: f32,
    /// Pre-modulation min-max-normalized map, `[hm, hm]`.
    pub raw_map: Tensor<f32>,
}

/// Recurrent state: hidden and cell maps per layer, zeroed at sequence start.
#[derive(Debug, Clone)]
pub struct ConvLstmState {
    pub layers: Vec<(Tensor<f32>, Tensor<f32>)>,
}

/// Graph handles produced by one frame pass.
pub struct FrameVars {
    pub raw_map: Var,
    pub heatmap: Var,
    pub alpha_logit: Var,
    pub alpha: Var,
    pub attention: Var,
}

#[derive(Debug, Clone, Copy)]
struct ConvIds {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy)]
struct StageIds {
    down: ConvIds,
    res1: ConvIds,
    res2: ConvIds,
}

#[derive(Debug, Clone, Copy)]
struct GateIds {
    wx: usize,
    wh: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy)]
struct LstmLayerIds {
    gi: GateIds,
    gf: GateIds,
    gg: GateIds,
    go: GateIds,
}

#[derive(Debug, Clone)]
struct Wiring {
    head_stages: Vec<StageIds>,
    scene_stages: Vec<StageIds>,
    attention_fc: ConvIds,
    encode1: ConvIds,
    encode2: ConvIds,
    lstm: Vec<LstmLayerIds>,
    deconv: Vec<ConvIds>,
    inframe_conv1: ConvIds,
    inframe_conv2: ConvIds,
    inframe_fc: ConvIds,
}

pub struct GazeModel {
    cfg: ModelConfig,
    params: ParamStore<f32>,
    wiring: Wiring,
}

/// Binary head-position mask: 1 inside the (pixel-snapped) box, 0 outside.
/// Zero-area boxes after snapping expand to one pixel.
pub fn head_position_image<T: Element>(bbox: [f64; 4], size: usize) -> Tensor<T> {
    let snap = |v: f64| ((v.clamp(0.0, 1.0) * size as f64).round() as usize).min(size);
    let mut x0 = snap(bbox[0]);
    let mut x1 = snap(bbox[2]);
    let mut y0 = snap(bbox[1]);
    let mut y1 = snap(bbox[3]);
    if x1 <= x0 {
        x0 = x0.min(size - 1);
        x1 = x0 + 1;
    }
    if y1 <= y0 {
        y0 = y0.min(size - 1);
        y1 = y0 + 1;
    }
    let mut out = Tensor::zeros(&[1, size, size]);
    for y in y0..y1 {
        for x in x0..x1 {
            out.set(&[0, y, x], T::ONE);
        }
    }
    out
}

/// Three max-pool halvings then flatten: `[B,1,S,S] -> [B,(S/8)^2]`.
pub fn head_position_feature<T: Element>(g: &mut Graph<T>, pos: Var) -> Result<Var> {
    let shape = g.value(pos).shape().to_vec();
    if shape.len() != 4 || shape[2] != shape[3] || shape[2] % 8 != 0 {
        return Err(Error::Config(format!(
            "head position image must be square with side divisible by 8, got {shape:?}"
        )));
    }
    let p1 = g.max_pool2d(pos, 2, 2)?;
    let p2 = g.max_pool2d(p1, 2, 2)?;
    let p3 = g.max_pool2d(p2, 2, 2)?;
    Ok(g.flatten(p3)?)
}

impl GazeModel {
    /// Fresh model with seeded initialization.
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();

        let conv_init = |params: &mut ParamStore<f32>,
                         rng: &mut ChaCha8Rng,
                         name: &str,
                         cout: usize,
                         cin: usize,
                         k: usize,
                         gain: f64|
         -> ConvIds {
            let fan_in = cin * k * k;
            let w = params.insert(
                format!("{name}.w"),
                init_uniform(rng, &[cout, cin, k, k], fan_in, gain),
            );
            let b = params.insert(format!("{name}.b"), Tensor::zeros(&[cout]));
            ConvIds { w, b }
        };

        let backbone = |params: &mut ParamStore<f32>,
                        rng: &mut ChaCha8Rng,
                        prefix: &str,
                        in_channels: usize|
         -> Vec<StageIds> {
            let mut stages = Vec::new();
            let mut cin = in_channels;
            for (i, &cout) in cfg.backbone_channels.iter().enumerate() {
                let down =
                    conv_init(params, rng, &format!("{prefix}.stage{i}.down"), cout, cin, 3, RELU_GAIN);
                let res1 =
                    conv_init(params, rng, &format!("{prefix}.stage{i}.res1"), cout, cout, 3, RELU_GAIN);
                // damped so each residual block starts near identity
                let res2 =
                    conv_init(params, rng, &format!("{prefix}.stage{i}.res2"), cout, cout, 3, 0.5);
                stages.push(StageIds { down, res1, res2 });
                cin = cout;
            }
            stages
        };

        let head_stages = backbone(&mut params, &mut rng, "head_backbone", 3);
        let scene_stages = backbone(&mut params, &mut rng, "scene_backbone", 4);

        let attn_in = cfg.scene_channels() + cfg.position_feature_len();
        let attn_out = cfg.attention_grid * cfg.attention_grid;
        let attention_fc = {
            let w = params.insert(
                "attention_fc.w",
                init_uniform(&mut rng, &[attn_out, attn_in], attn_in, LINEAR_GAIN),
            );
            let b = params.insert("attention_fc.b", Tensor::zeros(&[attn_out]));
            ConvIds { w, b }
        };

        let e = cfg.encode_channels;
        let encode1 = conv_init(
            &mut params,
            &mut rng,
            "encode.conv1",
            e,
            2 * cfg.scene_channels(),
            3,
            RELU_GAIN,
        );
        let encode2 = conv_init(&mut params, &mut rng, "encode.conv2", e, e, 3, RELU_GAIN);

        let k = cfg.convlstm_kernel;
        let mut lstm = Vec::new();
        for l in 0..cfg.convlstm_layers {
            let gate = |params: &mut ParamStore<f32>, rng: &mut ChaCha8Rng, gname: &str| -> GateIds {
                let fan_in = e * k * k;
                let wx = params.insert(
                    format!("convlstm.layer{l}.{gname}.wx"),
                    init_uniform(rng, &[e, e, k, k], fan_in, LINEAR_GAIN),
                );
                let wh = params.insert(
                    format!("convlstm.layer{l}.{gname}.wh"),
                    init_uniform(rng, &[e, e, k, k], fan_in, LINEAR_GAIN),
                );
                let b = params.insert(format!("convlstm.layer{l}.{gname}.b"), Tensor::zeros(&[e]));
                GateIds { wx, wh, b }
            };
            let gi = gate(&mut params, &mut rng, "input");
            let gf = gate(&mut params, &mut rng, "forget");
            let gg = gate(&mut params, &mut rng, "cell");
            let go = gate(&mut params, &mut rng, "output");
            // bias the forget gate open so early training keeps memory
            for v in params.tensor_mut(gf.b).data_mut() {
                *v += 1.0;
            }
            lstm.push(LstmLayerIds { gi, gf, gg, go });
        }

        let mut deconv = Vec::new();
        let mut cin = e;
        let n_deconv = cfg.deconv_layers;
        for (i, cout) in deconv_plan(e, n_deconv).into_iter().enumerate() {
            // stride-2 k4 transpose: each output cell sums cin * (k/stride)^2 terms
            let fan_in = cin * 4;
            let gain = if i + 1 == n_deconv { LINEAR_GAIN } else { RELU_GAIN };
            let w = params.insert(
                format!("deconv.layer{i}.w"),
                init_uniform(&mut rng, &[cin, cout, 4, 4], fan_in, gain),
            );
            let b = params.insert(format!("deconv.layer{i}.b"), Tensor::zeros(&[cout]));
            deconv.push(ConvIds { w, b });
            cin = cout;
        }

        let c1 = (e / 2).max(2);
        let c2 = (e / 4).max(2);
        let inframe_conv1 = conv_init(&mut params, &mut rng, "inframe.conv1", c1, e, 3, RELU_GAIN);
        let inframe_conv2 = conv_init(&mut params, &mut rng, "inframe.conv2", c2, c1, 3, RELU_GAIN);
        let fc_in = c2 * cfg.attention_grid * cfg.attention_grid;
        let inframe_fc = {
            let w = params.insert(
                "inframe.fc.w",
                init_uniform(&mut rng, &[1, fc_in], fc_in, LINEAR_GAIN),
            );
            let b = params.insert("inframe.fc.b", Tensor::zeros(&[1]));
            ConvIds { w, b }
        };

        Ok(GazeModel {
            cfg,
            params,
            wiring: Wiring {
                head_stages,
                scene_stages,
                attention_fc,
                encode1,
                encode2,
                lstm,
                deconv,
                inframe_conv1,
                inframe_conv2,
                inframe_fc,
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamStore<f32> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<f32> {
        &mut self.params
    }

    /// Bind a (possibly precision-cast) copy of the parameters into a graph.
    pub fn bind_params<T: Element>(
        &self,
        g: &mut Graph<T>,
        store: &ParamStore<T>,
        frozen: &dyn Fn(&str) -> bool,
    ) -> BoundParams {
        bind(store, g, frozen)
    }

    /// Bind the stored f32 parameters for inference (no gradients).
    pub fn bind_inference(&self, g: &mut Graph<f32>) -> BoundParams {
        bind(&self.params, g, &|_| true)
    }

    fn conv<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        ids: ConvIds,
        x: Var,
        stride: usize,
        pad: usize,
    ) -> Result<Var> {
        Ok(g.conv2d(x, bound.var(ids.w), bound.var(ids.b), stride, pad)?)
    }

    fn stage<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        ids: StageIds,
        x: Var,
    ) -> Result<Var> {
        let down = self.conv(g, bound, ids.down, x, 2, 1)?;
        let down = g.relu(down);
        let r1 = self.conv(g, bound, ids.res1, down, 1, 1)?;
        let r1 = g.relu(r1);
        let r2 = self.conv(g, bound, ids.res2, r1, 1, 1)?;
        let sum = g.add(r2, down)?;
        Ok(g.relu(sum))
    }

    fn backbone<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        stages: &[StageIds],
        mut x: Var,
    ) -> Result<Var> {
        for &ids in stages {
            x = self.stage(g, bound, ids, x)?;
        }
        Ok(x)
    }

    /// Head crop `[B,3,S,S]` -> pooled feature `[B,C]`.
    pub fn head_features<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        crop: Var,
    ) -> Result<Var> {
        let feat = self.backbone(g, bound, &self.wiring.head_stages, crop)?;
        let s = self.cfg.attention_grid;
        let pooled = g.avg_pool2d(feat, s, s)?;
        Ok(g.flatten(pooled)?)
    }

    /// Scene plus head-position input `[B,4,S,S]` -> feature map `[B,C,s,s]`.
    pub fn scene_features<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        frame: Var,
        pos: Var,
    ) -> Result<Var> {
        let stacked = g.concat_channels(frame, pos)?;
        self.backbone(g, bound, &self.wiring.scene_stages, stacked)
    }

    /// Softmax attention over the grid cells from the concatenated head
    /// feature and head-position feature.
    pub fn attention_weights<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        head_feat: Var,
        pos_feat: Var,
    ) -> Result<Var> {
        let joint = g.concat_channels(head_feat, pos_feat)?;
        let ids = self.wiring.attention_fc;
        let logits = g.linear(joint, bound.var(ids.w), bound.var(ids.b))?;
        Ok(g.softmax(logits, 1)?)
    }

    /// Uniform attention used by the no-attention ablation: every cell 1/s^2.
    pub fn uniform_attention<T: Element>(&self, g: &mut Graph<T>) -> Var {
        let cells = self.cfg.attention_grid * self.cfg.attention_grid;
        g.leaf(Tensor::full(&[1, cells], T::from_f64(1.0 / cells as f64)))
    }

    /// Weight scene features by attention, then concatenate the tiled head
    /// feature map.
    pub fn fuse<T: Element>(
        &self,
        g: &mut Graph<T>,
        scene_feat: Var,
        attention: Var,
        head_feat: Var,
    ) -> Result<Var> {
        let s = self.cfg.attention_grid;
        let shape = g.value(scene_feat).shape().to_vec();
        if shape.len() != 4 || shape[2] != s || shape[3] != s {
            return Err(Error::Config(format!(
                "scene features {shape:?} do not match attention grid {s}"
            )));
        }
        let b = shape[0];
        let attn_map = g.reshape(attention, vec![b, 1, s, s])?;
        let weighted = g.mul_channel_broadcast(scene_feat, attn_map)?;
        let tiled = g.tile_spatial(head_feat, s, s)?;
        Ok(g.concat_channels(weighted, tiled)?)
    }

    /// Two conv layers compressing the fused stack to the recurrent width.
    pub fn encode<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        fused: Var,
    ) -> Result<Var> {
        let e1 = self.conv(g, bound, self.wiring.encode1, fused, 1, 1)?;
        let e1 = g.relu(e1);
        let e2 = self.conv(g, bound, self.wiring.encode2, e1, 1, 1)?;
        Ok(g.relu(e2))
    }

    /// Zero recurrent state for a new sequence.
    pub fn zero_state(&self) -> ConvLstmState {
        let s = self.cfg.attention_grid;
        let e = self.cfg.encode_channels;
        ConvLstmState {
            layers: (0..self.cfg.convlstm_layers)
                .map(|_| (Tensor::zeros(&[1, e, s, s]), Tensor::zeros(&[1, e, s, s])))
                .collect(),
        }
    }

    pub fn state_to_vars<T: Element>(
        &self,
        g: &mut Graph<T>,
        state: &ConvLstmState,
    ) -> Vec<(Var, Var)> {
        state
            .layers
            .iter()
            .map(|(h, c)| (g.leaf(h.cast()), g.leaf(c.cast())))
            .collect()
    }

    pub fn vars_to_state<T: Element>(&self, g: &Graph<T>, vars: &[(Var, Var)]) -> ConvLstmState {
        ConvLstmState {
            layers: vars
                .iter()
                .map(|&(h, c)| (g.value(h).cast(), g.value(c).cast()))
                .collect(),
        }
    }

    /// One recurrent step over all layers; `state` is updated in place and
    /// the last layer's hidden map is returned.
    pub fn convlstm_step<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        x: Var,
        state: &mut Vec<(Var, Var)>,
    ) -> Result<Var> {
        if state.len() != self.wiring.lstm.len() {
            return Err(Error::Config(format!(
                "state has {} layers, model has {}",
                state.len(),
                self.wiring.lstm.len()
            )));
        }
        let k = self.cfg.convlstm_kernel;
        let pad = k / 2;
        let e = self.cfg.encode_channels;
        let mut input = x;
        for (l, ids) in self.wiring.lstm.iter().enumerate() {
            let (h_prev, c_prev) = state[l];
            let zero_bias = g.leaf(Tensor::zeros(&[e]));
            let gate_pre = |g: &mut Graph<T>, gate: GateIds| -> Result<Var> {
                let from_x = g.conv2d(input, bound.var(gate.wx), bound.var(gate.b), 1, pad)?;
                let from_h = g.conv2d(h_prev, bound.var(gate.wh), zero_bias, 1, pad)?;
                Ok(g.add(from_x, from_h)?)
            };
            let pre_i = gate_pre(g, ids.gi)?;
            let pre_f = gate_pre(g, ids.gf)?;
            let pre_g = gate_pre(g, ids.gg)?;
            let pre_o = gate_pre(g, ids.go)?;
            let gate_i = g.sigmoid(pre_i);
            let gate_f = g.sigmoid(pre_f);
            let cand = g.tanh(pre_g);
            let gate_o = g.sigmoid(pre_o);

            let keep = g.mul(gate_f, c_prev)?;
            let write = g.mul(gate_i, cand)?;
            let c_new = g.add(keep, write)?;
            let c_act = g.tanh(c_new);
            let h_new = g.mul(gate_o, c_act)?;

            state[l] = (h_new, c_new);
            input = h_new;
        }
        Ok(input)
    }

    /// Upsample to the full heatmap and min-max normalize to [0, 1].
    /// A constant raw map normalizes to 0.5 everywhere.
    pub fn decode_heatmap<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        feat: Var,
    ) -> Result<Var> {
        if g.value(feat).shape()[0] != 1 {
            return Err(Error::Config(
                "decode_heatmap normalizes per frame and expects batch 1".into(),
            ));
        }
        let mut x = feat;
        let last = self.wiring.deconv.len() - 1;
        for (i, &ids) in self.wiring.deconv.iter().enumerate() {
            x = g.conv_transpose2d(x, bound.var(ids.w), bound.var(ids.b), 2, 1)?;
            if i != last {
                x = g.relu(x);
            }
        }
        let lo = g.reduce_min(x);
        let hi = g.reduce_max(x);
        let range = g.sub(hi, lo)?;
        if g.value(range).item()?.to_f64() <= 1e-12 {
            let shape = g.value(x).shape().to_vec();
            return Ok(g.leaf(Tensor::full(&shape, T::from_f64(0.5))));
        }
        let shifted = g.sub_broadcast(x, lo)?;
        Ok(g.div_broadcast(shifted, range)?)
    }

    /// Scalar in-frame head: two convs, then a fully-connected logit.
    /// Returns `(logit, sigmoid(logit))`.
    pub fn inframe_alpha<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        feat: Var,
    ) -> Result<(Var, Var)> {
        let c1 = self.conv(g, bound, self.wiring.inframe_conv1, feat, 1, 1)?;
        let c1 = g.relu(c1);
        let c2 = self.conv(g, bound, self.wiring.inframe_conv2, c1, 1, 1)?;
        let c2 = g.relu(c2);
        let flat = g.flatten(c2)?;
        let ids = self.wiring.inframe_fc;
        let logit = g.linear(flat, bound.var(ids.w), bound.var(ids.b))?;
        let alpha = g.sigmoid(logit);
        Ok((logit, alpha))
    }

    /// `clip_min(raw - (1 - alpha), 0)`.
    pub fn modulate<T: Element>(&self, g: &mut Graph<T>, raw: Var, alpha: Var) -> Result<Var> {
        let neg = g.mul_scalar(alpha, -1.0);
        let one_minus = g.add_scalar(neg, 1.0);
        let shifted = g.sub_broadcast(raw, one_minus)?;
        Ok(g.clip_min(shifted, 0.0))
    }

    /// Full pass over one frame. `frame` is the preprocessed `[3,S,S]`
    /// input; the head crop and position mask derive from `bbox`.
    pub fn forward_frame_vars<T: Element>(
        &self,
        g: &mut Graph<T>,
        bound: &BoundParams,
        frame: &Tensor<T>,
        bbox: [f64; 4],
        state: &mut Vec<(Var, Var)>,
    ) -> Result<FrameVars> {
        let s_in = self.cfg.input_size;
        if frame.shape() != [3, s_in, s_in] {
            return Err(Error::Config(format!(
                "expected frame [3,{s_in},{s_in}], got {:?}",
                frame.shape()
            )));
        }
        let pos_img = head_position_image::<T>(bbox, s_in);
        let crop = img::crop_resize(frame, bbox, s_in);

        let frame4 = frame.clone().reshaped(vec![1, 3, s_in, s_in])?;
        let pos4 = pos_img.reshaped(vec![1, 1, s_in, s_in])?;
        let crop4 = crop.reshaped(vec![1, 3, s_in, s_in])?;
        let v_frame = g.leaf(frame4);
        let v_pos = g.leaf(pos4);
        let v_crop = g.leaf(crop4);

        let head_feat = self.head_features(g, bound, v_crop)?;
        let pos_feat = head_position_feature(g, v_pos)?;
        let attention = if self.cfg.uniform_attention {
            self.uniform_attention(g)
        } else {
            self.attention_weights(g, bound, head_feat, pos_feat)?
        };
        let scene_feat = self.scene_features(g, bound, v_frame, v_pos)?;
        let fused = self.fuse(g, scene_feat, attention, head_feat)?;
        let encoded = self.encode(g, bound, fused)?;
        let hidden = self.convlstm_step(g, bound, encoded, state)?;
        let raw_map = self.decode_heatmap(g, bound, hidden)?;
        let (alpha_logit, alpha) = self.inframe_alpha(g, bound, hidden)?;
        let heatmap = self.modulate(g, raw_map, alpha)?;
        Ok(FrameVars {
            raw_map,
            heatmap,
            alpha_logit,
            alpha,
            attention,
        })
    }

    /// Inference over one frame with tensor-level state threading.
    pub fn forward_frame(
        &self,
        frame: &Tensor<f32>,
        bbox: [f64; 4],
        state: &mut ConvLstmState,
    ) -> Result<GazePrediction> {
        let mut g = Graph::new();
        let bound = self.bind_inference(&mut g);
        let mut vars = self.state_to_vars(&mut g, state);
        let out = self.forward_frame_vars(&mut g, &bound, frame, bbox, &mut vars)?;
        *state = self.vars_to_state(&g, &vars);
        let hm = self.cfg.heatmap_size;
        Ok(GazePrediction {
            heatmap: g.value(out.heatmap).clone().reshaped(vec![hm, hm])?,
            alpha: g.value(out.alpha).item()?,
            raw_map: g.value(out.raw_map).clone().reshaped(vec![hm, hm])?,
        })
    }

    /// Run a whole sequence; state starts at zero and threads through time.
    /// Frames without a box are skipped (`None`) with state carried over.
    pub fn forward_sequence(
        &self,
        frames: &[Tensor<f32>],
        bboxes: &[Option<[f64; 4]>],
    ) -> Result<Vec<Option<GazePrediction>>> {
        if frames.len() != bboxes.len() {
            return Err(Error::Data(format!(
                "{} frames vs {} boxes",
                frames.len(),
                bboxes.len()
            )));
        }
        let mut state = self.zero_state();
        let mut out = Vec::with_capacity(frames.len());
        for (frame, bbox) in frames.iter().zip(bboxes) {
            match bbox {
                Some(bbox) => out.push(Some(self.forward_frame(frame, *bbox, &mut state)?)),
                None => out.push(None),
            }
        }
        Ok(out)
    }
}

/// Output channels of each deconv layer: halve until the final 1-channel map.
fn deconv_plan(encode_channels: usize, layers: usize) -> Vec<usize> {
    (0..layers)
        .map(|i| {
            if i + 1 == layers {
                1
            } else {
                (encode_channels >> (i + 1)).max(2)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deconv_plan_ends_at_one_channel() {
        assert_eq!(deconv_plan(64, 4), vec![32, 16, 8, 1]);
        assert_eq!(deconv_plan(6, 2), vec![3, 1]);
    }

    #[test]
    fn position_image_full_box_is_all_ones() {
        let img: Tensor<f64> = head_position_image([0.0, 0.0, 1.0, 1.0], 8);
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn position_image_quadrant() {
        let img: Tensor<f64> = head_position_image([0.0, 0.0, 0.5, 0.5], 4);
        let mut expected = Tensor::zeros(&[1, 4, 4]);
        for y in 0..2 {
            for x in 0..2 {
                expected.set(&[0, y, x], 1.0);
            }
        }
        assert_eq!(img, expected);
    }

    #[test]
    fn degenerate_box_becomes_one_pixel() {
        let img: Tensor<f64> = head_position_image([0.5, 0.5, 0.5001, 0.5001], 8);
        assert_eq!(img.sum_f64(), 1.0);
        let edge: Tensor<f64> = head_position_image([1.0, 1.0, 1.0, 1.0], 8);
        assert_eq!(edge.sum_f64(), 1.0);
        assert_eq!(edge.get(&[0, 7, 7]), 1.0);
    }

    #[test]
    fn position_image_sum_matches_pixel_count() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let size = 8 * rng.gen_range(1..=8usize);
            let x0: f64 = rng.gen_range(0.0..0.9);
            let y0: f64 = rng.gen_range(0.0..0.9);
            let x1: f64 = rng.gen_range(x0 + 0.01..1.0);
            let y1: f64 = rng.gen_range(y0 + 0.01..1.0);
            let img: Tensor<f64> = head_position_image([x0, y0, x1, y1], size);
            let snap = |v: f64| ((v * size as f64).round() as usize).min(size);
            let (px0, px1, py0, py1) = (snap(x0), snap(x1), snap(y0), snap(y1));
            let area = (px1.max(px0 + 1) - px0) * (py1.max(py0 + 1) - py0);
            assert_eq!(img.sum_f64() as usize, area, "box ({x0},{y0},{x1},{y1}) size {size}");
        }
    }
}
