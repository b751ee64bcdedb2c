//! The optimizer loop. The spatial stage samples independent frames with
//! the recurrent state reset each time; the temporal stage runs truncated
//! backpropagation through fixed-length windows with the backbone, attention
//! layer, and encoder frozen. Both stages share one code path: a spatial
//! sample is a window of length one.
//!
//! Sampling and augmentation draws happen on the trainer thread; the
//! forward/backward passes of a batch run on worker threads and their
//! gradients are reduced in sample order, so a seed fixes the whole
//! trajectory bitwise.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use gaze_tensor::{Element, Graph, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    augment, flip_horizontal, head_position_noise, preprocess, ClipData, FrameAnnotation,
    DEFAULT_GT_SIGMA,
};
use crate::error::{Error, Result};
use crate::model::{is_frozen_name, save_checkpoint, GazeModel, FREEZE_PREFIXES};
use crate::train::adam::Adam;
use crate::train::loss::{composite_loss_vars, LossWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Spatial,
    Temporal,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Spatial => write!(f, "spatial"),
            Stage::Temporal => write!(f, "temporal"),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spatial" => Ok(Stage::Spatial),
            "temporal" => Ok(Stage::Temporal),
            other => Err(format!("unknown stage {other:?} (spatial|temporal)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub stage: Stage,
    pub lr: f64,
    /// Samples per optimizer step: frames (spatial) or windows (temporal).
    pub batch: usize,
    /// Window length for truncated backpropagation through time.
    pub seq_len: usize,
    pub steps: usize,
    pub seed: u64,
    pub loss: LossWeights,
    /// 0 writes only the final checkpoint.
    pub checkpoint_every: usize,
    pub augment: bool,
    /// Global gradient-norm ceiling; 0 disables clipping.
    pub grad_clip: f64,
    /// Parameter-name prefixes frozen in the temporal stage.
    pub freeze_prefixes: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            stage: Stage::Spatial,
            lr: 2.5e-4,
            batch: 4,
            seq_len: 8,
            steps: 500,
            seed: 0,
            loss: LossWeights::default(),
            checkpoint_every: 0,
            augment: true,
            grad_clip: 5.0,
            freeze_prefixes: FREEZE_PREFIXES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.steps == 0 {
            return Err(Error::Config("batch and steps must be >= 1".into()));
        }
        if self.stage == Stage::Temporal {
            if self.seq_len < 2 {
                return Err(Error::Config("temporal stage needs seq_len >= 2".into()));
            }
            let expected: Vec<String> = FREEZE_PREFIXES.iter().map(|s| s.to_string()).collect();
            if self.freeze_prefixes != expected {
                return Err(Error::Config(format!(
                    "temporal stage freezes exactly the region up to the encoder: {expected:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub stage: Stage,
    pub loss: f64,
    pub l_h: f64,
    pub l_f: f64,
}

pub struct TrainOutcome {
    pub log: Vec<StepLog>,
}

struct SampleRef {
    clip: usize,
    track: usize,
    offset: usize,
}

/// One window of ready model inputs, drawn and augmented on the trainer
/// thread.
struct PreparedSample {
    frames: Vec<(Tensor<f32>, FrameAnnotation)>,
}

struct SampleResult {
    grads: Vec<Option<Tensor<f32>>>,
    loss: f64,
    l_h: f64,
    l_f: f64,
    terms: usize,
}

fn compute_sample(
    model: &GazeModel,
    sample: &PreparedSample,
    frozen: fn(&str) -> bool,
    weights: &LossWeights,
) -> Result<SampleResult> {
    let hm_size = model.config().heatmap_size;
    let mut g = Graph::<f32>::new();
    let bound = model.bind_params(&mut g, model.params(), &frozen);
    let mut state = model.state_to_vars(&mut g, &model.zero_state());
    let mut frame_losses = Vec::with_capacity(sample.frames.len());
    let mut l_h = 0.0;
    let mut l_f = 0.0;
    for (input, ann) in &sample.frames {
        let out = model.forward_frame_vars(&mut g, &bound, input, ann.bbox, &mut state)?;
        let (loss, lh, lf) =
            composite_loss_vars(&mut g, &out, ann, hm_size, DEFAULT_GT_SIGMA, weights)?;
        frame_losses.push(loss);
        l_h += lh;
        l_f += lf;
    }
    let mut total = frame_losses[0];
    for &l in &frame_losses[1..] {
        total = g.add(total, l)?;
    }
    let total = g.mul_scalar(total, 1.0 / frame_losses.len() as f64);
    let loss = g.value(total).item()?.to_f64();
    if !loss.is_finite() {
        return Err(Error::Diverged {
            step: 0,
            reason: format!("sample loss became {loss}"),
        });
    }
    g.backward(total)?;
    let grads = (0..model.params().len())
        .map(|i| g.grad(bound.var(i)))
        .collect();
    Ok(SampleResult {
        grads,
        loss,
        l_h,
        l_f,
        terms: sample.frames.len(),
    })
}

/// Run one training stage over an in-memory dataset. When `run_dir` is
/// given, appends `metrics.csv` and writes checkpoints under
/// `checkpoints/`; the final checkpoint lands in `checkpoints/final`.
pub fn train_stage(
    model: &mut GazeModel,
    dataset: &[ClipData],
    cfg: &TrainConfig,
    run_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    let window = match cfg.stage {
        Stage::Spatial => 1,
        Stage::Temporal => cfg.seq_len,
    };
    let samples = sample_index(dataset, window);
    if samples.is_empty() {
        return Err(Error::Data(format!(
            "no track admits a window of {window} frames"
        )));
    }
    let frozen: fn(&str) -> bool = match cfg.stage {
        Stage::Spatial => |_| false,
        Stage::Temporal => is_frozen_name,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params(), cfg.lr);
    let mut log = Vec::with_capacity(cfg.steps);
    let mut csv = match run_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join("metrics.csv");
            let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            writeln!(f, "step,stage,loss,l_h,l_f").map_err(|e| Error::io(&path, e))?;
            Some((f, path))
        }
        None => None,
    };

    let input_size = model.config().input_size;
    let norm = model.config().normalization;

    for step in 0..cfg.steps {
        // draws stay on this thread so the seed pins the trajectory
        let mut batch = Vec::with_capacity(cfg.batch);
        for _ in 0..cfg.batch {
            let pick = &samples[rng.gen_range(0..samples.len())];
            let clip = &dataset[pick.clip];
            let track = &clip.tracks[pick.track];
            let start = pick.offset + rng.gen_range(0..=track.len() - window);

            let mut frames = Vec::with_capacity(window);
            if window == 1 {
                let ann = &track.frames[start - track.start_frame()];
                let raw = clip.frame(ann.frame_index)?;
                let (frame, ann) = if cfg.augment {
                    augment(raw, ann, &mut rng)
                } else {
                    (raw.clone(), ann.clone())
                };
                frames.push((preprocess(&frame, input_size, &norm), ann));
            } else {
                // one draw for the whole window keeps the sequence coherent:
                // shared flip and color scale, per-frame head noise
                let do_flip = cfg.augment && rng.gen_bool(0.5);
                let color: [f32; 3] = if cfg.augment {
                    [0, 1, 2].map(|_| rng.gen_range(0.8..1.2))
                } else {
                    [1.0; 3]
                };
                for i in 0..window {
                    let ann = &track.frames[start + i - track.start_frame()];
                    let raw = clip.frame(ann.frame_index)?;
                    let (mut frame, mut ann) = if do_flip {
                        flip_horizontal(raw, ann)
                    } else {
                        (raw.clone(), ann.clone())
                    };
                    if cfg.augment {
                        scale_channels(&mut frame, color);
                        ann = head_position_noise(&ann, &mut rng);
                    }
                    frames.push((preprocess(&frame, input_size, &norm), ann));
                }
            }
            batch.push(PreparedSample { frames });
        }

        // forward/backward in parallel, reduced in sample order
        let results: Vec<Result<SampleResult>> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|sample| {
                    let model_ref: &GazeModel = model;
                    let weights = &cfg.loss;
                    scope.spawn(move || compute_sample(model_ref, sample, frozen, weights))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });

        let mut grad_sum: Vec<Option<Tensor<f32>>> = vec![None; model.params().len()];
        let mut step_loss = 0.0;
        let mut step_lh = 0.0;
        let mut step_lf = 0.0;
        let mut loss_terms = 0usize;
        for result in results {
            let result = match result {
                Ok(r) => r,
                Err(Error::Diverged { reason, .. }) => {
                    if let Some(dir) = run_dir {
                        save_checkpoint(model, &dir.join("checkpoints").join("final"))?;
                    }
                    return Err(Error::Diverged { step, reason });
                }
                Err(e) => return Err(e),
            };
            step_loss += result.loss;
            step_lh += result.l_h;
            step_lf += result.l_f;
            loss_terms += result.terms;
            for (slot, grad) in grad_sum.iter_mut().zip(result.grads) {
                match (slot.as_mut(), grad) {
                    (Some(acc), Some(g)) => {
                        for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                            *a += b;
                        }
                    }
                    (None, Some(g)) => *slot = Some(g),
                    _ => {}
                }
            }
        }

        let mut scale = 1.0 / cfg.batch as f32;
        if cfg.grad_clip > 0.0 {
            let mut sq = 0.0f64;
            for slot in grad_sum.iter().flatten() {
                for &v in slot.data() {
                    let v = f64::from(v) * f64::from(scale);
                    sq += v * v;
                }
            }
            let norm = sq.sqrt();
            if norm > cfg.grad_clip {
                scale *= (cfg.grad_clip / norm) as f32;
            }
        }
        for slot in grad_sum.iter_mut().flatten() {
            for v in slot.data_mut() {
                *v *= scale;
            }
        }
        adam.step(model.params_mut(), &grad_sum);

        let entry = StepLog {
            step,
            stage: cfg.stage,
            loss: step_loss / cfg.batch as f64,
            l_h: step_lh / loss_terms.max(1) as f64,
            l_f: step_lf / loss_terms.max(1) as f64,
        };
        if let Some((f, path)) = csv.as_mut() {
            writeln!(
                f,
                "{},{},{},{},{}",
                entry.step, entry.stage, entry.loss, entry.l_h, entry.l_f
            )
            .map_err(|e| Error::io(&*path, e))?;
        }
        log.push(entry);

        if let Some(dir) = run_dir {
            if cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 {
                let ckpt = dir.join("checkpoints").join(format!("step_{:06}", step + 1));
                save_checkpoint(model, &ckpt)?;
            }
        }
    }

    if let Some(dir) = run_dir {
        save_checkpoint(model, &dir.join("checkpoints").join("final"))?;
    }
    Ok(TrainOutcome { log })
}

fn scale_channels(frame: &mut Tensor<f32>, factors: [f32; 3]) {
    let plane = frame.shape()[1] * frame.shape()[2];
    for c in 0..3 {
        for v in &mut frame.data_mut()[c * plane..(c + 1) * plane] {
            *v *= factors[c];
        }
    }
}

/// All (clip, track, start-anchor) triples admitting a window of `len`.
fn sample_index(dataset: &[ClipData], len: usize) -> Vec<SampleRef> {
    let mut out = Vec::new();
    for (ci, clip) in dataset.iter().enumerate() {
        for (ti, track) in clip.tracks.iter().enumerate() {
            if track.len() >= len {
                out.push(SampleRef {
                    clip: ci,
                    track: ti,
                    offset: track.start_frame(),
                });
            }
        }
    }
    out
}
