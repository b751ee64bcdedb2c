use std::path::PathBuf;

use clap::Parser;
use gaze_core::data::load_split;
use gaze_core::model::{load_checkpoint, GazeModel, ModelConfig};
use gaze_core::train::{train_stage, Stage, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    /// Dataset split directory (clip subdirectories).
    #[arg(long)]
    data: PathBuf,
    /// Run directory for config, metrics, and checkpoints.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Checkpoint to continue from (required for the temporal stage).
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    stage: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seq_len: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Disable augmentation.
    #[arg(long)]
    no_augment: bool,
    /// Train the no-attention ablation wiring (uniform scene weighting).
    #[arg(long)]
    uniform_attention: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub stage: String,
    pub steps: usize,
    pub batch: usize,
    pub seq_len: usize,
    pub lr: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub augment: bool,
    pub uniform_attention: bool,
    pub model: ModelConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            stage: "spatial".into(),
            steps: 600,
            batch: 4,
            seq_len: 8,
            lr: 2.5e-4,
            seed: 0,
            checkpoint_every: 0,
            augment: true,
            uniform_attention: false,
            model: ModelConfig::default(),
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    runcfg::override_with(&mut cfg.stage, args.stage);
    runcfg::override_with(&mut cfg.steps, args.steps);
    runcfg::override_with(&mut cfg.batch, args.batch);
    runcfg::override_with(&mut cfg.seq_len, args.seq_len);
    runcfg::override_with(&mut cfg.lr, args.lr);
    runcfg::override_with(&mut cfg.seed, args.seed);
    runcfg::override_with(&mut cfg.checkpoint_every, args.checkpoint_every);
    if args.no_augment {
        cfg.augment = false;
    }
    if args.uniform_attention {
        cfg.uniform_attention = true;
    }

    let stage: Stage = cfg.stage.parse().map_err(CliError::Config)?;
    cfg.model.uniform_attention = cfg.uniform_attention;
    cfg.model.validate()?;

    let mut model = match &args.init {
        Some(ckpt) => {
            if !ckpt.join("manifest.json").exists() {
                return Err(CliError::Config(format!(
                    "checkpoint {} is missing manifest.json",
                    ckpt.display()
                )));
            }
            let mut m = load_checkpoint(ckpt)?;
            if cfg.uniform_attention && !m.config().uniform_attention {
                let mut mc = m.config().clone();
                mc.uniform_attention = true;
                let mut swapped = GazeModel::new(mc, cfg.seed)?;
                swapped.params_mut().load_from(m.params())?;
                m = swapped;
            }
            m
        }
        None => {
            if stage == Stage::Temporal {
                return Err(CliError::Config(
                    "temporal stage needs --init with the spatial-stage checkpoint".into(),
                ));
            }
            GazeModel::new(cfg.model.clone(), cfg.seed)?
        }
    };

    let dataset = load_split(&args.data)?;
    runcfg::echo(&cfg, &args.out)?;

    let train_cfg = TrainConfig {
        stage,
        lr: cfg.lr,
        batch: cfg.batch,
        seq_len: cfg.seq_len,
        steps: cfg.steps,
        seed: cfg.seed,
        checkpoint_every: cfg.checkpoint_every,
        augment: cfg.augment,
        ..TrainConfig::default()
    };
    let outcome = train_stage(&mut model, &dataset, &train_cfg, Some(&args.out))?;
    let last = outcome.log.last().expect("steps >= 1");
    println!(
        "{} stage done: {} steps, final loss {:.5}; checkpoint at {}",
        stage,
        outcome.log.len(),
        last.loss,
        args.out.join("checkpoints").join("final").display()
    );
    Ok(())
}
