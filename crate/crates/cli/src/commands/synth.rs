use std::path::PathBuf;

use clap::Parser;
use gaze_core::synth::{make_dataset, Difficulty};
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    /// Dataset output directory (receives train/ and test/).
    #[arg(long)]
    out: PathBuf,
    /// JSON config document; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_clips: Option<usize>,
    /// easy: 2 static objects; hard: 4 drifting objects with gaze shifts.
    #[arg(long)]
    difficulty: Option<String>,
    #[arg(long)]
    frame_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub n_clips: usize,
    pub difficulty: String,
    pub frame_size: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            n_clips: 200,
            difficulty: "easy".into(),
            frame_size: 64,
            seed: 0,
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    runcfg::override_with(&mut cfg.n_clips, args.n_clips);
    runcfg::override_with(&mut cfg.difficulty, args.difficulty);
    runcfg::override_with(&mut cfg.frame_size, args.frame_size);
    runcfg::override_with(&mut cfg.seed, args.seed);

    let difficulty: Difficulty = cfg
        .difficulty
        .parse()
        .map_err(CliError::Config)?;
    if cfg.n_clips == 0 {
        return Err(CliError::Config("n_clips must be >= 1".into()));
    }
    if cfg.frame_size < 16 || cfg.frame_size % 8 != 0 {
        return Err(CliError::Config(format!(
            "frame_size {} must be >= 16 and divisible by 8",
            cfg.frame_size
        )));
    }

    runcfg::echo(&cfg, &args.out)?;
    make_dataset(&args.out, cfg.n_clips, difficulty, cfg.frame_size, cfg.seed)?;
    println!(
        "wrote {} {} clips under {}",
        cfg.n_clips,
        cfg.difficulty,
        args.out.display()
    );
    Ok(())
}
