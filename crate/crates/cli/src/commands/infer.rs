use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use gaze_core::data::{load_split, preprocess};
use gaze_core::img;
use gaze_core::model::load_checkpoint;
use gaze_tensor::io as tio;
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Output directory: out/<clip>/<person>/frame_XXXXXX.gzt plus alpha.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write 8-bit grayscale heatmap images.
    #[arg(long)]
    png: bool,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Settings {
    pub png: bool,
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    if args.png {
        cfg.png = true;
    }
    if !args.checkpoint.join("manifest.json").exists() {
        return Err(CliError::Config(format!(
            "checkpoint {} is missing manifest.json",
            args.checkpoint.display()
        )));
    }
    let model = load_checkpoint(&args.checkpoint)?;
    let dataset = load_split(&args.data)?;
    runcfg::echo(&cfg, &args.out)?;

    let size = model.config().input_size;
    let norm = model.config().normalization;
    for clip in &dataset {
        for track in &clip.tracks {
            let person_dir = args.out.join(&clip.clip_id).join(track.person_id());
            fs::create_dir_all(&person_dir)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", person_dir.display())))?;
            let mut frames = Vec::with_capacity(track.len());
            let mut bboxes = Vec::with_capacity(track.len());
            for ann in &track.frames {
                frames.push(preprocess(clip.frame(ann.frame_index)?, size, &norm));
                bboxes.push(Some(ann.bbox));
            }
            let preds = model.forward_sequence(&frames, &bboxes)?;

            let alpha_path = person_dir.join("alpha.csv");
            let mut alpha_csv = fs::File::create(&alpha_path)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", alpha_path.display())))?;
            writeln!(alpha_csv, "frame_index,alpha")?;
            for (ann, pred) in track.frames.iter().zip(preds) {
                let pred = pred.expect("bbox supplied for every frame");
                let idx = ann.frame_index;
                tio::save_tensor(&pred.heatmap, &person_dir.join(format!("frame_{idx:06}.gzt")))?;
                if cfg.png {
                    img::save_gray(&pred.heatmap, &person_dir.join(format!("frame_{idx:06}.png")))?;
                }
                writeln!(alpha_csv, "{},{}", idx, pred.alpha)?;
            }
        }
    }
    println!("predictions written under {}", args.out.display());
    Ok(())
}
