use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use gaze_core::data::load_split;
use gaze_core::eval::{evaluate_dataset, EvalSettings};
use gaze_core::model::load_checkpoint;
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mask_sigma: Option<f64>,
    #[arg(long)]
    mask_threshold: Option<f64>,
    /// Also write per-frame scores as CSV.
    #[arg(long)]
    per_frame: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub mask_sigma: f64,
    pub mask_threshold: f64,
    pub per_frame: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            mask_sigma: 3.0,
            mask_threshold: 0.5,
            per_frame: false,
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    runcfg::override_with(&mut cfg.mask_sigma, args.mask_sigma);
    runcfg::override_with(&mut cfg.mask_threshold, args.mask_threshold);
    if args.per_frame {
        cfg.per_frame = true;
    }
    if cfg.mask_sigma <= 0.0 || !(0.0..=1.0).contains(&cfg.mask_threshold) {
        return Err(CliError::Config(format!(
            "mask_sigma {} must be positive and mask_threshold {} in [0,1]",
            cfg.mask_sigma, cfg.mask_threshold
        )));
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

    let settings = EvalSettings {
        mask_sigma: cfg.mask_sigma,
        mask_threshold: cfg.mask_threshold,
    };
    let (report, detail) = evaluate_dataset(&model, &dataset, &settings)?;

    let report_path = args.out.join("report.json");
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Data(format!("report serialization: {e}")))?;
    fs::write(&report_path, &text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", report_path.display())))?;

    if cfg.per_frame {
        let path = args.out.join("per_frame.csv");
        let mut f = fs::File::create(&path)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        writeln!(f, "clip_id,person_id,frame_index,alpha,inframe,l2")?;
        for row in &detail {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                row.clip_id,
                row.person_id,
                row.frame_index,
                row.alpha,
                row.inframe,
                row.l2.map_or(String::new(), |v| v.to_string())
            )?;
        }
    }

    println!("{text}");
    Ok(())
}
