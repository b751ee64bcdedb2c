use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use gaze_core::social::{aggregate_shared, detect_shared, SHARED_THRESHOLD};
use gaze_tensor::{io as tio, Tensor};
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    /// Per-person prediction directories holding frame_XXXXXX.gzt heatmaps;
    /// repeat once per person.
    #[arg(long = "pred", required = true)]
    preds: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub threshold: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            threshold: SHARED_THRESHOLD,
        }
    }
}

fn frame_index_of(name: &str) -> Option<usize> {
    name.strip_prefix("frame_")?
        .strip_suffix(".gzt")?
        .parse()
        .ok()
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    runcfg::override_with(&mut cfg.threshold, args.threshold);
    if cfg.threshold <= 0.0 {
        return Err(CliError::Config("threshold must be positive".into()));
    }
    if args.preds.is_empty() {
        return Err(CliError::Config("at least one --pred directory".into()));
    }

    // frame index -> per-person heatmaps; only frames every person covers
    let mut by_frame: BTreeMap<usize, Vec<Tensor<f32>>> = BTreeMap::new();
    for (pi, dir) in args.preds.iter().enumerate() {
        let entries = fs::read_dir(dir)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(idx) = frame_index_of(name) else { continue };
            let map = tio::load_tensor(&path)?;
            let slot = by_frame.entry(idx).or_default();
            if slot.len() == pi {
                slot.push(map);
            }
        }
    }

    runcfg::echo(&cfg, &args.out)?;
    let csv_path = args.out.join("shared.csv");
    let mut csv = fs::File::create(&csv_path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", csv_path.display())))?;
    writeln!(csv, "frame_index,is_shared,x,y,max_score")?;
    let mut n_shared = 0usize;
    let mut n_frames = 0usize;
    for (idx, maps) in &by_frame {
        if maps.len() != args.preds.len() {
            continue; // some person is missing this frame
        }
        let refs: Vec<&Tensor<f32>> = maps.iter().collect();
        let sum = aggregate_shared(&refs)?;
        let res = detect_shared(&sum, cfg.threshold);
        let (x, y) = res
            .location
            .map_or((String::new(), String::new()), |(r, c)| {
                (c.to_string(), r.to_string())
            });
        writeln!(csv, "{},{},{},{},{}", idx, res.is_shared, x, y, res.max_score)?;
        n_frames += 1;
        n_shared += usize::from(res.is_shared);
    }
    println!("{n_shared}/{n_frames} frames shared; csv at {}", csv_path.display());
    Ok(())
}
