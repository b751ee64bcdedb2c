use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use gaze_core::social::{event_prf, infer_shift_events, GazeLabel, ShiftEvent};
use serde::{Deserialize, Serialize};

use crate::runcfg;
use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    /// Per-frame labels CSV: frame_index,label with label in toy|eyes|elsewhere.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    max_gap_ms: Option<f64>,
    /// Ground-truth events CSV (clip_id,start_frame,end_frame) for PRF.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    iou: Option<f64>,
    #[arg(long)]
    clip_id: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub fps: f64,
    pub max_gap_ms: f64,
    pub iou: f64,
    pub clip_id: String,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            fps: 30.0,
            max_gap_ms: 700.0,
            iou: 0.1,
            clip_id: "clip".into(),
        }
    }
}

fn read_labels(path: &Path) -> CliResult<Vec<GazeLabel>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<(usize, GazeLabel)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("frame_index") {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(idx), Some(label)) = (parts.next(), parts.next()) else {
            return Err(CliError::Data(format!(
                "{}:{}: expected frame_index,label",
                path.display(),
                ln + 1
            )));
        };
        let idx: usize = idx.trim().parse().map_err(|_| {
            CliError::Data(format!("{}:{}: bad frame index {idx:?}", path.display(), ln + 1))
        })?;
        let label: GazeLabel = label.trim().parse().map_err(|e| {
            CliError::Data(format!("{}:{}: {e}", path.display(), ln + 1))
        })?;
        rows.push((idx, label));
    }
    rows.sort_by_key(|(i, _)| *i);
    for (k, (i, _)) in rows.iter().enumerate() {
        if *i != k {
            return Err(CliError::Data(format!(
                "labels must cover frames 0..n contiguously; missing frame {k}"
            )));
        }
    }
    Ok(rows.into_iter().map(|(_, l)| l).collect())
}

fn read_events(path: &Path) -> CliResult<Vec<ShiftEvent>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut events = Vec::new();
    for line in text.lines().skip_while(|l| l.starts_with("clip_id")) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::Data(format!(
                "bad event row {line:?}, expected clip_id,start_frame,end_frame"
            )));
        }
        let start = parts[1].trim().parse().map_err(|_| {
            CliError::Data(format!("bad start_frame in {line:?}"))
        })?;
        let end = parts[2].trim().parse().map_err(|_| {
            CliError::Data(format!("bad end_frame in {line:?}"))
        })?;
        events.push(ShiftEvent { start_frame: start, end_frame: end });
    }
    Ok(events)
}

pub fn run(args: Args) -> CliResult<()> {
    let mut cfg: Settings = runcfg::load(args.config.as_deref())?;
    runcfg::override_with(&mut cfg.fps, args.fps);
    runcfg::override_with(&mut cfg.max_gap_ms, args.max_gap_ms);
    runcfg::override_with(&mut cfg.iou, args.iou);
    runcfg::override_with(&mut cfg.clip_id, args.clip_id);
    if !(cfg.fps > 0.0) {
        return Err(CliError::Config(format!("fps must be positive, got {}", cfg.fps)));
    }

    let labels = read_labels(&args.labels)?;
    runcfg::echo(&cfg, &args.out)?;
    let stream = infer_shift_events(&labels, cfg.fps, cfg.max_gap_ms)?;

    let events_path = args.out.join("events.csv");
    let mut f = fs::File::create(&events_path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", events_path.display())))?;
    writeln!(f, "clip_id,start_frame,end_frame")?;
    for ev in &stream.events {
        writeln!(f, "{},{},{}", cfg.clip_id, ev.start_frame, ev.end_frame)?;
    }

    if let Some(gt_path) = &args.gt {
        let gt = read_events(gt_path)?;
        let prf = event_prf(&stream.events, &gt, cfg.iou);
        let prf_path = args.out.join("prf.json");
        let text = serde_json::to_string_pretty(&prf)
            .map_err(|e| CliError::Data(format!("prf serialization: {e}")))?;
        fs::write(&prf_path, &text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", prf_path.display())))?;
        println!("{text}");
    }
    println!(
        "{} events over {} frames; csv at {}",
        stream.events.len(),
        labels.len(),
        events_path.display()
    );
    Ok(())
}
