//! On-disk dataset layout: one directory per clip holding numbered frames
//! and `annotations.json`. Splits are plain directories of clips.

use std::path::{Path, PathBuf};

use gaze_tensor::Tensor;

use super::annotations::{load_annotations, Track};
use crate::error::{Error, Result};
use crate::img;

/// A clip loaded into memory: raw frames (values in [0, 1]) indexed by
/// `frame_index`, plus its annotation tracks.
pub struct ClipData {
    pub clip_id: String,
    pub dir: PathBuf,
    pub frames: Vec<Option<Tensor<f32>>>,
    pub tracks: Vec<Track>,
}

impl ClipData {
    pub fn frame(&self, index: usize) -> Result<&Tensor<f32>> {
        self.frames
            .get(index)
            .and_then(Option::as_ref)
            .ok_or_else(|| {
                Error::Data(format!("clip {} has no frame {index}", self.clip_id))
            })
    }
}

pub fn load_clip(dir: &Path) -> Result<ClipData> {
    let tracks = load_annotations(&dir.join("annotations.json"))?;
    if tracks.is_empty() {
        return Err(Error::Data(format!("{} has no tracks", dir.display())));
    }
    let clip_id = tracks[0].clip_id().to_string();
    let max_index = tracks
        .iter()
        .map(|t| t.start_frame() + t.len() - 1)
        .max()
        .unwrap_or(0);
    let mut frames: Vec<Option<Tensor<f32>>> = vec![None; max_index + 1];
    for track in &tracks {
        for ann in &track.frames {
            if frames[ann.frame_index].is_none() {
                frames[ann.frame_index] = Some(img::load_frame(dir, ann.frame_index)?);
            }
        }
    }
    Ok(ClipData {
        clip_id,
        dir: dir.to_path_buf(),
        frames,
        tracks,
    })
}

/// Load every clip directory under a split, sorted by name for determinism.
pub fn load_split(dir: &Path) -> Result<Vec<ClipData>> {
    let mut clip_dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    clip_dirs.sort();
    if clip_dirs.is_empty() {
        return Err(Error::Data(format!("{} holds no clip directories", dir.display())));
    }
    clip_dirs.iter().map(|d| load_clip(d)).collect()
}
