//! Annotation schema: per-person tracks of head boxes with a per-frame gaze
//! point or out-of-frame flag. One JSON document per clip holds a `tracks`
//! array; every record carries the full field set so it stands alone.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One person-frame label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub clip_id: String,
    pub frame_index: usize,
    pub person_id: String,
    /// Normalized (xmin, ymin, xmax, ymax).
    pub bbox: [f64; 4],
    /// Normalized gaze point; present exactly when `inframe` is true.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze: Option<[f64; 2]>,
    pub inframe: bool,
}

impl FrameAnnotation {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let [x0, y0, x1, y1] = self.bbox;
        for (name, v) in [("xmin", x0), ("ymin", y0), ("xmax", x1), ("ymax", y1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("bbox {name}={v} outside [0,1]"));
            }
        }
        if x0 >= x1 || y0 >= y1 {
            return Err(format!("bbox not ordered: {:?}", self.bbox));
        }
        match (self.gaze, self.inframe) {
            (Some([gx, gy]), true) => {
                if !(0.0..=1.0).contains(&gx) || !(0.0..=1.0).contains(&gy) {
                    return Err(format!("gaze ({gx}, {gy}) outside [0,1]"));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err("gaze present but inframe=false".into());
            }
            (None, true) => {
                return Err("inframe=true but gaze absent".into());
            }
        }
        Ok(())
    }
}

/// One person's contiguous run of frame annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub frames: Vec<FrameAnnotation>,
}

impl Track {
    pub fn new(frames: Vec<FrameAnnotation>) -> std::result::Result<Self, String> {
        let track = Track { frames };
        track.validate_structure()?;
        Ok(track)
    }

    pub fn person_id(&self) -> &str {
        &self.frames[0].person_id
    }

    pub fn clip_id(&self) -> &str {
        &self.frames[0].clip_id
    }

    pub fn start_frame(&self) -> usize {
        self.frames[0].frame_index
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    fn validate_structure(&self) -> std::result::Result<(), String> {
        if self.frames.is_empty() {
            return Err("empty track".into());
        }
        let first = &self.frames[0];
        for (i, f) in self.frames.iter().enumerate() {
            if f.person_id != first.person_id {
                return Err(format!(
                    "mixed person ids {} and {}",
                    first.person_id, f.person_id
                ));
            }
            if f.clip_id != first.clip_id {
                return Err(format!("mixed clip ids {} and {}", first.clip_id, f.clip_id));
            }
            if f.frame_index != first.frame_index + i {
                return Err(format!(
                    "frame indices not contiguous: expected {}, got {} at record {i}",
                    first.frame_index + i,
                    f.frame_index
                ));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ClipDocument {
    clip_id: String,
    tracks: Vec<Vec<FrameAnnotation>>,
}

/// Read and validate one clip's annotation document.
pub fn load_annotations(path: &Path) -> Result<Vec<Track>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let doc: ClipDocument = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut tracks = Vec::with_capacity(doc.tracks.len());
    for (t, frames) in doc.tracks.into_iter().enumerate() {
        for (r, frame) in frames.iter().enumerate() {
            frame.validate().map_err(|reason| Error::Annotation {
                path: path.to_path_buf(),
                track: t,
                record: r,
                reason: format!(
                    "{reason} (frame_index {}, person {})",
                    frame.frame_index, frame.person_id
                ),
            })?;
            if frame.clip_id != doc.clip_id {
                return Err(Error::Annotation {
                    path: path.to_path_buf(),
                    track: t,
                    record: r,
                    reason: format!(
                        "record clip_id {} does not match document {}",
                        frame.clip_id, doc.clip_id
                    ),
                });
            }
        }
        let track = Track::new(frames).map_err(|reason| Error::Annotation {
            path: path.to_path_buf(),
            track: t,
            record: 0,
            reason,
        })?;
        tracks.push(track);
    }
    Ok(tracks)
}

/// Write one clip's tracks; all tracks must share a clip id.
pub fn save_annotations(tracks: &[Track], path: &Path) -> Result<()> {
    if tracks.is_empty() {
        fs::write(path, "").map_err(|e| Error::io(path, e))?;
        return Ok(());
    }
    let clip_id = tracks[0].clip_id().to_string();
    for track in tracks {
        track
            .validate_structure()
            .map_err(|reason| Error::Data(format!("refusing to save invalid track: {reason}")))?;
        for frame in &track.frames {
            frame.validate().map_err(|reason| {
                Error::Data(format!("refusing to save invalid record: {reason}"))
            })?;
        }
        if track.clip_id() != clip_id {
            return Err(Error::Data(format!(
                "tracks span clips {} and {}; one document per clip",
                clip_id,
                track.clip_id()
            )));
        }
    }
    let doc = ClipDocument {
        clip_id,
        tracks: tracks.iter().map(|t| t.frames.clone()).collect(),
    };
    let text = serde_json::to_string_pretty(&doc).expect("annotation document serializes");
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}
