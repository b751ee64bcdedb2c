//! Toy-to-eyes gaze-shift events: an event fires when the attended target
//! changes from the toy to the examiner's face within the allowed gap. The
//! event interval spans the last toy frame to the first eyes frame; only
//! elsewhere-frames may sit inside the gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_GAP_MS: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GazeLabel {
    Toy,
    Eyes,
    Elsewhere,
}

impl std::str::FromStr for GazeLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "toy" => Ok(GazeLabel::Toy),
            "eyes" => Ok(GazeLabel::Eyes),
            "elsewhere" => Ok(GazeLabel::Elsewhere),
            other => Err(format!("unknown label {other:?} (toy|eyes|elsewhere)")),
        }
    }
}

/// Event interval in frames: last toy frame to first eyes frame, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftEvent {
    pub start_frame: usize,
    pub end_frame: usize,
}

#[derive(Debug, Clone)]
pub struct EventStream {
    pub fps: f64,
    pub labels: Vec<GazeLabel>,
    pub events: Vec<ShiftEvent>,
}

/// Detect every toy+ (elsewhere)* eyes+ pattern whose elsewhere-gap lasts
/// at most `max_gap_ms` at the stream's frame rate.
pub fn infer_shift_events(
    labels: &[GazeLabel],
    fps: f64,
    max_gap_ms: f64,
) -> Result<EventStream> {
    if !(fps > 0.0) {
        return Err(Error::Data(format!("fps must be positive, got {fps}")));
    }
    let frame_ms = 1000.0 / fps;
    let mut events = Vec::new();
    let mut last_non_elsewhere: Option<(usize, GazeLabel)> = None;
    for (i, &label) in labels.iter().enumerate() {
        match label {
            GazeLabel::Elsewhere => {}
            GazeLabel::Toy => last_non_elsewhere = Some((i, GazeLabel::Toy)),
            GazeLabel::Eyes => {
                if let Some((j, GazeLabel::Toy)) = last_non_elsewhere {
                    let gap_frames = i - j - 1;
                    if gap_frames as f64 * frame_ms <= max_gap_ms {
                        events.push(ShiftEvent {
                            start_frame: j,
                            end_frame: i,
                        });
                    }
                }
                last_non_elsewhere = Some((i, GazeLabel::Eyes));
            }
        }
    }
    Ok(EventStream {
        fps,
        labels: labels.to_vec(),
        events,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrfResult {
    /// Undefined (None) when there are no predictions.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub matched: usize,
}

fn interval_iou(a: ShiftEvent, b: ShiftEvent) -> f64 {
    let inter_lo = a.start_frame.max(b.start_frame);
    let inter_hi = a.end_frame.min(b.end_frame);
    if inter_hi < inter_lo {
        return 0.0;
    }
    let inter = (inter_hi - inter_lo + 1) as f64;
    let union = (a.end_frame - a.start_frame + 1 + b.end_frame - b.start_frame + 1) as f64 - inter;
    inter / union
}

/// Greedy matching of predicted events to ground truth by temporal overlap;
/// each ground-truth event matches at most once.
pub fn event_prf(
    predicted: &[ShiftEvent],
    ground_truth: &[ShiftEvent],
    iou_threshold: f64,
) -> PrfResult {
    let mut taken = vec![false; ground_truth.len()];
    let mut matched = 0usize;
    for pred in predicted {
        let mut best: Option<(usize, f64)> = None;
        for (i, gt) in ground_truth.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let iou = interval_iou(*pred, *gt);
            if iou >= iou_threshold && best.map_or(true, |(_, b)| iou > b) {
                best = Some((i, iou));
            }
        }
        if let Some((i, _)) = best {
            taken[i] = true;
            matched += 1;
        }
    }
    PrfResult {
        precision: (!predicted.is_empty()).then(|| matched as f64 / predicted.len() as f64),
        recall: (!ground_truth.is_empty()).then(|| matched as f64 / ground_truth.len() as f64),
        matched,
    }
}
