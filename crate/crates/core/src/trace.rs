//! Perception traces: per-frame detections, hand positions, per-object flow
//! magnitudes and per-segment motion scores, stored as one JSON document per
//! video.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foon::canonical_token;
use crate::taxonomy::MOTION_CLASSES;

/// Sums farther than this from 1 are renormalized on ingest.
const NORMALIZATION_SLACK: f64 = 1e-9;
/// Box overhang past the frame edge tolerated before clipping.
const CLIP_SLACK: f64 = 1e-9;

/// Axis-aligned box in pixels, top-left anchored. Serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Box of size `w`×`h` centered on (`cx`, `cy`).
    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }

    /// Clips to `[0, width] × [0, height]`; `None` when nothing remains.
    fn clip(self, width: f64, height: f64) -> Option<Self> {
        let inside = self.x >= 0.0
            && self.y >= 0.0
            && self.x + self.w <= width + CLIP_SLACK
            && self.y + self.h <= height + CLIP_SLACK;
        if inside {
            return Some(self);
        }
        let x0 = self.x.max(0.0);
        let y0 = self.y.max(0.0);
        let x1 = (self.x + self.w).min(width);
        let y1 = (self.y + self.h).min(height);
        (x1 > x0 && y1 > y0).then(|| Self::new(x0, y0, x1 - x0, y1 - y0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub score: f64,
    /// Mean optical-flow magnitude inside the box, pixels per frame.
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand: Option<[f64; 2]>,
    #[serde(default)]
    pub detections: Vec<Detection>,
}

impl FrameRecord {
    pub fn detections_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Detection> + 'a {
        self.detections.iter().filter(move |d| d.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSegment {
    pub start_frame: u64,
    pub end_frame: u64,
    pub motion_scores: Vec<f64>,
    #[serde(default)]
    pub frames: Vec<FrameRecord>,
}

impl ActionSegment {
    /// Distinct detected labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .frames
            .iter()
            .flat_map(|f| f.detections.iter().map(|d| d.label.clone()))
            .collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoTrace {
    pub video_id: String,
    pub frame_width: u32,
    pub frame_height: u32,
    pub segments: Vec<ActionSegment>,
    /// Video id of the annotated subgraph this trace was recorded against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<String>,
}

impl VideoTrace {
    pub fn diagonal(&self) -> f64 {
        f64::from(self.frame_width).hypot(f64::from(self.frame_height))
    }
}

fn schema(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        msg: msg.into(),
    }
}

/// Parses and validates a trace document.
///
/// Motion scores are renormalized to sum to one and boxes hanging outside
/// the frame are clipped (dropped when nothing is left). Labels are
/// lowercased.
pub fn parse_trace(text: &str) -> Result<VideoTrace> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let trace: VideoTrace = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    validate(trace)
}

/// Applies the checks and normalizations of [`parse_trace`] to an in-memory trace.
pub fn validate(mut t: VideoTrace) -> Result<VideoTrace> {
    if t.video_id.is_empty() || !crate::foon::is_token(&t.video_id) {
        return Err(schema("video_id", "must be a non-empty token without whitespace"));
    }
    if t.frame_width == 0 || t.frame_height == 0 {
        return Err(schema("frame_width", "frame dimensions must be positive"));
    }
    let (width, height) = (f64::from(t.frame_width), f64::from(t.frame_height));

    for (si, seg) in t.segments.iter_mut().enumerate() {
        let at = |rest: &str| format!("segments[{si}]{rest}");
        if seg.end_frame < seg.start_frame {
            return Err(schema(at(".end_frame"), "end_frame precedes start_frame"));
        }
        if seg.motion_scores.len() != MOTION_CLASSES {
            return Err(schema(
                at(".motion_scores"),
                format!("expected {MOTION_CLASSES} entries, found {}", seg.motion_scores.len()),
            ));
        }
        if let Some(i) = seg.motion_scores.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(schema(at(&format!(".motion_scores[{i}]")), "must be a non-negative number"));
        }
        let sum: f64 = seg.motion_scores.iter().sum();
        if sum <= 0.0 {
            return Err(Error::DegenerateMotion { segment: si });
        }
        if (sum - 1.0).abs() > NORMALIZATION_SLACK {
            seg.motion_scores.iter_mut().for_each(|s| *s /= sum);
        }

        let mut last: Option<u64> = None;
        for (fi, frame) in seg.frames.iter_mut().enumerate() {
            if last.is_some_and(|prev| frame.frame_index <= prev) {
                return Err(Error::NonMonotoneFrames { segment: si, frame: fi });
            }
            last = Some(frame.frame_index);
            if let Some([hx, hy]) = frame.hand {
                if !(hx.is_finite() && hy.is_finite()) {
                    return Err(schema(at(&format!(".frames[{fi}].hand")), "must be finite"));
                }
            }
            let mut kept = Vec::with_capacity(frame.detections.len());
            for (di, mut d) in frame.detections.drain(..).enumerate() {
                let path = |field: &str| at(&format!(".frames[{fi}].detections[{di}].{field}"));
                d.label = canonical_token(&d.label, "label", false).map_err(|m| schema(path("label"), m))?;
                if !(0.0..=1.0).contains(&d.score) {
                    return Err(schema(path("score"), "must lie in [0, 1]"));
                }
                if !(d.flow.is_finite() && d.flow >= 0.0) {
                    return Err(schema(path("flow"), "must be non-negative"));
                }
                let b = d.bbox;
                if !(b.w > 0.0 && b.h > 0.0) || ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) {
                    return Err(schema(path("box"), "width and height must be positive"));
                }
                if let Some(clipped) = b.clip(width, height) {
                    d.bbox = clipped;
                    kept.push(d);
                }
            }
            frame.detections = kept;
        }
    }

    for (i, pair) in t.segments.windows(2).enumerate() {
        if pair[1].start_frame <= pair[0].end_frame {
            return Err(Error::OverlappingSegments { first: i, second: i + 1 });
        }
    }
    Ok(t)
}

pub fn serialize_trace(t: &VideoTrace) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("trace serializes");
    s.push('\n');
    s
}
