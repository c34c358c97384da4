//! Objects-in-action: how strongly each detected object takes part in the
//! current action, from its motion (optical flow), its closeness to the hand
//! and how often it is seen.
//!
//! `conf = alpha * c_flow + beta * c_dist + gamma * c_freq`, each term in
//! `[0, 1]`. Objects seen in fewer than `freq_threshold` of the frames are
//! dropped before ranking.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::trace::ActionSegment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Width of the Gaussian applied to mean hand distance, in pixels.
    pub sigma_dist: f64,
    pub freq_threshold: f64,
}

impl ScoringWeights {
    pub fn validate(&self) -> Result<()> {
        let ws = [self.alpha, self.beta, self.gamma];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "alpha, beta and gamma must be non-negative with a positive sum".into(),
            ));
        }
        if !(self.sigma_dist.is_finite() && self.sigma_dist > 0.0) {
            return Err(Error::InvalidParameter("sigma_dist must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.freq_threshold) {
            return Err(Error::InvalidParameter("freq_threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn combine(&self, c_flow: f64, c_dist: f64, c_freq: f64) -> f64 {
        self.alpha * c_flow + self.beta * c_dist + self.gamma * c_freq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectConfidence {
    pub label: String,
    pub c_flow: f64,
    pub c_dist: f64,
    pub c_freq: f64,
    pub conf: f64,
}

/// Fraction of the segment's frames holding at least one detection of `label`.
pub fn frequency_confidence(segment: &ActionSegment, label: &str) -> f64 {
    if segment.frames.is_empty() {
        return 0.0;
    }
    let seen = segment
        .frames
        .iter()
        .filter(|f| f.detections_of(label).next().is_some())
        .count();
    seen as f64 / segment.frames.len() as f64
}

/// Frequencies of every label detected in the segment.
pub fn observed_frequencies(segment: &ActionSegment) -> BTreeMap<String, f64> {
    segment
        .labels()
        .into_iter()
        .map(|l| {
            let f = frequency_confidence(segment, &l);
            (l, f)
        })
        .collect()
}

/// Gaussian of the mean hand-to-box-center distance over frames that have
/// both a hand and the object. With several boxes of the label in a frame the
/// closest one counts. Zero when no frame qualifies.
pub fn distance_confidence(segment: &ActionSegment, label: &str, sigma_dist: f64) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for frame in &segment.frames {
        let Some([hx, hy]) = frame.hand else { continue };
        let nearest = frame
            .detections_of(label)
            .map(|d| {
                let (cx, cy) = d.bbox.center();
                (cx - hx).hypot(cy - hy)
            })
            .fold(f64::INFINITY, f64::min);
        if nearest.is_finite() {
            total += nearest;
            n += 1;
        }
    }
    if n == 0 {
        return 0.0;
    }
    let d = total / n as f64;
    (-(d * d) / (2.0 * sigma_dist * sigma_dist)).exp()
}

fn mean_flows(segment: &ActionSegment) -> BTreeMap<&str, f64> {
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for d in segment.frames.iter().flat_map(|f| &f.detections) {
        let e = acc.entry(d.label.as_str()).or_default();
        e.0 += d.flow;
        e.1 += 1;
    }
    acc.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect()
}

/// Mean flow of `label` divided by the largest mean flow of any label in
/// the segment; 0 when nothing moves or the label is absent.
pub fn flow_confidence(segment: &ActionSegment, label: &str) -> f64 {
    let flows = mean_flows(segment);
    let max = flows.values().copied().fold(0.0, f64::max);
    match flows.get(label) {
        Some(&f) if max > 0.0 => f / max,
        _ => 0.0,
    }
}

/// Scores every sufficiently frequent object in the segment and ranks them
/// by confidence (descending, ties by label). May be empty.
pub fn objects_in_action(segment: &ActionSegment, w: &ScoringWeights) -> Vec<ObjectConfidence> {
    let flows = mean_flows(segment);
    let max_flow = flows.values().copied().fold(0.0, f64::max);

    let mut ranked: Vec<ObjectConfidence> = segment
        .labels()
        .into_iter()
        .filter_map(|label| {
            let c_freq = frequency_confidence(segment, &label);
            if c_freq < w.freq_threshold {
                return None;
            }
            let c_flow = match flows.get(label.as_str()) {
                Some(&f) if max_flow > 0.0 => f / max_flow,
                _ => 0.0,
            };
            let c_dist = distance_confidence(segment, &label, w.sigma_dist);
            Some(ObjectConfidence {
                conf: w.combine(c_flow, c_dist, c_freq),
                label,
                c_flow,
                c_dist,
                c_freq,
            })
        })
        .collect();
    ranked.sort_by(|a, b| b.conf.total_cmp(&a.conf).then_with(|| a.label.cmp(&b.label)));
    ranked
}
