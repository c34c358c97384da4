//! Functional-unit recognition for one action segment.
//!
//! Objects-in-action are looked up in the universal network; every unit
//! holding one of them becomes a candidate if enough of its object nodes
//! were observed. Candidates are scored by
//!
//! ```text
//! conf_foon   = mean(conf of used objects)
//!             - (lambda * sum(conf of unused objects) + eta * sum(conf of extra objects))
//!             + kappa * bonus
//! conf_motion = conf_foon + alpha_fusion * motion_score[class of unit motion]
//! ```
//!
//! where *used* objects are objects-in-action present in the unit, *unused*
//! ones are objects-in-action absent from it and *extra* ones are unit
//! objects that are not objects-in-action. Matching is by label only.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::foon::{FunctionalUnit, UniversalFoon};
use crate::objects::{objects_in_action, observed_frequencies, ObjectConfidence, ScoringWeights};
use crate::taxonomy::MotionTaxonomy;
use crate::trace::{ActionSegment, BoundingBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    /// Weight of the box-overlap bonus.
    pub kappa: f64,
    /// Penalty weight for objects-in-action missing from the unit.
    pub lambda: f64,
    /// Penalty weight for unit objects that were not observed in action.
    pub eta: f64,
    /// Weight of the motion recognizer's score.
    pub alpha_fusion: f64,
    /// Minimum fraction of a unit's object nodes that must be observed.
    pub probe_threshold: f64,
    pub top_k: usize,
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self {
            kappa: 0.2,
            lambda: 0.2,
            eta: 0.2,
            alpha_fusion: 0.15,
            probe_threshold: 0.34,
            top_k: 10,
        }
    }
}

impl FusionWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("alpha_fusion", self.alpha_fusion),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative")));
            }
        }
        if !(0.0..=1.0).contains(&self.probe_threshold) {
            return Err(Error::InvalidParameter("probe_threshold must lie in [0, 1]".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredObject {
    pub label: String,
    pub conf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateUnit<'a> {
    pub unit_id: usize,
    pub unit: &'a FunctionalUnit,
    pub key: &'a str,
    pub probe_overlap: f64,
    pub used: Vec<ScoredObject>,
    pub unused: Vec<ScoredObject>,
    pub extra: Vec<ScoredObject>,
    pub conf_foon: f64,
    pub conf_motion: f64,
}

impl CandidateUnit<'_> {
    pub fn used_labels(&self) -> Vec<&str> {
        self.used.iter().map(|o| o.label.as_str()).collect()
    }
}

/// Confidence assigned to a unit object that is not an object-in-action:
/// `1 - frequency` when it was detected at all, otherwise 1.
pub fn extra_confidence(label: &str, observed: &BTreeMap<String, f64>) -> f64 {
    observed.get(label).map_or(1.0, |f| 1.0 - f)
}

/// Fraction of `unit`'s object-node occurrences (inputs and outputs, with
/// multiplicity) whose label is in `labels`.
pub fn probe_overlap(unit: &FunctionalUnit, labels: &BTreeSet<&str>) -> f64 {
    let hits = unit.objects().filter(|o| labels.contains(o.label.as_str())).count();
    hits as f64 / unit.object_count() as f64
}

/// Collects units containing any object-in-action and keeps those whose
/// probe overlap reaches `theta`. Scores are left at zero.
///
/// `observed` holds detection frequencies of every label seen in the
/// segment; it supplies the confidence of extra objects.
pub fn probe_candidates<'a>(
    foon: &'a UniversalFoon,
    oia: &[ObjectConfidence],
    observed: &BTreeMap<String, f64>,
    theta: f64,
) -> Result<Vec<CandidateUnit<'a>>> {
    let labels: BTreeSet<&str> = oia.iter().map(|o| o.label.as_str()).collect();
    let ids: BTreeSet<usize> = labels.iter().flat_map(|l| foon.probe(l)).collect();

    let mut out = Vec::new();
    for id in ids {
        let unit = foon.unit(id);
        let overlap = probe_overlap(unit, &labels);
        if overlap < theta {
            continue;
        }
        let unit_labels = unit.labels();
        let (used, unused): (Vec<_>, Vec<_>) = oia
            .iter()
            .map(|o| ScoredObject {
                label: o.label.clone(),
                conf: o.conf,
            })
            .partition(|o| unit_labels.contains(o.label.as_str()));
        let extra = unit_labels
            .iter()
            .filter(|l| !labels.contains(*l))
            .map(|l| ScoredObject {
                label: l.to_string(),
                conf: extra_confidence(l, observed),
            })
            .collect();
        out.push(CandidateUnit {
            unit_id: id,
            unit,
            key: foon.key(id),
            probe_overlap: overlap,
            used,
            unused,
            extra,
            conf_foon: 0.0,
            conf_motion: 0.0,
        });
    }
    if out.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(out)
}

/// Mean pairwise IoU between the boxes of the used objects, averaged over the
/// frames where at least two of them are detected. For a label detected
/// several times in a frame its highest-scoring box is taken.
pub fn bonus(segment: &ActionSegment, used_labels: &[&str]) -> f64 {
    let mut total = 0.0;
    let mut frames = 0usize;
    for frame in &segment.frames {
        let boxes: Vec<BoundingBox> = used_labels
            .iter()
            .filter_map(|l| {
                frame
                    .detections_of(l)
                    .max_by(|a, b| a.score.total_cmp(&b.score))
                    .map(|d| d.bbox)
            })
            .collect();
        if boxes.len() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                sum += boxes[i].iou(&boxes[j]);
                pairs += 1;
            }
        }
        total += sum / pairs as f64;
        frames += 1;
    }
    if frames == 0 {
        0.0
    } else {
        total / frames as f64
    }
}

/// Object-interaction confidence from the confidences of the used, unused
/// and extra objects.
pub fn foon_confidence(used: &[f64], unused: &[f64], extra: &[f64], w: &FusionWeights, bonus: f64) -> Result<f64> {
    if used.is_empty() {
        return Err(Error::InvalidParameter("candidate has no used objects".into()));
    }
    let mean = used.iter().sum::<f64>() / used.len() as f64;
    let penalty = w.lambda * unused.iter().sum::<f64>() + w.eta * extra.iter().sum::<f64>();
    Ok(mean - penalty + w.kappa * bonus)
}

pub fn unit_confidence(c: &CandidateUnit<'_>, w: &FusionWeights, bonus_value: f64) -> Result<f64> {
    let confs = |xs: &[ScoredObject]| xs.iter().map(|o| o.conf).collect::<Vec<_>>();
    foon_confidence(&confs(&c.used), &confs(&c.unused), &confs(&c.extra), w, bonus_value)
}

pub fn fuse_motion(c: &CandidateUnit<'_>, motion_scores: &[f64], tax: &MotionTaxonomy, alpha_fusion: f64) -> f64 {
    let conf_lstm = motion_scores
        .get(tax.deep_class(&c.unit.motion.label))
        .copied()
        .unwrap_or(0.0);
    c.conf_foon + alpha_fusion * conf_lstm
}

/// Ranking order: `conf_motion` desc, `conf_foon` desc, motion label, key.
pub fn rank_candidates(cands: &mut [CandidateUnit<'_>]) {
    cands.sort_by(|a, b| {
        b.conf_motion
            .total_cmp(&a.conf_motion)
            .then_with(|| b.conf_foon.total_cmp(&a.conf_foon))
            .then_with(|| a.unit.motion.label.cmp(&b.unit.motion.label))
            .then_with(|| a.key.cmp(b.key))
    });
}

/// Scores and ranks candidate units for `segment`, returning at most
/// `fw.top_k`. Fails with [`Error::NoCandidates`] when no object is in
/// action or no unit passes the probe threshold.
pub fn recognize<'a>(
    foon: &'a UniversalFoon,
    segment: &ActionSegment,
    sw: &ScoringWeights,
    fw: &FusionWeights,
    tax: &MotionTaxonomy,
) -> Result<Vec<CandidateUnit<'a>>> {
    let oia = objects_in_action(segment, sw);
    if oia.is_empty() {
        return Err(Error::NoCandidates);
    }
    let observed = observed_frequencies(segment);
    let mut cands = probe_candidates(foon, &oia, &observed, fw.probe_threshold)?;
    for c in &mut cands {
        let b = bonus(segment, &c.used_labels());
        c.conf_foon = unit_confidence(c, fw, b)?;
        c.conf_motion = fuse_motion(c, &segment.motion_scores, tax, fw.alpha_fusion);
    }
    rank_candidates(&mut cands);
    cands.truncate(fw.top_k);
    Ok(cands)
}
