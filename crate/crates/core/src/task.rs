//! Recipe classification of whole videos.
//!
//! A video is summarized by the set of its functional-unit keys and the set
//! of object labels it uses. Its similarity to a recipe cluster is the mean
//! similarity to the cluster's members, where two signatures compare by a
//! weighted mix of the Jaccard indices of both sets. Unit order is ignored.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::recognize_trace;
use crate::foon::{merge, FunctionalUnit, RecipeClass, Subgraph};
use crate::recognition::CandidateUnit;
use crate::taxonomy::MotionTaxonomy;
use crate::trace::VideoTrace;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VideoSignature {
    pub unit_keys: BTreeSet<String>,
    pub object_labels: BTreeSet<String>,
}

impl VideoSignature {
    /// Signature of annotated units: all their keys and object labels.
    pub fn from_units<'a>(units: impl IntoIterator<Item = &'a FunctionalUnit>) -> Self {
        let mut sig = Self::default();
        for u in units {
            sig.unit_keys.insert(u.key());
            sig.object_labels.extend(u.objects().map(|o| o.label.clone()));
        }
        sig
    }

    /// Signature of recognized units: the top-1 candidate of each segment
    /// with the objects-in-action it used.
    pub fn from_recognized<'a, 'b: 'a>(top1: impl IntoIterator<Item = &'a CandidateUnit<'b>>) -> Self {
        let mut sig = Self::default();
        for c in top1 {
            sig.unit_keys.insert(c.key.to_string());
            sig.object_labels.extend(c.used.iter().map(|o| o.label.clone()));
        }
        sig
    }
}

/// Jaccard index; two empty sets are identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// `w_fu * J(units) + w_obj * J(objects)`, normalized by `w_fu + w_obj`.
pub fn signature_similarity(a: &VideoSignature, b: &VideoSignature, w_fu: f64, w_obj: f64) -> f64 {
    let total = w_fu + w_obj;
    (w_fu * jaccard(&a.unit_keys, &b.unit_keys) + w_obj * jaccard(&a.object_labels, &b.object_labels)) / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeCluster {
    pub recipe_class: RecipeClass,
    pub member_signatures: Vec<VideoSignature>,
}

/// Groups training videos by recipe class, using their annotated units.
pub fn build_clusters(training: &[Subgraph]) -> Vec<RecipeCluster> {
    let mut by_class: BTreeMap<RecipeClass, Vec<VideoSignature>> = BTreeMap::new();
    for g in training {
        by_class
            .entry(g.recipe_class)
            .or_default()
            .push(VideoSignature::from_units(&g.units));
    }
    by_class
        .into_iter()
        .map(|(recipe_class, member_signatures)| RecipeCluster {
            recipe_class,
            member_signatures,
        })
        .collect()
}

/// Classes ranked by mean member similarity (descending, ties by class token).
pub fn classify_recipe(
    clusters: &[RecipeCluster],
    v: &VideoSignature,
    w_fu: f64,
    w_obj: f64,
) -> Vec<(RecipeClass, f64)> {
    let mut ranked: Vec<(RecipeClass, f64)> = clusters
        .iter()
        .filter(|c| !c.member_signatures.is_empty())
        .map(|c| {
            let sum: f64 = c
                .member_signatures
                .iter()
                .map(|m| signature_similarity(m, v, w_fu, w_obj))
                .sum();
            (c.recipe_class, sum / c.member_signatures.len() as f64)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.token().cmp(b.0.token())));
    ranked
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskInference {
    pub signature: VideoSignature,
    /// Top-1 unit key per segment, `None` when the segment had no candidate.
    pub segment_units: Vec<Option<String>>,
    pub ranking: Vec<(RecipeClass, f64)>,
}

/// Recognizes every segment of `trace` against the network merged from
/// `training` and classifies the resulting signature against the training
/// recipe clusters.
pub fn infer_task(
    training: &[Subgraph],
    trace: &VideoTrace,
    cfg: &PipelineConfig,
    tax: &MotionTaxonomy,
) -> Result<TaskInference> {
    if training.is_empty() {
        return Err(Error::InvalidParameter("no training subgraphs".into()));
    }
    let foon = merge(training);
    let mut top1 = Vec::new();
    let mut segment_units = Vec::new();
    for res in recognize_trace(&foon, trace, cfg, tax) {
        match res {
            Ok(mut cands) => {
                let best = cands.swap_remove(0);
                segment_units.push(Some(best.key.to_string()));
                top1.push(best);
            }
            Err(Error::NoCandidates) => segment_units.push(None),
            Err(e) => return Err(e),
        }
    }
    let signature = VideoSignature::from_recognized(&top1);
    let ranking = classify_recipe(&build_clusters(training), &signature, cfg.w_fu, cfg.w_obj);
    Ok(TaskInference {
        signature,
        segment_units,
        ranking,
    })
}

pub fn classification_csv(video_id: &str, ranking: &[(RecipeClass, f64)]) -> String {
    let mut out = String::from("video_id,rank,recipe_class,score\n");
    for (i, (class, score)) in ranking.iter().enumerate() {
        out.push_str(&format!("{video_id},{},{class},{score:.6}\n", i + 1));
    }
    out
}
