//! Scoring recognized units against ground truth, and the leave-one-out
//! harness.
//!
//! The overlap between a candidate and a ground-truth unit is the number of
//! object-node occurrences they share, and is zero unless their motions are
//! equivalent. Precision divides it by the candidate's node count, recall by
//! the ground truth's. A candidate is correct when motions are equivalent and
//! both precision and recall exceed `tau_acc`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::foon::{merge, FunctionalUnit, ObjectNode, Subgraph, UniversalFoon};
use crate::recognition::{recognize, CandidateUnit};
use crate::taxonomy::MotionTaxonomy;
use crate::trace::VideoTrace;

/// Shared object-node occurrences of `cand` and `gt`, or 0 when the motions
/// are not equivalent. Nodes match on label and state; a candidate node with
/// an empty state matches any state of the same label.
pub fn node_overlap(cand: &FunctionalUnit, gt: &FunctionalUnit, tax: &MotionTaxonomy) -> usize {
    if !tax.equivalent(&cand.motion.label, &gt.motion.label) {
        return 0;
    }
    let mut remaining: Vec<&ObjectNode> = gt.objects().collect();
    let mut wildcards = Vec::new();
    let mut matched = 0;
    for c in cand.objects() {
        if c.state.is_empty() {
            wildcards.push(c);
            continue;
        }
        if let Some(i) = remaining.iter().position(|g| g.label == c.label && g.state == c.state) {
            remaining.swap_remove(i);
            matched += 1;
        }
    }
    // Exact matches first; a wildcard can then take any leftover node of its label.
    for c in wildcards {
        if let Some(i) = remaining.iter().position(|g| g.label == c.label) {
            remaining.swap_remove(i);
            matched += 1;
        }
    }
    matched
}

pub fn precision_recall(cand: &FunctionalUnit, gt: &FunctionalUnit, tax: &MotionTaxonomy) -> (f64, f64) {
    let overlap = node_overlap(cand, gt, tax) as f64;
    let ratio = |n: usize| if n == 0 { 0.0 } else { overlap / n as f64 };
    (ratio(cand.object_count()), ratio(gt.object_count()))
}

pub fn is_correct(cand: &FunctionalUnit, gt: &FunctionalUnit, tax: &MotionTaxonomy, tau_acc: f64) -> bool {
    if !tax.equivalent(&cand.motion.label, &gt.motion.label) {
        return false;
    }
    let (p, r) = precision_recall(cand, gt, tax);
    p.min(r) > tau_acc
}

pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KStats {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// Top-1 precision.
    pub precision: f64,
    /// Top-1 recall.
    pub recall: f64,
    pub f_score: f64,
    pub per_k: BTreeMap<usize, KStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRow {
    pub video_id: String,
    pub segment_index: usize,
    pub k: usize,
    pub correct: bool,
    pub precision: f64,
    pub recall: f64,
}

/// Outcome of one segment within the top `k` ranked candidates: the first
/// correct one if any, otherwise the one with the best F-score (earliest on
/// ties). No candidates gives `(false, 0, 0)`.
pub fn score_at_k(
    ranked: &[&FunctionalUnit],
    gt: &FunctionalUnit,
    k: usize,
    tax: &MotionTaxonomy,
    tau_acc: f64,
) -> (bool, f64, f64) {
    let window = &ranked[..k.min(ranked.len())];
    if let Some(hit) = window.iter().find(|c| is_correct(c, gt, tax, tau_acc)) {
        let (p, r) = precision_recall(hit, gt, tax);
        return (true, p, r);
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for c in window {
        let (p, r) = precision_recall(c, gt, tax);
        let f = f_score(p, r);
        if best.is_none_or(|(bf, _, _)| f > bf) {
            best = Some((f, p, r));
        }
    }
    best.map_or((false, 0.0, 0.0), |(_, p, r)| (false, p, r))
}

/// Recognition result of every segment of `trace` against `foon`.
pub fn recognize_trace<'a>(
    foon: &'a UniversalFoon,
    trace: &VideoTrace,
    cfg: &PipelineConfig,
    tax: &MotionTaxonomy,
) -> Vec<Result<Vec<CandidateUnit<'a>>>> {
    let sw = cfg.scoring.resolve(trace.frame_width, trace.frame_height);
    trace
        .segments
        .iter()
        .map(|seg| recognize(foon, seg, &sw, &cfg.fusion, tax))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoOutcome {
    pub video_id: String,
    pub rows: Vec<SegmentRow>,
    /// Segments for which no candidate unit was found.
    pub unknown_segments: usize,
}

fn evaluate_video(
    test: &(Subgraph, VideoTrace),
    training: &[Subgraph],
    cfg: &PipelineConfig,
    tax: &MotionTaxonomy,
) -> Result<VideoOutcome> {
    let (gt, trace) = test;
    let foon = merge(training);
    let top_k = cfg.fusion.top_k;
    let mut rows = Vec::with_capacity(gt.units.len() * top_k);
    let mut unknown_segments = 0;
    for (i, (res, gt_unit)) in recognize_trace(&foon, trace, cfg, tax)
        .into_iter()
        .zip(&gt.units)
        .enumerate()
    {
        let ranked: Vec<&FunctionalUnit> = match res {
            Ok(cands) => cands.iter().map(|c| c.unit).collect(),
            Err(Error::NoCandidates) => {
                unknown_segments += 1;
                Vec::new()
            }
            Err(e) => return Err(e),
        };
        for k in 1..=top_k {
            let (correct, precision, recall) = score_at_k(&ranked, gt_unit, k, tax, cfg.tau_acc);
            rows.push(SegmentRow {
                video_id: gt.video_id.clone(),
                segment_index: i,
                k,
                correct,
                precision,
                recall,
            });
        }
    }
    Ok(VideoOutcome {
        video_id: gt.video_id.clone(),
        rows,
        unknown_segments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooReport {
    pub result: EvalResult,
    pub videos: Vec<VideoOutcome>,
    pub segments: usize,
    pub unknown_segments: usize,
}

impl LooReport {
    pub fn rows(&self) -> impl Iterator<Item = &SegmentRow> {
        self.videos.iter().flat_map(|v| v.rows.iter())
    }
}

/// Leave-one-out evaluation: each video is recognized against the network
/// merged from all the others.
///
/// Top-k accuracy pools all segments; precision and recall are averaged over
/// the segments of a video and then over videos. Videos are processed in
/// video-id order on `jobs` threads; results do not depend on `jobs`.
pub fn leave_one_out(
    corpus: &[(Subgraph, VideoTrace)],
    cfg: &PipelineConfig,
    tax: &MotionTaxonomy,
    jobs: usize,
) -> Result<LooReport> {
    if corpus.len() < 2 {
        return Err(Error::CorpusTooSmall(corpus.len()));
    }
    for (g, t) in corpus {
        if g.units.len() != t.segments.len() {
            return Err(Error::SegmentMismatch {
                video_id: t.video_id.clone(),
                segments: t.segments.len(),
                units: g.units.len(),
            });
        }
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| corpus[a].0.video_id.cmp(&corpus[b].0.video_id));

    let run = || {
        order
            .par_iter()
            .map(|&i| {
                let training: Vec<Subgraph> = corpus
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, (g, _))| g.clone())
                    .collect();
                evaluate_video(&corpus[i], &training, cfg, tax)
            })
            .collect::<Result<Vec<_>>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let videos = pool.install(run)?;

    let top_k = cfg.fusion.top_k;
    let mut per_k = BTreeMap::new();
    let segments: usize = videos.iter().map(|v| v.rows.len() / top_k).sum();
    for k in 1..=top_k {
        let mut correct = 0usize;
        let (mut p_sum, mut r_sum) = (0.0, 0.0);
        for v in &videos {
            let rows: Vec<&SegmentRow> = v.rows.iter().filter(|r| r.k == k).collect();
            correct += rows.iter().filter(|r| r.correct).count();
            let n = rows.len() as f64;
            p_sum += rows.iter().map(|r| r.precision).sum::<f64>() / n;
            r_sum += rows.iter().map(|r| r.recall).sum::<f64>() / n;
        }
        let nv = videos.len() as f64;
        per_k.insert(
            k,
            KStats {
                accuracy: correct as f64 / segments as f64,
                precision: p_sum / nv,
                recall: r_sum / nv,
            },
        );
    }
    let top1 = per_k[&1];
    Ok(LooReport {
        result: EvalResult {
            precision: top1.precision,
            recall: top1.recall,
            f_score: f_score(top1.precision, top1.recall),
            per_k,
        },
        unknown_segments: videos.iter().map(|v| v.unknown_segments).sum(),
        videos,
        segments,
    })
}

pub fn results_csv<'a>(rows: impl IntoIterator<Item = &'a SegmentRow>) -> String {
    let mut out = String::from("video_id,segment_index,k,correct,precision,recall\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            r.video_id,
            r.segment_index,
            r.k,
            u8::from(r.correct),
            r.precision,
            r.recall
        );
    }
    out
}

pub fn summary_csv(result: &EvalResult) -> String {
    let mut out = String::from("k,accuracy,precision,recall,f_score\n");
    for (k, s) in &result.per_k {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            k,
            s.accuracy,
            s.precision,
            s.recall,
            f_score(s.precision, s.recall)
        );
    }
    out
}

/// Human-readable per-k table.
pub fn summary_table(result: &EvalResult) -> String {
    let mut out = format!(
        "{:<8}{:>10}{:>11}{:>9}{:>9}\n",
        "", "accuracy", "precision", "recall", "f-score"
    );
    for (k, s) in &result.per_k {
        let _ = writeln!(
            out,
            "{:<8}{:>9.1}%{:>10.1}%{:>8.1}%{:>8.1}%",
            format!("top {k}"),
            100.0 * s.accuracy,
            100.0 * s.precision,
            100.0 * s.recall,
            100.0 * f_score(s.precision, s.recall)
        );
    }
    out
}
