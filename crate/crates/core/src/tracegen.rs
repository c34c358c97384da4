//! Seeded synthetic perception traces and recipe corpora.
//!
//! [`gen_trace`] renders one action segment per functional unit of a
//! subgraph. The unit's input objects are placed near a synthetic hand,
//! move with a fixed flow and are seen in every frame (minus drops).
//! Background objects, taken from the labels of the video's other units, sit
//! still in the corner farthest from the hand and show up in one frame out of
//! ten. Motion scores put `1 - motion_eps` on the unit's motion class.
//!
//! Output is a pure function of the subgraph, layout, noise parameters and
//! taxonomy.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::foon::{FunctionalUnit, MotionNode, ObjectNode, RecipeClass, Subgraph};
use crate::taxonomy::{MotionTaxonomy, MOTION_CLASSES};
use crate::trace::{validate, ActionSegment, BoundingBox, Detection, FrameRecord, VideoTrace};

/// Flow of in-action objects, pixels per frame.
pub const IN_ACTION_FLOW: f64 = 3.0;
/// In-action objects lie within this fraction of the diagonal from the hand.
pub const NEAR_HAND_FRAC: f64 = 0.1;
/// Background objects lie at least this fraction of the diagonal from the hand.
pub const FAR_FROM_HAND_FRAC: f64 = 0.4;
const BOX_FRAC: f64 = 0.12;
const BACKGROUND_PER_SEGMENT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Per-frame probability that an in-action detection is dropped.
    pub drop_prob: f64,
    /// Per-frame probability that a spurious background detection appears.
    pub spurious_prob: f64,
    /// Uniform jitter of box centers and hand, pixels.
    pub jitter_px: f64,
    /// Motion-score mass moved off the true class.
    pub motion_eps: f64,
    pub seed: u64,
}

impl NoiseParams {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            drop_prob: 0.0,
            spurious_prob: 0.0,
            jitter_px: 0.0,
            motion_eps: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("drop_prob", self.drop_prob),
            ("spurious_prob", self.spurious_prob),
            ("motion_eps", self.motion_eps),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.jitter_px.is_finite() && self.jitter_px >= 0.0) {
            return Err(Error::InvalidParameter("jitter_px must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub width: u32,
    pub height: u32,
    pub frames_per_segment: usize,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            frames_per_segment: 20,
        }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn distinct_in_order<'a>(nodes: impl Iterator<Item = &'a ObjectNode>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    nodes
        .map(|o| o.label.as_str())
        .filter(|l| seen.insert(*l))
        .collect()
}

/// Motion scores with `1 - eps` on `class` and the rest spread evenly.
pub fn motion_distribution(class: usize, eps: f64) -> Vec<f64> {
    let rest = eps / (MOTION_CLASSES - 1) as f64;
    (0..MOTION_CLASSES)
        .map(|i| if i == class { 1.0 - eps } else { rest })
        .collect()
}

/// Segment frame spans follow the units' motion frames, shifted forward
/// where units overlap so that segments stay disjoint and ordered.
fn segment_spans(units: &[FunctionalUnit]) -> Vec<(u64, u64)> {
    let mut cursor = 0u64;
    units
        .iter()
        .map(|u| {
            let start = u.motion.start_frame.max(cursor);
            let end = u.motion.end_frame.max(start);
            cursor = end + 1;
            (start, end)
        })
        .collect()
}

fn frame_indices(start: u64, end: u64, n: usize) -> Vec<u64> {
    let len = end - start + 1;
    let n = (n as u64).min(len).max(1);
    if n == 1 {
        return vec![start];
    }
    (0..n).map(|i| start + i * (len - 1) / (n - 1)).collect()
}

pub fn gen_trace(g: &Subgraph, layout: &Layout, noise: &NoiseParams, tax: &MotionTaxonomy) -> VideoTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let (w, h) = (f64::from(layout.width), f64::from(layout.height));
    let diag = w.hypot(h);
    let (bw, bh) = (round2(BOX_FRAC * w), round2(BOX_FRAC * h));
    let drop_prob = noise.drop_prob.clamp(0.0, 1.0);
    let spurious_prob = noise.spurious_prob.clamp(0.0, 1.0);
    let jitter = noise.jitter_px.max(0.0);
    let eps = noise.motion_eps.clamp(0.0, 1.0);

    let all_labels: BTreeSet<&str> = g.units.iter().flat_map(|u| u.labels()).collect();
    let spans = segment_spans(&g.units);

    let mut segments = Vec::with_capacity(g.units.len());
    for (unit, &(start, end)) in g.units.iter().zip(&spans) {
        let in_action = distinct_in_order(unit.inputs.iter());
        let unit_labels = unit.labels();
        let pool: Vec<&str> = all_labels.iter().copied().filter(|l| !unit_labels.contains(l)).collect();
        let mut background = pool.clone();
        background.shuffle(&mut rng);
        background.truncate(BACKGROUND_PER_SEGMENT);
        background.sort_unstable();

        let hand = (w * rng.gen_range(0.4..0.6), h * rng.gen_range(0.4..0.6));
        let offsets: Vec<(f64, f64)> = in_action
            .iter()
            .map(|_| {
                let angle = rng.gen_range(0.0..TAU);
                let radius = rng.gen_range(0.0..NEAR_HAND_FRAC * diag);
                (radius * angle.cos(), radius * angle.sin())
            })
            .collect();
        // Farthest corner from the hand, pulled in so the box stays inside.
        let corner = (
            if hand.0 < w / 2.0 { w - bw / 2.0 } else { bw / 2.0 },
            if hand.1 < h / 2.0 { h - bh / 2.0 } else { bh / 2.0 },
        );
        let jit = |rng: &mut ChaCha8Rng| {
            if jitter > 0.0 {
                rng.gen_range(-jitter..=jitter)
            } else {
                0.0
            }
        };

        let mut frames = Vec::new();
        for (pos, frame_index) in frame_indices(start, end, layout.frames_per_segment).into_iter().enumerate() {
            let hx = hand.0 + jit(&mut rng);
            let hy = hand.1 + jit(&mut rng);
            let mut detections = Vec::new();
            for (label, (dx, dy)) in in_action.iter().zip(&offsets) {
                let dropped = rng.gen_bool(drop_prob);
                let (jx, jy) = (jit(&mut rng), jit(&mut rng));
                let score = rng.gen_range(0.8..1.0);
                if dropped {
                    continue;
                }
                detections.push(Detection {
                    label: label.to_string(),
                    bbox: BoundingBox::centered(round2(hand.0 + dx + jx), round2(hand.1 + dy + jy), bw, bh),
                    score: round2(score),
                    flow: IN_ACTION_FLOW,
                });
            }
            if pos % 10 == 5 {
                for label in &background {
                    detections.push(Detection {
                        label: label.to_string(),
                        bbox: BoundingBox::centered(round2(corner.0), round2(corner.1), bw, bh),
                        score: round2(rng.gen_range(0.6..0.9)),
                        flow: 0.0,
                    });
                }
            }
            if rng.gen_bool(spurious_prob) && !pool.is_empty() {
                let label = pool[rng.gen_range(0..pool.len())];
                let (sx, sy) = (rng.gen_range(0.0..0.05 * diag), rng.gen_range(0.0..0.05 * diag));
                let cx = if corner.0 > w / 2.0 { corner.0 - sx } else { corner.0 + sx };
                let cy = if corner.1 > h / 2.0 { corner.1 - sy } else { corner.1 + sy };
                detections.push(Detection {
                    label: label.to_string(),
                    bbox: BoundingBox::centered(round2(cx), round2(cy), bw, bh),
                    score: round2(rng.gen_range(0.5..0.9)),
                    flow: 0.0,
                });
            }
            frames.push(FrameRecord {
                frame_index,
                hand: Some([round2(hx), round2(hy)]),
                detections,
            });
        }

        segments.push(ActionSegment {
            start_frame: start,
            end_frame: end,
            motion_scores: motion_distribution(tax.deep_class(&unit.motion.label), eps),
            frames,
        });
    }

    let trace = VideoTrace {
        video_id: g.video_id.clone(),
        frame_width: layout.width,
        frame_height: layout.height,
        segments,
        ground_truth: Some(g.video_id.clone()),
    };
    validate(trace).expect("generated trace is valid")
}

/// Compact unit notation: `label:state ... > motion > label:state ...`.
fn template(spec: &str) -> FunctionalUnit {
    let mut parts = spec.split('>').map(str::trim);
    let nodes = |s: Option<&str>| -> Vec<ObjectNode> {
        s.expect("template has three parts")
            .split_whitespace()
            .map(|tok| {
                let (label, state) = tok.split_once(':').unwrap_or((tok, ""));
                ObjectNode::new(label, state)
            })
            .collect()
    };
    let inputs = nodes(parts.next());
    let motion = parts.next().expect("template has a motion").to_string();
    let outputs = nodes(parts.next());
    FunctionalUnit::new(inputs, MotionNode::new(motion, 0, 0), outputs)
}

const SLICE_TOMATO: &str =
    "tomato:whole knife:clean cutting_board:clean > slice > tomato:sliced knife:dirty cutting_board:dirty";

/// Ordered unit templates of a built-in recipe, for the classes that have one.
pub fn recipe_templates(class: RecipeClass) -> Option<Vec<FunctionalUnit>> {
    let specs: &[&str] = match class {
        RecipeClass::Omelette => &[
            "egg:whole bowl:empty > crack > egg:cracked bowl:contains_egg",
            "egg:cracked bowl:contains_egg whisk:clean > whisk > egg:beaten bowl:contains_egg whisk:dirty",
            "pan:empty stove:off > pick+place > pan:on_stove stove:off",
            "oil:bottled pan:on_stove > pour > oil:in_pan pan:oiled",
            "egg:beaten bowl:contains_egg pan:oiled > pour > egg:in_pan bowl:empty pan:contains_egg",
            "pan:contains_egg spatula:clean stove:on > fry > pan:contains_omelette spatula:dirty stove:on",
            "salt:granular pan:contains_omelette > sprinkle > salt:in_pan pan:contains_omelette",
        ],
        RecipeClass::Salad => &[
            "lettuce:whole knife:clean cutting_board:clean > chop > lettuce:chopped knife:dirty cutting_board:dirty",
            SLICE_TOMATO,
            "cucumber:whole peeler:clean > peel > cucumber:peeled peeler:dirty",
            "lettuce:chopped tomato:sliced bowl:empty > pick+place > lettuce:in_bowl tomato:in_bowl bowl:contains_vegetables",
            "olive_oil:bottled bowl:contains_vegetables > pour > olive_oil:in_bowl bowl:contains_salad",
            "bowl:contains_salad salad_tongs:clean > mix > bowl:contains_mixed_salad salad_tongs:dirty",
            "pepper:ground bowl:contains_mixed_salad > sprinkle > pepper:in_bowl bowl:contains_mixed_salad",
        ],
        RecipeClass::Pasta => &[
            "water:tap pot:empty > pour > water:in_pot pot:contains_water",
            "pot:contains_water stove:off > boil > pot:boiling stove:on",
            "pasta:dry pot:boiling > pick+place > pasta:boiling pot:contains_pasta",
            "pot:contains_pasta colander:empty > pour > pot:empty colander:contains_pasta",
            "pasta:drained sauce:jarred pan:warm > mix > pasta:sauced sauce:in_pan pan:contains_pasta",
            "cheese:block grater:clean > grate > cheese:grated grater:dirty",
            "cheese:grated plate:contains_pasta > sprinkle > cheese:on_pasta plate:contains_pasta",
        ],
        RecipeClass::Sandwich => &[
            "bread:sliced butter:soft knife:clean > spread > bread:buttered butter:soft knife:dirty",
            SLICE_TOMATO,
            "ham:sliced cheese:sliced bread:buttered > pick+place > ham:on_bread cheese:on_bread bread:buttered",
            "bread:sliced toaster:off > toast > bread:toasted toaster:on",
            "lettuce:leaf tomato:sliced bread:buttered > pick+place > lettuce:on_bread tomato:on_bread bread:topped",
            "bread:topped knife:clean > cut > bread:halved knife:dirty",
        ],
        RecipeClass::CoffeeAndTea => &[
            "water:tap kettle:empty > pour > water:in_kettle kettle:full",
            "kettle:full stove:off > boil > kettle:boiling stove:on",
            "tea_bag:dry mug:empty > pick+place > tea_bag:in_mug mug:contains_tea_bag",
            "kettle:boiling mug:contains_tea_bag > pour > kettle:half_full mug:contains_tea",
            "sugar:granular spoon:clean mug:contains_tea > stir > sugar:dissolved spoon:dirty mug:contains_sweet_tea",
            "milk:cold mug:contains_sweet_tea > pour > milk:in_mug mug:contains_milk_tea",
        ],
        _ => return None,
    };
    Some(specs.iter().map(|s| template(s)).collect())
}

/// Classes with built-in templates.
pub const TEMPLATE_CLASSES: [RecipeClass; 5] = [
    RecipeClass::Omelette,
    RecipeClass::Salad,
    RecipeClass::Pasta,
    RecipeClass::Sandwich,
    RecipeClass::CoffeeAndTea,
];

/// Builds `videos_per_class` annotated videos for each class. Video `j`
/// of a class performs every template step except step `j mod steps`, so
/// with three or more videos per class every step occurs in at least two
/// videos. Frame times are drawn from `seed`.
pub fn synthetic_corpus(classes: &[RecipeClass], videos_per_class: usize, seed: u64) -> Result<Vec<Subgraph>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::new();
    for &class in classes {
        let templates = recipe_templates(class)
            .ok_or_else(|| Error::InvalidParameter(format!("no built-in templates for {class}")))?;
        for j in 0..videos_per_class {
            let skip = j % templates.len();
            let mut cursor: u64 = rng.gen_range(0..30);
            let units = templates
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, t)| {
                    let mut u = t.clone();
                    let len: u64 = rng.gen_range(40..120);
                    u.motion.start_frame = cursor;
                    u.motion.end_frame = cursor + len - 1;
                    cursor += len + rng.gen_range(5..30);
                    u
                })
                .collect();
            corpus.push(Subgraph::new(format!("{class}_{j:02}"), class, units));
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::serialize_trace;

    fn sample() -> Subgraph {
        synthetic_corpus(&[RecipeClass::Omelette], 1, 3).unwrap().remove(0)
    }

    #[test]
    fn deterministic() {
        let g = sample();
        let tax = MotionTaxonomy::default();
        let noise = NoiseParams {
            drop_prob: 0.2,
            spurious_prob: 0.3,
            jitter_px: 4.0,
            motion_eps: 0.1,
            seed: 42,
        };
        let a = serialize_trace(&gen_trace(&g, &Layout::default(), &noise, &tax));
        let b = serialize_trace(&gen_trace(&g, &Layout::default(), &noise, &tax));
        assert_eq!(a, b);
        let c = serialize_trace(&gen_trace(&g, &Layout::default(), &NoiseParams { seed: 43, ..noise }, &tax));
        assert_ne!(a, c);
    }

    #[test]
    fn one_segment_per_unit() {
        let g = sample();
        let t = gen_trace(&g, &Layout::default(), &NoiseParams::noiseless(1), &MotionTaxonomy::default());
        assert_eq!(t.segments.len(), g.units.len());
        for (seg, unit) in t.segments.iter().zip(&g.units) {
            assert_eq!(seg.frames.len(), 20);
            assert_eq!((seg.start_frame, seg.end_frame), (unit.motion.start_frame, unit.motion.end_frame));
            let class = MotionTaxonomy::default().deep_class(&unit.motion.label);
            assert_eq!(seg.motion_scores[class], 1.0);
        }
    }

    #[test]
    fn geometry_separates_objects() {
        let g = sample();
        let layout = Layout::default();
        let t = gen_trace(&g, &layout, &NoiseParams::noiseless(9), &MotionTaxonomy::default());
        let diag = t.diagonal();
        for (seg, unit) in t.segments.iter().zip(&g.units) {
            let inputs: BTreeSet<&str> = unit.inputs.iter().map(|o| o.label.as_str()).collect();
            for f in &seg.frames {
                let [hx, hy] = f.hand.unwrap();
                for d in &f.detections {
                    let (cx, cy) = d.bbox.center();
                    let dist = (cx - hx).hypot(cy - hy);
                    if inputs.contains(d.label.as_str()) {
                        assert!(dist <= NEAR_HAND_FRAC * diag + 0.05, "{dist}");
                        assert_eq!(d.flow, IN_ACTION_FLOW);
                    } else {
                        assert!(dist >= FAR_FROM_HAND_FRAC * diag, "{dist}");
                        assert_eq!(d.flow, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn overlapping_units_get_disjoint_segments() {
        let mut g = sample();
        for u in &mut g.units {
            u.motion.start_frame = 10;
            u.motion.end_frame = 12;
        }
        let t = gen_trace(&g, &Layout::default(), &NoiseParams::noiseless(0), &MotionTaxonomy::default());
        for pair in t.segments.windows(2) {
            assert!(pair[1].start_frame > pair[0].end_frame);
        }
        assert_eq!(t.segments[0].frames.len(), 3);
    }

    #[test]
    fn motion_distribution_sums_to_one() {
        let d = motion_distribution(3, 0.1);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d[3], 0.9);
    }

    #[test]
    fn corpus_coverage() {
        let corpus = synthetic_corpus(&TEMPLATE_CLASSES, 3, 5).unwrap();
        assert_eq!(corpus.len(), 15);
        for g in &corpus {
            assert!(g.units.len() >= 5);
            for u in &g.units {
                let key = u.key();
                let count = corpus.iter().filter(|h| h.units.iter().any(|v| v.key() == key)).count();
                assert!(count >= 2, "{key} appears once");
            }
        }
        assert!(synthetic_corpus(&[RecipeClass::Pizza], 1, 0).is_err());
    }
}
