use foon_core::foon::{FunctionalUnit, MotionNode, ObjectNode, UniversalFoon};
use foon_core::objects::{objects_in_action, ScoringWeights};
use foon_core::recognition::{foon_confidence, recognize, FusionWeights};
use foon_core::taxonomy::MotionTaxonomy;
use foon_core::trace::{ActionSegment, BoundingBox, Detection, FrameRecord};
use proptest::prelude::*;

const LABELS: [&str; 5] = ["egg", "bowl", "fork", "pan", "knife"];

fn detection() -> impl Strategy<Value = Detection> {
    (
        prop::sample::select(LABELS.to_vec()),
        0.0..500.0f64,
        0.0..400.0f64,
        5.0..100.0f64,
        5.0..80.0f64,
        0.0..1.0f64,
        0.0..5.0f64,
    )
        .prop_map(|(l, x, y, w, h, score, flow)| Detection {
            label: l.to_string(),
            bbox: BoundingBox::new(x, y, w, h),
            score,
            flow,
        })
}

fn segment() -> impl Strategy<Value = ActionSegment> {
    (
        prop::collection::vec(
            (
                prop::option::of((0.0..640.0f64, 0.0..480.0f64)),
                prop::collection::vec(detection(), 0..6),
            ),
            1..8,
        ),
        prop::collection::vec(0.01..1.0f64, 10),
    )
        .prop_map(|(frames, raw)| {
            let total: f64 = raw.iter().sum();
            ActionSegment {
                start_frame: 0,
                end_frame: frames.len() as u64 - 1,
                motion_scores: raw.iter().map(|v| v / total).collect(),
                frames: frames
                    .into_iter()
                    .enumerate()
                    .map(|(i, (hand, detections))| FrameRecord {
                        frame_index: i as u64,
                        hand: hand.map(|(x, y)| [x, y]),
                        detections,
                    })
                    .collect(),
            }
        })
}

fn weights() -> impl Strategy<Value = ScoringWeights> {
    (0.0..1.0f64, 0.0..1.0f64, 0.01..1.0f64, 0.0..0.5f64).prop_map(|(a, b, g, t)| ScoringWeights {
        alpha: a,
        beta: b,
        gamma: g,
        sigma_dist: 120.0,
        freq_threshold: t,
    })
}

fn unit(inputs: &[&str], motion: &str, outputs: &[&str]) -> FunctionalUnit {
    let nodes = |xs: &[&str]| xs.iter().map(|l| ObjectNode::new(*l, "")).collect();
    FunctionalUnit::new(nodes(inputs), MotionNode::new(motion, 0, 1), nodes(outputs))
}

fn small_foon() -> UniversalFoon {
    UniversalFoon::from_units([
        unit(&["egg", "bowl"], "crack", &["egg", "bowl"]),
        unit(&["egg", "fork", "bowl"], "stir", &["egg", "bowl"]),
        unit(&["pan", "egg"], "cook", &["pan", "egg"]),
        unit(&["knife", "egg"], "slice", &["egg"]),
        unit(&["bowl", "pan"], "pour", &["pan"]),
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn oia_matches_weighted_sum_and_frequency(seg in segment(), w in weights()) {
        let n = seg.frames.len() as f64;
        for o in objects_in_action(&seg, &w) {
            let seen = seg.frames.iter().filter(|f| f.detections.iter().any(|d| d.label == o.label)).count();
            prop_assert!((o.c_freq - seen as f64 / n).abs() < 1e-12);
            prop_assert!(o.c_freq >= w.freq_threshold);
            let expect = w.alpha * o.c_flow + w.beta * o.c_dist + w.gamma * o.c_freq;
            prop_assert!((o.conf - expect).abs() < 1e-9);
            for c in [o.c_flow, o.c_dist, o.c_freq] {
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }

    #[test]
    fn oia_ranking_ignores_weight_scale(seg in segment(), w in weights(), e in -3i32..4) {
        let s = 2f64.powi(e);
        let scaled = ScoringWeights { alpha: w.alpha * s, beta: w.beta * s, gamma: w.gamma * s, ..w };
        let a: Vec<String> = objects_in_action(&seg, &w).into_iter().map(|o| o.label).collect();
        let b: Vec<String> = objects_in_action(&seg, &scaled).into_iter().map(|o| o.label).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn foon_confidence_falls_with_each_penalty(
        used in prop::collection::vec(0.0..1.0f64, 1..5),
        unused in prop::collection::vec(0.0..1.0f64, 1..5),
        extra in prop::collection::vec(0.0..1.0f64, 1..5),
        lambda in 0.01..1.0f64,
        eta in 0.01..1.0f64,
        bonus in 0.0..1.0f64,
        bump in 0.01..0.5f64,
    ) {
        let w = FusionWeights { lambda, eta, ..Default::default() };
        let brute = |u: &[f64], n: &[f64], x: &[f64]| {
            u.iter().sum::<f64>() / u.len() as f64 - lambda * n.iter().sum::<f64>()
                - eta * x.iter().sum::<f64>() + w.kappa * bonus
        };
        let base = foon_confidence(&used, &unused, &extra, &w, bonus).unwrap();
        prop_assert!((base - brute(&used, &unused, &extra)).abs() < 1e-9);
        for i in 0..unused.len() {
            let mut more = unused.clone();
            more[i] += bump;
            prop_assert!(foon_confidence(&used, &more, &extra, &w, bonus).unwrap() < base);
        }
        for i in 0..extra.len() {
            let mut more = extra.clone();
            more[i] += bump;
            prop_assert!(foon_confidence(&used, &unused, &more, &w, bonus).unwrap() < base);
        }
    }

    #[test]
    fn without_fusion_the_ranking_follows_object_confidence(seg in segment(), w in weights()) {
        let foon = small_foon();
        let fw = FusionWeights { alpha_fusion: 0.0, probe_threshold: 0.0, ..Default::default() };
        if let Ok(ranked) = recognize(&foon, &seg, &w, &fw, &MotionTaxonomy::default()) {
            for c in &ranked {
                prop_assert_eq!(c.conf_motion, c.conf_foon);
            }
            prop_assert!(ranked.windows(2).all(|p| p[0].conf_foon >= p[1].conf_foon));
        }
    }

    #[test]
    fn fusion_adds_the_motion_score_of_the_unit_class(seg in segment(), w in weights(), alpha in 0.0..1.0f64) {
        let foon = small_foon();
        let tax = MotionTaxonomy::default();
        let fw = FusionWeights { alpha_fusion: alpha, probe_threshold: 0.0, ..Default::default() };
        if let Ok(ranked) = recognize(&foon, &seg, &w, &fw, &tax) {
            for c in &ranked {
                let expect = c.conf_foon + alpha * seg.motion_scores[tax.deep_class(&c.unit.motion.label)];
                prop_assert!((c.conf_motion - expect).abs() < 1e-12);
            }
            prop_assert!(ranked.windows(2).all(|p| p[0].conf_motion >= p[1].conf_motion));
        }
    }
}

#[test]
fn weighted_sum_example() {
    // two used objects (0.9, 0.8), one unused (0.7), nothing extra
    let w = FusionWeights { lambda: 0.2, eta: 0.2, ..Default::default() };
    let c = foon_confidence(&[0.9, 0.8], &[0.7], &[], &w, 0.0).unwrap();
    assert!((c - 0.71).abs() < 1e-9);
}
