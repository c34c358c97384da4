use std::collections::BTreeSet;

use foon_core::foon::{merge, probe, stats, FunctionalUnit, MotionNode, ObjectNode, RecipeClass, Subgraph, UniversalFoon};
use foon_core::format::{parse_foon, parse_subgraph, serialize_foon, serialize_subgraph};
use foon_core::objects::ObjectConfidence;
use foon_core::recognition::probe_candidates;
use foon_core::taxonomy::{motions_equivalent, MotionTaxonomy};
use proptest::prelude::*;

const FIXTURE: &str = include_str!("fixtures/scrambled_egg.foon");
const CANONICAL: &str = include_str!("fixtures/scrambled_egg.canonical.foon");

fn plain(inputs: &[&str], motion: &str, outputs: &[&str]) -> FunctionalUnit {
    let nodes = |xs: &[&str]| xs.iter().map(|l| ObjectNode::new(*l, "")).collect();
    FunctionalUnit::new(nodes(inputs), MotionNode::new(motion, 0, 1), nodes(outputs))
}

/// Three units probed with {egg, bowl, fork}.
fn probe_example() -> UniversalFoon {
    UniversalFoon::from_units([
        plain(&["mixer", "bowl"], "mix", &["mixer", "bowl"]),
        plain(&["fork", "egg", "cup"], "stir", &["fork", "egg", "cup"]),
        plain(&["bowl", "pan", "pasta"], "pour", &["pan"]),
    ])
}

fn oia(labels: &[&str]) -> Vec<ObjectConfidence> {
    labels
        .iter()
        .map(|l| ObjectConfidence {
            label: l.to_string(),
            c_flow: 1.0,
            c_dist: 1.0,
            c_freq: 1.0,
            conf: 1.0,
        })
        .collect()
}

#[test]
fn fixture_orders_and_canonicalizes() {
    let g = parse_subgraph(FIXTURE).unwrap();
    let starts: Vec<u64> = g.units.iter().map(|u| u.motion.start_frame).collect();
    assert_eq!(starts, vec![10, 120, 200]);
    assert_eq!(g.recipe_class, RecipeClass::Omelette);
    assert_eq!(serialize_subgraph(&g), CANONICAL);
    assert_eq!(parse_subgraph(CANONICAL).unwrap(), g);
}

#[test]
fn fixture_counts_match_recount() {
    let g = parse_subgraph(FIXTURE).unwrap();
    let foon = merge(std::slice::from_ref(&g));
    // hand count: 2+2, 3+3, 2+2 object occurrences
    let s = stats(&foon);
    assert_eq!(s.edges, 14);
    assert_eq!(s.units, 3);
    assert_eq!(s.motion_nodes, 3);
    // egg|whole, bowl|empty, egg|cracked, bowl|contains_egg, fork|clean,
    // egg|beaten, fork|dirty, pan|hot, pan|contains_egg
    assert_eq!(s.object_nodes, 9);
}

#[test]
fn foon_file_is_stable_under_remerge() {
    let g = parse_subgraph(FIXTURE).unwrap();
    let text = serialize_foon(&merge(&[g]));
    let reread = parse_foon(&text).unwrap();
    assert_eq!(serialize_foon(&reread), text);
    let doubled = UniversalFoon::from_units(reread.units().iter().chain(reread.units()).cloned());
    assert_eq!(serialize_foon(&doubled), text);
}

#[test]
fn probe_finds_units_by_label() {
    let foon = probe_example();
    let bowl: BTreeSet<&str> = probe(&foon, "bowl").into_iter().map(|id| foon.key(id)).collect();
    let expected: BTreeSet<String> = [
        plain(&["mixer", "bowl"], "mix", &["mixer", "bowl"]).key(),
        plain(&["bowl", "pan", "pasta"], "pour", &["pan"]).key(),
    ]
    .into_iter()
    .collect();
    assert_eq!(bowl, expected.iter().map(String::as_str).collect());
    assert!(probe(&foon, "whisk").is_empty());
}

#[test]
fn probe_overlap_counts_occurrences() {
    let foon = probe_example();
    let cands = probe_candidates(&foon, &oia(&["egg", "bowl", "fork"]), &Default::default(), 0.0).unwrap();
    let by_motion = |m: &str| cands.iter().find(|c| c.unit.motion.label == m).unwrap().probe_overlap;
    assert_eq!(by_motion("mix"), 0.5);
    assert!((by_motion("stir") - 0.67).abs() < 0.005);
    assert_eq!(by_motion("pour"), 0.25);

    // the default threshold keeps the 0.5 and 0.67 rows only
    let kept = probe_candidates(&foon, &oia(&["egg", "bowl", "fork"]), &Default::default(), 0.34).unwrap();
    let motions: BTreeSet<&str> = kept.iter().map(|c| c.unit.motion.label.as_str()).collect();
    assert_eq!(motions, ["mix", "stir"].into_iter().collect());
}

#[test]
fn single_unit_counts() {
    let u = FunctionalUnit::new(
        vec![ObjectNode::new("knife", "clean"), ObjectNode::new("onion", "whole")],
        MotionNode::new("slice", 0, 30),
        vec![ObjectNode::new("knife", "dirty"), ObjectNode::new("onion", "sliced")],
    );
    let s = merge(&[Subgraph::new("v", RecipeClass::Salad, vec![u])]).stats();
    assert_eq!((s.object_nodes, s.motion_nodes, s.edges, s.units), (4, 1, 4, 1));
}

#[test]
fn motion_equivalence_is_an_equivalence_relation() {
    let tax = MotionTaxonomy::default();
    let mut labels: Vec<&str> = tax.groups().iter().flatten().map(String::as_str).collect();
    labels.extend(["pour", "crack", "knead"]);
    for a in &labels {
        assert!(motions_equivalent(a, a, &tax));
        for b in &labels {
            assert_eq!(motions_equivalent(a, b, &tax), motions_equivalent(b, a, &tax));
            for c in &labels {
                if motions_equivalent(a, b, &tax) && motions_equivalent(b, c, &tax) {
                    assert!(motions_equivalent(a, c, &tax), "{a} {b} {c}");
                }
            }
        }
    }
}

fn node() -> impl Strategy<Value = ObjectNode> {
    (
        prop::sample::select(vec!["egg", "bowl", "fork", "pan", "knife"]),
        prop::sample::select(vec!["", "raw", "hot", "empty"]),
        prop::collection::vec(prop::sample::select(vec!["salt", "egg", "milk"]), 0..3),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(l, s, ing, c, m)| {
            let mut n = ObjectNode::new(l, s).with_ingredients(ing);
            n.is_container = c;
            n.in_motion = m;
            n
        })
}

fn unit() -> impl Strategy<Value = FunctionalUnit> {
    (
        prop::collection::vec(node(), 1..4),
        prop::sample::select(vec!["mix", "stir", "pour", "crack"]),
        0u64..50,
        0u64..20,
        prop::collection::vec(node(), 1..4),
    )
        .prop_map(|(i, m, s, d, o)| FunctionalUnit::new(i, MotionNode::new(m, s, s + d), o))
}

fn subgraph() -> impl Strategy<Value = Subgraph> {
    (
        prop::sample::select(vec!["v1", "v2", "v3"]),
        prop::collection::vec(unit(), 1..5),
    )
        .prop_map(|(id, units)| Subgraph::new(id, RecipeClass::Others, units))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn merge_is_order_independent_and_idempotent(p in prop::collection::vec(subgraph(), 1..4),
                                                 q in prop::collection::vec(subgraph(), 1..4)) {
        let pq: Vec<Subgraph> = p.iter().chain(&q).cloned().collect();
        let qp: Vec<Subgraph> = q.iter().chain(&p).cloned().collect();
        prop_assert_eq!(merge(&pq), merge(&qp));
        let doubled: Vec<Subgraph> = pq.iter().chain(&pq).cloned().collect();
        prop_assert_eq!(merge(&doubled), merge(&pq));
    }

    #[test]
    fn counts_match_brute_force(gs in prop::collection::vec(subgraph(), 1..5)) {
        let foon = merge(&gs);
        let s = foon.stats();
        let keys: BTreeSet<String> = gs.iter().flat_map(|g| g.units.iter().map(|u| u.key())).collect();
        prop_assert_eq!(s.units, keys.len());
        prop_assert_eq!(s.motion_nodes, s.units);
        let edges: usize = foon.units().iter().map(|u| u.inputs.len() + u.outputs.len()).sum();
        prop_assert_eq!(s.edges, edges);
        let ids: BTreeSet<String> = foon.units().iter().flat_map(|u| u.objects().map(|o| o.identity())).collect();
        prop_assert_eq!(s.object_nodes, ids.len());
    }

    #[test]
    fn probe_matches_linear_scan(gs in prop::collection::vec(subgraph(), 1..4),
                                 label in prop::sample::select(vec!["egg", "bowl", "fork", "pan", "knife", "cup"])) {
        let foon = merge(&gs);
        let scan: BTreeSet<usize> = foon.units().iter().enumerate()
            .filter(|(_, u)| u.objects().any(|o| o.label == label))
            .map(|(i, _)| i)
            .collect();
        prop_assert_eq!(probe(&foon, label), scan);
    }

    #[test]
    fn serialization_is_a_fixed_point(g in subgraph()) {
        let text = serialize_subgraph(&g);
        let parsed = parse_subgraph(&text).unwrap();
        prop_assert_eq!(serialize_subgraph(&parsed), text);
    }
}
