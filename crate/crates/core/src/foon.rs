//! Graph model: object and motion nodes, functional units, annotated
//! subgraphs, and the merged universal network.
//!
//! A functional unit is a small bipartite graph: every edge joins one of its
//! object nodes to its single motion node, so edges are never stored
//! explicitly. The universal network is the key-deduplicated union of the
//! units of many subgraphs and is immutable once built.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// Characters that cannot appear inside a label, state, or ingredient token.
/// They are reserved by the canonical unit key and the file grammar.
const RESERVED: &[char] = &[',', ';', '|', '='];

/// True when `s` is usable as a label/state token (empty allowed).
pub fn is_token(s: &str) -> bool {
    !s.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

/// Lowercases `s` and checks it is a token. `what` names the field for errors.
pub(crate) fn canonical_token(s: &str, what: &str, allow_empty: bool) -> std::result::Result<String, String> {
    let t = s.to_lowercase();
    if t.is_empty() && !allow_empty {
        return Err(format!("empty {what}"));
    }
    if !is_token(&t) {
        return Err(format!("{what} {s:?} contains whitespace or one of ,;|="));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectNode {
    pub label: String,
    pub state: String,
    /// Kept sorted; see [`ObjectNode::with_ingredients`].
    pub ingredients: Vec<String>,
    pub in_motion: bool,
    pub is_container: bool,
}

impl ObjectNode {
    pub fn new(label: impl Into<String>, state: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            state: state.into(),
            ingredients: Vec::new(),
            in_motion: false,
            is_container: false,
        }
    }

    pub fn with_ingredients<I, S>(mut self, ingredients: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.ingredients = ingredients.into_iter().map(Into::into).collect();
        self.ingredients.sort();
        self
    }

    pub fn container(mut self) -> Self {
        self.is_container = true;
        self
    }

    pub fn moving(mut self) -> Self {
        self.in_motion = true;
        self
    }

    /// Identity string: label, state and sorted ingredients. `in_motion` and
    /// `is_container` are attributes and do not take part.
    pub fn identity(&self) -> String {
        format!("{}|{}|{}", self.label, self.state, self.ingredients.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MotionNode {
    pub label: String,
    pub start_frame: u64,
    pub end_frame: u64,
}

impl MotionNode {
    pub fn new(label: impl Into<String>, start_frame: u64, end_frame: u64) -> Self {
        Self {
            label: label.into(),
            start_frame,
            end_frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionalUnit {
    pub inputs: Vec<ObjectNode>,
    pub motion: MotionNode,
    pub outputs: Vec<ObjectNode>,
    pub source_video: String,
}

impl FunctionalUnit {
    pub fn new(inputs: Vec<ObjectNode>, motion: MotionNode, outputs: Vec<ObjectNode>) -> Self {
        Self {
            inputs,
            motion,
            outputs,
            source_video: String::new(),
        }
    }

    /// All object-node occurrences, inputs first.
    pub fn objects(&self) -> impl Iterator<Item = &ObjectNode> {
        self.inputs.iter().chain(self.outputs.iter())
    }

    pub fn object_count(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    /// Every object node is joined to the motion node by exactly one edge.
    pub fn edge_count(&self) -> usize {
        self.object_count()
    }

    /// Distinct object labels over inputs and outputs.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.objects().map(|o| o.label.as_str()).collect()
    }

    /// Canonical key used for deduplication. See [`unit_key`].
    pub fn key(&self) -> String {
        unit_key(self)
    }
}

/// Canonical key of a functional unit.
///
/// Built from the sorted input identities, the motion label and the sorted
/// output identities. Frame times and the source video are excluded and
/// motion synonyms are not collapsed.
pub fn unit_key(u: &FunctionalUnit) -> String {
    fn side(nodes: &[ObjectNode]) -> String {
        let mut ids: Vec<String> = nodes.iter().map(ObjectNode::identity).collect();
        ids.sort();
        ids.join(";")
    }
    format!("{}=>{}=>{}", side(&u.inputs), u.motion.label, side(&u.outputs))
}

/// The thirteen recipe classes plus a marker for unclassified material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecipeClass {
    Cake,
    Pizza,
    Bread,
    Omelette,
    Soup,
    Barbecue,
    Sandwich,
    Smoothies,
    Pasta,
    CoffeeAndTea,
    Salad,
    MashedPotato,
    Others,
    Unlabeled,
}

impl RecipeClass {
    pub const ALL: [RecipeClass; 14] = [
        RecipeClass::Cake,
        RecipeClass::Pizza,
        RecipeClass::Bread,
        RecipeClass::Omelette,
        RecipeClass::Soup,
        RecipeClass::Barbecue,
        RecipeClass::Sandwich,
        RecipeClass::Smoothies,
        RecipeClass::Pasta,
        RecipeClass::CoffeeAndTea,
        RecipeClass::Salad,
        RecipeClass::MashedPotato,
        RecipeClass::Others,
        RecipeClass::Unlabeled,
    ];

    pub fn token(self) -> &'static str {
        match self {
            RecipeClass::Cake => "cake",
            RecipeClass::Pizza => "pizza",
            RecipeClass::Bread => "bread",
            RecipeClass::Omelette => "omelette",
            RecipeClass::Soup => "soup",
            RecipeClass::Barbecue => "barbecue",
            RecipeClass::Sandwich => "sandwich",
            RecipeClass::Smoothies => "smoothies",
            RecipeClass::Pasta => "pasta",
            RecipeClass::CoffeeAndTea => "coffee_and_tea",
            RecipeClass::Salad => "salad",
            RecipeClass::MashedPotato => "mashed_potato",
            RecipeClass::Others => "others",
            RecipeClass::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for RecipeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RecipeClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_lowercase();
        RecipeClass::ALL
            .iter()
            .copied()
            .find(|c| c.token() == lower)
            .ok_or_else(|| format!("unknown recipe class {s:?}"))
    }
}

/// The annotated functional units of one video, ordered by start frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub video_id: String,
    pub recipe_class: RecipeClass,
    pub units: Vec<FunctionalUnit>,
}

impl Subgraph {
    /// Builds a subgraph, stamping `video_id` on every unit and ordering
    /// units by start frame (stable).
    pub fn new(video_id: impl Into<String>, recipe_class: RecipeClass, mut units: Vec<FunctionalUnit>) -> Self {
        let video_id = video_id.into();
        for u in &mut units {
            u.source_video = video_id.clone();
        }
        units.sort_by_key(|u| u.motion.start_frame);
        Self {
            video_id,
            recipe_class,
            units,
        }
    }
}

/// Node/edge/unit counts of a merged network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoonStats {
    pub object_nodes: usize,
    pub motion_nodes: usize,
    pub edges: usize,
    pub units: usize,
}

impl fmt::Display for FoonStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "object_nodes={} motion_nodes={} edges={} units={}",
            self.object_nodes, self.motion_nodes, self.edges, self.units
        )
    }
}

/// Deduplicated union of functional units. Unit ids are positions in
/// canonical-key order.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalFoon {
    units: Vec<FunctionalUnit>,
    keys: Vec<String>,
    object_index: BTreeMap<String, BTreeSet<usize>>,
    object_node_count: usize,
    edge_count: usize,
}

impl UniversalFoon {
    /// Deduplicates `units` by canonical key. When several units share a key
    /// the smallest one under the derived ordering is kept, which makes the
    /// result independent of input order.
    pub fn from_units<I>(units: I) -> Self
    where
        I: IntoIterator<Item = FunctionalUnit>,
    {
        let mut by_key: BTreeMap<String, FunctionalUnit> = BTreeMap::new();
        for u in units {
            let key = unit_key(&u);
            match by_key.get_mut(&key) {
                Some(existing) if u < *existing => *existing = u,
                Some(_) => {}
                None => {
                    by_key.insert(key, u);
                }
            }
        }

        let mut keys = Vec::with_capacity(by_key.len());
        let mut units = Vec::with_capacity(by_key.len());
        for (k, u) in by_key {
            keys.push(k);
            units.push(u);
        }

        let mut object_index: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        let mut identities = BTreeSet::new();
        let mut edge_count = 0;
        for (id, u) in units.iter().enumerate() {
            edge_count += u.edge_count();
            for o in u.objects() {
                object_index.entry(o.label.clone()).or_default().insert(id);
                identities.insert(o.identity());
            }
        }

        Self {
            units,
            keys,
            object_index,
            object_node_count: identities.len(),
            edge_count,
        }
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn unit(&self, id: usize) -> &FunctionalUnit {
        &self.units[id]
    }

    pub fn key(&self, id: usize) -> &str {
        &self.keys[id]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.keys.binary_search_by(|k| k.as_str().cmp(key)).is_ok()
    }

    /// Ids of the units holding an object with `label` (any state) among
    /// their inputs or outputs.
    pub fn probe(&self, label: &str) -> BTreeSet<usize> {
        self.object_index
            .get(&label.to_lowercase())
            .cloned()
            .unwrap_or_default()
    }

    pub fn stats(&self) -> FoonStats {
        FoonStats {
            object_nodes: self.object_node_count,
            motion_nodes: self.units.len(),
            edges: self.edge_count,
            units: self.units.len(),
        }
    }
}

/// Merges subgraphs into a universal network: the union of their units by
/// canonical key.
pub fn merge(subgraphs: &[Subgraph]) -> UniversalFoon {
    UniversalFoon::from_units(subgraphs.iter().flat_map(|g| g.units.iter().cloned()))
}

pub fn probe(foon: &UniversalFoon, label: &str) -> BTreeSet<usize> {
    foon.probe(label)
}

pub fn stats(foon: &UniversalFoon) -> FoonStats {
    foon.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(inputs: &[(&str, &str)], motion: &str, outputs: &[(&str, &str)]) -> FunctionalUnit {
        let nodes = |xs: &[(&str, &str)]| xs.iter().map(|(l, s)| ObjectNode::new(*l, *s)).collect();
        FunctionalUnit::new(nodes(inputs), MotionNode::new(motion, 0, 10), nodes(outputs))
    }

    #[test]
    fn key_ignores_frames_and_source() {
        let a = unit(&[("egg", "raw")], "crack", &[("egg", "cracked")]);
        let mut b = a.clone();
        b.motion.start_frame = 100;
        b.motion.end_frame = 200;
        b.source_video = "other".into();
        assert_eq!(unit_key(&a), unit_key(&b));
    }

    #[test]
    fn key_includes_state() {
        let a = unit(&[("egg", "raw"), ("bowl", "empty")], "crack", &[("egg", "cracked")]);
        let b = unit(&[("egg", "whole"), ("bowl", "empty")], "crack", &[("egg", "cracked")]);
        assert_ne!(unit_key(&a), unit_key(&b));
    }

    #[test]
    fn key_is_permutation_invariant() {
        let nodes = [("egg", "raw"), ("bowl", "empty"), ("fork", "clean")];
        let reference = unit_key(&unit(&nodes, "mix", &[("egg", "mixed")]));
        // all 3! orderings
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let permuted: Vec<_> = p.iter().map(|&i| nodes[i]).collect();
            assert_eq!(unit_key(&unit(&permuted, "mix", &[("egg", "mixed")])), reference);
        }
    }

    #[test]
    fn key_does_not_collapse_synonyms() {
        let a = unit(&[("egg", "raw")], "whip", &[("egg", "beaten")]);
        let b = unit(&[("egg", "raw")], "stir", &[("egg", "beaten")]);
        assert_ne!(unit_key(&a), unit_key(&b));
    }

    #[test]
    fn ingredient_order_is_not_identity() {
        let a = ObjectNode::new("bowl", "full").with_ingredients(["milk", "egg"]);
        let b = ObjectNode::new("bowl", "full").with_ingredients(["egg", "milk"]);
        assert_eq!(a.identity(), b.identity());
        let c = ObjectNode::new("bowl", "full").container().moving();
        assert_eq!(c.identity(), ObjectNode::new("bowl", "full").identity());
    }

    #[test]
    fn single_unit_stats() {
        let u = unit(&[("egg", "raw"), ("bowl", "empty")], "crack", &[("egg", "cracked"), ("bowl", "full")]);
        let g = Subgraph::new("v", RecipeClass::Omelette, vec![u]);
        assert_eq!(
            merge(&[g]).stats(),
            FoonStats {
                object_nodes: 4,
                motion_nodes: 1,
                edges: 4,
                units: 1
            }
        );
    }

    #[test]
    fn shared_unit_merged_once() {
        let shared = unit(&[("egg", "raw")], "crack", &[("egg", "cracked")]);
        let g1 = Subgraph::new(
            "a",
            RecipeClass::Omelette,
            vec![shared.clone(), unit(&[("bowl", "empty")], "pick+place", &[("bowl", "on_table")])],
        );
        let g2 = Subgraph::new(
            "b",
            RecipeClass::Omelette,
            vec![
                shared,
                unit(&[("pan", "cold")], "heat", &[("pan", "hot")]),
                unit(&[("oil", "bottled")], "pour", &[("oil", "in_pan")]),
            ],
        );
        let foon = merge(&[g1.clone(), g2.clone()]);
        assert_eq!(foon.len(), 4);
        assert_eq!(foon, merge(&[g2, g1]));
    }

    #[test]
    fn probe_missing_label() {
        let g = Subgraph::new("v", RecipeClass::Salad, vec![unit(&[("egg", "raw")], "crack", &[("egg", "cracked")])]);
        assert!(merge(&[g]).probe("knife").is_empty());
    }

    #[test]
    fn recipe_class_tokens_round_trip() {
        for c in RecipeClass::ALL {
            assert_eq!(c.token().parse::<RecipeClass>().unwrap(), c);
        }
        assert!("noodles".parse::<RecipeClass>().is_err());
    }
}
