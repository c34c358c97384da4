//! Motion synonyms and the mapping from motion labels to the ten classes
//! scored by the upstream motion recognizer.
//!
//! File format: one comma-separated synonym group per line, then a line
//! reading `CLASSMAP` followed by `label=class_index` lines. `#` starts a
//! comment line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::foon::canonical_token;

pub const MOTION_CLASSES: usize = 10;
/// Catch-all class for motion labels without an explicit mapping.
pub const OTHER_CLASS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct MotionTaxonomy {
    groups: Vec<BTreeSet<String>>,
    group_of: BTreeMap<String, usize>,
    class_map: BTreeMap<String, usize>,
}

const DEFAULT_GROUPS: &[&[&str]] = &[
    &["stir", "whip", "whisk", "beat"],
    &["slice", "cut", "chop", "dice"],
    &["cook", "fry", "boil", "heat"],
    &["spread", "smear"],
    &["sprinkle", "season"],
    &["mash", "crush"],
];

const DEFAULT_CLASSES: &[(&str, usize)] = &[
    ("pick+place", 0),
    ("pour", 1),
    ("cook", 2),
    ("fry", 2),
    ("boil", 2),
    ("heat", 2),
    ("stir", 3),
    ("whip", 3),
    ("whisk", 3),
    ("beat", 3),
    ("slice", 4),
    ("cut", 4),
    ("chop", 4),
    ("dice", 4),
    ("mix", 5),
    ("crack", 6),
    ("spread", 7),
    ("smear", 7),
    ("sprinkle", 8),
    ("season", 8),
];

impl Default for MotionTaxonomy {
    fn default() -> Self {
        let groups = DEFAULT_GROUPS
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect();
        let classes = DEFAULT_CLASSES.iter().map(|(l, c)| (l.to_string(), *c)).collect();
        Self::new(groups, classes).expect("built-in taxonomy is consistent")
    }
}

impl MotionTaxonomy {
    /// Groups must be pairwise disjoint and class indices below
    /// [`MOTION_CLASSES`].
    pub fn new(groups: Vec<BTreeSet<String>>, class_map: BTreeMap<String, usize>) -> Result<Self> {
        let mut group_of = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            for label in g {
                if group_of.insert(label.clone(), i).is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "motion {label:?} appears in more than one synonym group"
                    )));
                }
            }
        }
        if let Some((label, c)) = class_map.iter().find(|(_, &c)| c >= MOTION_CLASSES) {
            return Err(Error::InvalidParameter(format!("motion {label:?} mapped to class {c}")));
        }
        Ok(Self {
            groups,
            group_of,
            class_map,
        })
    }

    pub fn groups(&self) -> &[BTreeSet<String>] {
        &self.groups
    }

    /// Deep motion class of `label`; unmapped labels go to [`OTHER_CLASS`].
    pub fn deep_class(&self, label: &str) -> usize {
        self.class_map.get(label).copied().unwrap_or(OTHER_CLASS)
    }

    pub fn equivalent(&self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        matches!((self.group_of.get(a), self.group_of.get(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut groups = Vec::new();
        let mut classes = BTreeMap::new();
        let mut in_classmap = false;
        let mut seen = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Taxonomy { line, msg };
            if content == "CLASSMAP" {
                if in_classmap {
                    return Err(err("repeated CLASSMAP section".into()));
                }
                in_classmap = true;
                continue;
            }
            if in_classmap {
                let (label, class) = content
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected label=class_index, got {content:?}")))?;
                let label = canonical_token(label.trim(), "motion label", false).map_err(err)?;
                let class: usize = class
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("invalid class index {:?}", class.trim())))?;
                if class >= MOTION_CLASSES {
                    return Err(err(format!("class index {class} out of range 0..{MOTION_CLASSES}")));
                }
                if classes.insert(label.clone(), class).is_some() {
                    return Err(err(format!("motion {label:?} mapped twice")));
                }
            } else {
                let mut group = BTreeSet::new();
                for label in content.split(',') {
                    let label = canonical_token(label.trim(), "motion label", false).map_err(err)?;
                    if let Some(prev) = seen.insert(label.clone(), line) {
                        return Err(err(format!("motion {label:?} already in the group on line {prev}")));
                    }
                    group.insert(label);
                }
                groups.push(group);
            }
        }
        Self::new(groups, classes)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            let _ = writeln!(out, "{}", g.iter().cloned().collect::<Vec<_>>().join(","));
        }
        out.push_str("CLASSMAP\n");
        for (label, class) in &self.class_map {
            let _ = writeln!(out, "{label}={class}");
        }
        out
    }
}

pub fn motions_equivalent(a: &str, b: &str, tax: &MotionTaxonomy) -> bool {
    tax.equivalent(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_equivalences() {
        let tax = MotionTaxonomy::default();
        assert!(motions_equivalent("whip", "stir", &tax));
        assert!(motions_equivalent("slice", "cut", &tax));
        assert!(motions_equivalent("slice", "slice", &tax));
        assert!(motions_equivalent("knead", "knead", &tax));
        assert!(!motions_equivalent("pour", "crack", &tax));
        assert!(!motions_equivalent("knead", "roll", &tax));
    }

    #[test]
    fn unmapped_is_other() {
        let tax = MotionTaxonomy::default();
        assert_eq!(tax.deep_class("knead"), OTHER_CLASS);
        assert_eq!(tax.deep_class("pour"), 1);
        assert_eq!(tax.deep_class("pick+place"), 0);
    }

    #[test]
    fn text_round_trip() {
        let tax = MotionTaxonomy::default();
        assert_eq!(MotionTaxonomy::parse(&tax.to_text()).unwrap(), tax);
    }

    #[test]
    fn rejects_overlapping_groups() {
        let err = MotionTaxonomy::parse("stir,whip\ncut,stir\n").unwrap_err();
        assert!(matches!(err, Error::Taxonomy { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_classmap() {
        assert!(matches!(
            MotionTaxonomy::parse("CLASSMAP\npour=10\n"),
            Err(Error::Taxonomy { line: 2, .. })
        ));
        assert!(matches!(
            MotionTaxonomy::parse("CLASSMAP\npour\n"),
            Err(Error::Taxonomy { line: 2, .. })
        ));
        assert!(matches!(
            MotionTaxonomy::parse("CLASSMAP\npour=1\npour=2\n"),
            Err(Error::Taxonomy { line: 3, .. })
        ));
    }
}
