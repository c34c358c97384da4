//! Line-oriented subgraph file format.
//!
//! ```text
//! # comment
//! V <video_id> <recipe_class>
//! //
//! O <label> <state>[ I=<ing>,<ing>...][ C][ M]
//! M <motion> <start_frame> <end_frame>
//! O ...
//! ```
//!
//! Fields are tab separated. Objects before the `M` line of a unit are its
//! inputs, objects after it are its outputs. Labels, states and ingredients
//! are lowercased and ingredients sorted when read, so serializing a parsed
//! file yields its canonical form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::foon::{canonical_token, FunctionalUnit, MotionNode, ObjectNode, RecipeClass, Subgraph, UniversalFoon};

/// Video id written in the header of a persisted universal network.
pub const UNIVERSAL_VIDEO_ID: &str = "universal";

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

#[derive(Default)]
struct PendingUnit {
    line: usize,
    inputs: Vec<ObjectNode>,
    motion: Option<MotionNode>,
    outputs: Vec<ObjectNode>,
}

impl PendingUnit {
    fn finish(self) -> Result<FunctionalUnit> {
        let motion = self.motion.ok_or_else(|| syntax(self.line, "functional unit has no motion line"))?;
        if self.inputs.is_empty() {
            return Err(Error::NoInputs { line: self.line });
        }
        if self.outputs.is_empty() {
            return Err(Error::NoOutputs { line: self.line });
        }
        Ok(FunctionalUnit::new(self.inputs, motion, self.outputs))
    }
}

fn parse_object(line: usize, fields: &[&str]) -> Result<ObjectNode> {
    if fields.len() < 3 {
        return Err(syntax(line, "object line needs a label and a state field"));
    }
    let label = canonical_token(fields[1], "label", false).map_err(|m| syntax(line, m))?;
    let state = canonical_token(fields[2], "state", true).map_err(|m| syntax(line, m))?;
    let mut node = ObjectNode::new(label, state);
    let (mut seen_ing, mut seen_c, mut seen_m) = (false, false, false);
    for &f in &fields[3..] {
        match f {
            "C" if !seen_c => {
                seen_c = true;
                node.is_container = true;
            }
            "M" if !seen_m => {
                seen_m = true;
                node.in_motion = true;
            }
            _ if f.starts_with("I=") && !seen_ing => {
                seen_ing = true;
                let mut ingredients = Vec::new();
                for ing in f[2..].split(',') {
                    ingredients.push(canonical_token(ing, "ingredient", false).map_err(|m| syntax(line, m))?);
                }
                node = node.with_ingredients(ingredients);
            }
            _ => return Err(syntax(line, format!("unexpected or repeated object field {f:?}"))),
        }
    }
    Ok(node)
}

fn parse_motion(line: usize, fields: &[&str]) -> Result<MotionNode> {
    if fields.len() != 4 {
        return Err(syntax(line, "motion line must be M<TAB>label<TAB>start<TAB>end"));
    }
    let label = canonical_token(fields[1], "motion label", false).map_err(|m| syntax(line, m))?;
    let frame = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| syntax(line, format!("invalid frame number {s:?}")))
    };
    let (start, end) = (frame(fields[2])?, frame(fields[3])?);
    if end < start {
        return Err(Error::FrameOrder { line, start, end });
    }
    Ok(MotionNode::new(label, start, end))
}

/// Parses a subgraph file. Units come back ordered by start frame.
pub fn parse_subgraph(text: &str) -> Result<Subgraph> {
    let mut header: Option<(String, RecipeClass)> = None;
    let mut units = Vec::new();
    let mut pending: Option<PendingUnit> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        if content.trim().is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split('\t').collect();
        match fields[0] {
            "V" => {
                if header.is_some() || !units.is_empty() || pending.is_some() {
                    return Err(syntax(line, "header must appear once, before any unit"));
                }
                if fields.len() != 3 {
                    return Err(syntax(line, "header must be V<TAB>video_id<TAB>recipe_class"));
                }
                let video_id = canonical_token(fields[1], "video id", false).map_err(|m| syntax(line, m))?;
                let class = fields[2].parse::<RecipeClass>().map_err(|m| syntax(line, m))?;
                header = Some((video_id, class));
            }
            "//" if fields.len() == 1 => {
                if header.is_none() {
                    return Err(syntax(line, "missing V header before first unit"));
                }
                if let Some(p) = pending.take() {
                    units.push(p.finish()?);
                }
                pending = Some(PendingUnit {
                    line,
                    ..Default::default()
                });
            }
            "O" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| syntax(line, "object line outside a functional unit"))?;
                let node = parse_object(line, &fields)?;
                if p.motion.is_some() {
                    p.outputs.push(node);
                } else {
                    p.inputs.push(node);
                }
            }
            "M" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| syntax(line, "motion line outside a functional unit"))?;
                if p.motion.is_some() {
                    return Err(syntax(line, "functional unit has more than one motion line"));
                }
                p.motion = Some(parse_motion(line, &fields)?);
            }
            other => return Err(syntax(line, format!("unknown line tag {other:?}"))),
        }
    }

    if let Some(p) = pending.take() {
        units.push(p.finish()?);
    }
    if units.is_empty() {
        return Err(Error::NoUnits);
    }
    let (video_id, class) = header.ok_or_else(|| syntax(1, "missing V header"))?;
    Ok(Subgraph::new(video_id, class, units))
}

fn write_object(out: &mut String, o: &ObjectNode) {
    let _ = write!(out, "O\t{}\t{}", o.label, o.state);
    if !o.ingredients.is_empty() {
        let _ = write!(out, "\tI={}", o.ingredients.join(","));
    }
    if o.is_container {
        out.push_str("\tC");
    }
    if o.in_motion {
        out.push_str("\tM");
    }
    out.push('\n');
}

fn write_unit(out: &mut String, u: &FunctionalUnit) {
    out.push_str("//\n");
    for o in &u.inputs {
        write_object(out, o);
    }
    let _ = writeln!(out, "M\t{}\t{}\t{}", u.motion.label, u.motion.start_frame, u.motion.end_frame);
    for o in &u.outputs {
        write_object(out, o);
    }
}

pub fn serialize_subgraph(g: &Subgraph) -> String {
    let mut out = format!("V\t{}\t{}\n", g.video_id, g.recipe_class);
    for u in &g.units {
        write_unit(&mut out, u);
    }
    out
}

/// Writes a universal network in canonical-key order under the
/// [`UNIVERSAL_VIDEO_ID`] header.
pub fn serialize_foon(foon: &UniversalFoon) -> String {
    let mut out = format!("V\t{}\t{}\n", UNIVERSAL_VIDEO_ID, RecipeClass::Unlabeled);
    for u in foon.units() {
        write_unit(&mut out, u);
    }
    out
}

/// Reads a file written by [`serialize_foon`] (or any subgraph file) back
/// into a universal network.
pub fn parse_foon(text: &str) -> Result<UniversalFoon> {
    let g = parse_subgraph(text)?;
    Ok(UniversalFoon::from_units(g.units))
}
