//! Scene Information: system message, object captions and relation
//! sentences, rendered in one of three expression modes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::caption::ObjectCaption;
use crate::error::{Error, Result};
use crate::io;
use crate::reasoner::{RelationTag, RelationTriplet};
use crate::scene::{Scene, SceneObject};

pub const SYSTEM_MESSAGE_V1: &str = "You are an assistant that reasons about a 3D indoor scene. \
The scene is described by object captions and spatial relationships. Objects are referenced as \
[label-id]. Directions are given from the viewpoint of the reference camera, and o'clock \
positions count clockwise with 12 o'clock straight ahead.";

pub const SYSTEM_MESSAGE: &str = SYSTEM_MESSAGE_V1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpressionMode {
    Coordinate,
    Simple,
    #[default]
    Complex,
}

impl fmt::Display for ExpressionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Coordinate => "coordinate",
            Self::Simple => "simple",
            Self::Complex => "complex",
        })
    }
}

impl FromStr for ExpressionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coordinate" => Ok(Self::Coordinate),
            "simple" => Ok(Self::Simple),
            "complex" => Ok(Self::Complex),
            _ => Err(Error::Config(format!("unknown expression mode {s:?}"))),
        }
    }
}

/// One sentence of the relationship section. Coordinate-mode sentences
/// describe a single object and carry no `object`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSentence {
    pub subject: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<u32>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tags: BTreeSet<RelationTag>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneInformation {
    pub system_message: String,
    pub mode: ExpressionMode,
    pub captions: Vec<ObjectCaption>,
    pub relations: Vec<RelationSentence>,
    pub token_estimate: usize,
}

pub fn mention(label: &str, id: u32) -> String {
    format!("the {} [{label}-{id}]", label.replace('_', " "))
}

fn capitalized(s: String) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => s,
    }
}

fn join_phrases(parts: &[&str]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn phrase(tag: &RelationTag) -> Option<&str> {
    Some(match tag {
        RelationTag::Prior(p) => p.as_str(),
        RelationTag::Nearby => "near",
        RelationTag::Above => "above",
        RelationTag::Below => "below",
        RelationTag::InFrontOf => "in front of",
        RelationTag::Behind => "behind",
        RelationTag::LeftOf => "to the left of",
        RelationTag::RightOf => "to the right of",
        RelationTag::OClock(_) => return None,
    })
}

/// Coordinate-mode sentence for one object.
pub fn render_coordinate(obj: &SceneObject) -> String {
    let (c, s) = (obj.centroid, obj.size);
    format!(
        "{} is at ({:.2}, {:.2}, {:.2}) with size ({:.2}, {:.2}, {:.2}).",
        capitalized(mention(&obj.label, obj.id)),
        c.x,
        c.y,
        c.z,
        s.x,
        s.y,
        s.z
    )
}

/// Sentence for `t` in Simple or Complex mode.
///
/// Simple keeps the single most specific tag (prior, then nearby, then
/// horizontal, then vertical). Complex lists every tag, the o'clock position
/// and the distance to 0.1 m.
pub fn render_relation(t: &RelationTriplet, labels: &BTreeMap<u32, String>, mode: ExpressionMode) -> Result<String> {
    let subj = labels.get(&t.subject).ok_or(Error::UnknownId(t.subject))?;
    let obj = labels.get(&t.object).ok_or(Error::UnknownId(t.object))?;
    let (s, o) = (capitalized(mention(subj, t.subject)), mention(obj, t.object));

    let ordered: Vec<&RelationTag> = {
        let rank = |tag: &RelationTag| match tag {
            RelationTag::Prior(_) => 0,
            RelationTag::Nearby => 1,
            t if t.is_vertical() => 2,
            t if t.is_horizontal() => 3,
            _ => 4,
        };
        let mut v: Vec<&RelationTag> = t.tags.iter().collect();
        v.sort_by_key(|t| rank(t));
        v
    };

    match mode {
        ExpressionMode::Coordinate => Err(Error::Validation(
            "coordinate mode describes objects, not relations".into(),
        )),
        ExpressionMode::Simple => {
            let pick = |f: &dyn Fn(&RelationTag) -> bool| t.tags.iter().find(|x| f(x));
            let chosen = pick(&|x| matches!(x, RelationTag::Prior(_)))
                .or_else(|| pick(&|x| *x == RelationTag::Nearby))
                .or_else(|| pick(&|x| x.is_horizontal()))
                .or_else(|| pick(&|x| x.is_vertical()));
            Ok(match (chosen.and_then(phrase), t.oclock()) {
                (Some(p), _) => format!("{s} is {p} {o}."),
                (None, Some(h)) => format!("{s} is at {h} o'clock from {o}."),
                (None, None) => format!("{s} is related to {o}."),
            })
        }
        ExpressionMode::Complex => {
            let words: Vec<&str> = ordered.iter().filter_map(|t| phrase(t)).collect();
            let mut out = if words.is_empty() {
                match t.oclock() {
                    Some(h) => format!("{s} is at {h} o'clock from {o}"),
                    None => format!("{s} is related to {o}"),
                }
            } else {
                let mut head = format!("{s} is {} {o}", join_phrases(&words));
                if let Some(h) = t.oclock() {
                    head.push_str(&format!(", at {h} o'clock"));
                }
                head
            };
            out.push_str(&format!(", about {:.1} m away.", t.distance_m));
            Ok(out)
        }
    }
}

pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

impl SceneInformation {
    /// Flat text rendering: the three sections separated by blank lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.system_message);
        out.push_str("\n\nObject Captions:\n");
        for c in &self.captions {
            out.push_str(&format!("[{}-{}] {}\n", c.label, c.object_id, c.text));
        }
        out.push_str("\nSpatial Relationships:\n");
        for r in &self.relations {
            out.push_str(&r.text);
            out.push('\n');
        }
        out
    }

    pub fn recount(&mut self) {
        self.token_estimate = token_count(&self.to_text());
    }

    pub fn caption(&self, id: u32) -> Option<&ObjectCaption> {
        self.captions.iter().find(|c| c.object_id == id)
    }

    pub fn labels(&self) -> BTreeMap<u32, String> {
        self.captions.iter().map(|c| (c.object_id, c.label.clone())).collect()
    }

    /// Structural checks: ordering and referential integrity.
    pub fn validate(&self) -> Result<()> {
        if !self.captions.windows(2).all(|w| w[0].object_id < w[1].object_id) {
            return Err(Error::Validation("captions not strictly ordered by object id".into()));
        }
        let key = |r: &RelationSentence| (r.subject, r.object);
        if !self.relations.windows(2).all(|w| key(&w[0]) < key(&w[1])) {
            return Err(Error::Validation(
                "relations not strictly ordered by (subject, object)".into(),
            ));
        }
        let ids: BTreeSet<u32> = self.captions.iter().map(|c| c.object_id).collect();
        for r in &self.relations {
            for id in std::iter::once(r.subject).chain(r.object) {
                if !ids.contains(&id) {
                    return Err(Error::MissingCaption(id));
                }
            }
        }
        if let Some(c) = self.captions.iter().find(|c| c.text.trim().is_empty()) {
            return Err(Error::EmptyCaption(c.object_id));
        }
        Ok(())
    }
}

/// Assemble the scene description. Every object mentioned by `graph` needs
/// a caption; in Coordinate mode one sentence per captioned object replaces
/// the relation sentences.
pub fn build_scene_information(
    scene: &Scene,
    graph: &[RelationTriplet],
    captions: &[ObjectCaption],
    mode: ExpressionMode,
) -> Result<SceneInformation> {
    let mut caps: Vec<ObjectCaption> = captions.to_vec();
    caps.sort_by_key(|c| c.object_id);
    if let Some(w) = caps.windows(2).find(|w| w[0].object_id == w[1].object_id) {
        return Err(Error::Validation(format!(
            "duplicate caption for object {}",
            w[0].object_id
        )));
    }
    for c in &mut caps {
        let obj = scene.object(c.object_id).ok_or(Error::UnknownId(c.object_id))?;
        c.label = obj.label.clone();
    }
    let labels: BTreeMap<u32, String> = caps.iter().map(|c| (c.object_id, c.label.clone())).collect();
    for t in graph {
        for id in [t.subject, t.object] {
            if !labels.contains_key(&id) {
                return Err(if scene.object(id).is_some() {
                    Error::MissingCaption(id)
                } else {
                    Error::UnknownId(id)
                });
            }
        }
    }

    let relations = match mode {
        ExpressionMode::Coordinate => caps
            .iter()
            .map(|c| {
                let obj = scene.object(c.object_id).ok_or(Error::UnknownId(c.object_id))?;
                Ok(RelationSentence {
                    subject: c.object_id,
                    object: None,
                    tags: BTreeSet::new(),
                    text: render_coordinate(obj),
                })
            })
            .collect::<Result<Vec<_>>>()?,
        _ => {
            let mut sorted: Vec<&RelationTriplet> = graph.iter().collect();
            sorted.sort_by_key(|t| (t.subject, t.object));
            sorted
                .into_iter()
                .map(|t| {
                    Ok(RelationSentence {
                        subject: t.subject,
                        object: Some(t.object),
                        tags: t.tags.clone(),
                        text: render_relation(t, &labels, mode)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let mut info = SceneInformation {
        system_message: SYSTEM_MESSAGE.to_string(),
        mode,
        captions: caps,
        relations,
        token_estimate: 0,
    };
    info.recount();
    Ok(info)
}

/// Writes `path` as JSON and a sibling `.txt` rendering.
pub fn save_scene_information(path: &Path, info: &SceneInformation) -> Result<()> {
    io::write_json(path, info)?;
    io::write_atomic(&path.with_extension("txt"), info.to_text().as_bytes())
}

pub fn load_scene_information(path: &Path) -> Result<SceneInformation> {
    let info: SceneInformation = io::read_json(path)?;
    info.validate()?;
    Ok(info)
}
