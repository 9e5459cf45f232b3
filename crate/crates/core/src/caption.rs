//! Caption candidates: ranking against a crop embedding and fusion into one
//! caption per object.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{cosine, Embedder};
use crate::error::{Error, ProviderError, Result};
use crate::io;
use crate::provider::run_bounded;
use crate::scene::{Scene, SceneObject};

pub const DEFAULT_TOP_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Service,
    OfflineFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionCandidate {
    pub object_id: u32,
    pub text: String,
    pub source: CandidateSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

impl CaptionCandidate {
    pub fn new(object_id: u32, text: impl Into<String>, embedding: Vec<f64>) -> Self {
        Self {
            object_id,
            text: text.into(),
            source: CandidateSource::OfflineFile,
            embedding: Some(embedding),
            similarity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectCaption {
    pub object_id: u32,
    pub label: String,
    pub text: String,
    #[serde(default)]
    pub candidates_used: usize,
    #[serde(default)]
    pub refined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Scores candidates against `crop_embedding` and keeps the best `top_n`,
/// ties broken by text.
pub fn rank_candidates(
    crop_embedding: &[f64],
    candidates: Vec<CaptionCandidate>,
    top_n: usize,
) -> Result<Vec<CaptionCandidate>> {
    if top_n == 0 {
        return Err(Error::Validation("top_n must be at least 1".into()));
    }
    let mut scored = candidates
        .into_iter()
        .map(|mut c| {
            if c.text.trim().is_empty() {
                return Err(Error::Validation(format!(
                    "object {}: empty candidate text",
                    c.object_id
                )));
            }
            let e = c.embedding.as_deref().ok_or_else(|| {
                Error::Validation(format!(
                    "object {}: candidate {:?} has no embedding",
                    c.object_id, c.text
                ))
            })?;
            c.similarity = Some(cosine(crop_embedding, e)?);
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| {
        b.similarity
            .partial_cmp(&a.similarity)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.text.cmp(&b.text))
    });
    scored.truncate(top_n);
    Ok(scored)
}

pub trait Refiner: Send + Sync {
    /// Merge ranked candidate texts describing one object into one sentence.
    fn refine(&self, object_label: &str, candidates: &[String]) -> std::result::Result<String, ProviderError>;
}

/// One caption from ranked candidates. Without a refiner the top candidate
/// is used verbatim.
pub fn fuse_captions(
    obj: &SceneObject,
    ranked: &[CaptionCandidate],
    refiner: Option<&dyn Refiner>,
) -> Result<ObjectCaption> {
    let Some(top) = ranked.first() else {
        return Err(Error::Validation(format!("object {}: no caption candidates", obj.id)));
    };
    let (text, refined) = match refiner {
        None => (top.text.clone(), false),
        Some(r) => {
            let texts: Vec<String> = ranked.iter().map(|c| c.text.clone()).collect();
            let fused = r.refine(&obj.display_label(), &texts)?;
            if fused.trim().is_empty() {
                return Err(ProviderError::Malformed("refiner returned an empty caption".into()).into());
            }
            (fused.trim().to_string(), true)
        }
    };
    Ok(ObjectCaption {
        object_id: obj.id,
        label: obj.label.clone(),
        text,
        candidates_used: ranked.len(),
        refined,
        score: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

/// Offline candidate file: object id to candidate texts and embeddings.
pub type CandidateFile = BTreeMap<u32, Vec<CandidateRecord>>;

/// Offline crop embeddings: object id to image-side vector.
pub type CropEmbeddings = BTreeMap<u32, Vec<f64>>;

pub fn load_candidates(path: &Path) -> Result<CandidateFile> {
    io::read_json(path)
}

pub fn save_candidates(path: &Path, file: &CandidateFile) -> Result<()> {
    io::write_json(path, file)
}

pub struct CaptionSettings<'a> {
    pub embedder: &'a dyn Embedder,
    pub refiner: Option<&'a dyn Refiner>,
    pub crops: Option<&'a CropEmbeddings>,
    pub top_n: usize,
    pub max_in_flight: usize,
}

/// Stand-in for the crop's image embedding when none is on file.
pub fn crop_prompt(obj: &SceneObject) -> String {
    format!("a photo of a {}", obj.display_label())
}

fn object_candidates(
    obj: &SceneObject,
    file: &CandidateFile,
    embedder: &dyn Embedder,
) -> Result<Vec<CaptionCandidate>> {
    let records = match file.get(&obj.id) {
        Some(rs) if !rs.is_empty() => rs.clone(),
        _ => vec![CandidateRecord {
            text: format!("a {}", obj.display_label()),
            embedding: None,
        }],
    };
    records
        .into_iter()
        .map(|r| {
            let embedding = match r.embedding {
                Some(e) => e,
                None => embedder.embed_text(&r.text)?,
            };
            Ok(CaptionCandidate::new(obj.id, r.text, embedding))
        })
        .collect()
}

/// Caption every object of `scene`, one [`ObjectCaption`] per object in id
/// order.
pub fn caption_scene(scene: &Scene, file: &CandidateFile, s: &CaptionSettings) -> Result<Vec<ObjectCaption>> {
    if let Some(bad) = file.keys().find(|id| scene.object(**id).is_none()) {
        return Err(Error::UnknownId(*bad));
    }
    let ranked = scene
        .objects
        .iter()
        .map(|o| {
            let crop = match s.crops.and_then(|c| c.get(&o.id)) {
                Some(e) => e.clone(),
                None => s.embedder.embed_text(&crop_prompt(o))?,
            };
            rank_candidates(&crop, object_candidates(o, file, s.embedder)?, s.top_n)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(&SceneObject, Vec<CaptionCandidate>)> = scene.objects.iter().zip(ranked).collect();
    run_bounded(&jobs, s.max_in_flight, |(o, r)| fuse_captions(o, r, s.refiner))
        .into_iter()
        .collect()
}

pub fn save_captions(path: &Path, captions: &[ObjectCaption]) -> Result<()> {
    io::write_json(path, captions)
}

pub fn load_captions(path: &Path) -> Result<Vec<ObjectCaption>> {
    let caps: Vec<ObjectCaption> = io::read_json(path)?;
    if let Some(c) = caps.iter().find(|c| c.text.trim().is_empty()) {
        return Err(Error::Validation(format!("object {}: empty caption", c.object_id)));
    }
    Ok(caps)
}

const COLORS: &[&str] = &["white", "black", "gray", "brown", "beige", "blue", "red", "green"];
const MATERIALS: &[&str] = &["wooden", "metal", "plastic", "fabric", "leather", "glass"];
const PLACES: &[&str] = &[
    "near the wall",
    "in the corner",
    "by the window",
    "in the middle of the room",
    "next to the door",
];

/// Deterministic stand-in for an image captioner: mostly on-label phrasings
/// with a few generic distractors, each with its embedding.
pub fn synthetic_candidates(
    scene: &Scene,
    seed: u64,
    per_object: usize,
    embedder: &dyn Embedder,
) -> Result<CandidateFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6361_7074);
    let mut out = CandidateFile::new();
    for o in &scene.objects {
        let label = o.display_label();
        let mut texts = Vec::with_capacity(per_object);
        while texts.len() < per_object {
            let color = COLORS.choose(&mut rng).expect("non-empty");
            let material = MATERIALS.choose(&mut rng).expect("non-empty");
            let place = PLACES.choose(&mut rng).expect("non-empty");
            let t = match rng.gen_range(0..6) {
                0 => format!("a {color} {label}"),
                1 => format!("a {material} {label} {place}"),
                2 => format!("a {color} {material} {label}"),
                3 => format!("the {label} is {color}"),
                4 => format!("a {color} object {place}"),
                _ => format!("something {material} {place}"),
            };
            if !texts.contains(&t) {
                texts.push(t);
            }
        }
        let records = texts
            .into_iter()
            .map(|text| {
                Ok(CandidateRecord {
                    embedding: Some(embedder.embed_text(&text)?),
                    text,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(o.id, records);
    }
    Ok(out)
}
