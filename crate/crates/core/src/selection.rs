//! Token-level relevance scoring and top-k prompt assembly.
//!
//! A caption's raw relevance is the mean, over its tokens, of the best
//! cosine match among the query tokens. Weights are a softmax of the raw
//! scores over the candidate pool; ranking uses the raw scores with ties
//! broken by ascending object id.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{dot, normalize, Embedder};
use crate::error::{Error, Result};
use crate::io;
use crate::scene_info::{token_count, SceneInformation};

pub const UNIT_TOL: f64 = 1e-5;
pub const DEFAULT_K1: usize = 20;
pub const DEFAULT_K2: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Owner {
    Question,
    Caption(u32),
    Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    owner: Owner,
    rows: Vec<Vec<f64>>,
}

impl EmbeddingMatrix {
    /// Rows must already be unit length.
    pub fn new(owner: Owner, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(match owner {
                Owner::Caption(id) => Error::EmptyCaption(id),
                _ => Error::Validation(format!("{owner:?} embedding has no tokens")),
            });
        }
        for r in &rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            let n = dot(r, r).sqrt();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!("{owner:?} embedding row has norm {n}")));
            }
        }
        Ok(Self { owner, rows })
    }

    /// Normalizes every row first.
    pub fn from_raw(owner: Owner, rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| normalize(r).ok_or_else(|| Error::Validation(format!("{owner:?} embedding has a zero row"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(owner, rows)
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn dimension(&self) -> usize {
        self.rows[0].len()
    }
}

/// Mean over caption tokens of the max similarity to any query token.
pub fn raw_score(query: &EmbeddingMatrix, caption: &EmbeddingMatrix) -> Result<f64> {
    if query.dimension() != caption.dimension() {
        return Err(Error::DimensionMismatch {
            expected: query.dimension(),
            got: caption.dimension(),
        });
    }
    let total: f64 = caption
        .rows
        .iter()
        .map(|c| query.rows.iter().map(|q| dot(c, q)).fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(total / caption.rows.len() as f64)
}

pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Softmax weights of every caption against `query`, in input order.
pub fn relevance_scores(query: &EmbeddingMatrix, captions: &[EmbeddingMatrix]) -> Result<Vec<f64>> {
    if captions.is_empty() {
        return Err(Error::Validation("no captions to score".into()));
    }
    let raw = captions
        .par_iter()
        .map(|c| raw_score(query, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(softmax(&raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Round {
    Unfiltered,
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kept {
    pub object_id: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub round: Round,
    pub k: usize,
    /// Sorted by weight descending, then object id.
    pub kept: Vec<Kept>,
    pub prompt_prefix: String,
    pub token_count: usize,
}

impl SelectionResult {
    pub fn kept_ids(&self) -> BTreeSet<u32> {
        self.kept.iter().map(|k| k.object_id).collect()
    }
}

/// Prompt prefix: system message, kept captions, relations whose endpoints
/// are all kept, and the question.
pub fn assemble_prompt(info: &SceneInformation, kept: &BTreeSet<u32>, question: &str) -> String {
    let mut out = String::new();
    out.push_str(&info.system_message);
    out.push_str("\n\nObject Captions:\n");
    for c in info.captions.iter().filter(|c| kept.contains(&c.object_id)) {
        out.push_str(&format!("[{}-{}] {}\n", c.label, c.object_id, c.text));
    }
    out.push_str("\nSpatial Relationships:\n");
    for r in &info.relations {
        if kept.contains(&r.subject) && r.object.is_none_or(|o| kept.contains(&o)) {
            out.push_str(&r.text);
            out.push('\n');
        }
    }
    out.push_str("\nQuestion: ");
    out.push_str(question.trim());
    out.push('\n');
    out
}

fn check_pool(info: &SceneInformation, captions: &[EmbeddingMatrix]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for c in captions {
        let Owner::Caption(id) = c.owner else {
            return Err(Error::Validation(format!("{:?} matrix in the caption pool", c.owner)));
        };
        if info.caption(id).is_none() {
            return Err(Error::UnknownId(id));
        }
        if !seen.insert(id) {
            return Err(Error::Validation(format!("duplicate embeddings for caption {id}")));
        }
    }
    if let Some(c) = info.captions.iter().find(|c| !seen.contains(&c.object_id)) {
        return Err(Error::MissingCaption(c.object_id));
    }
    Ok(())
}

/// Top `k` of `pool` by raw score against `query`; weights are the softmax
/// over the whole pool.
fn rank_pool(query: &EmbeddingMatrix, pool: &[&EmbeddingMatrix], k: usize) -> Result<Vec<Kept>> {
    let raw = pool
        .par_iter()
        .map(|c| raw_score(query, c))
        .collect::<Result<Vec<_>>>()?;
    let weights = softmax(&raw);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let id = |i: usize| match pool[i].owner {
        Owner::Caption(id) => id,
        _ => u32::MAX,
    };
    order.sort_by(|&a, &b| {
        raw[b]
            .partial_cmp(&raw[a])
            .unwrap_or(Ordering::Equal)
            .then(id(a).cmp(&id(b)))
    });
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| Kept {
            object_id: id(i),
            weight: weights[i],
        })
        .collect())
}

pub fn select_top_k(
    info: &SceneInformation,
    question: &EmbeddingMatrix,
    captions: &[EmbeddingMatrix],
    k: usize,
    question_text: &str,
) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidK("k must be at least 1".into()));
    }
    check_pool(info, captions)?;
    let pool: Vec<&EmbeddingMatrix> = captions.iter().collect();
    let kept = rank_pool(question, &pool, k)?;
    Ok(finish(info, Round::One, k, kept, question_text))
}

/// Round one keeps `k1` by the question; round two re-scores the survivors
/// against `image` and keeps `k2`, with weights renormalized over the
/// survivors.
pub fn select_two_round(
    info: &SceneInformation,
    question: &EmbeddingMatrix,
    image: &EmbeddingMatrix,
    captions: &[EmbeddingMatrix],
    k1: usize,
    k2: usize,
    question_text: &str,
) -> Result<SelectionResult> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidK("k1 and k2 must be at least 1".into()));
    }
    if k2 > k1 {
        return Err(Error::InvalidK(format!("k2 ({k2}) exceeds k1 ({k1})")));
    }
    check_pool(info, captions)?;
    let all: Vec<&EmbeddingMatrix> = captions.iter().collect();
    let first: BTreeSet<u32> = rank_pool(question, &all, k1)?.iter().map(|k| k.object_id).collect();
    let survivors: Vec<&EmbeddingMatrix> = captions
        .iter()
        .filter(|c| matches!(c.owner, Owner::Caption(id) if first.contains(&id)))
        .collect();
    let kept = rank_pool(image, &survivors, k2)?;
    Ok(finish(info, Round::Two, k2, kept, question_text))
}

/// Every caption and relation, no filtering.
pub fn unfiltered(info: &SceneInformation, question_text: &str) -> SelectionResult {
    let n = info.captions.len();
    let kept = info
        .captions
        .iter()
        .map(|c| Kept {
            object_id: c.object_id,
            weight: 1.0 / n as f64,
        })
        .collect();
    finish(info, Round::Unfiltered, n, kept, question_text)
}

fn finish(info: &SceneInformation, round: Round, k: usize, kept: Vec<Kept>, question_text: &str) -> SelectionResult {
    let ids: BTreeSet<u32> = kept.iter().map(|k| k.object_id).collect();
    let prompt_prefix = assemble_prompt(info, &ids, question_text);
    SelectionResult {
        round,
        k,
        kept,
        token_count: token_count(&prompt_prefix),
        prompt_prefix,
    }
}

/// Precomputed token embeddings for one selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub dimension: usize,
    pub question: Vec<Vec<f64>>,
    pub captions: BTreeMap<u32, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<Vec<f64>>>,
}

pub struct Matrices {
    pub question: EmbeddingMatrix,
    pub captions: Vec<EmbeddingMatrix>,
    pub image: Option<EmbeddingMatrix>,
}

impl EmbeddingFile {
    /// Validated matrices; rows are renormalized.
    pub fn matrices(&self) -> Result<Matrices> {
        let check = |rows: &Vec<Vec<f64>>| match rows.iter().find(|r| r.len() != self.dimension) {
            Some(r) => Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: r.len(),
            }),
            None => Ok(()),
        };
        check(&self.question)?;
        for rows in self.captions.values() {
            check(rows)?;
        }
        if let Some(img) = &self.image {
            check(img)?;
        }
        Ok(Matrices {
            question: EmbeddingMatrix::from_raw(Owner::Question, self.question.clone())?,
            captions: self
                .captions
                .iter()
                .map(|(id, rows)| EmbeddingMatrix::from_raw(Owner::Caption(*id), rows.clone()))
                .collect::<Result<Vec<_>>>()?,
            image: self
                .image
                .clone()
                .map(|rows| EmbeddingMatrix::from_raw(Owner::Image, rows))
                .transpose()?,
        })
    }
}

/// Embed the question, every caption and, optionally, an image-side text
/// with `embedder`.
pub fn embed_inputs(
    info: &SceneInformation,
    question: &str,
    image_text: Option<&str>,
    embedder: &dyn Embedder,
) -> Result<EmbeddingFile> {
    let question = embedder.embed_tokens(question)?;
    let dimension = question.first().map(Vec::len).unwrap_or(0);
    let captions = info
        .captions
        .iter()
        .map(|c| Ok((c.object_id, embedder.embed_tokens(&c.text)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let image = image_text.map(|t| embedder.embed_tokens(t)).transpose()?;
    Ok(EmbeddingFile {
        dimension,
        question,
        captions,
        image,
    })
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingFile> {
    io::read_json(path)
}

pub fn save_embeddings(path: &Path, file: &EmbeddingFile) -> Result<()> {
    io::write_json(path, file)
}

pub fn save_selection(path: &Path, result: &SelectionResult) -> Result<()> {
    io::write_json(path, result)?;
    io::write_atomic(&path.with_extension("txt"), result.prompt_prefix.as_bytes())
}
