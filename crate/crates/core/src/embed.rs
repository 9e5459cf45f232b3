//! Token and sentence embedders.
//!
//! Real deployments plug in a text/image encoder service through
//! [`crate::provider::HttpEmbedder`]. [`HashingEmbedder`] is the hermetic
//! stand-in: every word maps to a fixed pseudo-random unit vector derived
//! from its hash, so identical words match exactly and different words are
//! nearly orthogonal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, ProviderError, Result};

pub trait Embedder: Send + Sync {
    /// One row per token.
    fn embed_tokens(&self, text: &str) -> std::result::Result<Vec<Vec<f64>>, ProviderError>;

    /// Sentence vector: the normalized mean of the token rows.
    fn embed_text(&self, text: &str) -> std::result::Result<Vec<f64>, ProviderError> {
        let rows = self.embed_tokens(text)?;
        let Some(first) = rows.first() else {
            return Err(ProviderError::Malformed(format!("no tokens in {text:?}")));
        };
        let mut mean = vec![0.0; first.len()];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        normalize(&mean).ok_or_else(|| ProviderError::Malformed("zero sentence embedding".into()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n > 1e-12 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Lowercased alphanumeric words.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "of", "to", "and", "in", "on", "at", "with", "it", "its", "this", "that",
];

#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self { dim: 64 }
    }
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn word_vector(&self, word: &str) -> Vec<f64> {
        // FNV-1a, stable across platforms and releases
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in word.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let raw: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&raw).unwrap_or_else(|| {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            e
        })
    }
}

impl Embedder for HashingEmbedder {
    fn embed_tokens(&self, text: &str) -> std::result::Result<Vec<Vec<f64>>, ProviderError> {
        let all = words(text);
        let content: Vec<&String> = all.iter().filter(|w| !STOPWORDS.contains(&w.as_str())).collect();
        let chosen: Vec<&String> = if content.is_empty() {
            all.iter().collect()
        } else {
            content
        };
        if chosen.is_empty() {
            return Err(ProviderError::Malformed(format!("no tokens in {text:?}")));
        }
        Ok(chosen.into_iter().map(|w| self.word_vector(w)).collect())
    }
}
