//! CIDEr: TF-IDF weighted n-gram cosine similarity, n = 1..4, scaled by 10.
//!
//! Document frequencies are counted over the reference sets of the corpus
//! (one document per sample).

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::metrics::bleu::ngrams;
use crate::metrics::text::tokenize;

pub const MAX_N: usize = 4;

type Weights = Vec<HashMap<Vec<String>, f64>>;

fn tfidf(tokens: &[String], df: &HashMap<Vec<String>, usize>, log_n: f64) -> (Weights, Vec<f64>) {
    let mut vecs = Vec::with_capacity(MAX_N);
    let mut norms = Vec::with_capacity(MAX_N);
    for n in 1..=MAX_N {
        let mut v = HashMap::new();
        for (g, tf) in ngrams(tokens, n) {
            let d = df.get(g).copied().unwrap_or(0).max(1) as f64;
            v.insert(g.to_vec(), tf as f64 * (log_n - d.ln()));
        }
        norms.push(v.values().map(|x: &f64| x * x).sum::<f64>().sqrt());
        vecs.push(v);
    }
    (vecs, norms)
}

/// Per-sample CIDEr scores.
pub fn cider_scores(candidates: &[String], references: &[Vec<String>]) -> Result<Vec<f64>> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            preds: candidates.len(),
            gts: references.len(),
        });
    }
    if candidates.is_empty() || references.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let refs: Vec<Vec<Vec<String>>> = references
        .iter()
        .map(|rs| rs.iter().map(|r| tokenize(r)).collect())
        .collect();
    let mut df: HashMap<Vec<String>, usize> = HashMap::new();
    for rs in &refs {
        let mut seen: HashSet<Vec<String>> = HashSet::new();
        for r in rs {
            for n in 1..=MAX_N {
                for g in ngrams(r, n).keys() {
                    seen.insert(g.to_vec());
                }
            }
        }
        for g in seen {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    let log_n = (candidates.len() as f64).ln();

    Ok(candidates
        .iter()
        .zip(&refs)
        .map(|(c, rs)| {
            let (cv, cn) = tfidf(&tokenize(c), &df, log_n);
            let mut total = 0.0;
            for r in rs {
                let (rv, rn) = tfidf(r, &df, log_n);
                let mut per_n = 0.0;
                for n in 0..MAX_N {
                    if cn[n] == 0.0 || rn[n] == 0.0 {
                        continue;
                    }
                    let mut keys: Vec<&Vec<String>> = cv[n].keys().collect();
                    keys.sort();
                    let dot: f64 = keys
                        .into_iter()
                        .map(|g| cv[n][g] * rv[n].get(g).copied().unwrap_or(0.0))
                        .sum();
                    per_n += dot / (cn[n] * rn[n]);
                }
                total += per_n / MAX_N as f64;
            }
            10.0 * total / rs.len() as f64
        })
        .collect())
}

/// Corpus CIDEr: the mean of the per-sample scores.
pub fn cider(candidates: &[String], references: &[Vec<String>]) -> Result<f64> {
    let s = cider_scores(candidates, references)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}
