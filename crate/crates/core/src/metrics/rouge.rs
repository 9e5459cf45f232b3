use crate::error::{Error, Result};
use crate::metrics::text::tokenize;

pub const BETA: f64 = 1.2;

pub(crate) fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Sentence ROUGE-L F-measure using the best precision and the best recall
/// over the references.
pub fn rouge_l_sentence(candidate: &str, references: &[String]) -> f64 {
    let c = tokenize(candidate);
    if c.is_empty() {
        return 0.0;
    }
    let (mut p, mut r) = (0.0f64, 0.0f64);
    for reference in references {
        let rt = tokenize(reference);
        if rt.is_empty() {
            continue;
        }
        let l = lcs_len(&c, &rt) as f64;
        p = p.max(l / c.len() as f64);
        r = r.max(l / rt.len() as f64);
    }
    if p == 0.0 || r == 0.0 {
        return 0.0;
    }
    let b2 = BETA * BETA;
    (1.0 + b2) * p * r / (r + b2 * p)
}

/// Mean sentence ROUGE-L over the corpus.
pub fn rouge_l(candidates: &[String], references: &[Vec<String>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            preds: candidates.len(),
            gts: references.len(),
        });
    }
    if candidates.is_empty() || references.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let total: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| rouge_l_sentence(c, r))
        .sum();
    Ok(total / candidates.len() as f64)
}
