use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metrics::text::tokenize;

pub const SMOOTHING_EPS: f64 = 1e-9;

pub(crate) fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    out
}

/// Corpus BLEU-4 with uniform weights. Zero clipped n-gram counts are
/// replaced by a tiny epsilon; the brevity penalty uses the closest
/// reference length per candidate (shorter wins ties).
pub fn bleu4(candidates: &[String], references: &[Vec<String>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            preds: candidates.len(),
            gts: references.len(),
        });
    }
    if candidates.is_empty() || references.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);

    for (c, refs) in candidates.iter().zip(references) {
        let ct = tokenize(c);
        let rts: Vec<Vec<String>> = refs.iter().map(|r| tokenize(r)).collect();
        cand_len += ct.len();
        ref_len += rts
            .iter()
            .map(Vec::len)
            .min_by_key(|&l| ((l as i64 - ct.len() as i64).abs(), l))
            .unwrap_or(0);
        for n in 1..=4 {
            let cg = ngrams(&ct, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for rt in &rts {
                for (g, k) in ngrams(rt, n) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(k);
                }
            }
            for (g, k) in &cg {
                matched[n - 1] += (*k).min(max_ref.get(g).copied().unwrap_or(0));
            }
            total[n - 1] += ct.len().saturating_sub(n - 1);
        }
    }
    if cand_len == 0 {
        return Ok(0.0);
    }
    let log_p: f64 = (0..4)
        .map(|i| {
            let m = if matched[i] == 0 {
                SMOOTHING_EPS
            } else {
                matched[i] as f64
            };
            let t = total[i].max(1) as f64;
            (m / t).ln()
        })
        .sum::<f64>()
        / 4.0;
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok((bp * log_p.exp()).clamp(0.0, 1.0))
}
